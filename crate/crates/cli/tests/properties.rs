use std::f64::consts::TAU;

use proptest::prelude::*;

use omcache_cli::context::{knob, Context, Flags, Knob};
use omcache_cli::table::{col, Cell, Table};

const KNOBS: &[Knob] = &[knob("points", 5.0, 7.0, "sample count")];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn csv_numbers_round_trip(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..20)) {
        let mut t = Table::new(vec![col("x", "value")]);
        for &x in &xs {
            t.push(vec![Cell::Num(x)]);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        t.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        prop_assert_eq!(back, xs);
    }

    #[test]
    fn set_overrides_reach_the_system(n_th in 0.0f64..10.0, g0 in 1.0f64..1e7, points in 1u32..1000) {
        let sets = vec![
            format!("n_th={n_th}"),
            format!("g0_over_2pi_hz={g0}"),
            format!("points={points}"),
        ];
        let ctx = Context::resolve("near-term", &sets, Flags::default(), 0, KNOBS, true).unwrap();
        prop_assert_eq!(ctx.system.n_th, n_th);
        prop_assert!((ctx.system.g0 - TAU * g0).abs() <= 1e-12 * TAU * g0);
        prop_assert_eq!(ctx.count("points").unwrap(), points as usize);
    }

    #[test]
    fn flags_apply_after_sets(n_set in 0.0f64..5.0, n_flag in 0.0f64..5.0) {
        let flags = Flags { n_th: Some(n_flag), ..Flags::default() };
        let ctx = Context::resolve("target", &[format!("n_th={n_set}")], flags, 0, KNOBS, true).unwrap();
        prop_assert_eq!(ctx.system.n_th, n_flag);
        prop_assert_eq!(ctx.knob("points"), 5.0);
    }
}
