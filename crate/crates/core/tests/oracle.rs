//! Closed forms against brute-force master-equation evolution.

mod common;

use common::*;
use omcache::om::SystemParams;

#[test]
fn squeezing_matches_closed_form() {
    for ratio in [40.0, 60.0] {
        for s in squeeze_comparison(ratio) {
            assert!(rel(s.closed, s.mean) < 1e-3, "g/κ=1/{ratio} gt={}: {} vs {}", s.gt, s.closed, s.mean);
            let geometric = s.mean * (s.mean + 1.0);
            assert!(rel(s.variance, geometric) < 1e-3, "variance {} vs {geometric}", s.variance);
        }
    }
}

#[test]
fn swapping_matches_closed_form() {
    for ratio in [40.0, 10.0, 5.0] {
        for n0 in [1, 2] {
            for s in swap_comparison(ratio, n0) {
                let ((cb, ca), (ob, oa)) = (s.closed, s.oracle);
                assert!(rel(cb, ob) < 1e-3, "phonons g/κ=1/{ratio} gt={}: {cb} vs {ob}", s.gt);
                if oa > 1e-12 {
                    assert!(rel(ca, oa) < 1e-3, "photons g/κ=1/{ratio} gt={}: {ca} vs {oa}", s.gt);
                }
            }
        }
    }
}

#[test]
fn bayes_fidelity_matches_herald_simulation() {
    let p = SystemParams::<f64>::target();
    let sims: Vec<HeraldSim> = herald_p1_grid().into_iter().map(|x| herald_sim(&p, x)).collect();
    for eta_d in [0.90, 0.98] {
        let rows = herald_fidelities(&p, &sims, eta_d);
        for &(p1, f, fo) in &rows {
            assert!(p1 > 0.0);
            assert!((f - fo).abs() < 5e-3, "η_d={eta_d} p1={p1:.3e}: {f} vs {fo}");
        }
        let closed: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let oracle: Vec<f64> = rows.iter().map(|r| r.2).collect();
        assert!(has_interior_peak(&closed), "{closed:?}");
        assert!(has_interior_peak(&oracle), "{oracle:?}");
    }
}
