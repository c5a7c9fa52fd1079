use std::collections::BTreeMap;
use std::path::Path;

use omcache::om::{Config, DrivePulse, SystemParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Target,
    NearTerm,
}

impl Family {
    fn of(preset: &str) -> Option<Self> {
        match preset {
            "target" => Some(Family::Target),
            "near-term" | "near_term" | "nearterm" => Some(Family::NearTerm),
            _ => None,
        }
    }

    pub fn pick(self, target: f64, near_term: f64) -> f64 {
        match self {
            Family::Target => target,
            Family::NearTerm => near_term,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Target => "target",
            Family::NearTerm => "near-term",
        }
    }
}

/// Experiment-level setting adjustable with `--set name=value`.
#[derive(Debug, Clone, Copy)]
pub struct Knob {
    pub name: &'static str,
    /// Defaults for the target and near-term families.
    pub default: (f64, f64),
    pub description: &'static str,
}

pub const fn knob(name: &'static str, target: f64, near_term: f64, description: &'static str) -> Knob {
    Knob {
        name,
        default: (target, near_term),
        description,
    }
}

#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub t_b: Option<f64>,
    pub eta_d: Option<f64>,
    pub n_th: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Context {
    /// Preset name or configuration path as given.
    pub preset: String,
    pub family: Family,
    pub system: SystemParams<f64>,
    pub drives: Vec<(String, DrivePulse<f64>)>,
    pub seed: u64,
    pub flags: Flags,
    knobs: BTreeMap<String, f64>,
    spec: &'static [Knob],
}

impl Context {
    /// Loads the preset, then applies `--set` entries in order and finally
    /// `--Tb` and `--n-th`. Entries naming one of `knobs` set that knob;
    /// the rest must be system keys.
    pub fn resolve(
        preset: &str,
        sets: &[String],
        flags: Flags,
        seed: u64,
        spec: &'static [Knob],
        system_n_th: bool,
    ) -> Result<Self, CliError> {
        let (family, mut system, drives) = match Family::of(preset) {
            Some(f) => (f, SystemParams::preset(preset)?, Vec::new()),
            None => {
                let path = Path::new(preset);
                if !path.exists() {
                    return Err(CliError::Validation(format!(
                        "unknown preset `{preset}` (expected `target`, `near-term` or a path to an INI file)"
                    )));
                }
                let cfg = Config::<f64>::from_ini_file(path)?;
                let family = Family::of(&cfg.preset).ok_or_else(|| {
                    CliError::Validation(format!("unknown base preset `{}` in {preset}", cfg.preset))
                })?;
                (family, cfg.system, cfg.drives)
            }
        };
        let mut knobs = BTreeMap::new();
        for entry in sets {
            let (k, v) = entry
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("--set expects key=value, got `{entry}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let value: f64 = v
                .parse()
                .map_err(|_| CliError::Validation(format!("`{k}` expects a number, got `{v}`")))?;
            if spec.iter().any(|s| s.name == k) {
                knobs.insert(k.to_string(), value);
            } else if system.set(k, value).is_err() {
                let mut known: Vec<&str> = spec.iter().map(|s| s.name).collect();
                known.extend_from_slice(SystemParams::<f64>::KEYS);
                return Err(CliError::Validation(format!(
                    "unknown key `{k}`; known keys: {}",
                    known.join(", ")
                )));
            }
        }
        if let Some(t) = flags.t_b {
            if !(t > 0.0) {
                return Err(CliError::Validation(format!("--Tb must be > 0, got {t}")));
            }
            system = system.with_bath_temperature(t);
        }
        if let Some(n) = flags.n_th {
            if !(n >= 0.0) {
                return Err(CliError::Validation(format!("--n-th must be >= 0, got {n}")));
            }
            if system_n_th {
                system.n_th = n;
            }
        }
        if let Some(e) = flags.eta_d {
            if !(e > 0.0 && e <= 1.0) {
                return Err(CliError::Validation(format!("--eta-d must lie in (0, 1], got {e}")));
            }
        }
        if flags.n == Some(0) {
            return Err(CliError::Validation("--N must be >= 1".into()));
        }
        system.validate()?;
        Ok(Self {
            preset: preset.to_string(),
            family,
            system,
            drives,
            seed,
            flags,
            knobs,
            spec,
        })
    }

    pub fn knob(&self, name: &str) -> f64 {
        if let Some(v) = self.knobs.get(name) {
            return *v;
        }
        let k = self
            .spec
            .iter()
            .find(|k| k.name == name)
            .unwrap_or_else(|| panic!("knob `{name}` not declared"));
        self.family.pick(k.default.0, k.default.1)
    }

    /// Knob that must be a positive whole number.
    pub fn count(&self, name: &str) -> Result<usize, CliError> {
        let v = self.knob(name);
        if v >= 1.0 && v.fract() == 0.0 && v <= 1e12 {
            Ok(v as usize)
        } else {
            Err(CliError::Validation(format!("`{name}` must be a positive integer, got {v}")))
        }
    }

    pub fn resolved_knobs(&self) -> BTreeMap<&'static str, f64> {
        self.spec.iter().map(|k| (k.name, self.knob(k.name))).collect()
    }

    pub fn drive(&self, name: &str) -> Option<DrivePulse<f64>> {
        self.drives.iter().find(|(n, _)| n == name).map(|(_, d)| *d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KNOBS: &[Knob] = &[knob("points", 5.0, 9.0, "samples")];

    #[test]
    fn family_defaults() {
        let t = Context::resolve("target", &[], Flags::default(), 0, KNOBS, true).unwrap();
        let n = Context::resolve("near-term", &[], Flags::default(), 0, KNOBS, true).unwrap();
        assert_eq!((t.knob("points"), n.knob("points")), (5.0, 9.0));
    }

    #[test]
    fn rejects_bad_input() {
        let bad = |sets: &[&str]| {
            let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
            Context::resolve("target", &sets, Flags::default(), 0, KNOBS, true).unwrap_err()
        };
        assert!(matches!(bad(&["points"]), CliError::Validation(_)));
        assert!(matches!(bad(&["points=abc"]), CliError::Validation(_)));
        assert!(matches!(bad(&["nope=1"]), CliError::Validation(m) if m.contains("points")));
        let ctx = Context::resolve("target", &["points=2.5".into()], Flags::default(), 0, KNOBS, true).unwrap();
        assert!(ctx.count("points").is_err());
    }

    #[test]
    fn bath_flag() {
        let flags = Flags {
            t_b: Some(0.04),
            ..Flags::default()
        };
        let ctx = Context::resolve("target", &[], flags, 0, KNOBS, true).unwrap();
        assert!(ctx.system.n_th < 1e-5);
    }
}
