use ini::Ini;
use serde::Serialize;

use super::pulse::{Carrier, DrivePulse, PulseShape};
use crate::constants::{bath_temperature, bose_occupation};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bath temperature used by the bundled presets, K.
pub const PRESET_BATH_TEMPERATURE: f64 = 2.0;

/// System parameters. All rates are angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams<T> {
    pub omega0: T,
    #[serde(rename = "Omega")]
    pub big_omega: T,
    pub kappa_int: T,
    pub kappa_ex: T,
    #[serde(rename = "Gamma")]
    pub gamma: T,
    pub g0: T,
    pub gh: T,
    pub n_th: T,
}

fn tau<T: Real>(hz: f64) -> T {
    T::lit(std::f64::consts::TAU * hz)
}

impl<T: Real> SystemParams<T> {
    /// Target parameter set at a 2 K bath.
    pub fn target() -> Self {
        Self::from_table(193e12, 10e9, 1e6, 1e9, 10.0, 100e3)
    }

    /// Near-term parameter set at a 2 K bath.
    pub fn near_term() -> Self {
        Self::from_table(193e12, 13e9, 1e6, 50e6, 50.0, 1e3)
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "target" => Ok(Self::target()),
            "near-term" | "near_term" | "nearterm" => Ok(Self::near_term()),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected `target` or `near-term`)"
            ))),
        }
    }

    fn from_table(f0: f64, fm: f64, k_int: f64, k: f64, gamma: f64, g0: f64) -> Self {
        let big_omega = std::f64::consts::TAU * fm;
        Self {
            omega0: tau(f0),
            big_omega: T::lit(big_omega),
            kappa_int: tau(k_int),
            kappa_ex: tau(k - k_int),
            gamma: tau(gamma),
            g0: tau(g0),
            gh: tau(g0),
            n_th: T::lit(bose_occupation(big_omega, PRESET_BATH_TEMPERATURE)),
        }
    }

    pub fn kappa(&self) -> T {
        self.kappa_int + self.kappa_ex
    }

    /// Extraction efficiency κ_ex/κ.
    pub fn eta_ex(&self) -> T {
        self.kappa_ex / self.kappa()
    }

    /// Single-photon cooperativity 4g₀²/(κΓ).
    pub fn c0(&self) -> T {
        T::lit(4.0) * self.g0 * self.g0 / (self.kappa() * self.gamma)
    }

    pub fn with_bath_temperature(mut self, t_b: T) -> Self {
        self.n_th = T::lit(bose_occupation(self.big_omega.to_f64_lossy(), t_b.to_f64_lossy()));
        self
    }

    pub fn bath_temperature(&self) -> T {
        T::lit(bath_temperature(
            self.big_omega.to_f64_lossy(),
            self.n_th.to_f64_lossy(),
        ))
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("omega0", self.omega0),
            ("Omega", self.big_omega),
            ("kappa_int", self.kappa_int),
            ("kappa_ex", self.kappa_ex),
            ("Gamma", self.gamma),
            ("g0", self.g0),
            ("gh", self.gh),
        ];
        for (n, v) in named {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{n} must be > 0, got {v}")));
            }
        }
        if !(self.n_th >= T::zero()) {
            return Err(Error::InvalidParameter(format!("n_th must be >= 0, got {}", self.n_th)));
        }
        if self.big_omega <= self.kappa() {
            return Err(Error::InvalidParameter(format!(
                "sideband resolution requires Omega > kappa ({} <= {})",
                self.big_omega,
                self.kappa()
            )));
        }
        if self.gamma >= self.kappa() {
            return Err(Error::InvalidParameter(
                "acoustic linewidth must be far below the optical linewidth".into(),
            ));
        }
        Ok(())
    }

    /// Applies one `key = value` setting. Frequencies are given over 2π in Hz.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let v = T::lit(value);
        let w = tau::<T>(value);
        match key {
            "omega0_over_2pi_hz" => self.omega0 = w,
            "Omega_over_2pi_hz" | "omega_m_over_2pi_hz" => self.big_omega = w,
            "kappa_int_over_2pi_hz" => self.kappa_int = w,
            "kappa_ex_over_2pi_hz" => self.kappa_ex = w,
            // total linewidth keeps kappa_int and adjusts kappa_ex
            "kappa_over_2pi_hz" => self.kappa_ex = w - self.kappa_int,
            "Gamma_over_2pi_hz" | "gamma_over_2pi_hz" => self.gamma = w,
            "g0_over_2pi_hz" => self.g0 = w,
            "gh_over_2pi_hz" => self.gh = w,
            "n_th" => self.n_th = v,
            "bath_temperature_k" | "Tb" | "T_b" => *self = self.with_bath_temperature(v),
            other => {
                return Err(Error::Config(format!("unknown system key `{other}`")));
            }
        }
        Ok(())
    }

    /// Keys accepted by [`SystemParams::set`].
    pub const KEYS: &'static [&'static str] = &[
        "omega0_over_2pi_hz",
        "Omega_over_2pi_hz",
        "kappa_int_over_2pi_hz",
        "kappa_ex_over_2pi_hz",
        "kappa_over_2pi_hz",
        "Gamma_over_2pi_hz",
        "g0_over_2pi_hz",
        "gh_over_2pi_hz",
        "n_th",
        "bath_temperature_k",
    ];
}

/// Parsed configuration file: system parameters plus named drives.
#[derive(Debug, Clone)]
pub struct Config<T> {
    /// Name of the preset the file starts from.
    pub preset: String,
    pub system: SystemParams<T>,
    pub drives: Vec<(String, DrivePulse<T>)>,
}

impl<T: Real> Config<T> {
    /// Parses INI text. A `preset` key in `[system]` selects the base set,
    /// which other keys then override.
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let sys_sec = ini.section(Some("system"));
        let base = sys_sec
            .and_then(|s| s.get("preset"))
            .unwrap_or("target")
            .to_string();
        let mut system = SystemParams::preset(&base)?;
        if let Some(sec) = sys_sec {
            for (k, v) in sec.iter() {
                if k == "preset" {
                    continue;
                }
                system.set(k, parse_num(k, v)?)?;
            }
        }
        system.validate()?;
        let mut drives = Vec::new();
        for (name, sec) in ini.iter() {
            let Some(name) = name else { continue };
            let Some(drive) = name.strip_prefix("drives.") else {
                if name != "system" {
                    return Err(Error::Config(format!("unknown section [{name}]")));
                }
                continue;
            };
            let mut pulse = DrivePulse::constant(T::zero(), T::lit(1e-9), Carrier::Red);
            for (k, v) in sec.iter() {
                match k {
                    "power_w" => pulse.power = T::lit(parse_num(k, v)?),
                    "power_mw" => pulse.power = T::lit(parse_num(k, v)? * 1e-3),
                    "duration_s" => pulse.duration = T::lit(parse_num(k, v)?),
                    "duration_ns" => pulse.duration = T::lit(parse_num(k, v)? * 1e-9),
                    "shape" => {
                        pulse.shape = match v {
                            "tanh" => PulseShape::Tanh,
                            "constant" => PulseShape::Constant,
                            _ => return Err(Error::Config(format!("unknown shape `{v}`"))),
                        }
                    }
                    "carrier" | "role" => {
                        pulse.carrier = match v {
                            "red" => Carrier::Red,
                            "blue" => Carrier::Blue,
                            _ => return Err(Error::Config(format!("unknown carrier `{v}`"))),
                        }
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "unknown key `{other}` in [drives.{drive}]"
                        )))
                    }
                }
            }
            pulse.validate()?;
            drives.push((drive.to_string(), pulse));
        }
        Ok(Self {
            preset: base,
            system,
            drives,
        })
    }

    pub fn from_ini_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_ini_str(&text)
    }

    pub fn drive(&self, name: &str) -> Option<&DrivePulse<T>> {
        self.drives.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{v}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_table() {
        let t = SystemParams::<f64>::target();
        let tp = std::f64::consts::TAU;
        assert!((t.kappa() / tp - 1e9).abs() < 1e-3);
        assert!((t.kappa_int / tp - 1e6).abs() < 1e-9);
        assert!((t.c0() - 4.0).abs() < 1e-12);
        assert!((t.n_th - 3.687).abs() < 1e-3);
        t.validate().unwrap();
        let n = SystemParams::<f64>::near_term();
        assert!((n.kappa() / tp - 50e6).abs() < 1e-6);
        assert!((n.n_th - 2.73).abs() < 1e-2);
        n.validate().unwrap();
    }

    #[test]
    fn ini_overrides() {
        let cfg = Config::<f64>::from_ini_str(
            "[system]\npreset = near-term\nkappa_ex_over_2pi_hz = 99e6\n\n[drives.cool]\npower_mw = 1\nduration_ns = 96\nshape = tanh\n",
        )
        .unwrap();
        let tp = std::f64::consts::TAU;
        assert!((cfg.system.kappa_ex / tp - 99e6).abs() < 1e-6);
        let d = cfg.drive("cool").unwrap();
        assert!((d.power - 1e-3).abs() < 1e-15);
        assert_eq!(d.shape, PulseShape::Tanh);
    }

    #[test]
    fn ini_rejects_unknown_key() {
        assert!(Config::<f64>::from_ini_str("[system]\nkapa = 1\n").is_err());
        assert!(Config::<f64>::from_ini_str("[system]\npreset = nope\n").is_err());
    }

    #[test]
    fn f32_presets() {
        let t = SystemParams::<f32>::target();
        assert!((t.c0() - 4.0).abs() < 1e-4);
    }
}
