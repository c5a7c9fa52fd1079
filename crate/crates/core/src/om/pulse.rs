use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Constant,
    Tanh,
}

/// Which pump drives the interaction: red activates the beam splitter,
/// blue the two-mode squeezer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Red,
    Blue,
}

/// Ramp time constant as a fraction of the pulse duration.
pub const TANH_RAMP_FRACTION: f64 = 0.05;
/// Lead-in and tail of a tanh pulse, in ramp time constants.
pub const TANH_PADDING: f64 = 3.0;

/// Classical pump pulse. For tanh pulses `duration` is the spacing between
/// the half-power points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrivePulse<T> {
    /// W
    pub power: T,
    /// s
    pub duration: T,
    pub shape: PulseShape,
    pub carrier: Carrier,
}

impl<T: Real> DrivePulse<T> {
    pub fn constant(power: T, duration: T, carrier: Carrier) -> Self {
        Self {
            power,
            duration,
            shape: PulseShape::Constant,
            carrier,
        }
    }

    pub fn tanh(power: T, duration: T, carrier: Carrier) -> Self {
        Self {
            power,
            duration,
            shape: PulseShape::Tanh,
            carrier,
        }
    }

    pub fn with_duration(mut self, duration: T) -> Self {
        self.duration = duration;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power >= T::zero()) {
            return Err(Error::InvalidParameter(format!("power must be >= 0, got {}", self.power)));
        }
        if !(self.duration > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "duration must be > 0, got {}",
                self.duration
            )));
        }
        Ok(())
    }

    pub fn ramp(&self) -> T {
        T::lit(TANH_RAMP_FRACTION) * self.duration
    }

    /// Time from the start of the integration window to the first half-power
    /// point.
    pub fn lead_in(&self) -> T {
        match self.shape {
            PulseShape::Constant => T::zero(),
            PulseShape::Tanh => T::lit(TANH_PADDING) * self.ramp(),
        }
    }

    /// Length of the integration window covering the whole pulse.
    pub fn span(&self) -> T {
        self.duration + T::lit(2.0) * self.lead_in()
    }

    /// Normalized power envelope s(t) ∈ [0, 1], with t measured from the
    /// start of the integration window.
    pub fn envelope(&self, t: T) -> T {
        match self.shape {
            PulseShape::Constant => {
                if t >= T::zero() && t <= self.duration {
                    T::one()
                } else {
                    T::zero()
                }
            }
            PulseShape::Tanh => {
                let tau = self.ramp();
                let x = t - self.lead_in();
                let q = T::lit(0.25);
                q * (T::one() + (x / tau).tanh()) * (T::one() + ((self.duration - x) / tau).tanh())
            }
        }
    }

    pub fn power_at(&self, t: T) -> T {
        self.power * self.envelope(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_half_power_points() {
        let p = DrivePulse::<f64>::tanh(1e-3, 10e-9, Carrier::Red);
        let t0 = p.lead_in();
        assert!((p.envelope(t0) - 0.5).abs() < 1e-6);
        assert!((p.envelope(t0 + 10e-9) - 0.5).abs() < 1e-6);
        assert!((p.envelope(t0 + 5e-9) - 1.0).abs() < 1e-6);
        assert!(p.envelope(0.0) < 3e-3);
        assert!((p.span() - 13e-9).abs() < 1e-18);
    }

    #[test]
    fn constant_window() {
        let p = DrivePulse::constant(1.0f64, 2.0, Carrier::Blue);
        assert_eq!(p.envelope(1.0), 1.0);
        assert_eq!(p.envelope(2.5), 0.0);
        assert!(DrivePulse::constant(-1.0f64, 2.0, Carrier::Blue).validate().is_err());
    }
}
