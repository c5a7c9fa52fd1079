//! Physical constants (SI).

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Bose–Einstein occupation of a mode at angular frequency `omega` (rad/s)
/// and temperature `t_b` (K).
pub fn bose_occupation(omega: f64, t_b: f64) -> f64 {
    if t_b <= 0.0 {
        return 0.0;
    }
    1.0 / ((HBAR * omega / (K_B * t_b)).exp_m1())
}

/// Inverse of [`bose_occupation`]: the bath temperature giving `n_th`.
pub fn bath_temperature(omega: f64, n_th: f64) -> f64 {
    if n_th <= 0.0 {
        return 0.0;
    }
    HBAR * omega / (K_B * (1.0 / n_th).ln_1p())
}
