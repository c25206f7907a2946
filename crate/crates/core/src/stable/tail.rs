use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Largest admissible index of stability. The series representation mixes
/// too slowly close to the Gaussian case for unbiased desk-scale runs.
pub const ALPHA_MAX: f64 = 1.95;

pub fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if alpha >= ALPHA_MAX {
        return Err(Error::domain(format!("alpha = {alpha} is too close to 2 (limit {ALPHA_MAX})")));
    }
    Ok(())
}

/// `C_α = (∫_0^∞ x^{-α} sin x dx)^{-1}`.
pub fn stable_tail_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    // The closed form is 0/0 at α = 1; near it use the first-order expansion
    // around 2/π, whose error is O((α-1)^2).
    let e = alpha - 1.0;
    if e.abs() < 1e-6 {
        return Ok(2.0 / PI * (1.0 - EULER_GAMMA * e));
    }
    Ok((1.0 - alpha) / (libm::tgamma(2.0 - alpha) * (PI * alpha / 2.0).cos()))
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// One standard SαS draw (characteristic function `exp(-|θ|^α)`) by the
/// Chambers–Mallows–Stuck transform.
pub fn sample_standard_sas(alpha: f64, rng: &mut impl Rng) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(cms(alpha, rng))
}

pub(crate) fn cms(alpha: f64, rng: &mut impl Rng) -> f64 {
    let v = PI * (rng.gen::<f64>() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    let v = v.clamp(-FRAC_PI_2 + 1e-300, FRAC_PI_2 - 1e-300);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}
