//! Scalar special functions.
//!
//! `erfc` comes from `libm`; the regularized incomplete beta function and
//! `ln_gamma` from `statrs`. The normal quantile, the exponential integral
//! and the Student-t tail are built on top of those.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{domain, Result};

/// Constants shared by the closed-form expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathConstants {
    pub euler_gamma: f64,
    pub pi: f64,
}

pub const CONSTANTS: MathConstants = MathConstants {
    euler_gamma: EULER_GAMMA,
    pi: PI,
};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x), accurate in relative terms in the lower tail.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// 1 − Φ(x) without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Φ⁻¹(p) for p in (0, 1).
///
/// Starts from the Abramowitz–Stegun rational guess and polishes with
/// Halley steps on the lower tail, falling back to bisection whenever a
/// step leaves the current bracket.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("normal quantile needs p in (0,1), got {p}"));
    }
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let t = (-2.0 * p.ln()).sqrt();
    let num = 2.515517 + t * (0.802853 + t * 0.010328);
    let den = 1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308));
    let mut x = -(t - num / den);

    // Newton on ln Φ(x) − ln p. ln Φ is concave, so after one step the
    // iterates approach the root monotonically from below.
    let target = p.ln();
    for _ in 0..100 {
        let cdf = std_normal_cdf(x);
        let step = if cdf > 0.0 {
            (cdf.ln() - target) * cdf / std_normal_pdf(x)
        } else {
            -1.0
        };
        let next = x - step;
        if !next.is_finite() {
            break;
        }
        let done = (next - x).abs() <= 1e-15 * (1.0 + x.abs());
        x = next;
        if done {
            break;
        }
    }
    x
}

/// Exponential integral E1(x) for x > 0.
///
/// Power series on (0, 1], continued fraction beyond.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("E1 needs x > 0, got {x}"));
    }
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(e1_scaled_cf(x) * (-x).exp())
    }
}

/// e^x E1(x), finite for large x where E1 itself underflows.
pub fn scaled_exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("E1 needs x > 0, got {x}"));
    }
    if x <= 1.0 {
        Ok(e1_series(x) * x.exp())
    } else {
        Ok(e1_scaled_cf(x))
    }
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let add = term / kf;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

// Modified Lentz evaluation of e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))).
fn e1_scaled_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Upper tail P(T > |t|) of Student's t with `df` degrees of freedom.
pub fn student_t_tail(t: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return domain("Student-t needs df >= 1");
    }
    let nu = df as f64;
    let x = nu / (nu + t * t);
    Ok(0.5 * statrs::function::beta::beta_reg(0.5 * nu, 0.5, x))
}

pub fn student_t_cdf(t: f64, df: u32) -> Result<f64> {
    let tail = student_t_tail(t, df)?;
    Ok(if t > 0.0 { 1.0 - tail } else { tail })
}

pub(crate) const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
