//! One-observation posterior of the shrinkage weight κ, by quadrature.
//!
//! With y | κ ~ N(0, 1/κ) the posterior kernel is
//! (1−κ)^{-1/2} e^{-κy²/2} times a prior factor: τ/(1+κ(τ²−1)) for the
//! horseshoe and τ ln{(1−κ)/(κτ²)}/(1−κ(τ²+1)) for the horseshoe+.
//!
//! Integrals over κ use κ = e^{-t} on (0, ½] and κ = 1 − e^{-2w} on [½, 1),
//! which flattens both endpoint singularities. The marginal of y and its
//! derivatives are computed separately over s = ln λ², so the two routes to
//! the posterior mean share no discretization.

use std::f64::consts::LN_2;

use crate::error::{domain, Error, Result};
use crate::priors::{kappa_kernel, kappa_prior_normalizer, lambda_density, Family, PriorSpec};
use crate::quadrature::Integrator;

const T_MAX: f64 = 80.0;
const W_MAX: f64 = 45.0;

fn kappa_integrator() -> Integrator {
    Integrator {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_panels: 4000,
    }
}

/// Posterior of κ for a single observation y at fixed τ.
#[derive(Debug, Clone, Copy)]
pub struct KappaPosterior {
    pub y: f64,
    pub spec: PriorSpec,
    norm: f64,
}

/// Which tail of the posterior to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    Below(f64),
    Above(f64),
}

impl KappaPosterior {
    pub fn new(y: f64, spec: PriorSpec) -> Result<Self> {
        spec.check()?;
        if !y.is_finite() {
            return Err(Error::NonFinite(format!("observation {y}")));
        }
        let mut kp = Self { y, spec, norm: 1.0 };
        let norm = kp.integrate_range(0.0, 1.0, |_, _| 1.0)?;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonFinite(format!("normalizing constant {norm}")));
        }
        kp.norm = norm;
        Ok(kp)
    }

    /// ∫₀¹ of the unnormalized kernel.
    pub fn normalizing_constant(&self) -> f64 {
        self.norm
    }

    fn kernel(&self, k: f64, omk: f64) -> f64 {
        kappa_kernel(self.spec.family, self.spec.tau, k, omk)
            * k.sqrt()
            * (-0.5 * k * self.y * self.y).exp()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let t2 = self.spec.tau * self.spec.tau;
        let mut pts = vec![1.0 / (1.0 + t2), 0.5];
        let y2 = self.y * self.y;
        if y2 > 0.0 {
            pts.push((1.0 / y2).min(0.5));
            pts.push((10.0 / y2).min(0.5));
        }
        pts
    }

    // ∫_lo^hi g(κ, 1−κ) kernel(κ) dκ over the two substituted pieces.
    fn integrate_range<G: Fn(f64, f64) -> f64>(&self, lo: f64, hi: f64, g: G) -> Result<f64> {
        let quad = kappa_integrator();
        let bps = self.breakpoints();
        let mut total = 0.0;

        let a_hi = hi.min(0.5);
        if lo < a_hi {
            let t_lo = -a_hi.ln();
            let t_hi = if lo > 0.0 { -lo.ln() } else { T_MAX };
            let mut pts = vec![t_lo];
            pts.extend(bps.iter().filter(|&&b| b > 0.0).map(|b| -b.ln()).filter(|&t| t > t_lo && t < t_hi));
            pts.push(t_hi);
            pts.sort_by(f64::total_cmp);
            let f = |t: f64| {
                let k = (-t).exp();
                let omk = -(-t).exp_m1();
                g(k, omk) * self.kernel(k, omk) * k
            };
            total += quad.integrate_points(f, &pts)?.value;
        }

        let b_lo = lo.max(0.5);
        if b_lo < hi {
            let w_lo = -0.5 * (1.0 - b_lo).ln();
            let w_hi = if hi < 1.0 { -0.5 * (1.0 - hi).ln() } else { W_MAX };
            let mut pts = vec![w_lo];
            pts.extend(
                bps.iter()
                    .filter(|&&b| b < 1.0)
                    .map(|b| -0.5 * (1.0 - b).ln())
                    .filter(|&w| w > w_lo && w < w_hi),
            );
            pts.push(w_hi);
            pts.sort_by(f64::total_cmp);
            let f = |w: f64| {
                let omk = (-2.0 * w).exp();
                let k = -(-2.0 * w).exp_m1();
                g(k, omk) * self.kernel(k, omk) * 2.0 * omk
            };
            total += quad.integrate_points(f, &pts)?.value;
        }
        Ok(total)
    }

    /// Normalized posterior density at κ.
    pub fn density(&self, kappa: f64) -> Result<f64> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return domain(format!("kappa must lie in (0,1), got {kappa}"));
        }
        Ok(self.kernel(kappa, 1.0 - kappa) / self.norm)
    }

    /// Posterior expectation of g(κ, 1−κ).
    pub fn expectation<G: Fn(f64, f64) -> f64>(&self, g: G) -> Result<f64> {
        Ok(self.integrate_range(0.0, 1.0, g)? / self.norm)
    }

    /// E(κ | y, τ).
    pub fn mean_kappa(&self) -> Result<f64> {
        self.expectation(|k, _| k)
    }

    /// 1 − E(κ | y, τ), computed without cancellation.
    pub fn pseudo_inclusion(&self) -> Result<f64> {
        self.expectation(|_, omk| omk)
    }

    /// E(θ | y, τ) = (1 − E κ) y.
    pub fn posterior_mean_theta(&self) -> Result<f64> {
        Ok(self.pseudo_inclusion()? * self.y)
    }

    pub fn tail_probability(&self, tail: Tail) -> Result<f64> {
        let (lo, hi) = match tail {
            Tail::Below(e) => (0.0, e),
            Tail::Above(e) => (e, 1.0),
        };
        let cut = match tail {
            Tail::Below(e) | Tail::Above(e) => e,
        };
        if !(cut > 0.0 && cut < 1.0) {
            return domain(format!("tail threshold must lie in (0,1), got {tail:?}"));
        }
        Ok(self.integrate_range(lo, hi, |_, _| 1.0)? / self.norm)
    }
}

/// |y| at which 1 − E(κ | y, τ) crosses ½.
///
/// The pseudo-inclusion probability is increasing in |y|, so the half
/// threshold rule reduces to |y| > this value.
pub fn half_threshold(spec: PriorSpec) -> Result<f64> {
    let omega = |y: f64| KappaPosterior::new(y, spec)?.pseudo_inclusion();
    if omega(0.0)? > 0.5 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while omega(hi)? <= 0.5 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NonFinite("half threshold diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if omega(mid)? > 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Parameters of the two concentration inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConcentrationParams {
    /// Bound on P(κ < ε | y, τ).
    Left { epsilon: f64 },
    /// Bound on P(κ > η | y, τ).
    Right { eta: f64, delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationBound {
    pub params: ConcentrationParams,
    pub bound_value: f64,
}

/// C(η, δ) = {√(1−η) + artanh √(1−η)} / {(1−ηδ)^{-1/2} − 1}.
pub fn right_tail_constant(eta: f64, delta: f64) -> f64 {
    let r = (1.0 - eta).sqrt();
    (r + r.atanh()) / (1.0 / (1.0 - eta * delta).sqrt() - 1.0)
}

/// Analytic right-hand side of the concentration inequalities.
pub fn concentration_bound(y: f64, spec: PriorSpec, params: ConcentrationParams) -> Result<ConcentrationBound> {
    spec.check()?;
    let t2 = spec.tau * spec.tau;
    let bound_value = match params {
        ConcentrationParams::Left { epsilon } => {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return domain(format!("epsilon must lie in (0,1), got {epsilon}"));
            }
            (0.5 * y * y).exp() * t2 * epsilon / (1.0 - epsilon).powi(2)
        }
        ConcentrationParams::Right { eta, delta } => {
            if !(eta > 0.0 && eta < 1.0) {
                return domain(format!("eta must lie in (0,1), got {eta}"));
            }
            if !(delta > 0.0 && delta < 1.0 / (eta * (1.0 + t2))) || delta >= 1.0 {
                return domain(format!("delta must lie in (0, 1/(eta(1+tau^2))) and below 1, got {delta}"));
            }
            (-eta * (1.0 - delta) * 0.5 * y * y).exp() / t2 * right_tail_constant(eta, delta)
        }
    };
    Ok(ConcentrationBound { params, bound_value })
}

/// log m(y) and the normalized derivatives m′/m, m″/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalDerivatives {
    pub log_m: f64,
    pub d1: f64,
    pub d2: f64,
}

impl MarginalDerivatives {
    /// d/dy log m, the posterior-mean shift.
    pub fn first(&self) -> f64 {
        self.d1
    }

    /// d²/dy² log m.
    pub fn second(&self) -> f64 {
        self.d2 - self.d1 * self.d1
    }
}

// ln p(s) for s = ln λ², where λ is the actual prior scale.
fn log_scale_density(spec: PriorSpec, s: f64) -> f64 {
    let lambda = (0.5 * s).exp();
    match lambda_density(spec, lambda) {
        Ok(p) if p > 0.0 => p.ln() + 0.5 * s - LN_2,
        _ => f64::NEG_INFINITY,
    }
}

/// Marginal density of y and its first two log-derivatives.
///
/// Differentiation happens under the integral: m′ carries −κy and m″
/// carries κ²y² − κ with κ = 1/(1+λ²). The integrand is rescaled by its
/// peak so that log m stays finite far into the tails.
pub fn marginal_derivatives(y: f64, spec: PriorSpec) -> Result<MarginalDerivatives> {
    spec.check()?;
    if !y.is_finite() {
        return Err(Error::NonFinite(format!("observation {y}")));
    }
    let y2 = y * y;
    let s_tau = 2.0 * spec.tau.ln();
    let s_y = if y2 > 1.0 { y2.ln() } else { 0.0 };
    let lo = s_tau.min(s_y) - 100.0;
    let hi = s_tau.max(s_y) + 80.0;

    let log_f = |s: f64| {
        let kappa = 1.0 / (1.0 + s.exp());
        -0.5 * (2.0 * std::f64::consts::PI).ln() + 0.5 * kappa.ln() - 0.5 * kappa * y2 + log_scale_density(spec, s)
    };
    let peak = (0..=400)
        .map(|i| log_f(lo + (hi - lo) * i as f64 / 400.0))
        .chain([log_f(s_tau), log_f(s_y)])
        .fold(f64::NEG_INFINITY, f64::max);

    let mut pts = vec![lo, s_tau, s_y, hi];
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let quad = Integrator {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_panels: 4000,
    };
    let integrate = |w: &dyn Fn(f64) -> f64| -> Result<f64> {
        let f = |s: f64| (log_f(s) - peak).exp() * w(1.0 / (1.0 + s.exp()));
        Ok(quad.integrate_points(f, &pts)?.value)
    };
    let m0 = integrate(&|_| 1.0)?;
    let m1 = integrate(&|k| -k * y)?;
    let m2 = integrate(&|k| k * k * y2 - k)?;
    Ok(MarginalDerivatives {
        log_m: m0.ln() + peak,
        d1: m1 / m0,
        d2: m2 / m0,
    })
}

/// m(y | τ).
pub fn marginal_data_density(y: f64, spec: PriorSpec) -> Result<f64> {
    Ok(marginal_derivatives(y, spec)?.log_m.exp())
}

/// m(y | τ) from the κ-posterior normalizing constant.
///
/// m(y) = ∫ √(κ/2π) e^{-κy²/2} p(κ) dκ, which is the same κ-space kernel
/// divided by √(2π) and the prior's normalizer.
pub fn marginal_data_density_kappa(y: f64, spec: PriorSpec) -> Result<f64> {
    let kp = KappaPosterior::new(y, spec)?;
    Ok(kp.normalizing_constant() / (crate::specialfn::SQRT_2PI * kappa_prior_normalizer(spec.family)))
}

/// Posterior mean, variance and squared error of θ from the marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TweedieMoments {
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
}

impl TweedieMoments {
    pub fn mse(&self) -> f64 {
        self.bias * self.bias + self.variance
    }
}

pub fn tweedie_moments(y: f64, spec: PriorSpec) -> Result<TweedieMoments> {
    let d = marginal_derivatives(y, spec)?;
    Ok(TweedieMoments {
        mean: y + d.first(),
        bias: d.first(),
        variance: 1.0 + d.second(),
    })
}

/// Posterior mean squared error of θ given y, bias² + variance.
pub fn posterior_mse(y: f64, spec: PriorSpec) -> Result<f64> {
    Ok(tweedie_moments(y, spec)?.mse())
}

/// Posterior mean of θ by Tweedie's formula.
pub fn tweedie_mean(y: f64, family: Family, tau: f64) -> Result<f64> {
    Ok(tweedie_moments(y, PriorSpec { family, tau })?.mean)
}
