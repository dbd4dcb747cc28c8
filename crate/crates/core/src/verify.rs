//! Numerical invariant suites behind `hsplus verify`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kappa_posterior::{
    concentration_bound, posterior_mse, tweedie_moments, ConcentrationParams, KappaPosterior, Tail,
};
use crate::priors::{
    marginal_bounds, marginal_theta_density, origin_mass, Family, OriginMassMode, PriorSpec,
};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bounds,
    Concentration,
    Tweedie,
    Mass,
    Mse,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["bounds", "concentration", "tweedie", "mass", "mse", "all"];

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Bounds, Suite::Concentration, Suite::Tweedie, Suite::Mass, Suite::Mse],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "bounds" => Suite::Bounds,
            "concentration" => Suite::Concentration,
            "tweedie" => Suite::Tweedie,
            "mass" => Suite::Mass,
            "mse" => Suite::Mse,
            "all" => Suite::All,
            _ => {
                return Err(Error::Parse(format!(
                    "unknown suite '{s}' (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{}] {}: {}", self.suite, self.name, self.detail)
    }
}

fn check(suite: Suite, name: impl Into<String>, pass: bool, detail: String) -> Check {
    Check {
        suite,
        name: name.into(),
        pass,
        detail,
    }
}

/// Points spaced evenly in log between `lo` and `hi`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub const FAMILIES: [Family; 2] = [Family::HorseshoePlus, Family::Horseshoe];

/// Marginal envelope at 200 log-spaced θ in [1e-3, 10], τ = 1.
pub fn bounds_suite() -> Result<Vec<Check>> {
    let grid = log_grid(1e-3, 10.0, 200);
    let mut out = Vec::new();
    for family in FAMILIES {
        let spec = PriorSpec::new(family, 1.0)?;
        let mut bad = Vec::new();
        for &t in &grid {
            let p = marginal_theta_density(spec, t)?;
            if !marginal_bounds(spec, t)?.contains(p) {
                bad.push(t);
            }
        }
        out.push(check(
            Suite::Bounds,
            format!("{family} marginal envelope"),
            bad.is_empty(),
            format!("{} violations on {} points {bad:?}", bad.len(), grid.len()),
        ));
    }
    Ok(out)
}

pub const CONCENTRATION_Y: [f64; 5] = [0.0, 1.0, 2.0, 4.0, 6.0];
pub const CONCENTRATION_TAU: [f64; 3] = [0.5, 0.1, 0.01];

/// Posterior κ tails against both analytic inequalities (horseshoe+).
pub fn concentration_suite() -> Result<Vec<Check>> {
    let (eps, eta, delta) = (0.25, 0.25, 1.0 / 9.0);
    let mut left_bad = Vec::new();
    let mut right_bad = Vec::new();
    for &tau in &CONCENTRATION_TAU {
        let spec = PriorSpec::horseshoe_plus(tau);
        for &y in &CONCENTRATION_Y {
            let post = KappaPosterior::new(y, spec)?;
            let left = post.tail_probability(Tail::Below(eps))?;
            let lb = concentration_bound(y, spec, ConcentrationParams::Left { epsilon: eps })?.bound_value;
            if left > lb {
                left_bad.push((y, tau, left, lb));
            }
            let right = post.tail_probability(Tail::Above(eta))?;
            let rb = concentration_bound(y, spec, ConcentrationParams::Right { eta, delta })?.bound_value;
            if right > rb {
                right_bad.push((y, tau, right, rb));
            }
        }
    }
    let cells = CONCENTRATION_Y.len() * CONCENTRATION_TAU.len();
    let fmt_bad = |v: &[(f64, f64, f64, f64)]| {
        v.iter()
            .map(|(y, t, p, b)| format!("(y={y}, tau={t}: {p:.3e} > {b:.3e})"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    Ok(vec![
        check(
            Suite::Concentration,
            "P(kappa < 1/4) below left-tail bound",
            left_bad.is_empty(),
            format!("{} of {cells} cells violate {}", left_bad.len(), fmt_bad(&left_bad)),
        ),
        check(
            Suite::Concentration,
            "P(kappa > 1/4) below right-tail bound",
            right_bad.is_empty(),
            format!("{} of {cells} cells violate {}", right_bad.len(), fmt_bad(&right_bad)),
        ),
    ])
}

/// y(1 − E κ) against y + d log m/dy.
pub fn tweedie_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for family in FAMILIES {
        let mut worst: f64 = 0.0;
        for tau in [1.0, 0.1] {
            let spec = PriorSpec::new(family, tau)?;
            for y in [0.5, 2.0, 5.0] {
                let direct = KappaPosterior::new(y, spec)?.posterior_mean_theta()?;
                let tweedie = tweedie_moments(y, spec)?.mean;
                worst = worst.max((direct - tweedie).abs());
            }
        }
        out.push(check(
            Suite::Tweedie,
            format!("{family} posterior mean two ways"),
            worst < 1e-6,
            format!("max difference {worst:.3e} (tolerance 1e-6)"),
        ));
    }
    Ok(out)
}

/// ∫ p(θ) dθ over the real line at τ = 1, in u = ln |θ|.
pub fn marginal_total_mass(family: Family) -> Result<f64> {
    let spec = PriorSpec::new(family, 1.0)?;
    let f = |u: f64| {
        let t = u.exp();
        marginal_theta_density(spec, t).map_or(f64::NAN, |p| p * t)
    };
    Ok(2.0 * integrate(f, &[-80.0, -20.0, -5.0, 0.0, 5.0, 20.0, 40.0])?)
}

/// Normalization and the origin-mass expansions.
pub fn mass_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for family in FAMILIES {
        let total = marginal_total_mass(family)?;
        out.push(check(
            Suite::Mass,
            format!("{family} marginal integrates to one"),
            (total - 1.0).abs() < 1e-6,
            format!("integral {total:.12}"),
        ));
    }
    let n = 1e8;
    for family in FAMILIES {
        let spec = PriorSpec::new(family, 1.0)?;
        let closed = origin_mass(spec, n, OriginMassMode::ClosedForm)?;
        let quad = origin_mass(spec, n, OriginMassMode::ExpansionQuadrature)?;
        let rel = (closed / quad - 1.0).abs();
        out.push(check(
            Suite::Mass,
            format!("{family} origin mass closed form vs quadrature at n=1e8"),
            rel < 0.05,
            format!("closed {closed:.6e}, quadrature {quad:.6e}, relative gap {rel:.2e}"),
        ));
    }
    let ratios: Vec<f64> = [1e4, 1e8, 1e16, 1e32]
        .iter()
        .map(|&n| {
            let p = origin_mass(PriorSpec::horseshoe_plus(1.0), n, OriginMassMode::LeadingTerms)?;
            let h = origin_mass(PriorSpec::horseshoe(1.0), n, OriginMassMode::LeadingTerms)?;
            Ok(p / h)
        })
        .collect::<Result<_>>()?;
    out.push(check(
        Suite::Mass,
        "hs+/hs leading origin mass ratio grows with log n",
        ratios.windows(2).all(|w| w[1] > w[0]),
        format!("ratios at n=1e4,1e8,1e16,1e32: {ratios:.4?}"),
    ));
    Ok(out)
}

pub const MSE_Y: [f64; 4] = [8.0, 12.0, 20.0, 30.0];

/// Posterior-mean risk in the tails at τ = 1.
pub fn mse_suite() -> Result<Vec<Check>> {
    let mut gaps = Vec::new();
    for &y in &MSE_Y {
        let p = posterior_mse(y, PriorSpec::horseshoe_plus(1.0))?;
        let h = posterior_mse(y, PriorSpec::horseshoe(1.0))?;
        gaps.push((y, h - p));
    }
    let scaled = 30.0f64.powi(2) * 30.0f64.ln() * gaps[3].1;
    Ok(vec![
        check(
            Suite::Mse,
            "hs+ mse below hs mse",
            gaps.iter().all(|(_, g)| *g > 0.0),
            format!(
                "gaps (hs - hs+) {}",
                gaps.iter().map(|(y, g)| format!("y={y}: {g:.4e}")).collect::<Vec<_>>().join(", ")
            ),
        ),
        check(
            Suite::Mse,
            "y^2 log y times gap at y=30 in (0.3, 3)",
            scaled > 0.3 && scaled < 3.0,
            format!("{scaled:.4}"),
        ),
    ])
}

pub fn run_suite(suite: Suite) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for s in suite.expand() {
        out.extend(match s {
            Suite::Bounds => bounds_suite()?,
            Suite::Concentration => concentration_suite()?,
            Suite::Tweedie => tweedie_suite()?,
            Suite::Mass => mass_suite()?,
            Suite::Mse => mse_suite()?,
            Suite::All => unreachable!("expanded above"),
        });
    }
    Ok(out)
}
