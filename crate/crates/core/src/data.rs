use crate::error::{Error, Result};

/// Observations of a unit-variance normal means problem.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMeansData {
    pub y: Vec<f64>,
    /// Ground-truth means, when the data were simulated.
    pub truth: Option<Vec<f64>>,
}

impl NormalMeansData {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        Self::with_truth(y, None)
    }

    pub fn with_truth(y: Vec<f64>, truth: Option<Vec<f64>>) -> Result<Self> {
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("y[{i}] = {}", y[i])));
        }
        if let Some(t) = &truth {
            if t.len() != y.len() {
                return Err(Error::Config(format!(
                    "truth has {} entries but y has {}",
                    t.len(),
                    y.len()
                )));
            }
        }
        Ok(Self { y, truth })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Indicator of a nonzero true mean, when truth is known.
    pub fn signal_mask(&self) -> Option<Vec<bool>> {
        self.truth.as_ref().map(|t| t.iter().map(|&v| v != 0.0).collect())
    }
}
