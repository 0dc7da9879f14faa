//! Discrete-index random fields with known association behaviour.

use serde::Serialize;

use crate::dissection::{gamma_counts, Dissection};
use crate::measures::PointConfiguration;
use crate::{Error, Result};

mod discrete;
mod exclusion;
mod gaussian;

pub use discrete::{sample_dirichlet_sequence, sample_multinomial, sample_permutation};
pub use exclusion::{simulate_exclusion, simulate_exclusion_path, ExclusionPath, ExclusionSpec};
pub use gaussian::{sample_gaussian_field, CovarianceSpec, GaussianField};

/// One realisation `(X_i)_{i∈I}` of a field over a finite index set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub values: Vec<f64>,
    /// Set when an infinite sequence was cut to this many coordinates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

impl FieldSample {
    pub fn new(values: Vec<f64>) -> Self {
        FieldSample { values, truncation: None }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// CSV row `replicate_id,v1,...,vn`.
    pub fn csv_row(&self, replicate: u64) -> String {
        let mut s = replicate.to_string();
        for v in &self.values {
            s.push_str(&format!(",{v}"));
        }
        s.push('\n');
        s
    }
}

/// `X_y = ∫ f_y dM` for `f_y` piecewise constant on the boxes of `diss`
/// (`weights[y][b]` is the value of `f_y` on box `b`).
pub fn random_integral_field(weights: &[Vec<f64>], diss: &Dissection, measure: &PointConfiguration) -> Result<FieldSample> {
    for (y, row) in weights.iter().enumerate() {
        if row.len() != diss.len() {
            return Err(Error::param(format!("weight row {y} has {} entries for {} boxes", row.len(), diss.len())));
        }
        if row.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::param(format!("weight row {y} must be finite and nonnegative")));
        }
    }
    let counts = gamma_counts(measure, diss);
    let values = weights.iter().map(|row| row.iter().zip(counts.as_slice()).map(|(f, c)| f * c).sum()).collect();
    Ok(FieldSample::new(values))
}
