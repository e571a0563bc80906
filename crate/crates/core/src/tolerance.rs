use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every validation and comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Structural checks: Hermiticity, completeness, idempotence.
    pub lin: f64,
    /// Slack allowed below zero (and above one for effects) on spectra.
    pub psd: f64,
    /// Statistical identities such as the uncertainty equation.
    pub stat: f64,
    /// Absolute eigenvalue clustering threshold. `None` means
    /// `1e-8 * max(1, ||M||)` for the matrix being decomposed.
    pub cluster: Option<f64>,
}

pub const DEFAULT_LIN: f64 = 1e-9;
pub const DEFAULT_PSD: f64 = 1e-8;
pub const DEFAULT_STAT: f64 = 1e-9;
pub const DEFAULT_CLUSTER_REL: f64 = 1e-8;

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lin: DEFAULT_LIN,
            psd: DEFAULT_PSD,
            stat: DEFAULT_STAT,
            cluster: None,
        }
    }
}

impl Tolerances {
    /// Clustering threshold for a matrix with max-entry norm `norm`.
    pub fn cluster_for(&self, norm: f64) -> f64 {
        self.cluster.unwrap_or(DEFAULT_CLUSTER_REL * norm.max(1.0))
    }
}
