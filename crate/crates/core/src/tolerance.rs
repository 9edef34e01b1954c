use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Coefficient trimming, relative to the largest coefficient modulus.
    pub coeff: f64,
    /// Root-cluster matching between different polynomials (GCD, reduction).
    pub root: f64,
    /// Clustering of numerically split multiple roots of one polynomial.
    pub cluster: f64,
    /// Relative residual bound for reported roots.
    pub res: f64,
    /// Projective equality threshold on the Fubini-Study distance.
    pub proj: f64,
    /// Positivity threshold for determinant products.
    pub gp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            coeff: 1e-12,
            root: 1e-6,
            cluster: 1e-6,
            res: 1e-8,
            proj: 1e-8,
            gp: 1e-10,
        }
    }
}
