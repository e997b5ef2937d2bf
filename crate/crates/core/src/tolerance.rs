//! Default tolerances; every one can be overridden from a run configuration.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Statistical checks pass within this many standard errors.
    pub sigma: f64,
    /// `B + B^♯ + Id` and `[Bh, h]_H + ½|h|²_H`.
    pub drift_algebra: f64,
    /// Relative residual of the pointwise sector identities.
    pub pointwise_identity: f64,
    /// Relative residual of the pointwise coercivity identity.
    pub coercivity: f64,
    /// Lyapunov solution against the long-horizon sandwich integral.
    pub lyapunov_oracle: f64,
    /// Field-of-values containment slack.
    pub field_of_values: f64,
    /// Galerkin spectrum against a reference spectrum.
    pub spectrum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            drift_algebra: 1e-9,
            pointwise_identity: 1e-9,
            coercivity: 1e-10,
            lyapunov_oracle: 1e-8,
            field_of_values: 1e-8,
            spectrum: 1e-8,
        }
    }
}
