use super::AugmentedSystem;
use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// Per-component tolerances: `tol` on `y`, `aux_scale·tol` on the integral
/// variable, `omega·tol` on the chain variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceLedger {
    pub tol: f64,
    pub omega: f64,
    pub aux_scale: f64,
    pub atol: Vec<f64>,
    pub rtol: Vec<f64>,
}

impl ToleranceLedger {
    pub fn new(system: &AugmentedSystem, tol: f64, omega: f64, aux_scale: f64) -> Result<Self> {
        Self::from_layout(system.state_dim(), system.chain_dim(), tol, omega, aux_scale)
    }

    /// Layout `[y (d), y_aux, z (n_z)]`.
    pub fn from_layout(d: usize, n_z: usize, tol: f64, omega: f64, aux_scale: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(domain("tol must be positive"));
        }
        if !(omega >= 1.0) {
            return Err(domain("omega must be at least 1"));
        }
        if !(aux_scale > 0.0) {
            return Err(domain("aux_scale must be positive"));
        }
        let mut v = vec![tol; d];
        v.push(aux_scale * tol);
        v.extend(std::iter::repeat(omega * tol).take(n_z));
        Ok(Self { tol, omega, aux_scale, atol: v.clone(), rtol: v })
    }

    /// Same tolerance on every component of a `dim`-dimensional system.
    pub fn uniform(dim: usize, tol: f64) -> Self {
        Self { tol, omega: 1.0, aux_scale: 1.0, atol: vec![tol; dim], rtol: vec![tol; dim] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let l = ToleranceLedger::from_layout(2, 3, 1e-6, 100.0, 1.0).unwrap();
        let want = [1e-6, 1e-6, 1e-6, 1e-4, 1e-4, 1e-4];
        assert!(l.atol.iter().zip(want).all(|(a, w)| (a - w).abs() <= 1e-15 * w));
        assert_eq!(l.atol, l.rtol);
        let l = ToleranceLedger::from_layout(3, 2, 1e-7, 100.0, 1e-2).unwrap();
        assert!((l.atol[3] - 1e-9).abs() < 1e-24);
        assert!((l.atol[4] - 1e-5).abs() < 1e-20);
        let l = ToleranceLedger::from_layout(1, 4, 1e-5, 1.0, 1.0).unwrap();
        assert!(l.atol.iter().all(|&v| v == 1e-5));
        assert!(ToleranceLedger::from_layout(1, 1, 1e-5, 0.5, 1.0).is_err());
    }
}
