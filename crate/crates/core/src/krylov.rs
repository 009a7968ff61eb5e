//! Power moments `μ_k = ⟨ψ0|(H/s)^k|ψ0⟩` and the Hankel matrices built from them.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Magnitude above which a moment is treated as overflowed.
const OVERFLOW_LIMIT: f64 = 1e300;

/// A real symmetric operator acting on dense vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `out = A v`.
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }
}

/// Moments `μ_0 … μ_kmax` of the operator divided by `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub values: Vec<f64>,
    /// Energies in moment units multiply by this to recover physical units.
    pub scale: f64,
}

impl MomentVector {
    pub fn new(values: Vec<f64>, scale: f64) -> Self {
        Self { values, scale }
    }

    /// Highest available order.
    pub fn max_order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.get(k).copied()
    }

    /// Error unless moments up to `order` are present.
    pub fn require(&self, order: usize) -> Result<()> {
        if self.values.len() <= order {
            return Err(Error::MissingMoments {
                needed: order,
                available: self.max_order(),
            });
        }
        Ok(())
    }

    /// Copy with `delta[k]` added to `μ_k`.
    pub fn perturbed(&self, delta: &[f64]) -> Self {
        let mut values = self.values.clone();
        for (v, d) in values.iter_mut().zip(delta) {
            *v += d;
        }
        Self { values, scale: self.scale }
    }
}

/// Compute `μ_0 … μ_kmax` for `ψ0` under `op / scale`.
///
/// Only `(H/s)^j ψ0` for `j ≤ ⌈kmax/2⌉` is formed; even moments are squared
/// norms and odd ones are expectation values, which keeps each moment as
/// accurate as a single inner product allows.
pub fn compute_moments<O: LinearOperator + ?Sized>(op: &O, psi0: &[f64], k_max: usize, scale: f64) -> Result<MomentVector> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid("scale", "must be positive and finite"));
    }
    if psi0.len() != op.dim() {
        return Err(Error::invalid("psi0", "length must equal the operator dimension"));
    }
    let mut values = Vec::with_capacity(k_max + 1);
    let mut v = psi0.to_vec();
    let mut w = vec![0.0; v.len()];
    let inv = 1.0 / scale;
    loop {
        let order = values.len();
        values.push(dot(&v, &v));
        if order == k_max {
            break;
        }
        op.apply(&v, &mut w);
        w.iter_mut().for_each(|x| *x *= inv);
        values.push(dot(&v, &w));
        if order + 1 == k_max {
            break;
        }
        core::mem::swap(&mut v, &mut w);
        if let Some(bad) = values.iter().position(|m| !(m.is_finite() && m.abs() < OVERFLOW_LIMIT)) {
            return Err(Error::MomentOverflow { order: bad });
        }
    }
    if let Some(bad) = values.iter().position(|m| !(m.is_finite() && m.abs() < OVERFLOW_LIMIT)) {
        return Err(Error::MomentOverflow { order: bad });
    }
    Ok(MomentVector::new(values, scale))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Overlap and projected-Hamiltonian matrices of the power basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelPair {
    /// `S_ij = μ_{i+j}`.
    pub s: DMatrix<f64>,
    /// `H_ij = μ_{i+j+1}`.
    pub h: DMatrix<f64>,
}

/// Assemble the `D × D` Hankel pair; needs moments up to `2D - 1`.
pub fn assemble_hankel(moments: &MomentVector, dim: usize) -> Result<HankelPair> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    moments.require(2 * dim - 1)?;
    let mu = &moments.values;
    Ok(HankelPair {
        s: DMatrix::from_fn(dim, dim, |i, j| mu[i + j]),
        h: DMatrix::from_fn(dim, dim, |i, j| mu[i + j + 1]),
    })
}

/// Hankel matrix of a moment-noise vector; entry `(i, j)` is `delta[i+j]`.
pub fn hankel_of(delta: &[f64], dim: usize, shift: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| delta.get(i + j + shift).copied().unwrap_or(0.0))
}

/// Single-shot variance `μ_2k - μ_k²`, clipped at zero.
pub fn moment_variance(moments: &MomentVector, k: usize) -> Result<f64> {
    moments.require(2 * k)?;
    let mu = &moments.values;
    Ok((mu[2 * k] - mu[k] * mu[k]).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenstate_moments_are_powers() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -1.0]);
        let m = compute_moments(&a, &[1.0, 0.0], 6, 3.0).unwrap();
        assert!(m.values.iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert_eq!(moment_variance(&m, 2).unwrap(), 0.0);
    }

    #[test]
    fn moment_lengths() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        for k in 0..6 {
            let m = compute_moments(&a, &[1.0, 0.0], k, 1.0).unwrap();
            assert_eq!(m.max_order(), k);
            let expect: Vec<f64> = (0..=k).map(|j| if j % 2 == 0 { 1.0 } else { 0.0 }).collect();
            assert_eq!(m.values, expect);
        }
    }

    #[test]
    fn hankel_needs_enough_moments() {
        let m = MomentVector::new(vec![1.0, 0.5, 0.4], 1.0);
        assert!(assemble_hankel(&m, 2).is_err());
        let p = assemble_hankel(&MomentVector::new(vec![1.0, 0.5, 0.4, 0.3], 1.0), 2).unwrap();
        assert_eq!(p.s[(1, 1)], 0.4);
        assert_eq!(p.h[(1, 1)], 0.3);
    }

    #[test]
    fn overflow_is_reported() {
        let a = DMatrix::from_row_slice(1, 1, &[1e200]);
        assert!(matches!(compute_moments(&a, &[1.0], 4, 1.0), Err(Error::MomentOverflow { .. })));
    }
}
