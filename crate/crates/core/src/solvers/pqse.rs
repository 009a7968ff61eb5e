//! Partitioned subspace expansion.
//!
//! The Krylov dimension budget is spent in small partitions. Each partition
//! multiplies the current reference polynomial `p(H)` by a degree `d-1`
//! polynomial found from a `d × d` eigenproblem, keeping the candidate whose
//! state has the smallest energy variance.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{solve_gevp, ConditionReport, EnergyResult, Status};
use crate::krylov::MomentVector;
use crate::math;
use crate::noise::NoiseSample;
use crate::{Error, Result};

/// Variances closer than this are treated as tied; the smaller partition wins.
const VARIANCE_TIE: f64 = 1e-12;

/// A state `p(H/s) ψ0` stored by its polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyState {
    pub coeffs: Vec<f64>,
}

impl PolyState {
    pub fn reference() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Σ_k (p ⋆ p)_k μ_{k+r}` = `⟨p|H^r|p⟩`.
    fn expectation(&self, mu: &[f64], r: usize) -> f64 {
        let auto = convolve(&self.coeffs, &self.coeffs);
        auto.iter().enumerate().map(|(k, a)| a * mu[k + r]).sum()
    }

    /// `(⟨H⟩, ⟨H²⟩ - ⟨H⟩²)` in moment units, normalised by `⟨p|p⟩`.
    pub fn energy_and_variance(&self, moments: &MomentVector) -> Result<(f64, f64)> {
        moments.require(2 * self.degree() + 2)?;
        let mu = &moments.values;
        let n = self.expectation(mu, 0);
        let h1 = self.expectation(mu, 1) / n;
        let h2 = self.expectation(mu, 2) / n;
        Ok((h1, h2 - h1 * h1))
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

struct Candidate {
    dim: usize,
    state: PolyState,
    energy: f64,
    variance: f64,
    status: Status,
    condition: ConditionReport,
}

/// Best `d`-dimensional extension of `p`.
fn extend(p: &PolyState, mu: &MomentVector, d: usize) -> Option<Candidate> {
    let auto = convolve(&p.coeffs, &p.coeffs);
    let v = &mu.values;
    let entry = |i: usize, j: usize, r: usize| -> f64 { auto.iter().enumerate().map(|(k, a)| a * v[k + i + j + r]).sum() };
    let s = DMatrix::from_fn(d, d, |i, j| entry(i, j, 0));
    let h = DMatrix::from_fn(d, d, |i, j| entry(i, j, 1));
    let sol = solve_gevp(&s, &h, 0.0);
    if sol.status == Status::Failed {
        return None;
    }
    let state = PolyState {
        coeffs: convolve(sol.vector.as_slice(), &p.coeffs),
    };
    let (energy, variance) = state.energy_and_variance(mu).ok()?;
    if !(energy.is_finite() && variance.is_finite()) {
        return None;
    }
    Some(Candidate {
        dim: d,
        state,
        energy,
        variance,
        status: sol.status,
        condition: sol.condition,
    })
}

/// Partitioned subspace expansion with total dimension `d_max` and at most
/// `d_cap` dimensions per partition.
///
/// Uses moments up to `2 d_max` of the noisy moment vector.
pub fn pqse(moments: &MomentVector, noise: &NoiseSample, d_max: usize, d_cap: usize) -> Result<EnergyResult> {
    if d_max == 0 {
        return Err(Error::invalid("d_max", "must be at least 1"));
    }
    if d_max > 1 && d_cap < 2 {
        return Err(Error::invalid("d_cap", "must be at least 2"));
    }
    let noisy = noise.apply(moments);
    noisy.require(if d_max == 1 { 1 } else { 2 * d_max })?;
    let scale = moments.scale;

    let mut p = PolyState::reference();
    let mut energy = noisy.values[1] / noisy.values[0];
    let mut remaining = d_max - 1;
    let mut partitions = Vec::new();
    let mut status = Status::Ok;
    let mut condition = ConditionReport {
        retained: 1,
        min_retained: noisy.values[0],
        max_eigenvalue: noisy.values[0],
        ..ConditionReport::default()
    };

    while remaining >= 1 {
        let mut best: Option<Candidate> = None;
        for d in 2..=d_cap.min(remaining + 1) {
            if let Some(c) = extend(&p, &noisy, d) {
                let better = match &best {
                    None => true,
                    Some(b) => math::abs(c.variance) < math::abs(b.variance) - VARIANCE_TIE,
                };
                if better {
                    best = Some(c);
                }
            }
        }
        let Some(c) = best else {
            status = if partitions.is_empty() { Status::Failed } else { Status::Unstable };
            break;
        };
        remaining -= c.dim - 1;
        partitions.push(c.dim);
        p = c.state;
        energy = c.energy;
        condition = c.condition;
        status = status.max(c.status);
    }

    Ok(EnergyResult {
        energy: if status == Status::Failed { f64::NAN } else { energy * scale },
        status,
        condition,
        partitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::compute_moments;
    use crate::solvers::qse;

    fn chain() -> MomentVector {
        let n = 6;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                i as f64 * 0.7 - 1.0
            } else if i.abs_diff(j) == 1 {
                0.4
            } else {
                0.0
            }
        });
        let mut psi = vec![0.0; n];
        psi[0] = 1.0;
        compute_moments(&a, &psi, 30, 3.0).unwrap()
    }

    #[test]
    fn one_dim_returns_mean() {
        let m = chain();
        let r = pqse(&m, &NoiseSample::zero(31), 1, 2).unwrap();
        assert!((r.energy - m.values[1] * m.scale).abs() < 1e-14);
        assert!(r.partitions.is_empty());
    }

    #[test]
    fn single_partition_is_qse() {
        let m = chain();
        for d in 2..=5 {
            let p = pqse(&m, &NoiseSample::zero(31), d, d).unwrap();
            let q = qse(&m, d).unwrap();
            assert!((p.energy - q.energy).abs() < 1e-9, "D = {d}");
        }
    }

    #[test]
    fn partitions_fill_budget() {
        let m = chain();
        let r = pqse(&m, &NoiseSample::zero(31), 6, 2).unwrap();
        assert_eq!(r.partitions, [2, 2, 2, 2, 2]);
        let used: usize = r.partitions.iter().map(|d| d - 1).sum();
        assert_eq!(used, 5);
        assert!(r.energy <= qse(&m, 1).unwrap().energy);
    }

    #[test]
    fn variance_of_reference() {
        let m = chain();
        let (e, v) = PolyState::reference().energy_and_variance(&m).unwrap();
        assert_eq!(e, m.values[1]);
        assert!((v - (m.values[2] - m.values[1].powi(2))).abs() < 1e-15);
    }
}
