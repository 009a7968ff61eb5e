//! Krylov ground-state estimators built on a generalized eigenproblem.
//!
//! All three solvers take moments in scaled units and report energies in
//! physical units (multiplied back by the moment scale).

mod pqse;

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::krylov::{assemble_hankel, hankel_of, MomentVector};
use crate::linalg::{sym_eigen, sym_spectral_norm};
use crate::math;
use crate::noise::NoiseSample;
use crate::{Error, Result};

pub use pqse::{pqse, PolyState};

/// Overlap eigenvalues below this fraction of the largest are treated as zero.
pub const MACHINE_FLOOR: f64 = 1e-14;

/// Outcome class of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Ok,
    /// A result exists but the overlap matrix was singular at machine
    /// precision, or a later partition could not be solved.
    Unstable,
    /// No usable result.
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Unstable => "unstable",
            Status::Failed => "failed",
        }
    }
}

/// What the overlap-matrix cut did.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConditionReport {
    pub retained: usize,
    pub discarded: usize,
    /// Smallest retained overlap eigenvalue.
    pub min_retained: f64,
    /// Largest overlap eigenvalue magnitude.
    pub max_eigenvalue: f64,
    /// Threshold actually applied.
    pub cut: f64,
}

/// Lowest solution of a thresholded generalized eigenproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct GevpSolution {
    /// Lowest eigenvalue (NaN when failed).
    pub value: f64,
    /// Coefficients in the original basis, normalised so `cᵀ S c = 1`.
    pub vector: DVector<f64>,
    pub status: Status,
    pub condition: ConditionReport,
}

impl GevpSolution {
    fn failed(dim: usize, condition: ConditionReport) -> Self {
        Self {
            value: f64::NAN,
            vector: DVector::zeros(dim),
            status: Status::Failed,
            condition,
        }
    }
}

/// Solve `H c = E S c` for the lowest `E` by canonical orthogonalisation.
///
/// Overlap eigenvalues at or below `max(eps_cut, 1e-14 ‖S‖)` are discarded.
/// With `eps_cut = 0` the overlap is first scaled to unit diagonal, and any
/// discarded direction marks the result unstable; an explicit cut applies to
/// `S` as given and is expected to discard.
pub fn solve_gevp(s: &DMatrix<f64>, h: &DMatrix<f64>, eps_cut: f64) -> GevpSolution {
    let dim = s.nrows();
    let finite = s.iter().chain(h.iter()).all(|v| v.is_finite()) && eps_cut.is_finite();
    if !finite || dim == 0 || h.nrows() != dim || eps_cut < 0.0 {
        return GevpSolution::failed(dim, ConditionReport::default());
    }
    // Machine-floor cuts act on the diagonally equilibrated overlap so that
    // basis vectors of very different norm are judged on equal footing.
    let equilibrate = eps_cut == 0.0;
    let d = DVector::from_fn(dim, |i, _| {
        let v = math::abs(s[(i, i)]);
        if equilibrate && v > 0.0 {
            1.0 / math::sqrt(v)
        } else {
            1.0
        }
    });
    let dm = DMatrix::from_diagonal(&d);
    let s_eq = &dm * s * &dm;
    let h_eq = &dm * h * &dm;
    let (lam, vecs) = sym_eigen(&s_eq);
    let max_eigenvalue = lam.iter().fold(0.0f64, |a, &v| a.max(math::abs(v)));
    let cut = eps_cut.max(MACHINE_FLOOR * max_eigenvalue);
    let keep: Vec<usize> = (0..dim).filter(|&i| lam[i] > cut).collect();
    let mut condition = ConditionReport {
        retained: keep.len(),
        discarded: dim - keep.len(),
        min_retained: keep.first().map_or(f64::NAN, |&i| lam[i]),
        max_eigenvalue,
        cut,
    };
    if keep.is_empty() {
        return GevpSolution::failed(dim, condition);
    }
    let x = DMatrix::from_fn(dim, keep.len(), |r, c| vecs[(r, keep[c])] / math::sqrt(lam[keep[c]]));
    let hp = x.transpose() * h_eq * &x;
    let (vals, yv) = sym_eigen(&hp);
    let mut c = &dm * (&x * yv.column(0));
    let norm2 = (c.transpose() * s * &c)[(0, 0)];
    if norm2 > 0.0 {
        c /= math::sqrt(norm2);
    }
    let value = vals[0];
    if !value.is_finite() {
        return GevpSolution::failed(dim, condition);
    }
    condition.min_retained = keep.iter().map(|&i| lam[i]).fold(f64::INFINITY, f64::min);
    let status = if condition.discarded > 0 && eps_cut == 0.0 {
        Status::Unstable
    } else {
        Status::Ok
    };
    GevpSolution {
        value,
        vector: c,
        status,
        condition,
    }
}

/// Result of a ground-energy estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyResult {
    /// Estimated energy in physical units (NaN when failed).
    pub energy: f64,
    pub status: Status,
    pub condition: ConditionReport,
    /// Partition sizes chosen by the partitioned solver; empty otherwise.
    pub partitions: Vec<usize>,
}

impl EnergyResult {
    fn from_gevp(sol: &GevpSolution, scale: f64) -> Self {
        Self {
            energy: sol.value * scale,
            status: sol.status,
            condition: sol.condition,
            partitions: Vec::new(),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("krylov_dim", "must be at least 1"));
    }
    Ok(())
}

/// Plain subspace expansion in the power basis `{H^j ψ0 : j < D}`.
pub fn qse(moments: &MomentVector, dim: usize) -> Result<EnergyResult> {
    check_dim(dim)?;
    let pair = assemble_hankel(moments, dim)?;
    Ok(EnergyResult::from_gevp(&solve_gevp(&pair.s, &pair.h, 0.0), moments.scale))
}

/// Subspace expansion on noisy moments, discarding overlap directions below
/// the spectral norm of the overlap-matrix noise.
pub fn tqse(moments: &MomentVector, noise: &NoiseSample, dim: usize) -> Result<EnergyResult> {
    check_dim(dim)?;
    let noisy = noise.apply(moments);
    let pair = assemble_hankel(&noisy, dim)?;
    let cut = sym_spectral_norm(&hankel_of(&noise.delta, dim, 0));
    Ok(EnergyResult::from_gevp(&solve_gevp(&pair.s, &pair.h, cut), moments.scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::compute_moments;

    fn two_level() -> MomentVector {
        let a = DMatrix::from_row_slice(2, 2, &[-1.5, 0.5, 0.5, 2.5]);
        compute_moments(&a, &[1.0, 0.0], 12, 2.0).unwrap()
    }

    #[test]
    fn one_dim_is_mean_energy() {
        let r = qse(&two_level(), 1).unwrap();
        assert!((r.energy + 1.5).abs() < 1e-14);
        assert_eq!(r.status, Status::Ok);
    }

    #[test]
    fn full_space_is_exact() {
        let r = qse(&two_level(), 2).unwrap();
        assert!((r.energy - (0.5 - 4.25f64.sqrt())).abs() < 1e-12);
        assert_eq!(r.status, Status::Ok);
    }

    #[test]
    fn redundant_basis_is_unstable() {
        let r = qse(&two_level(), 3).unwrap();
        assert_eq!(r.status, Status::Unstable);
        assert!((r.energy - (0.5 - 4.25f64.sqrt())).abs() < 1e-8);
    }

    #[test]
    fn nan_input_fails() {
        let mut m = two_level();
        m.values[2] = f64::NAN;
        assert_eq!(qse(&m, 2).unwrap().status, Status::Failed);
    }

    #[test]
    fn huge_cut_fails() {
        let s = DMatrix::identity(2, 2);
        assert_eq!(solve_gevp(&s, &s, 10.0).status, Status::Failed);
    }

    #[test]
    fn zero_noise_tqse_is_qse() {
        let m = two_level();
        let n = NoiseSample::zero(8);
        assert_eq!(tqse(&m, &n, 2).unwrap(), qse(&m, 2).unwrap());
    }

    #[test]
    fn normalised_vector() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let sol = solve_gevp(&s, &h, 0.0);
        let n = (sol.vector.transpose() * &s * &sol.vector)[(0, 0)];
        assert!((n - 1.0).abs() < 1e-12);
        let e = (sol.vector.transpose() * &h * &sol.vector)[(0, 0)];
        assert!((e - sol.value).abs() < 1e-12);
    }
}
