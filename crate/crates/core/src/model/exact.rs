//! Reference ground energies.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{neel_index, GaugedHamiltonian, ModelParams};
use crate::krylov::LinearOperator;
use crate::linalg::sym_eigen;
use crate::math;
use crate::{Error, Result};

/// How the reference energy was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactMethod {
    Dense,
    Lanczos,
}

/// Solver settings for [`exact_ground_energy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    /// Largest `N` diagonalised densely.
    pub dense_cap: usize,
    /// Residual tolerance for the iterative path.
    pub tol: f64,
    /// Iteration cap for the iterative path.
    pub max_iter: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            dense_cap: 14,
            tol: 1e-10,
            max_iter: 2000,
        }
    }
}

/// Ground energy in the Néel state's sector and derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundEnergy {
    /// `E_gs`.
    pub energy: f64,
    /// Ground energy of the same sector at `x = 0`.
    pub free_energy: f64,
    /// `E_int = E(x=0) - E_gs`, never negative.
    pub interaction_energy: f64,
    pub method: ExactMethod,
    /// Ritz residual bound (zero for the dense path).
    pub residual: f64,
}

impl GroundEnergy {
    /// `|E - E_gs| / |E_int|`.
    pub fn fractional_error(&self, energy: f64) -> f64 {
        math::abs(energy - self.energy) / math::abs(self.interaction_energy)
    }
}

/// Exact ground energy of the magnetisation sector containing the Néel state.
pub fn exact_ground_energy(params: &ModelParams, opts: &ExactOptions) -> Result<GroundEnergy> {
    let h = GaugedHamiltonian::new(params)?;
    let free_energy = h.sector_basis().iter().map(|&i| h.diagonal()[i]).fold(f64::INFINITY, f64::min);
    let (energy, method, residual) = if params.n_sites <= opts.dense_cap {
        let (_, m) = h.sector_matrix();
        (sym_eigen(&m).0[0], ExactMethod::Dense, 0.0)
    } else {
        let (e, r) = lanczos_lowest(&h, neel_index(params.n_sites), opts)?;
        (e, ExactMethod::Lanczos, r)
    };
    Ok(GroundEnergy {
        energy,
        free_energy,
        interaction_energy: free_energy - energy,
        method,
        residual,
    })
}

/// Dimension of the Krylov space grown from the Néel state: the number of
/// distinct sector eigenvalues whose eigenvectors overlap it.
///
/// Dense, so limited to `n_sites <= dense_cap`.
pub fn krylov_rank(params: &ModelParams, opts: &ExactOptions) -> Result<usize> {
    if params.n_sites > opts.dense_cap {
        return Err(Error::Capacity {
            what: "n_sites for dense rank",
            requested: params.n_sites,
            limit: opts.dense_cap,
        });
    }
    let h = GaugedHamiltonian::new(params)?;
    let (basis, m) = h.sector_matrix();
    let start = basis
        .binary_search(&neel_index(params.n_sites))
        .expect("Néel state lies in its own sector");
    let (vals, vecs) = sym_eigen(&m);
    let spread = vals.iter().fold(1.0f64, |a, &v| a.max(math::abs(v)));
    let mut count = 0;
    let mut last = f64::NEG_INFINITY;
    for (i, &v) in vals.iter().enumerate() {
        if math::abs(vecs[(start, i)]) > 1e-12 && v - last > 1e-11 * spread {
            count += 1;
            last = v;
        }
    }
    Ok(count)
}

/// Lowest Ritz value of the Krylov space grown from basis state `start`.
fn lanczos_lowest(op: &GaugedHamiltonian, start: usize, opts: &ExactOptions) -> Result<(f64, f64)> {
    let dim = op.dim();
    let mut prev = vec![0.0; dim];
    let mut cur = vec![0.0; dim];
    cur[start] = 1.0;
    let mut w = vec![0.0; dim];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = (f64::NAN, f64::INFINITY);
    for it in 0..opts.max_iter {
        op.apply(&cur, &mut w);
        let a = dot(&w, &cur);
        alpha.push(a);
        let b_prev = beta.last().copied().unwrap_or(0.0);
        for i in 0..dim {
            w[i] -= a * cur[i] + b_prev * prev[i];
        }
        let b = math::sqrt(dot(&w, &w));
        let scale = alpha.iter().fold(1.0f64, |s, &v| s.max(math::abs(v)));
        let exhausted = b <= 1e-13 * scale;
        if exhausted || it % 5 == 4 || it + 1 == opts.max_iter {
            let (e, y_last) = tridiagonal_lowest(&alpha, &beta);
            let residual = math::abs(b * y_last);
            last = (e, residual);
            if exhausted || residual <= opts.tol * scale {
                return Ok(last);
            }
        }
        beta.push(b);
        for i in 0..dim {
            prev[i] = cur[i];
            cur[i] = w[i] / b;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: last.1,
    })
}

fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let (vals, vecs) = sym_eigen(&t);
    (vals[0], vecs[(k - 1, 0)])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
