//! The gauged lattice Schwinger Hamiltonian.
//!
//! After integrating out the gauge field with Gauss's law, the model on `N`
//! staggered sites is a spin chain on `2^N` states:
//!
//! ```text
//! H0 = Σ_n (-1)^n μ/2 (1 + σ3(n)) + Σ_{n<N} L(n)²,   L(n) = ½ Σ_{j≤n} (σ3(j) + (-1)^j)
//! V  = Σ_{n<N} (σ+(n) σ-(n+1) + h.c.)
//! H  = H0 + x V
//! ```
//!
//! Sites are numbered from 1. Site `n` lives on bit `N - n` of a basis index,
//! so site 1 is the most significant bit, and a clear bit is spin up.

mod exact;
mod explicit;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::krylov::LinearOperator;
use crate::{Error, Result};

pub use exact::{exact_ground_energy, krylov_rank, ExactMethod, ExactOptions, GroundEnergy};
pub use explicit::{
    build_pauli_hamiltonian, embed_gauss_state, field_block_entries, interaction_block_entries, link_offset, site_qubit, Block, BlockTerm,
    PauliHamiltonian, SectorProjection,
};

/// Largest chain stored as a dense `2^N` state vector.
pub const MAX_SITES: usize = 26;

/// How many qubits each gauge-link register gets in the explicit-field form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationRule {
    /// `m = ⌈log2(N/2 + 1)⌉`.
    #[default]
    HalfSitesPlusOne,
    /// `m = ⌈log2 N⌉ + 1`.
    SitesPlusOne,
    /// A fixed `m`.
    Explicit(u32),
}

impl TruncationRule {
    /// Link-register width for a chain of `n_sites`.
    pub fn link_qubits(self, n_sites: usize) -> u32 {
        match self {
            // smallest m with 2^(m+1) >= N + 2
            TruncationRule::HalfSitesPlusOne => ceil_log2(n_sites as u64 + 2).saturating_sub(1).max(1),
            TruncationRule::SitesPlusOne => ceil_log2(n_sites as u64) + 1,
            TruncationRule::Explicit(m) => m,
        }
    }
}

/// Smallest `k` with `2^k >= v`.
pub fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// Physical parameters of a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Number of staggered sites `N` (even, at least 2).
    pub n_sites: usize,
    /// Fermion mass `μ`.
    pub mu: f64,
    /// Hopping strength `x`.
    pub x: f64,
    /// Link-register width rule for the explicit-field form.
    pub truncation: TruncationRule,
}

impl ModelParams {
    /// Validated parameters with the default truncation rule.
    pub fn new(n_sites: usize, mu: f64, x: f64) -> Result<Self> {
        let p = Self {
            n_sites,
            mu,
            x,
            truncation: TruncationRule::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_truncation(mut self, truncation: TruncationRule) -> Result<Self> {
        self.truncation = truncation;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || self.n_sites % 2 == 1 {
            return Err(Error::invalid("n_sites", "must be even and at least 2"));
        }
        if !self.mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        if !self.x.is_finite() {
            return Err(Error::invalid("x", "must be finite"));
        }
        if let TruncationRule::Explicit(m) = self.truncation {
            if m == 0 || m > 20 {
                return Err(Error::invalid("m", "must lie in 1..=20"));
            }
        }
        Ok(())
    }

    /// Link-register width `m`.
    pub fn link_qubits(&self) -> u32 {
        self.truncation.link_qubits(self.n_sites)
    }
}

/// `(-1)^n`.
fn stagger(n: usize) -> i64 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `σ3` eigenvalue of site `n` (1-based) in basis state `index`.
pub fn spin(n_sites: usize, index: usize, n: usize) -> i64 {
    if (index >> (n_sites - n)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Electric fields `L(1), …, L(N-1)` of a basis state.
pub fn electric_fields(n_sites: usize, index: usize) -> Vec<i64> {
    let mut acc = 0;
    (1..n_sites)
        .map(|n| {
            acc += (spin(n_sites, index, n) + stagger(n)) / 2;
            acc
        })
        .collect()
}

/// Basis index of the Néel state: odd sites up, even sites down.
pub fn neel_index(n_sites: usize) -> usize {
    (1..=n_sites).filter(|n| n % 2 == 0).fold(0, |acc, n| acc | (1 << (n_sites - n)))
}

/// The Néel state as a normalised vector on `2^N` states.
pub fn neel_reference(n_sites: usize) -> Result<Vec<f64>> {
    check_sites(n_sites)?;
    let mut v = vec![0.0; 1 << n_sites];
    v[neel_index(n_sites)] = 1.0;
    Ok(v)
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites > MAX_SITES {
        return Err(Error::Capacity {
            what: "n_sites",
            requested: n_sites,
            limit: MAX_SITES,
        });
    }
    Ok(())
}

/// Range `[min, max]` of electric-field values met by any state in the
/// Néel state's charge sector.
pub fn field_range(n_sites: usize) -> (i64, i64) {
    // forward[n] and backward[n]: field values at link n reachable from L(0)=0
    // and able to return to L(N)=0.
    let step = |n: usize| if n % 2 == 1 { [-1i64, 0] } else { [0, 1] };
    let span = n_sites as i64;
    let width = (2 * span + 1) as usize;
    let idx = |l: i64| (l + span) as usize;
    let mut forward = vec![vec![false; width]; n_sites + 1];
    forward[0][idx(0)] = true;
    for n in 1..=n_sites {
        for l in -span..=span {
            if forward[n - 1][idx(l)] {
                for d in step(n) {
                    let t = l + d;
                    if t.abs() <= span {
                        forward[n][idx(t)] = true;
                    }
                }
            }
        }
    }
    let mut backward = vec![vec![false; width]; n_sites + 1];
    backward[n_sites][idx(0)] = true;
    for n in (1..=n_sites).rev() {
        for l in -span..=span {
            if backward[n][idx(l)] {
                for d in step(n) {
                    let t = l - d;
                    if t.abs() <= span {
                        backward[n - 1][idx(t)] = true;
                    }
                }
            }
        }
    }
    let (mut lo, mut hi) = (0, 0);
    for n in 1..n_sites {
        for l in -span..=span {
            if forward[n][idx(l)] && backward[n][idx(l)] {
                lo = lo.min(l);
                hi = hi.max(l);
            }
        }
    }
    (lo, hi)
}

/// Matrix-free gauged Hamiltonian on `2^N` states.
#[derive(Debug, Clone)]
pub struct GaugedHamiltonian {
    params: ModelParams,
    diag: Vec<f64>,
}

impl GaugedHamiltonian {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        check_sites(params.n_sites)?;
        let n = params.n_sites;
        let diag = (0..1usize << n).map(|i| diagonal_energy(params, i)).collect();
        Ok(Self { params: *params, diag })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// The `x = 0` energies `⟨i|H0|i⟩`.
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Basis indices sharing the Néel state's magnetisation, ascending.
    pub fn sector_basis(&self) -> Vec<usize> {
        let half = (self.params.n_sites / 2) as u32;
        (0..self.diag.len()).filter(|i| i.count_ones() == half).collect()
    }

    /// Dense matrix of `H` restricted to [`GaugedHamiltonian::sector_basis`].
    pub fn sector_matrix(&self) -> (Vec<usize>, DMatrix<f64>) {
        let basis = self.sector_basis();
        let n = self.params.n_sites;
        let mut m = DMatrix::zeros(basis.len(), basis.len());
        for (col, &i) in basis.iter().enumerate() {
            m[(col, col)] = self.diag[i];
            for bond in 0..n - 1 {
                let mask = 0b11usize << bond;
                let pair = i & mask;
                if pair != 0 && pair != mask {
                    let j = i ^ mask;
                    let row = basis.binary_search(&j).expect("hopping preserves magnetisation");
                    m[(row, col)] += self.params.x;
                }
            }
        }
        (basis, m)
    }
}

fn diagonal_energy(p: &ModelParams, index: usize) -> f64 {
    let n_sites = p.n_sites;
    let mass: i64 = (1..=n_sites).map(|n| stagger(n) * (1 + spin(n_sites, index, n))).sum();
    let field: i64 = electric_fields(n_sites, index).iter().map(|l| l * l).sum();
    0.5 * p.mu * mass as f64 + field as f64
}

impl LinearOperator for GaugedHamiltonian {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.params.n_sites;
        let x = self.params.x;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[i] * v[i];
            for bond in 0..n - 1 {
                let mask = 0b11usize << bond;
                let pair = i & mask;
                if pair != 0 && pair != mask {
                    acc += x * v[i ^ mask];
                }
            }
            *o = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_link_width() {
        let m = |n| TruncationRule::HalfSitesPlusOne.link_qubits(n);
        assert_eq!([m(2), m(4), m(6), m(8), m(14), m(100)], [1, 2, 2, 3, 3, 6]);
        let a = |n| TruncationRule::SitesPlusOne.link_qubits(n);
        assert_eq!([a(2), a(4), a(5), a(8)], [2, 3, 4, 4]);
    }

    #[test]
    fn neel_fields_vanish() {
        for n in [2, 4, 10] {
            let i = neel_index(n);
            assert!(electric_fields(n, i).iter().all(|&l| l == 0));
            assert_eq!(spin(n, i, 1), 1);
            assert_eq!(spin(n, i, 2), -1);
        }
        assert_eq!(neel_index(2), 0b01);
    }

    #[test]
    fn two_site_block() {
        let p = ModelParams::new(2, 1.0, 0.5).unwrap();
        let h = GaugedHamiltonian::new(&p).unwrap();
        let (basis, m) = h.sector_matrix();
        assert_eq!(basis, [0b01, 0b10]);
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.5, 2.0]));
    }

    #[test]
    fn field_range_small_chains() {
        assert_eq!(field_range(2), (-1, 0));
        assert_eq!(field_range(4), (-1, 1));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(3, 1.0, 1.0).is_err());
        assert!(ModelParams::new(4, f64::NAN, 1.0).is_err());
        let p = ModelParams::new(28, 1.0, 1.0).unwrap();
        assert!(matches!(GaugedHamiltonian::new(&p), Err(Error::Capacity { .. })));
    }
}
