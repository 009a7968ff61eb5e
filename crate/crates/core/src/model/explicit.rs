//! Explicit-field form: spins plus an `m`-qubit register per gauge link,
//! written as a sum of Pauli strings.
//!
//! Register layout interleaves each link after its left site:
//! `site 1, link 1 (m qubits), site 2, link 2, …, site N`. A link register
//! holding the binary value `l` (most significant bit first) carries the
//! field `L = l - 2^m / 2`. The link raising operator is truncated at the
//! top of the register rather than wrapped around.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{electric_fields, field_range, ModelParams};
use crate::math;
use crate::pauli::{decompose_sparse, PauliString, PauliTerm};
use crate::{Error, Result};

/// Coefficients at or below this magnitude are dropped.
const COEFF_TOL: f64 = 1e-12;

/// Which piece of the Hamiltonian a term came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Block {
    /// On-site mass term of site `n`.
    Spin(usize),
    /// Electric energy of link `n`.
    Field(usize),
    /// Gauge-covariant hopping across link `n`.
    Interaction(usize),
}

/// A Pauli term tagged with its block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTerm {
    pub block: Block,
    pub term: PauliTerm,
}

/// Pauli decomposition of the explicit-field Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    pub n_sites: usize,
    /// Qubits per link register.
    pub link_qubits: u32,
    /// Total register size `N + m(N-1)`.
    pub n_qubits: usize,
    /// Identity contribution of the mass terms.
    pub offset: f64,
    /// All non-zero terms, grouped by block in site order.
    pub terms: Vec<BlockTerm>,
    /// Set when the link register cannot hold every field value of the
    /// Néel sector.
    pub truncated: bool,
}

/// Qubit position of site `n` (1-based).
pub fn site_qubit(n: usize, m: u32) -> usize {
    (n - 1) * (m as usize + 1)
}

/// First qubit of link register `n` (1-based).
pub fn link_offset(n: usize, m: u32) -> usize {
    site_qubit(n, m) + 1
}

/// Non-zero entries of the single-link electric energy `Σ_l (l - Λ/2)² |l⟩⟨l|`.
pub fn field_block_entries(m: u32) -> Vec<(u64, u64, f64)> {
    let lambda = 1u64 << m;
    (0..lambda)
        .filter_map(|l| {
            let f = l as f64 - (lambda / 2) as f64;
            (f != 0.0).then_some((l, l, f * f))
        })
        .collect()
}

/// Non-zero entries of `σ+ ⊗ R ⊗ σ- + h.c.` on `(site, link, site)`,
/// where `R` raises the link value by one and annihilates the top value.
pub fn interaction_block_entries(m: u32) -> Vec<(u64, u64, f64)> {
    let lambda = 1u64 << m;
    let mut out = Vec::new();
    for l in 0..lambda - 1 {
        // left site down -> up, right site up -> down, field +1
        let col = (1 << (m + 1)) | (l << 1);
        let row = ((l + 1) << 1) | 1;
        out.push((row, col, 1.0));
        out.push((col, row, 1.0));
    }
    out
}

/// Build the full Pauli decomposition.
pub fn build_pauli_hamiltonian(params: &ModelParams) -> Result<PauliHamiltonian> {
    params.validate()?;
    let n_sites = params.n_sites;
    let m = params.link_qubits();
    let n_qubits = n_sites + m as usize * (n_sites - 1);
    let half = (1i64 << m) / 2;
    let (lo, hi) = field_range(n_sites);
    let truncated = lo < -half || hi > half - 1;

    let field = decompose_sparse(m as usize, &field_block_entries(m), COEFF_TOL)?;
    let hop = decompose_sparse(m as usize + 2, &interaction_block_entries(m), COEFF_TOL)?;

    let mut terms = Vec::new();
    let mut offset = 0.0;
    for n in 1..=n_sites {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        offset += sign * params.mu / 2.0;
        if params.mu != 0.0 {
            let mut z = PauliString::identity(n_qubits);
            z.z.set(site_qubit(n, m), true);
            terms.push(BlockTerm {
                block: Block::Spin(n),
                term: PauliTerm {
                    coeff: sign * params.mu / 2.0,
                    pauli: z,
                },
            });
        }
    }
    for n in 1..n_sites {
        for t in &field {
            terms.push(BlockTerm {
                block: Block::Field(n),
                term: PauliTerm {
                    coeff: t.coeff,
                    pauli: t.pauli.embed(link_offset(n, m), n_qubits),
                },
            });
        }
    }
    if params.x != 0.0 {
        for n in 1..n_sites {
            for t in &hop {
                terms.push(BlockTerm {
                    block: Block::Interaction(n),
                    term: PauliTerm {
                        coeff: params.x * t.coeff,
                        pauli: t.pauli.embed(site_qubit(n, m), n_qubits),
                    },
                });
            }
        }
    }
    Ok(PauliHamiltonian {
        n_sites,
        link_qubits: m,
        n_qubits,
        offset,
        terms,
        truncated,
    })
}

/// Register index of the Gauss-law state built from spin configuration
/// `spin_index` of the gauged chain, or `None` if a field value does not
/// fit in the link register.
pub fn embed_gauss_state(n_sites: usize, m: u32, spin_index: usize) -> Option<u64> {
    let half = (1i64 << m) / 2;
    let fields = electric_fields(n_sites, spin_index);
    let mut out = 0u64;
    for n in 1..=n_sites {
        let bit = (spin_index >> (n_sites - n)) & 1;
        out = (out << 1) | bit as u64;
        if n < n_sites {
            let l = fields[n - 1] + half;
            if l < 0 || l >= 2 * half {
                return None;
            }
            out = (out << m) | l as u64;
        }
    }
    Some(out)
}

/// Matrix of an operator restricted to a set of basis states.
#[derive(Debug, Clone)]
pub struct SectorProjection {
    pub matrix: DMatrix<f64>,
    /// Largest norm of any column's component outside the set.
    pub leakage: f64,
}

impl PauliHamiltonian {
    /// Project onto the span of `states` (register indices).
    pub fn project(&self, states: &[u64]) -> Result<SectorProjection> {
        if self.n_qubits > crate::pauli::MAX_INDEX_QUBITS {
            return Err(Error::Capacity {
                what: "qubits for projection",
                requested: self.n_qubits,
                limit: crate::pauli::MAX_INDEX_QUBITS,
            });
        }
        let pos: BTreeMap<u64, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let dim = states.len();
        let mut matrix = DMatrix::zeros(dim, dim);
        let mut leakage: f64 = 0.0;
        for (col, &s) in states.iter().enumerate() {
            let mut image: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
            image.insert(s, (self.offset, 0.0));
            for bt in &self.terms {
                let (k, j) = bt.term.pauli.apply_basis(s)?;
                let c = bt.term.coeff;
                let e = image.entry(j).or_insert((0.0, 0.0));
                match k {
                    0 => e.0 += c,
                    1 => e.1 += c,
                    2 => e.0 -= c,
                    _ => e.1 -= c,
                }
            }
            let mut outside = 0.0;
            for (j, (re, im)) in image {
                match pos.get(&j) {
                    Some(&row) => {
                        matrix[(row, col)] += re;
                        outside += im * im;
                    }
                    None => outside += re * re + im * im,
                }
            }
            leakage = leakage.max(math::sqrt(outside));
        }
        Ok(SectorProjection { matrix, leakage })
    }

    /// Terms of one block kind, e.g. all interaction terms of link 1.
    pub fn block_terms(&self, block: Block) -> impl Iterator<Item = &PauliTerm> {
        self.terms.iter().filter(move |t| t.block == block).map(|t| &t.term)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TruncationRule;

    fn counts_by_weight(terms: &[PauliTerm]) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for t in terms {
            *out.entry(t.pauli.weight()).or_insert(0) += 1;
        }
        out
    }

    #[test]
    fn single_qubit_field() {
        let t = decompose_sparse(1, &field_block_entries(1), COEFF_TOL).unwrap();
        // diag(1, 0) = (I + Z)/2
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|t| (t.coeff - 0.5).abs() < 1e-15));
    }

    #[test]
    fn interaction_weight_counts() {
        let expected: [&[(usize, usize)]; 3] = [&[(3, 4)], &[(3, 4), (4, 8)], &[(3, 4), (4, 8), (5, 16)]];
        for (m, want) in (1..=3).zip(expected) {
            let t = decompose_sparse(m as usize + 2, &interaction_block_entries(m), COEFF_TOL).unwrap();
            let got: Vec<_> = counts_by_weight(&t).into_iter().collect();
            assert_eq!(got, want, "m = {m}");
        }
    }

    #[test]
    fn layout_and_counts() {
        let p = ModelParams::new(4, 1.0, 0.0).unwrap();
        let h = build_pauli_hamiltonian(&p).unwrap();
        assert_eq!(h.link_qubits, 2);
        assert_eq!(h.n_qubits, 4 + 2 * 3);
        // field block for m = 2 has identity, two single-Z and one ZZ term
        assert_eq!(h.terms.len(), 4 + 3 * 4);
        assert_eq!(site_qubit(2, 2), 3);
        assert_eq!(link_offset(2, 2), 4);
        assert!(!h.truncated);
    }

    #[test]
    fn neel_embedding_sits_mid_register() {
        // N = 2, m = 1: up, L = 0 -> l = 1, down
        assert_eq!(embed_gauss_state(2, 1, 0b01), Some(0b011));
        // down, up has L = -1 -> l = 0
        assert_eq!(embed_gauss_state(2, 1, 0b10), Some(0b100));
    }

    #[test]
    fn small_register_is_flagged() {
        let p = ModelParams::new(8, 1.0, 1.0)
            .unwrap()
            .with_truncation(TruncationRule::Explicit(1))
            .unwrap();
        assert!(build_pauli_hamiltonian(&p).unwrap().truncated);
    }
}
