//! Counts of Pauli terms by Hamming weight `b = |x| + |z|`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::fib::{binomial, fibonacci};
use crate::model::{field_block_entries, interaction_block_entries};
use crate::pauli::{decompose_dense, PauliTerm};
use crate::{Error, Result};

/// Largest `m` accepted by [`brute_force_census`].
pub const BRUTE_FORCE_MAX_M: u32 = 8;

/// Term counts per Hamming weight for one link's field and interaction
/// blocks and one site's mass term.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightCensus {
    pub field_counts: BTreeMap<usize, u64>,
    pub spin_count_at_b1: u64,
    pub interaction_counts: BTreeMap<usize, u64>,
    /// Interaction terms per Pauli weight (qubits acted on).
    pub interaction_by_pauli_weight: BTreeMap<usize, u64>,
}

impl WeightCensus {
    /// True when every count of `self` is at most the matching entry of `bound`.
    pub fn within(&self, bound: &WeightCensus) -> bool {
        let le = |a: &BTreeMap<usize, u64>, b: &BTreeMap<usize, u64>| a.iter().all(|(k, v)| *v <= b.get(k).copied().unwrap_or(0));
        le(&self.field_counts, &bound.field_counts)
            && self.spin_count_at_b1 <= bound.spin_count_at_b1
            && le(&self.interaction_counts, &bound.interaction_counts)
    }
}

/// Upper bounds used by the cost model: `C(m, b)` field terms, one spin
/// term at `b = 1`, `F(b+1)` interaction terms for `2 ≤ b ≤ 2(m+2)`, and
/// `2^{w-1}` interaction terms of Pauli weight `w` for `2 ≤ w ≤ m+2`.
pub fn hamming_census(m: u32) -> Result<WeightCensus> {
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    let field_counts = (0..=m).map(|b| (b as usize, binomial(m, b) as u64)).collect();
    let interaction_counts = (2..=2 * (m + 2)).map(|b| (b as usize, fibonacci(b + 1) as u64)).collect();
    let interaction_by_pauli_weight = (2..=m + 2).map(|w| (w as usize, 1u64 << (w - 1))).collect();
    Ok(WeightCensus {
        field_counts,
        spin_count_at_b1: 1,
        interaction_counts,
        interaction_by_pauli_weight,
    })
}

/// Exact counts from a dense Pauli decomposition of `Σ_l (l - Λ/2)²|l⟩⟨l|`
/// and of one hopping block `σ+ R σ- + h.c.`.
pub fn brute_force_census(m: u32) -> Result<WeightCensus> {
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    if m > BRUTE_FORCE_MAX_M {
        return Err(Error::Capacity {
            what: "m for brute-force census",
            requested: m as usize,
            limit: BRUTE_FORCE_MAX_M as usize,
        });
    }
    let field = decompose_dense(m as usize, &dense(m as usize, &field_block_entries(m)), 1e-12)?;
    let hop = decompose_dense(m as usize + 2, &dense(m as usize + 2, &interaction_block_entries(m)), 1e-12)?;
    // diag(1, -1) on one spin; its identity part is a constant offset
    let spin = decompose_dense(1, &[0.0, 0.0, 0.0, 1.0], 1e-12)?;
    let by = |terms: &[PauliTerm], key: fn(&PauliTerm) -> usize| {
        let mut out = BTreeMap::new();
        for t in terms {
            *out.entry(key(t)).or_insert(0u64) += 1;
        }
        out
    };
    let hw = |t: &PauliTerm| t.pauli.hamming_weight();
    Ok(WeightCensus {
        field_counts: by(&field, hw),
        spin_count_at_b1: spin.iter().filter(|t| t.pauli.hamming_weight() == 1).count() as u64,
        interaction_counts: by(&hop, hw),
        interaction_by_pauli_weight: by(&hop, |t| t.pauli.weight()),
    })
}

fn dense(n: usize, entries: &[(u64, u64, f64)]) -> Vec<f64> {
    let dim = 1usize << n;
    let mut m = alloc::vec![0.0; dim * dim];
    for &(r, c, v) in entries {
        m[r as usize * dim + c as usize] += v;
    }
    m
}
