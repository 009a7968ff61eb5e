//! Pauli strings in symplectic form and Pauli-basis decomposition.
//!
//! A string is a pair of bit vectors `(x, z)` and stands for
//! `⊗_q i^{x_q z_q} X^{x_q} Z^{z_q}`, so `(1, 1)` on a qubit is `Y`.
//! Qubit 0 is the most significant bit of a computational-basis index.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::{Error, Result};

/// Largest register handled by the index-based helpers.
pub const MAX_INDEX_QUBITS: usize = 63;

/// Fixed-length bit vector, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    /// All-zero string of `len` bits.
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    /// Bits of `value` over `len` qubits, most significant bit on qubit 0.
    pub fn from_index(value: u64, len: usize) -> Self {
        let mut out = Self::zeros(len);
        for q in 0..len.min(64) {
            if (value >> (len - 1 - q)) & 1 == 1 {
                out.set(q, true);
            }
        }
        out
    }

    /// Parse a string of `0` and `1` characters.
    pub fn parse(s: &str) -> Option<Self> {
        let mut out = Self::zeros(s.len());
        for (q, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => out.set(q, true),
                _ => return None,
            }
        }
        Some(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, q: usize) -> bool {
        (self.words[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn set(&mut self, q: usize, bit: bool) {
        let mask = 1u64 << (q % 64);
        if bit {
            self.words[q / 64] |= mask;
        } else {
            self.words[q / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Inverse of [`BitString::from_index`]; `None` past 63 bits.
    pub fn to_index(&self) -> Option<u64> {
        if self.len > MAX_INDEX_QUBITS {
            return None;
        }
        Some((0..self.len).fold(0u64, |acc, q| (acc << 1) | self.get(q) as u64))
    }

    fn and_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn or_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len {
            f.write_str(if self.get(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A Pauli string in symplectic form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub x: BitString,
    pub z: BitString,
}

impl PauliString {
    /// Identity on `n` qubits.
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitString::zeros(n),
            z: BitString::zeros(n),
        }
    }

    /// Build from integer masks over an `n`-qubit register.
    pub fn from_masks(x: u64, z: u64, n: usize) -> Self {
        Self {
            x: BitString::from_index(x, n),
            z: BitString::from_index(z, n),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x.or_count(&self.z)
    }

    /// `|x| + |z|`, i.e. X and Z count once and Y counts twice.
    pub fn hamming_weight(&self) -> usize {
        self.x.count_ones() + self.z.count_ones()
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> usize {
        self.x.and_count(&self.z)
    }

    /// Place this string at `offset` inside a register of `total` qubits.
    pub fn embed(&self, offset: usize, total: usize) -> Self {
        let mut out = Self::identity(total);
        for q in 0..self.num_qubits() {
            out.x.set(offset + q, self.x.get(q));
            out.z.set(offset + q, self.z.get(q));
        }
        out
    }

    /// Action on a basis state: `P|j⟩ = i^k |j'⟩`, returned as `(k, j')`.
    pub fn apply_basis(&self, index: u64) -> Result<(u8, u64)> {
        let (x, z) = match (self.x.to_index(), self.z.to_index()) {
            (Some(x), Some(z)) => (x, z),
            _ => {
                return Err(Error::Capacity {
                    what: "qubits for basis-state action",
                    requested: self.num_qubits(),
                    limit: MAX_INDEX_QUBITS,
                })
            }
        };
        let sign = ((z & index).count_ones() % 2) as u8;
        let k = ((self.y_count() as u8 % 4) + 2 * sign) % 4;
        Ok((k, index ^ x))
    }

    /// Single-letter rendering such as `IXYZ`.
    pub fn letters(&self) -> alloc::string::String {
        (0..self.num_qubits())
            .map(|q| match (self.x.get(q), self.z.get(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            })
            .collect()
    }
}

/// A real-weighted Pauli string.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub pauli: PauliString,
}

impl fmt::Display for PauliTerm {
    /// `coeff xbits zbits`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {} {}", self.coeff, self.pauli.x, self.pauli.z)
    }
}

impl PauliTerm {
    /// Parse the `coeff xbits zbits` line format.
    pub fn parse(line: &str) -> Option<Self> {
        let mut it = line.split_whitespace();
        let coeff = it.next()?.parse().ok()?;
        let x = BitString::parse(it.next()?)?;
        let z = BitString::parse(it.next()?)?;
        if it.next().is_some() || x.len() != z.len() {
            return None;
        }
        Some(Self {
            coeff,
            pauli: PauliString { x, z },
        })
    }
}

/// `(-i)^k` applied to a real number: returns `(re, im)`.
fn minus_i_pow(k: usize, v: f64) -> (f64, f64) {
    match k % 4 {
        0 => (v, 0.0),
        1 => (0.0, -v),
        2 => (-v, 0.0),
        _ => (0.0, v),
    }
}

fn check_register(n: usize) -> Result<()> {
    if n > 24 {
        return Err(Error::Capacity {
            what: "qubits in a decomposed block",
            requested: n,
            limit: 24,
        });
    }
    Ok(())
}

/// Decompose a real symmetric `2^n × 2^n` operator given by its non-zero
/// entries `(row, col, value)`.
///
/// Entries sharing the flip pattern `row ^ col` are gathered and a
/// Walsh–Hadamard transform over the column index yields every `z` at once.
/// Terms with `|coeff| <= tol` are dropped.
pub fn decompose_sparse(n: usize, entries: &[(u64, u64, f64)], tol: f64) -> Result<Vec<PauliTerm>> {
    check_register(n)?;
    let dim = 1usize << n;
    let mut by_x: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for &(row, col, value) in entries {
        if row as usize >= dim || col as usize >= dim {
            return Err(Error::invalid("entries", "index outside the register"));
        }
        by_x.entry(row ^ col).or_insert_with(|| vec![0.0; dim])[col as usize] += value;
    }
    let norm = 1.0 / dim as f64;
    let mut terms = Vec::new();
    for (x, mut v) in by_x {
        walsh_hadamard(&mut v);
        for (z, &s) in v.iter().enumerate() {
            let y = (x & z as u64).count_ones() as usize;
            let (re, im) = minus_i_pow(y, s * norm);
            debug_assert!(math::abs(im) <= 1e-9 * (1.0 + math::abs(s)), "non-Hermitian block");
            if math::abs(re) > tol {
                terms.push(PauliTerm {
                    coeff: re,
                    pauli: PauliString::from_masks(x, z as u64, n),
                });
            }
        }
    }
    Ok(terms)
}

/// In-place unnormalised Walsh–Hadamard transform.
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in (0..v.len()).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Decompose a dense row-major real matrix by evaluating
/// `Tr(P† A) / 2^n` for each of the `4^n` Pauli strings.
pub fn decompose_dense(n: usize, matrix: &[f64], tol: f64) -> Result<Vec<PauliTerm>> {
    check_register(n)?;
    let dim = 1usize << n;
    if matrix.len() != dim * dim {
        return Err(Error::invalid("matrix", "length must be 4^n"));
    }
    let mut terms = Vec::new();
    for x in 0..dim {
        for z in 0..dim {
            let mut s = 0.0;
            for j in 0..dim {
                let a = matrix[(j ^ x) * dim + j];
                if a != 0.0 {
                    if (z & j).count_ones() % 2 == 1 {
                        s -= a;
                    } else {
                        s += a;
                    }
                }
            }
            let y = (x & z).count_ones() as usize;
            let (re, _) = minus_i_pow(y, s / dim as f64);
            if math::abs(re) > tol {
                terms.push(PauliTerm {
                    coeff: re,
                    pauli: PauliString::from_masks(x as u64, z as u64, n),
                });
            }
        }
    }
    Ok(terms)
}
