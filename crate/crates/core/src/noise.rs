//! Shot allocation across moments and reproducible Gaussian moment noise.
//!
//! Moment `k` gets `M_k = 𝓜 Var_k / μ_k²` shots, with `𝓜` fixed by the
//! budget `Σ_k k M_k` (estimating `μ_k` costs `k` calls per shot). The
//! resulting standard deviation is `σ_k = √(Var_k / M_k) = |μ_k| / √𝓜`, so
//! every moment carries the same relative error.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::krylov::{moment_variance, MomentVector};
use crate::math;
use crate::{Error, Result};

/// Shots and noise widths for moments `1 ..= 2D+1`.
///
/// Vectors are indexed by moment order; entry 0 is unused and zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotAllocation {
    pub budget: f64,
    pub krylov_dim: usize,
    /// Shared multiplier `𝓜`; infinite when every variance vanishes.
    pub multiplier: f64,
    pub shots: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Every variance is zero, so the moments are known exactly.
    pub exact: bool,
}

impl ShotAllocation {
    /// Highest moment order covered.
    pub fn max_order(&self) -> usize {
        2 * self.krylov_dim + 1
    }

    /// `Σ_k k M_k`.
    pub fn calls(&self) -> f64 {
        self.shots.iter().enumerate().map(|(k, m)| k as f64 * m).sum()
    }
}

/// Split `budget` oracle calls across moments `1 ..= 2D+1`.
///
/// Needs moments up to `4D + 2` for the variances.
pub fn allocate_shots(moments: &MomentVector, krylov_dim: usize, budget: f64) -> Result<ShotAllocation> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::invalid("budget", "must be positive and finite"));
    }
    if krylov_dim == 0 {
        return Err(Error::invalid("krylov_dim", "must be at least 1"));
    }
    let top = 2 * krylov_dim + 1;
    moments.require(2 * top)?;
    let mut var = vec![0.0; top + 1];
    let mut weight = 0.0;
    for (k, v) in var.iter_mut().enumerate().skip(1) {
        *v = moment_variance(moments, k)?;
        if *v > 0.0 {
            let mu = moments.values[k];
            if mu == 0.0 {
                return Err(Error::ZeroMoment { order: k, variance: *v });
            }
            weight += k as f64 * *v / (mu * mu);
        }
    }
    if weight == 0.0 {
        return Ok(ShotAllocation {
            budget,
            krylov_dim,
            multiplier: f64::INFINITY,
            shots: vec![0.0; top + 1],
            sigma: vec![0.0; top + 1],
            exact: true,
        });
    }
    let multiplier = budget / weight;
    let mut shots = vec![0.0; top + 1];
    let mut sigma = vec![0.0; top + 1];
    for k in 1..=top {
        if var[k] > 0.0 {
            let mu = moments.values[k];
            shots[k] = multiplier * var[k] / (mu * mu);
            sigma[k] = math::sqrt(var[k] / shots[k]);
        }
    }
    Ok(ShotAllocation {
        budget,
        krylov_dim,
        multiplier,
        shots,
        sigma,
        exact: false,
    })
}

/// One draw of moment noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSample {
    pub seed: u64,
    pub instance: u64,
    /// `δ_k` indexed by moment order; `δ_0 = 0`.
    pub delta: Vec<f64>,
}

impl NoiseSample {
    /// Noise-free sample of the given length.
    pub fn zero(len: usize) -> Self {
        Self {
            seed: 0,
            instance: 0,
            delta: vec![0.0; len],
        }
    }

    /// Apply to a moment vector.
    pub fn apply(&self, moments: &MomentVector) -> MomentVector {
        moments.perturbed(&self.delta)
    }
}

/// Standard normal draw for `(seed, instance, k)`.
///
/// Each triple owns its own ChaCha stream, so a draw does not depend on how
/// many other moments or instances were sampled.
pub fn standard_normal(seed: u64, instance: u64, k: u64) -> f64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&instance.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(k);
    StandardNormal.sample(&mut rng)
}

/// Draw `δ_k ~ N(0, σ_k²)` for every allocated moment.
pub fn sample_perturbation(alloc: &ShotAllocation, seed: u64, instance: u64) -> NoiseSample {
    let delta = alloc
        .sigma
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            if s > 0.0 {
                s * standard_normal(seed, instance, k as u64)
            } else {
                0.0
            }
        })
        .collect();
    NoiseSample { seed, instance, delta }
}
