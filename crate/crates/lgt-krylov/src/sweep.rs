//! The noise sweep: every `(N, budget, D, instance)` cell for every
//! configured solver.
//!
//! Instances of a cell run on a rayon pool; rows are put back in a fixed
//! order before they are handed out, so output does not depend on the
//! worker count. Noise is keyed by `(seed base, instance)` alone, so every
//! solver, budget and `D` sees the same standard-normal draws for a given
//! instance.

use lgt_krylov_core::analysis::quartiles;
use lgt_krylov_core::krylov::{compute_moments, MomentVector};
use lgt_krylov_core::model::{exact_ground_energy, neel_reference, ExactOptions, GaugedHamiltonian, GroundEnergy};
use lgt_krylov_core::noise::{allocate_shots, sample_perturbation, NoiseSample};
use lgt_krylov_core::solvers::{pqse, qse, tqse, EnergyResult, Status};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SolverKind};
use crate::formats::{noise_rows, NoiseRow, ResultRow, SummaryRow};
use crate::{CliError, CliResult};

/// Everything fixed for one chain length.
pub struct ChainData {
    pub n_sites: usize,
    pub ground: GroundEnergy,
    pub moments: MomentVector,
}

/// Exact energy and moments up to the order the largest `D` needs.
pub fn prepare_chain(cfg: &ExperimentConfig, n_sites: usize) -> CliResult<ChainData> {
    let params = cfg.model_params(n_sites)?;
    let ham = GaugedHamiltonian::new(&params)?;
    let ground = exact_ground_energy(&params, &ExactOptions::default())?;
    let d_max = cfg.solver.dims.iter().copied().max().unwrap_or(1);
    let scale = cfg.solver.scale.unwrap_or(n_sites as f64);
    let moments = compute_moments(&ham, &neel_reference(n_sites)?, 4 * d_max + 2, scale)?;
    Ok(ChainData { n_sites, ground, moments })
}

/// One solver on one noise draw.
pub fn solve(
    kind: SolverKind,
    moments: &MomentVector,
    noise: &NoiseSample,
    dim: usize,
    d_cap: Option<usize>,
) -> lgt_krylov_core::Result<EnergyResult> {
    match kind {
        SolverKind::Qse => qse(&noise.apply(moments), dim),
        SolverKind::Tqse => tqse(moments, noise, dim),
        SolverKind::Pqse => pqse(moments, noise, dim, d_cap.unwrap_or(dim).max(2)),
    }
}

/// Rows handed to the caller after each completed cell.
pub struct Cell<'a> {
    pub results: &'a [ResultRow],
    pub noise: &'a [NoiseRow],
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    chain: &'a ChainData,
}

impl Ctx<'_> {
    fn row(&self, kind: SolverKind, dim: usize, budget: f64, instance: u64) -> ResultRow {
        ResultRow {
            n_sites: self.chain.n_sites,
            mu: self.cfg.model.mu,
            x: self.cfg.model.x,
            dim,
            budget,
            seed: self.cfg.sweep.seed,
            instance,
            solver: kind.as_str().into(),
            energy: f64::NAN,
            frac_error: f64::NAN,
            status: Status::Failed.as_str().into(),
            partitions: String::new(),
            discarded: 0,
            note: String::new(),
        }
    }

    fn fill(&self, mut row: ResultRow, out: lgt_krylov_core::Result<EnergyResult>) -> ResultRow {
        match out {
            Ok(r) => {
                row.energy = r.energy;
                row.frac_error = self.chain.ground.fractional_error(r.energy);
                row.status = r.status.as_str().into();
                row.partitions = r.partitions.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("-");
                row.discarded = r.condition.discarded;
            }
            Err(e) => row.note = e.to_string(),
        }
        row
    }
}

/// Run the grid, calling `on_cell` after each `(N, budget, D)` cell.
///
/// Setup failures of a chain (capacity, eigensolver) abort; failures inside
/// a cell are written into its rows.
pub fn run_sweep<F>(cfg: &ExperimentConfig, mut on_cell: F) -> CliResult<()>
where
    F: FnMut(Cell<'_>) -> CliResult<()>,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.output.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.output.workers)))?;
    let kinds = &cfg.solver.kinds;
    for n_sites in cfg.sweep_sites() {
        let chain = pool.install(|| prepare_chain(cfg, n_sites))?;
        let ctx = Ctx { cfg, chain: &chain };
        if cfg.sweep.noiseless {
            for &dim in &cfg.solver.dims {
                let zero = NoiseSample::zero(chain.moments.values.len());
                let rows: Vec<ResultRow> = kinds
                    .iter()
                    .map(|&k| {
                        ctx.fill(
                            ctx.row(k, dim, f64::INFINITY, 0),
                            solve(k, &chain.moments, &zero, dim, cfg.solver.d_cap),
                        )
                    })
                    .collect();
                on_cell(Cell {
                    results: &rows,
                    noise: &[],
                })?;
            }
            continue;
        }
        for &budget in &cfg.sweep.budgets {
            for &dim in &cfg.solver.dims {
                let instances = 0..cfg.sweep.instances as u64;
                let (results, noise) = match allocate_shots(&chain.moments, dim, budget) {
                    Err(e) => {
                        let rows = instances
                            .flat_map(|i| kinds.iter().map(move |&k| (k, i)))
                            .map(|(k, i)| {
                                let mut r = ctx.row(k, dim, budget, i);
                                r.note = e.to_string();
                                r
                            })
                            .collect();
                        (rows, Vec::new())
                    }
                    Ok(alloc) => {
                        let per_instance: Vec<(Vec<ResultRow>, Vec<NoiseRow>)> = pool.install(|| {
                            instances
                                .into_par_iter()
                                .map(|i| {
                                    let sample = sample_perturbation(&alloc, cfg.sweep.seed, i);
                                    let rows = kinds
                                        .iter()
                                        .map(|&k| {
                                            ctx.fill(ctx.row(k, dim, budget, i), solve(k, &chain.moments, &sample, dim, cfg.solver.d_cap))
                                        })
                                        .collect();
                                    let noise = if cfg.sweep.export_noise {
                                        noise_rows(n_sites, &alloc, &sample)
                                    } else {
                                        Vec::new()
                                    };
                                    (rows, noise)
                                })
                                .collect()
                        });
                        let mut rows = Vec::new();
                        let mut noise = Vec::new();
                        for (r, n) in per_instance {
                            rows.extend(r);
                            noise.extend(n);
                        }
                        (rows, noise)
                    }
                };
                on_cell(Cell {
                    results: &results,
                    noise: &noise,
                })?;
            }
        }
    }
    Ok(())
}

/// Quartiles of each `(N, solver, budget, D)` cell, in first-seen order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(usize, String, u64, usize)> = Vec::new();
    let mut groups: std::collections::HashMap<(usize, String, u64, usize), Vec<&ResultRow>> = Default::default();
    for r in rows {
        let key = (r.n_sites, r.solver.clone(), r.budget.to_bits(), r.dim);
        let entry = groups.entry(key.clone()).or_default();
        if entry.is_empty() {
            order.push(key);
        }
        entry.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let errs: Vec<f64> = g.iter().map(|r| r.frac_error).filter(|e| e.is_finite()).collect();
            let q = quartiles(&errs);
            SummaryRow {
                n_sites: key.0,
                solver: key.1,
                budget: f64::from_bits(key.2),
                dim: key.3,
                samples: g.len(),
                ok: g.iter().filter(|r| r.status == Status::Ok.as_str()).count(),
                lower: q.map_or(f64::NAN, |q| q.lower),
                median: q.map_or(f64::NAN, |q| q.median),
                upper: q.map_or(f64::NAN, |q| q.upper),
            }
        })
        .collect()
}
