//! The four subcommands plus `pipeline`, which chains sweep, fit and
//! resources. Each returns a plain-text report and, given an output
//! directory, writes its tables there and records them in the manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use lgt_krylov_core::analysis::{best_median_curve, extrapolate_requirement, fit, quartiles, FitKind, FitModel, SweepPoint};
use lgt_krylov_core::model::{build_pauli_hamiltonian, exact_ground_energy, neel_index, Block, ExactOptions, GaugedHamiltonian};
use lgt_krylov_core::resources::{
    algorithm_cost, campaign_cost, cost_g, cost_g_summation_form, cost_projector_rotation, cost_u, hardware_runtime, rz_to_t_factor,
    step_cost, CostOptions, GateCost, PhasePlacement, ToffoliPolicy,
};
use lgt_krylov_core::solvers::Status;

use crate::config::ExperimentConfig;
use crate::formats::{
    moment_rows, write_pauli_terms, write_table, CampaignRow, CostRow, CsvSink, FitRow, LawRow, Manifest, Provenance, RequirementRow,
    ResultRow, RuntimeRow,
};
use crate::sweep::{run_sweep, summarize};
use crate::{CliError, CliResult};

/// Largest chain whose ground energy `model-info` computes.
pub const ORACLE_MAX_SITES: usize = 22;

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Sizes, term counts and reference energies of the configured chain.
pub fn model_info(cfg: &ExperimentConfig, out: Option<&Path>) -> CliResult<String> {
    let params = cfg.model_params(cfg.model.n_sites)?;
    let n = params.n_sites;
    let m = params.link_qubits();
    let ham = build_pauli_hamiltonian(&params)?;
    let gauged = GaugedHamiltonian::new(&params)?;
    let count = |f: fn(&Block) -> bool| ham.terms.iter().filter(|t| f(&t.block)).count();
    let spin = count(|b| matches!(b, Block::Spin(_)));
    let field = count(|b| matches!(b, Block::Field(_)));
    let inter = count(|b| matches!(b, Block::Interaction(_)));
    let sector = gauged.sector_basis().len();
    let neel = gauged.diagonal()[neel_index(n)];

    let mut r = String::new();
    writeln!(r, "sites N            {n}").unwrap();
    writeln!(r, "mu, x              {}, {}", params.mu, params.x).unwrap();
    writeln!(r, "link qubits m      {m}").unwrap();
    writeln!(r, "link values 2^m    {}", 1u64 << m).unwrap();
    writeln!(r, "field truncated    {}", ham.truncated).unwrap();
    writeln!(r, "register qubits    {}", ham.n_qubits).unwrap();
    writeln!(
        r,
        "pauli terms        {} (spin {spin}, field {field}, interaction {inter}) + identity",
        ham.terms.len()
    )
    .unwrap();
    writeln!(r, "dim spin space     2^{n} = {}", 1u64 << n).unwrap();
    writeln!(r, "dim charge sector  {sector}").unwrap();
    writeln!(r, "dim register       2^{}", ham.n_qubits).unwrap();
    writeln!(r, "neel energy        {neel}").unwrap();
    if n <= ORACLE_MAX_SITES {
        let g = exact_ground_energy(&params, &ExactOptions::default())?;
        writeln!(r, "ground energy      {} ({:?})", g.energy, g.method).unwrap();
        writeln!(r, "interaction energy {}", g.interaction_energy).unwrap();
    } else {
        writeln!(r, "ground energy      skipped above N = {ORACLE_MAX_SITES}").unwrap();
    }

    if let Some(dir) = out {
        ensure_dir(dir)?;
        let prov = Provenance::of(cfg);
        let mut w = BufWriter::new(File::create(dir.join("pauli_terms.txt"))?);
        write_pauli_terms(&ham, &mut w)?;
        drop(w);
        let chain = prepare_chain_moments(cfg, n)?;
        let rows = moment_rows(&chain);
        write_table(&dir.join("moments.csv"), "moments", &prov, &rows)?;
        Manifest::record(
            dir,
            cfg,
            "model-info",
            &[("pauli_terms.txt", ham.terms.len() + 1), ("moments.csv", rows.len())],
        )?;
    }
    Ok(r)
}

fn prepare_chain_moments(cfg: &ExperimentConfig, n: usize) -> CliResult<lgt_krylov_core::krylov::MomentVector> {
    let params = cfg.model_params(n)?;
    let ham = GaugedHamiltonian::new(&params)?;
    let d_max = cfg.solver.dims.iter().copied().max().unwrap_or(1);
    let scale = cfg.solver.scale.unwrap_or(n as f64);
    Ok(lgt_krylov_core::krylov::compute_moments(
        &ham,
        &lgt_krylov_core::model::neel_reference(n)?,
        4 * d_max + 2,
        scale,
    )?)
}

/// Run the full noise grid; writes `results.csv`, `summary.csv` and, when
/// enabled, `noise.csv`.
pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> CliResult<String> {
    ensure_dir(out)?;
    let prov = Provenance::of(cfg);
    let mut results = CsvSink::create(&out.join("results.csv"), "results", &prov)?;
    let mut noise = if cfg.sweep.export_noise {
        Some(CsvSink::create(&out.join("noise.csv"), "noise", &prov)?)
    } else {
        None
    };
    let mut all: Vec<ResultRow> = Vec::new();
    run_sweep(cfg, |cell| {
        results.write_all(cell.results)?;
        results.flush()?;
        if let Some(sink) = noise.as_mut() {
            sink.write_all(cell.noise)?;
            sink.flush()?;
        }
        all.extend_from_slice(cell.results);
        Ok(())
    })?;
    let summary = summarize(&all);
    write_table(&out.join("summary.csv"), "summary", &prov, &summary)?;

    let mut files = vec![("results.csv", results.rows()), ("summary.csv", summary.len())];
    if let Some(n) = &noise {
        files.push(("noise.csv", n.rows()));
    }
    Manifest::record(out, cfg, "sweep", &files)?;

    let failed = all.iter().filter(|r| r.status == Status::Failed.as_str()).count();
    let mut r = String::new();
    writeln!(r, "{} rows, {failed} failed, written to {}", all.len(), out.display()).unwrap();
    writeln!(
        r,
        "{:>4} {:>6} {:>10} {:>4} {:>12} {:>5}",
        "N", "solver", "budget", "D", "median", "ok"
    )
    .unwrap();
    for s in &summary {
        writeln!(
            r,
            "{:>4} {:>6} {:>10.3e} {:>4} {:>12.4e} {:>5}",
            s.n_sites, s.solver, s.budget, s.dim, s.median, s.ok
        )
        .unwrap();
    }
    Ok(r)
}

fn cost_row(n: usize, m: u32, construction: &str, policy: &str, cost: lgt_krylov_core::Result<GateCost>) -> CostRow {
    let mut row = CostRow {
        n_sites: n,
        m,
        construction: construction.into(),
        policy: policy.into(),
        t: f64::NAN,
        cnot: f64::NAN,
        rz: f64::NAN,
        t_with_rot: f64::NAN,
        qubits: 0,
        note: String::new(),
    };
    match cost {
        Ok(c) => {
            row.t = c.t_gates;
            row.cnot = c.cnot_gates;
            row.rz = c.rz_gates;
            row.t_with_rot = c.t_with_rotations;
            row.qubits = c.qubits;
        }
        Err(e) => row.note = e.to_string(),
    }
    row
}

fn with_rotations(c: lgt_krylov_core::Result<GateCost>, n: usize, m: u32, opts: &CostOptions) -> lgt_krylov_core::Result<GateCost> {
    let c = c?;
    Ok(c.with_rotation_factor(rz_to_t_factor(n, m, opts)?))
}

/// Gate counts over the `N` grid for both phase placements and every
/// Toffoli policy; writes `costs.csv` and `runtime.csv`.
pub fn resources(cfg: &ExperimentConfig, out: Option<&Path>) -> CliResult<String> {
    let base = cfg.cost_options()?;
    let processors = cfg.processors()?;
    let mut rows = Vec::new();
    let mut runtime = Vec::new();
    for &n in &cfg.cost.n_grid {
        let m = base.truncation.link_qubits(n);
        rows.push(cost_row(n, m, "G", "-", with_rotations(cost_g(n, m), n, m, &base)));
        rows.push(cost_row(
            n,
            m,
            "G_tally",
            "-",
            with_rotations(cost_g_summation_form(n, m), n, m, &base),
        ));
        for phases in [PhasePlacement::GTilde, PhasePlacement::U] {
            for policy in ToffoliPolicy::ALL {
                let opts = CostOptions {
                    phases_in: phases,
                    toffoli_policy: policy,
                    ..base
                };
                let label = format!("{}/{}", phases.as_str(), policy.as_str());
                rows.push(cost_row(n, m, "U", &label, with_rotations(cost_u(n, m, &opts), n, m, &opts)));
                rows.push(cost_row(
                    n,
                    m,
                    "Pi",
                    &label,
                    with_rotations(cost_projector_rotation(n, m, &opts), n, m, &opts),
                ));
                rows.push(cost_row(n, m, "step", &label, with_rotations(step_cost(n, m, &opts), n, m, &opts)));
                rows.push(cost_row(
                    n,
                    m,
                    &format!("circuit_k{}", cfg.cost.k),
                    &label,
                    algorithm_cost(n, cfg.cost.k, &opts),
                ));
            }
        }
        let constructions = [("G", cost_g(n, m)), ("step", step_cost(n, m, &base))];
        for (name, cost) in constructions {
            let Ok(cost) = cost else { continue };
            let total_qubits = 3 * (n as u64 + m as u64 * (n as u64 - 1)) + m as u64 + 1;
            for p in &processors {
                let serial = hardware_runtime(&cost, p, false, total_qubits)?;
                let parallel = hardware_runtime(&cost, p, true, total_qubits)?;
                runtime.push(RuntimeRow {
                    n_sites: n,
                    m,
                    construction: name.into(),
                    processor: p.name.clone(),
                    cnot: cost.cnot_gates,
                    serial_seconds: serial.seconds,
                    parallel_seconds: parallel.seconds,
                    fraction_t1: serial.fraction_t1,
                    fraction_t2: serial.fraction_t2,
                });
            }
        }
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let prov = Provenance::of(cfg);
        write_table(&dir.join("costs.csv"), "costs", &prov, &rows)?;
        write_table(&dir.join("runtime.csv"), "runtime", &prov, &runtime)?;
        Manifest::record(dir, cfg, "resources", &[("costs.csv", rows.len()), ("runtime.csv", runtime.len())])?;
    }
    let default_label = format!("{}/{}", base.phases_in.as_str(), base.toffoli_policy.as_str());
    let mut r = String::new();
    writeln!(r, "per-step cost ({default_label})").unwrap();
    writeln!(
        r,
        "{:>6} {:>3} {:>14} {:>14} {:>14} {:>16}",
        "N", "m", "T", "CNOT", "Rz", "T+rotations"
    )
    .unwrap();
    for row in rows.iter().filter(|r| r.construction == "step" && r.policy == default_label) {
        if row.note.is_empty() {
            writeln!(
                r,
                "{:>6} {:>3} {:>14.6e} {:>14.6e} {:>14.6e} {:>16.6e}",
                row.n_sites, row.m, row.t, row.cnot, row.rz, row.t_with_rot
            )
            .unwrap();
        } else {
            writeln!(r, "{:>6} {:>3} {}", row.n_sites, row.m, row.note).unwrap();
        }
    }
    Ok(r)
}

/// What the `fit` command was given.
enum FitInput {
    Sweep(Vec<ResultRow>),
    Requirements(Vec<RequirementRow>),
}

fn read_fit_inputs(paths: &[PathBuf]) -> CliResult<FitInput> {
    let mut sweep = Vec::new();
    let mut reqs = Vec::new();
    for p in paths {
        let cols = crate::formats::read_columns(p)?;
        if cols.iter().any(|c| c == "frac_error") {
            sweep.extend(crate::formats::read_table::<ResultRow>(p)?);
        } else if cols.iter().any(|c| c == "requirement") {
            reqs.extend(crate::formats::read_table::<RequirementRow>(p)?);
        } else {
            return Err(CliError::Input(format!(
                "{} is neither a sweep nor a requirement table",
                p.display()
            )));
        }
    }
    match (sweep.is_empty(), reqs.is_empty()) {
        (true, true) => Err(CliError::Input("fit input has no rows".into())),
        (false, true) => Ok(FitInput::Sweep(sweep)),
        (true, false) => Ok(FitInput::Requirements(reqs)),
        (false, false) => Err(CliError::Input("fit input mixes sweep and requirement tables".into())),
    }
}

fn fit_row(solver: &str, n: usize, model: &FitModel, target: f64, req: Option<lgt_krylov_core::analysis::Estimate>) -> FitRow {
    FitRow {
        solver: solver.into(),
        n_sites: n,
        kind: model.kind.as_str().into(),
        chi: model.chi,
        lambda: model.lambda,
        chi_se: model.chi_se,
        lambda_se: model.lambda_se,
        covariance: model.covariance,
        r_squared: model.r_squared,
        n_points: model.n_points,
        target,
        requirement: req.map_or(f64::NAN, |e| e.value),
        requirement_se: req.and_then(|e| e.se),
    }
}

fn law_row(solver: &str, target: f64, model: &FitModel) -> LawRow {
    LawRow {
        solver: solver.into(),
        target,
        kind: model.kind.as_str().into(),
        chi: model.chi,
        lambda: model.lambda,
        chi_se: model.chi_se,
        lambda_se: model.lambda_se,
        covariance: model.covariance,
        r_squared: model.r_squared,
        n_points: model.n_points,
    }
}

/// Per-`N` fits of a sweep: error against `D` for noiseless rows and
/// best-median error against calls for noisy rows.
fn fit_sweep(cfg: &ExperimentConfig, rows: &[ResultRow], report: &mut String) -> (Vec<FitRow>, Vec<RequirementRow>, bool) {
    let noiseless = rows.iter().all(|r| r.budget.is_infinite());
    let mut groups: BTreeMap<(String, usize), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.solver.clone(), r.n_sites)).or_default().push(r);
    }
    let mut fits = Vec::new();
    let mut reqs = Vec::new();
    for ((solver, n), g) in groups {
        let (points, kind) = if noiseless {
            let pts: Vec<SweepPoint> = g
                .iter()
                .filter(|r| r.dim <= cfg.fit.max_dim)
                .map(|r| {
                    let mut p = SweepPoint::new(n, r.dim as f64, r.frac_error);
                    p.dim = Some(r.dim);
                    p.status = match r.status.as_str() {
                        "ok" => Status::Ok,
                        "unstable" => Status::Unstable,
                        _ => Status::Failed,
                    };
                    p
                })
                .collect();
            (pts, FitKind::LogLinear)
        } else {
            let mut cells: BTreeMap<(u64, usize), Vec<f64>> = BTreeMap::new();
            for r in &g {
                if r.frac_error.is_finite() {
                    cells.entry((r.budget.to_bits(), r.dim)).or_default().push(r.frac_error);
                }
            }
            let medians: Vec<SweepPoint> = cells
                .into_iter()
                .filter_map(|((b, d), errs)| {
                    let q = quartiles(&errs)?;
                    let mut p = SweepPoint::new(n, f64::from_bits(b), q.median);
                    p.quartiles = Some(q);
                    p.dim = Some(d);
                    Some(p)
                })
                .collect();
            (best_median_curve(&medians), FitKind::LogLog)
        };
        match fit(&points, kind) {
            Ok(model) => {
                writeln!(
                    report,
                    "{solver} N={n}: {} chi={:.4} lambda={:.4} R2={:.4} ({} points)",
                    kind.as_str(),
                    model.chi,
                    model.lambda,
                    model.r_squared,
                    model.n_points
                )
                .unwrap();
                for &t in &cfg.fit.targets {
                    let est = extrapolate_requirement(&model, t).ok();
                    if let Some(e) = est {
                        reqs.push(RequirementRow {
                            solver: solver.clone(),
                            n_sites: n,
                            target: t,
                            requirement: e.value,
                        });
                    }
                    fits.push(fit_row(&solver, n, &model, t, est));
                }
            }
            Err(e) => writeln!(report, "{solver} N={n}: {e}").unwrap(),
        }
    }
    (fits, reqs, noiseless)
}

/// Fit each requirement against `N`: linear for Krylov dimensions,
/// log-linear for call counts.
fn fit_laws(reqs: &[RequirementRow], kind: FitKind, report: &mut String) -> Vec<(String, f64, FitModel)> {
    let mut groups: BTreeMap<(String, u64), Vec<SweepPoint>> = BTreeMap::new();
    for r in reqs {
        groups
            .entry((r.solver.clone(), r.target.to_bits()))
            .or_default()
            .push(SweepPoint::new(r.n_sites, r.n_sites as f64, r.requirement));
    }
    let mut out = Vec::new();
    for ((solver, t), pts) in groups {
        let target = f64::from_bits(t);
        let distinct_n = pts.iter().map(|p| p.n_sites).collect::<std::collections::BTreeSet<_>>().len();
        if distinct_n < 2 {
            continue;
        }
        match fit(&pts, kind) {
            Ok(model) => {
                writeln!(
                    report,
                    "{solver} target {target:e}: {} law in N, chi={:.4} lambda={:.4} (R2 {:.4})",
                    kind.as_str(),
                    model.chi,
                    model.lambda,
                    model.r_squared
                )
                .unwrap();
                out.push((solver, target, model));
            }
            Err(e) => writeln!(report, "{solver} target {target:e}: {e}").unwrap(),
        }
    }
    out
}

fn law_estimate(model: &FitModel, n: f64) -> lgt_krylov_core::analysis::Estimate {
    let value = model.predict(n);
    let se = match (model.chi_se, model.lambda_se, model.covariance) {
        (Some(sc), Some(sl), Some(cov)) => {
            let var_log = (n * n * sc * sc + sl * sl + 2.0 * n * cov).max(0.0);
            Some(match model.kind {
                FitKind::Linear => var_log.sqrt(),
                _ => value * std::f64::consts::LN_10 * var_log.sqrt(),
            })
        }
        _ => None,
    };
    lgt_krylov_core::analysis::Estimate { value, se }
}

/// Fit sweep or requirement tables and cost the extrapolated campaigns.
///
/// With no `inputs`, reads `results.csv` from the output directory. Writes
/// `fit.csv`, `requirements.csv`, `laws.csv` and `campaign.csv`.
pub fn fit_command(cfg: &ExperimentConfig, inputs: &[PathBuf], out: &Path) -> CliResult<String> {
    let inputs = if inputs.is_empty() {
        vec![out.join("results.csv")]
    } else {
        inputs.to_vec()
    };
    let mut report = String::new();
    let (fits, reqs, dims_only) = match read_fit_inputs(&inputs)? {
        FitInput::Sweep(rows) => fit_sweep(cfg, &rows, &mut report),
        FitInput::Requirements(r) => (Vec::new(), r, false),
    };
    if reqs.is_empty() {
        return Err(CliError::Input(format!("no fit produced a requirement\n{report}")));
    }
    let law_kind = if dims_only { FitKind::Linear } else { FitKind::LogLinear };
    if dims_only {
        // the requirement is a Krylov dimension; fit it linearly in N
        report.push_str("noiseless input: requirements are Krylov dimensions\n");
    }
    let laws = fit_laws(&reqs, law_kind, &mut report);

    let mut campaign = Vec::new();
    if !dims_only {
        let opts = cfg.cost_options()?;
        let mut targets: BTreeMap<(String, u64), Vec<(usize, lgt_krylov_core::analysis::Estimate)>> = BTreeMap::new();
        for (solver, target, model) in &laws {
            let grid: Vec<usize> = if cfg.fit.extrapolate_n.is_empty() {
                let mut ns: Vec<usize> = reqs.iter().filter(|r| &r.solver == solver).map(|r| r.n_sites).collect();
                ns.sort_unstable();
                ns.dedup();
                ns
            } else {
                cfg.fit.extrapolate_n.clone()
            };
            let e = targets.entry((solver.clone(), target.to_bits())).or_default();
            for n in grid {
                e.push((n, law_estimate(model, n as f64)));
            }
        }
        // a single N gives no law; cost its requirement directly
        for r in &reqs {
            let key = (r.solver.clone(), r.target.to_bits());
            targets.entry(key).or_insert_with(|| {
                vec![(
                    r.n_sites,
                    lgt_krylov_core::analysis::Estimate {
                        value: r.requirement,
                        se: None,
                    },
                )]
            });
        }
        for ((solver, t), points) in targets {
            for (n, est) in points {
                let mut row = CampaignRow {
                    solver: solver.clone(),
                    target: f64::from_bits(t),
                    n_sites: n,
                    requirement: est.value,
                    requirement_se: est.se,
                    t: f64::NAN,
                    cnot: f64::NAN,
                    rz: f64::NAN,
                    t_with_rot: f64::NAN,
                    qubits: 0,
                    note: String::new(),
                };
                match campaign_cost(n, est.value, &opts, None) {
                    Ok(c) => {
                        row.t = c.t_gates;
                        row.cnot = c.cnot_gates;
                        row.rz = c.rz_gates;
                        row.t_with_rot = c.t_with_rotations;
                        row.qubits = c.qubits;
                    }
                    Err(e) => row.note = e.to_string(),
                }
                campaign.push(row);
            }
        }
        for c in &campaign {
            writeln!(
                report,
                "{} target {:e} N={}: {:.4e} calls, {:.4e} T with rotations",
                c.solver, c.target, c.n_sites, c.requirement, c.t_with_rot
            )
            .unwrap();
        }
    }

    ensure_dir(out)?;
    let prov = Provenance::of(cfg);
    let law_rows: Vec<LawRow> = laws.iter().map(|(s, t, m)| law_row(s, *t, m)).collect();
    write_table(&out.join("fit.csv"), "fit", &prov, &fits)?;
    write_table(&out.join("requirements.csv"), "requirements", &prov, &reqs)?;
    write_table(&out.join("laws.csv"), "laws", &prov, &law_rows)?;
    write_table(&out.join("campaign.csv"), "campaign", &prov, &campaign)?;
    Manifest::record(
        out,
        cfg,
        "fit",
        &[
            ("fit.csv", fits.len()),
            ("requirements.csv", reqs.len()),
            ("laws.csv", law_rows.len()),
            ("campaign.csv", campaign.len()),
        ],
    )?;
    Ok(report)
}

/// Sweep, fit and resources into one directory.
pub fn pipeline(cfg: &ExperimentConfig, out: &Path) -> CliResult<String> {
    let mut r = sweep(cfg, out)?;
    r.push_str(&fit_command(cfg, &[], out)?);
    r.push_str(&resources(cfg, Some(out))?);
    Ok(r)
}
