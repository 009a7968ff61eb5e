//! File formats: CSV tables with a provenance comment line, Pauli term
//! lists, moment files and the per-directory JSON manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use lgt_krylov_core::krylov::MomentVector;
use lgt_krylov_core::model::PauliHamiltonian;
use lgt_krylov_core::noise::{NoiseSample, ShotAllocation};
use lgt_krylov_core::pauli::PauliTerm;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::{CliError, CliResult};

/// Version tag written into every table and manifest.
pub const SCHEMA_VERSION: &str = "lgt-krylov/1";

/// What produced a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_digest: String,
    pub seed_base: u64,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Self {
            config_digest: cfg.digest(),
            seed_base: cfg.sweep.seed,
        }
    }

    /// The comment line that opens every CSV file.
    pub fn header_line(&self, table: &str) -> String {
        format!(
            "# schema={SCHEMA_VERSION} table={table} config_digest={} seed_base={}",
            self.config_digest, self.seed_base
        )
    }
}

/// Parse a provenance comment line back into its `key=value` pairs.
pub fn parse_header_line(line: &str) -> Option<BTreeMap<String, String>> {
    let body = line.strip_prefix('#')?;
    Some(
        body.split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
    )
}

/// A CSV file being written row by row.
pub struct CsvSink {
    writer: csv::Writer<BufWriter<File>>,
    rows: usize,
}

impl CsvSink {
    pub fn create(path: &Path, table: &str, prov: &Provenance) -> CliResult<Self> {
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "{}", prov.header_line(table))?;
        Ok(Self {
            writer: csv::Writer::from_writer(file),
            rows: 0,
        })
    }

    pub fn write<T: Serialize>(&mut self, row: &T) -> CliResult<()> {
        self.writer.serialize(row)?;
        self.rows += 1;
        Ok(())
    }

    pub fn write_all<'a, T: Serialize + 'a>(&mut self, rows: impl IntoIterator<Item = &'a T>) -> CliResult<()> {
        for r in rows {
            self.write(r)?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> CliResult<()> {
        self.writer.flush()?;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

/// Write a whole table at once.
pub fn write_table<T: Serialize>(path: &Path, table: &str, prov: &Provenance, rows: &[T]) -> CliResult<()> {
    let mut sink = CsvSink::create(path, table, prov)?;
    sink.write_all(rows)?;
    sink.flush()
}

fn reader(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file))
}

/// Column names of a table, skipping comment lines.
pub fn read_columns(path: &Path) -> CliResult<Vec<String>> {
    let mut r = reader(path)?;
    Ok(r.headers()?.iter().map(str::to_string).collect())
}

/// Read every row of a table.
pub fn read_table<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = reader(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?);
    }
    Ok(out)
}

/// The provenance line of a table, if it has one.
pub fn read_provenance(path: &Path) -> CliResult<Option<BTreeMap<String, String>>> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    Ok(parse_header_line(first.trim_end()))
}

/// One energy estimate from a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n_sites: usize,
    pub mu: f64,
    pub x: f64,
    /// `D`, or `D_max` for PQSE.
    pub dim: usize,
    /// Oracle calls; `inf` for noiseless rows.
    pub budget: f64,
    pub seed: u64,
    pub instance: u64,
    pub solver: String,
    pub energy: f64,
    pub frac_error: f64,
    pub status: String,
    /// PQSE partition sizes joined by `-`.
    pub partitions: String,
    pub discarded: usize,
    /// Error message of a failed cell.
    pub note: String,
}

/// Per-cell quartiles of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n_sites: usize,
    pub solver: String,
    pub budget: f64,
    pub dim: usize,
    pub samples: usize,
    pub ok: usize,
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

/// Gate counts of one construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub n_sites: usize,
    pub m: u32,
    pub construction: String,
    pub policy: String,
    pub t: f64,
    pub cnot: f64,
    pub rz: f64,
    pub t_with_rot: f64,
    pub qubits: u64,
    pub note: String,
}

/// Wall-clock estimate of one construction on one processor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRow {
    pub n_sites: usize,
    pub m: u32,
    pub construction: String,
    pub processor: String,
    pub cnot: f64,
    pub serial_seconds: f64,
    pub parallel_seconds: f64,
    pub fraction_t1: Option<f64>,
    pub fraction_t2: f64,
}

/// A per-`N` fit and the control value it needs for one target error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub solver: String,
    pub n_sites: usize,
    pub kind: String,
    pub chi: f64,
    pub lambda: f64,
    pub chi_se: Option<f64>,
    pub lambda_se: Option<f64>,
    pub covariance: Option<f64>,
    pub r_squared: f64,
    pub n_points: usize,
    pub target: f64,
    pub requirement: f64,
    pub requirement_se: Option<f64>,
}

/// Requirement at one `(N, target)`; also accepted as `fit` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementRow {
    #[serde(default)]
    pub solver: String,
    pub n_sites: usize,
    pub target: f64,
    pub requirement: f64,
}

/// Growth law of a requirement across chain lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawRow {
    pub solver: String,
    pub target: f64,
    pub kind: String,
    pub chi: f64,
    pub lambda: f64,
    pub chi_se: Option<f64>,
    pub lambda_se: Option<f64>,
    pub covariance: Option<f64>,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Extrapolated requirement and its whole-campaign gate count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub solver: String,
    pub target: f64,
    pub n_sites: usize,
    pub requirement: f64,
    pub requirement_se: Option<f64>,
    pub t: f64,
    pub cnot: f64,
    pub rz: f64,
    pub t_with_rot: f64,
    pub qubits: u64,
    pub note: String,
}

/// One moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: usize,
    pub mu_k: f64,
    pub scale: f64,
}

/// Shots, width and draw for one moment of one noise instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub n_sites: usize,
    pub budget: f64,
    pub dim: usize,
    pub instance: u64,
    pub k: usize,
    pub shots: f64,
    pub sigma: f64,
    pub delta: f64,
}

pub fn moment_rows(m: &MomentVector) -> Vec<MomentRow> {
    m.values
        .iter()
        .enumerate()
        .map(|(k, &mu_k)| MomentRow { k, mu_k, scale: m.scale })
        .collect()
}

/// Rebuild a moment vector; rows must cover `k = 0, 1, ...` with one scale.
pub fn moments_from_rows(rows: &[MomentRow]) -> CliResult<MomentVector> {
    let Some(first) = rows.first() else {
        return Err(CliError::Input("moment table is empty".into()));
    };
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(|r| r.k);
    for (i, r) in sorted.iter().enumerate() {
        if r.k != i {
            return Err(CliError::Input(format!("moment table is missing order {i}")));
        }
        if r.scale != first.scale {
            return Err(CliError::Input("moment table mixes scales".into()));
        }
    }
    Ok(MomentVector::new(sorted.iter().map(|r| r.mu_k).collect(), first.scale))
}

pub fn noise_rows(n_sites: usize, alloc: &ShotAllocation, sample: &NoiseSample) -> Vec<NoiseRow> {
    (1..=alloc.max_order())
        .map(|k| NoiseRow {
            n_sites,
            budget: alloc.budget,
            dim: alloc.krylov_dim,
            instance: sample.instance,
            k,
            shots: alloc.shots[k],
            sigma: alloc.sigma[k],
            delta: sample.delta.get(k).copied().unwrap_or(0.0),
        })
        .collect()
}

/// Pauli list, one `coeff xbits zbits` line per term; the identity offset
/// comes first as an all-zero string.
pub fn write_pauli_terms<W: Write>(ham: &PauliHamiltonian, mut w: W) -> CliResult<()> {
    let zeros = "0".repeat(ham.n_qubits);
    writeln!(w, "{:e} {zeros} {zeros}", ham.offset)?;
    for t in &ham.terms {
        writeln!(w, "{}", t.term)?;
    }
    Ok(())
}

/// Inverse of [`write_pauli_terms`]; blank lines and `#` comments are skipped.
pub fn read_pauli_terms<R: BufRead>(r: R) -> CliResult<Vec<PauliTerm>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(PauliTerm::parse(t).ok_or_else(|| CliError::Input(format!("bad Pauli term on line {}", i + 1)))?);
    }
    Ok(out)
}

/// Files and row counts of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CommandRecord {
    pub files: BTreeMap<String, usize>,
}

/// `manifest.json` of an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub config_digest: String,
    pub seed_base: u64,
    /// First and last noise instance index.
    pub instances: [u64; 2],
    pub config: ExperimentConfig,
    pub commands: BTreeMap<String, CommandRecord>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.json";

    /// Record `command` in `dir/manifest.json`, keeping entries of earlier
    /// commands run with the same config.
    pub fn record(dir: &Path, cfg: &ExperimentConfig, command: &str, files: &[(&str, usize)]) -> CliResult<PathBuf> {
        let path = dir.join(Self::FILE);
        let digest = cfg.digest();
        let mut commands = BTreeMap::new();
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(old) = serde_json::from_str::<Manifest>(&text) {
                if old.config_digest == digest {
                    commands = old.commands;
                }
            }
        }
        let record = CommandRecord {
            files: files.iter().map(|(f, n)| (f.to_string(), *n)).collect(),
        };
        commands.insert(command.to_string(), record);
        let mut config = cfg.clone();
        config.output = Default::default();
        let m = Manifest {
            schema: SCHEMA_VERSION.into(),
            config_digest: digest,
            seed_base: cfg.sweep.seed,
            instances: [0, cfg.sweep.instances as u64 - 1],
            config,
            commands,
        };
        let text = serde_json::to_string_pretty(&m).map_err(|e| CliError::Input(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
