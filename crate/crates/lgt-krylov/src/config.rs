//! Experiment configuration.
//!
//! A TOML file with the sections `model`, `solver`, `sweep`, `cost`, `fit`,
//! `output` and an optional `[[processors]]` table. Every key has a default,
//! so an empty file is a valid configuration. Environment variables named
//! `LGTK_<SECTION>_<KEY>` override file values, for example
//! `LGTK_SWEEP_BUDGETS="[1e4, 1e6]"`; values are read as TOML literals and
//! fall back to plain strings.

use std::path::{Path, PathBuf};

use lgt_krylov_core::model::{ModelParams, TruncationRule};
use lgt_krylov_core::resources::{CostOptions, PhasePlacement, ProcessorSpec, RzTermCount, ToffoliPolicy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

/// Prefix of environment overrides.
pub const ENV_PREFIX: &str = "LGTK_";

const SECTIONS: [&str; 6] = ["model", "solver", "sweep", "cost", "fit", "output"];

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub cost: CostSection,
    pub fit: FitSection,
    pub output: OutputSection,
    /// Empty means the built-in reference table.
    pub processors: Vec<ProcessorEntry>,
}

/// Link-register width rule, as written in the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationKey {
    HalfSitesPlusOne,
    SitesPlusOne,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub n_sites: usize,
    pub mu: f64,
    pub x: f64,
    /// Defaults to `explicit` when `m` is given, else `half_sites_plus_one`.
    pub truncation: Option<TruncationKey>,
    pub m: Option<u32>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            n_sites: 8,
            mu: 1.5,
            x: 0.5,
            truncation: None,
            m: None,
        }
    }
}

/// Solver names accepted in `solver.kinds`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Qse,
    Tqse,
    Pqse,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Qse => "qse",
            SolverKind::Tqse => "tqse",
            SolverKind::Pqse => "pqse",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "qse" => Some(SolverKind::Qse),
            "tqse" => Some(SolverKind::Tqse),
            "pqse" => Some(SolverKind::Pqse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub kinds: Vec<SolverKind>,
    /// Krylov dimensions `D` (or `D_max` for PQSE).
    pub dims: Vec<usize>,
    /// Largest PQSE partition; unset means `D_max`.
    pub d_cap: Option<usize>,
    /// Moment rescaling; unset means `N`.
    pub scale: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            kinds: vec![SolverKind::Pqse],
            dims: (1..=8).collect(),
            d_cap: None,
            scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Chain lengths; empty means `model.n_sites` alone.
    pub n_sites: Vec<usize>,
    /// Oracle-call budgets per energy estimate.
    pub budgets: Vec<f64>,
    pub instances: usize,
    /// Seed base of the noise generator.
    pub seed: u64,
    /// Skip noise and solve each `D` once.
    pub noiseless: bool,
    /// Also write every shot allocation and noise draw.
    pub export_noise: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            n_sites: Vec::new(),
            budgets: vec![1e4, 1e6, 1e8],
            instances: 100,
            seed: 1,
            noiseless: false,
            export_noise: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKey {
    AllToAllMultiAncilla,
    AllToAllOneAncilla,
    LinearNearestNeighbour,
}

impl From<PolicyKey> for ToffoliPolicy {
    fn from(k: PolicyKey) -> Self {
        match k {
            PolicyKey::AllToAllMultiAncilla => ToffoliPolicy::AllToAllMultiAncilla,
            PolicyKey::AllToAllOneAncilla => ToffoliPolicy::AllToAllOneAncilla,
            PolicyKey::LinearNearestNeighbour => ToffoliPolicy::LinearNearestNeighbour,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKey {
    GTilde,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RzKey {
    Statement,
    Proof,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    /// Chain lengths of the resource tables.
    pub n_grid: Vec<usize>,
    /// QSVT steps of the single-circuit row.
    pub k: u32,
    pub toffoli_policy: PolicyKey,
    pub eps_alpha: f64,
    pub phases_in: PhaseKey,
    pub rz_term_count: RzKey,
    pub truncation: Option<TruncationKey>,
    pub m: Option<u32>,
}

impl Default for CostSection {
    fn default() -> Self {
        Self {
            n_grid: vec![4, 8, 16, 32, 64, 128, 256, 512, 1024],
            k: 1,
            toffoli_policy: PolicyKey::AllToAllOneAncilla,
            eps_alpha: 1.0,
            phases_in: PhaseKey::GTilde,
            rz_term_count: RzKey::Statement,
            truncation: None,
            m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// Target fractional errors for requirements and campaign costs.
    pub targets: Vec<f64>,
    /// Largest `D` used by noiseless fits.
    pub max_dim: usize,
    /// Chain lengths for extrapolated campaign costs; empty means the
    /// lengths present in the input.
    pub extrapolate_n: Vec<usize>,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            targets: vec![1e-2, 1e-4, 1e-6],
            max_dim: 10,
            extrapolate_n: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            workers: 0,
        }
    }
}

/// One row of the processor table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessorEntry {
    pub name: String,
    pub t1_seconds: Option<f64>,
    pub t2_seconds: f64,
    pub two_qubit_gate_seconds: f64,
}

fn resolve_truncation(key: Option<TruncationKey>, m: Option<u32>, section: &str) -> CliResult<TruncationRule> {
    match (key, m) {
        (None, None) | (Some(TruncationKey::HalfSitesPlusOne), None) => Ok(TruncationRule::HalfSitesPlusOne),
        (Some(TruncationKey::SitesPlusOne), None) => Ok(TruncationRule::SitesPlusOne),
        (None, Some(m)) | (Some(TruncationKey::Explicit), Some(m)) => Ok(TruncationRule::Explicit(m)),
        (Some(TruncationKey::Explicit), None) => Err(CliError::Config(format!("{section}.truncation = \"explicit\" needs {section}.m"))),
        (Some(_), Some(_)) => Err(CliError::Config(format!("{section}.m only applies with truncation = \"explicit\""))),
    }
}

impl ExperimentConfig {
    /// Parse TOML text without overrides.
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read an optional file and apply the `LGTK_` overrides found in `env`.
    pub fn load<I>(path: Option<&Path>, env: I) -> CliResult<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut table: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(e.message().to_string()))?;
        apply_env(&mut table, env)?;
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.model_params(self.model.n_sites)?;
        for &n in &self.sweep.n_sites {
            self.model_params(n)?;
        }
        if self.solver.kinds.is_empty() {
            return bad("solver.kinds must not be empty".into());
        }
        if self.solver.dims.is_empty() || self.solver.dims.contains(&0) {
            return bad("solver.dims must be non-empty and every D at least 1".into());
        }
        if let Some(c) = self.solver.d_cap {
            if c < 2 {
                return bad("solver.d_cap must be at least 2".into());
            }
        }
        if let Some(s) = self.solver.scale {
            if !(s.is_finite() && s > 0.0) {
                return bad("solver.scale must be positive".into());
            }
        }
        if self.sweep.instances == 0 {
            return bad("sweep.instances must be at least 1".into());
        }
        if self.sweep.budgets.is_empty() || self.sweep.budgets.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return bad("sweep.budgets must be non-empty and strictly positive".into());
        }
        if self.fit.targets.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("fit.targets must be strictly positive".into());
        }
        if self.cost.k == 0 {
            return bad("cost.k must be at least 1".into());
        }
        self.cost_options()?.validate()?;
        for p in self.processors()? {
            p.validate()?;
        }
        Ok(())
    }

    /// Model parameters for a chain of `n_sites`.
    pub fn model_params(&self, n_sites: usize) -> CliResult<ModelParams> {
        let rule = resolve_truncation(self.model.truncation, self.model.m, "model")?;
        Ok(ModelParams::new(n_sites, self.model.mu, self.model.x)?.with_truncation(rule)?)
    }

    /// Chain lengths covered by `sweep`.
    pub fn sweep_sites(&self) -> Vec<usize> {
        if self.sweep.n_sites.is_empty() {
            vec![self.model.n_sites]
        } else {
            self.sweep.n_sites.clone()
        }
    }

    pub fn cost_options(&self) -> CliResult<CostOptions> {
        Ok(CostOptions {
            toffoli_policy: self.cost.toffoli_policy.into(),
            eps_alpha: self.cost.eps_alpha,
            phases_in: match self.cost.phases_in {
                PhaseKey::GTilde => PhasePlacement::GTilde,
                PhaseKey::U => PhasePlacement::U,
            },
            rz_term_count: match self.cost.rz_term_count {
                RzKey::Statement => RzTermCount::Statement,
                RzKey::Proof => RzTermCount::Proof,
            },
            truncation: resolve_truncation(self.cost.truncation, self.cost.m, "cost")?,
        })
    }

    /// The configured processor table, or the reference one.
    pub fn processors(&self) -> CliResult<Vec<ProcessorSpec>> {
        if self.processors.is_empty() {
            return Ok(lgt_krylov_core::resources::reference_processors());
        }
        Ok(self
            .processors
            .iter()
            .map(|p| ProcessorSpec {
                name: p.name.clone(),
                t1_seconds: p.t1_seconds,
                t2_seconds: p.t2_seconds,
                two_qubit_gate_seconds: p.two_qubit_gate_seconds,
            })
            .collect())
    }

    /// SHA-256 over every setting that can change a result.
    ///
    /// The `output` section is left out, so the output directory and the
    /// worker count do not change the digest.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn apply_env<I>(table: &mut toml::Table, env: I) -> CliResult<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (name, raw) in vars {
        let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some(section) = SECTIONS.iter().find(|s| rest.starts_with(&format!("{s}_"))) else {
            return Err(CliError::Config(format!("environment override {name} names no config section")));
        };
        let key = &rest[section.len() + 1..];
        let value = parse_env_value(&raw);
        let entry = table
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(key.to_string(), value);
            }
            _ => return Err(CliError::Config(format!("`{section}` must be a table"))),
        }
    }
    Ok(())
}

fn parse_env_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::from_toml("[model]\nn_site = 4\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("n_site"), "{err}");
    }

    #[test]
    fn env_overrides_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[model]\nn_sites = 4\n").unwrap();
        let cfg = ExperimentConfig::load(
            Some(&path),
            env(&[
                ("LGTK_MODEL_N_SITES", "6"),
                ("LGTK_SWEEP_BUDGETS", "[1e3, 1e5]"),
                ("LGTK_COST_PHASES_IN", "u"),
                ("HOME", "/x"),
            ]),
        )
        .unwrap();
        assert_eq!(cfg.model.n_sites, 6);
        assert_eq!(cfg.sweep.budgets, vec![1e3, 1e5]);
        assert_eq!(cfg.cost.phases_in, PhaseKey::U);
    }

    #[test]
    fn unknown_env_section_is_rejected() {
        let err = ExperimentConfig::load(None, env(&[("LGTK_NOPE_X", "1")])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invariants_are_enforced() {
        for text in [
            "[sweep]\ninstances = 0",
            "[sweep]\nbudgets = [1e4, 0.0]",
            "[sweep]\nbudgets = [-1.0]",
            "[model]\nn_sites = 5",
            "[model]\ntruncation = \"explicit\"",
            "[model]\ntruncation = \"sites_plus_one\"\nm = 3",
            "[solver]\ndims = []",
        ] {
            assert_eq!(ExperimentConfig::from_toml(text).unwrap_err().exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn explicit_m_selects_rule() {
        let cfg = ExperimentConfig::from_toml("[model]\nn_sites = 4\nm = 3").unwrap();
        assert_eq!(cfg.model_params(4).unwrap().link_qubits(), 3);
    }

    #[test]
    fn digest_ignores_output_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.workers = 7;
        b.output.dir = "elsewhere".into();
        assert_eq!(a.digest(), b.digest());
        b.sweep.seed += 1;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
