//! Experiment configuration: one JSON document per campaign.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sqlab_core::adversary::{tripartite_template, AdversarySpec};
use sqlab_core::embedder::{Mode, PipelineParams};
use sqlab_core::rng::derive_seed;
use sqlab_core::Graph;

use crate::CliError;

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Requested regime; pipeline runs reject a request the density cannot honour.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub generate: Option<GenerateConfig>,
    #[serde(default)]
    pub attack: Option<AttackConfig>,
    #[serde(default)]
    pub search: Option<SearchConfig>,
    #[serde(default)]
    pub pipeline: Option<PipelineConfig>,
    #[serde(default)]
    pub measure: Option<MeasureConfig>,
    #[serde(default)]
    pub prune: Option<PruneConfig>,
    /// Directory of the config file; relative graph paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file = fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if cfg.trials == 0 {
            return Err(CliError::Config("trials must be positive".into()));
        }
        Ok(cfg)
    }

    /// Seed of trial `i`, a fixed hash of the master seed and the index.
    pub fn trial_seed(&self, i: usize) -> u64 {
        derive_seed(self.master_seed, i as u64)
    }

    pub fn section<'a, T>(&self, section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("config has no \"{name}\" section")))
    }
}

/// Where a trial's host graph comes from.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    Gnp { n: usize, p: f64 },
    Complete { n: usize },
    Empty { n: usize },
    SquareCycle { n: usize },
    /// The unbalanced complete tripartite graph on `3m + 1` vertices.
    Tripartite { m: usize },
    File { path: PathBuf },
}

impl GraphSpec {
    /// Builds the graph; only `gnp` consumes the seed.
    pub fn build(&self, seed: u64, base_dir: &Path) -> Result<Graph, CliError> {
        let cfg = |e: String| CliError::Config(e);
        match self {
            GraphSpec::Gnp { n, p } => Graph::gnp(*n, *p, seed).map_err(|e| cfg(e.to_string())),
            GraphSpec::Complete { n } => Ok(Graph::complete(*n)),
            GraphSpec::Empty { n } => Ok(Graph::empty(*n)),
            GraphSpec::SquareCycle { n } => Ok(Graph::square_cycle(*n)),
            GraphSpec::Tripartite { m } => tripartite_template(*m).map_err(|e| cfg(e.to_string())),
            GraphSpec::File { path } => {
                let full = base_dir.join(path);
                let f = fs::File::open(&full).map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
                Graph::read_text(BufReader::new(f)).map_err(|e| cfg(format!("{}: {e}", full.display())))
            }
        }
    }

    /// The generating edge probability, when there is one.
    pub fn p(&self) -> Option<f64> {
        match self {
            GraphSpec::Gnp { p, .. } => Some(*p),
            GraphSpec::Complete { .. } => Some(1.0),
            GraphSpec::Empty { .. } => Some(0.0),
            _ => None,
        }
    }
}

/// Applies an optional adversary, reseeding it for the trial.
pub fn attack_graph(g: Graph, adversary: Option<&AdversarySpec>, trial_seed: u64) -> Result<(Graph, String), CliError> {
    match adversary {
        None => Ok((g, "none".into())),
        Some(spec) => {
            let spec = spec.with_seed(derive_seed(trial_seed, spec.seed().unwrap_or(0)));
            let attack = sqlab_core::adversary::apply(&g, &spec).map_err(|e| CliError::Config(e.to_string()))?;
            Ok((attack.graph, spec.label()))
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub n: usize,
    pub p: f64,
    /// Explicit seed; defaults to the seed of trial 0.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "GenerateConfig::default_file")]
    pub file: String,
}

impl GenerateConfig {
    fn default_file() -> String {
        "graph.txt".into()
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub graph: GraphSpec,
    pub adversary: AdversarySpec,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Exact,
    Greedy,
}

impl SearchMethod {
    pub fn label(self) -> &'static str {
        match self {
            SearchMethod::Exact => "exact",
            SearchMethod::Greedy => "greedy",
        }
    }
}

fn default_budget() -> u64 {
    10_000_000
}

fn default_lookahead() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub adversary: Option<AdversarySpec>,
    pub method: SearchMethod,
    #[serde(default = "default_budget")]
    pub node_budget: u64,
    #[serde(default = "default_lookahead")]
    pub lookahead: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub adversary: Option<AdversarySpec>,
    #[serde(default)]
    pub params: PipelineParams,
    /// Required fraction of successful trials; exit code 3 below it.
    #[serde(default)]
    pub success_bar: Option<f64>,
    #[serde(default = "yes")]
    pub write_traces: bool,
}

fn yes() -> bool {
    true
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_alpha() -> f64 {
    0.1
}

fn default_ratio() -> f64 {
    0.25
}

fn default_samples() -> usize {
    100
}

fn default_sigmas() -> f64 {
    6.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureConfig {
    /// Expansion fractions of sampled first-pair edges of (optionally pruned)
    /// random chains.
    Expansion {
        k: usize,
        n0: usize,
        p0: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default = "yes")]
        prune: bool,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        epsilon_0: Option<f64>,
        #[serde(default = "default_ratio")]
        eps_cor_ratio: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        /// Per-trial bar on the minimum fraction.
        #[serde(default)]
        bar: Option<f64>,
        /// Required fraction of trials meeting `bar`.
        #[serde(default)]
        trial_bar: Option<f64>,
    },
    /// Per-edge triangle counts of sampled edges.
    Triangles {
        graph: GraphSpec,
        #[serde(default = "default_samples")]
        edge_samples: usize,
        #[serde(default = "default_sigmas")]
        sigmas: f64,
        /// Required fraction of sampled edges inside the band.
        #[serde(default)]
        bar: Option<f64>,
    },
    /// Square-path counts between sampled end edges of random chains.
    PathCounts {
        k: usize,
        n0: usize,
        p0: f64,
        #[serde(default = "default_samples")]
        pairs: usize,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruneConfig {
    pub k: usize,
    pub n0: usize,
    pub p0: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Defaults to `epsilon / 3`.
    #[serde(default)]
    pub epsilon_0: Option<f64>,
    #[serde(default = "default_ratio")]
    pub eps_cor_ratio: f64,
    /// Largest acceptable per-pair removal fraction.
    #[serde(default)]
    pub max_fraction_bar: Option<f64>,
}
