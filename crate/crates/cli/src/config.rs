//! JSON experiment specs and their resolution into core objects.

use std::fs;
use std::path::{Path, PathBuf};

use imitanet_core::dynamics::SimConfig;
use imitanet_core::rng::stream;
use imitanet_core::topology::EvolutionConfig;
use imitanet_core::{Game, Network, StrategyProfile, TrendParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Simulate,
    Coevolve,
    Trend,
    Sweep,
    Analyze,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Simulate => "simulate",
            CommandKind::Coevolve => "coevolve",
            CommandKind::Trend => "trend",
            CommandKind::Sweep => "sweep",
            CommandKind::Analyze => "analyze",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Complete { n: usize },
    Cycle { n: usize },
    Path { n: usize },
    Star { n: usize },
    KarateClub,
    BarabasiAlbert { n: usize, m: usize },
    ErdosRenyi { n: usize, p: f64 },
    /// Whitespace-separated 1-indexed pairs, optional third column weight.
    EdgeList { path: PathBuf, n: Option<usize> },
}

impl GraphSpec {
    pub fn is_random(&self) -> bool {
        matches!(self, GraphSpec::BarabasiAlbert { .. } | GraphSpec::ErdosRenyi { .. })
    }

    /// Builds the network; random generators draw from stream `run` of `seed`.
    pub fn build(&self, seed: Option<u64>, run: u64, base: &Path) -> Result<Network, CliError> {
        let need_seed = || seed.ok_or_else(|| CliError::Input("random graph generators need a seed".into()));
        let net = match self {
            GraphSpec::Complete { n } => Network::complete(*n)?,
            GraphSpec::Cycle { n } => Network::cycle(*n)?,
            GraphSpec::Path { n } => Network::path(*n)?,
            GraphSpec::Star { n } => Network::star(*n)?,
            GraphSpec::KarateClub => Network::karate_club(),
            GraphSpec::BarabasiAlbert { n, m } => Network::barabasi_albert(*n, *m, &mut stream(need_seed()?, run))?,
            GraphSpec::ErdosRenyi { n, p } => Network::erdos_renyi(*n, *p, &mut stream(need_seed()?, run))?,
            GraphSpec::EdgeList { path, n } => {
                let text = read_text(&resolve(base, path))?;
                Network::parse_edge_list(&text, *n)?
            }
        };
        Ok(net)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    PrisonersDilemma { r: f64, s: f64, t: f64, p: f64 },
    StagHunt,
    Chicken,
    Rps { a: f64 },
    Matrix { rows: Vec<Vec<f64>> },
}

impl GameSpec {
    pub fn build(&self) -> Result<Game, CliError> {
        Ok(match self {
            GameSpec::PrisonersDilemma { r, s, t, p } => Game::prisoners_dilemma(*r, *s, *t, *p)?,
            GameSpec::StagHunt => Game::stag_hunt(),
            GameSpec::Chicken => Game::chicken(),
            GameSpec::Rps { a } => Game::rps(*a),
            GameSpec::Matrix { rows } => Game::from_rows(rows)?,
        })
    }
}

/// Initial strategies. Leaders default to the two highest-degree vertices;
/// `others` omitted means uniform random draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    LeadersE1 {
        leaders: Option<Vec<usize>>,
        others: Option<Vec<f64>>,
    },
    LeadersE2 {
        leaders: Option<Vec<usize>>,
        others: Option<Vec<f64>>,
    },
    RandomWithSeed,
    /// One row per player, whitespace or comma separated.
    Explicit { path: PathBuf },
}

/// Stream index used for random initial strategies.
pub const PROFILE_STREAM: u64 = 1;
/// Stream index used for random graphs in single-run commands.
pub const GRAPH_STREAM: u64 = 0;

pub fn top_degree(net: &Network, k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..net.n()).collect();
    v.sort_by(|&a, &b| net.degree(b).cmp(&net.degree(a)).then(a.cmp(&b)));
    v.truncate(k);
    v.sort();
    v
}

impl ProfileSpec {
    pub fn needs_seed(&self) -> bool {
        match self {
            ProfileSpec::LeadersE1 { others, .. } | ProfileSpec::LeadersE2 { others, .. } => others.is_none(),
            ProfileSpec::RandomWithSeed => true,
            ProfileSpec::Explicit { .. } => false,
        }
    }

    pub fn leaders(&self, net: &Network) -> Option<Vec<usize>> {
        match self {
            ProfileSpec::LeadersE1 { leaders, .. } | ProfileSpec::LeadersE2 { leaders, .. } => {
                Some(leaders.clone().unwrap_or_else(|| top_degree(net, 2)))
            }
            _ => None,
        }
    }

    pub fn build(&self, net: &Network, m: usize, seed: Option<u64>, base: &Path) -> Result<StrategyProfile, CliError> {
        let n = net.n();
        let random = |seed: Option<u64>| -> Result<StrategyProfile, CliError> {
            let seed = seed.ok_or_else(|| CliError::Input("random initial strategies need a seed".into()))?;
            Ok(StrategyProfile::random(n, m, &mut stream(seed, PROFILE_STREAM))?)
        };
        match self {
            ProfileSpec::LeadersE1 { others, .. } | ProfileSpec::LeadersE2 { others, .. } => {
                let k = if matches!(self, ProfileSpec::LeadersE1 { .. }) { 0 } else { 1 };
                let mut x = match others {
                    Some(row) => StrategyProfile::from_rows(&vec![row.clone(); n])?,
                    None => random(seed)?,
                };
                let mut pure = vec![0.0; m];
                if k >= m {
                    return Err(CliError::Input(format!("game has {m} strategies, preset needs e{}", k + 1)));
                }
                pure[k] = 1.0;
                for v in self.leaders(net).unwrap_or_default() {
                    if v >= n {
                        return Err(CliError::Input(format!("leader {v} out of range for {n} players")));
                    }
                    x.set_row(v, &pure)?;
                }
                Ok(x)
            }
            ProfileSpec::RandomWithSeed => random(seed),
            ProfileSpec::Explicit { path } => {
                let text = read_text(&resolve(base, path))?;
                let rows = parse_rows(&text)?;
                let x = StrategyProfile::from_rows(&rows)?;
                if x.players() != n || x.strategies() != m {
                    return Err(CliError::Input(format!(
                        "profile is {}x{}, expected {n}x{m}",
                        x.players(),
                        x.strategies()
                    )));
                }
                Ok(x)
            }
        }
    }
}

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| CliError::Input(format!("profile line {}: {e}", k + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Which vertices start on the trend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Vertices(Vec<usize>),
    Policy(SeedPolicy),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPolicy {
    /// Highest degree, lowest index on ties.
    MaxDegree,
    /// Lowest degree, lowest index on ties.
    MinDegree,
}

impl SeedSpec {
    pub fn resolve(&self, net: &Network) -> Vec<usize> {
        match self {
            SeedSpec::Vertices(v) => v.clone(),
            SeedSpec::Policy(SeedPolicy::MaxDegree) => top_degree(net, 1),
            SeedSpec::Policy(SeedPolicy::MinDegree) => {
                (0..net.n()).min_by_key(|&v| (net.degree(v), v)).into_iter().collect()
            }
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_collapse() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendSpec {
    pub params: TrendParams,
    pub seeds: SeedSpec,
    pub alpha: f64,
    pub horizon: u64,
    #[serde(default = "one")]
    pub self_weight: f64,
    #[serde(default = "default_collapse")]
    pub collapse_threshold: f64,
    /// Optional grid: one run per `(beta, alpha)` pair, overriding the scalars.
    #[serde(default)]
    pub betas: Vec<f64>,
    #[serde(default)]
    pub alphas: Vec<f64>,
}

/// Inclusive evenly spaced values, or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Range {
    List(Vec<f64>),
    Steps { from: f64, to: f64, count: usize },
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Range::List(v) if v.is_empty() => Err(CliError::Input("empty parameter list".into())),
            Range::List(v) => Ok(v.clone()),
            Range::Steps { count: 0, .. } => Err(CliError::Input("range count must be positive".into())),
            Range::Steps { from, count: 1, .. } => Ok(vec![*from]),
            Range::Steps { from, to, count } => {
                Ok((0..*count).map(|k| from + (to - from) * k as f64 / (*count - 1) as f64).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedVertices {
    All,
    Every(usize),
}

impl Default for SeedVertices {
    fn default() -> Self {
        SeedVertices::All
    }
}

impl SeedVertices {
    pub fn select(&self, n: usize) -> Result<Vec<usize>, CliError> {
        match self {
            SeedVertices::All => Ok((0..n).collect()),
            SeedVertices::Every(0) => Err(CliError::Input("seed vertex stride must be positive".into())),
            SeedVertices::Every(k) => Ok((0..n).step_by(*k).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepModel {
    /// `π ~ 1 - exp(α₀ - α·d)` fitted on degree.
    #[default]
    Degree,
    /// Mean saturation per `(β, α)` fitted linearly.
    Mean,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub graphs: usize,
    /// `r, s, t, p` plus optional `s0, t0, p0, exponent_sign`; `beta` is swept.
    pub params: TrendParams,
    #[serde(default)]
    pub seed_vertices: SeedVertices,
    pub betas: Range,
    pub alphas: Range,
    pub horizon: u64,
    #[serde(default = "one")]
    pub self_weight: f64,
    #[serde(default = "default_collapse")]
    pub collapse_threshold: f64,
    #[serde(default)]
    pub models: SweepModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSpec {
    /// Maximal set for the max-min check; defaults to the profile's leaders,
    /// then to the maximal set of the initial imitation graph.
    pub maximal: Option<Vec<usize>>,
    /// Two-strategy reduction with the leaders pinned at `(leader_y, 1-leader_y)`.
    pub reduction: Option<ReductionSpec>,
    /// Strategy steps simulated for the energy series and the product check.
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionSpec {
    pub leader_y: f64,
    pub free: imitanet_core::analysis::FreeEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Keep every `every`-th step in per-step CSVs.
    pub every: usize,
    pub svg: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { every: 1, svg: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Must match the subcommand when given.
    #[serde(default)]
    pub command: Option<CommandKind>,
    #[serde(default)]
    pub graph: Option<GraphSpec>,
    #[serde(default)]
    pub game: Option<GameSpec>,
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub evo: EvolutionConfig,
    #[serde(default)]
    pub trend: Option<TrendSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub analyze: AnalyzeSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Directory relative paths resolve against; set from the config location.
    #[serde(skip)]
    pub base: PathBuf,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        let mut spec: ExperimentSpec =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        spec.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(spec)
    }

    pub fn graph(&self) -> Result<&GraphSpec, CliError> {
        self.graph.as_ref().ok_or_else(|| CliError::Input("missing `graph`".into()))
    }

    pub fn game(&self) -> Result<&GameSpec, CliError> {
        self.game.as_ref().ok_or_else(|| CliError::Input("missing `game`".into()))
    }

    pub fn profile(&self) -> Result<&ProfileSpec, CliError> {
        self.profile.as_ref().ok_or_else(|| CliError::Input("missing `profile`".into()))
    }

    pub fn build_network(&self) -> Result<Network, CliError> {
        self.graph()?.build(self.seed, GRAPH_STREAM, &self.base)
    }

    /// Graph, game and initial profile, checked for a seed where one is needed.
    pub fn build_instance(&self) -> Result<(Network, Game, StrategyProfile), CliError> {
        let net = self.build_network()?;
        let game = self.game()?.build()?;
        let x = self.profile()?.build(&net, game.strategies(), self.seed, &self.base)?;
        Ok((net, game, x))
    }

    pub fn validate_for(&self, kind: CommandKind) -> Result<(), CliError> {
        if let Some(c) = self.command {
            if c != kind {
                return Err(CliError::Input(format!("config is for `{}`, invoked as `{}`", c.name(), kind.name())));
            }
        }
        if self.output.every == 0 {
            return Err(CliError::Input("output.every must be positive".into()));
        }
        let randomized = self.graph.as_ref().is_some_and(GraphSpec::is_random)
            || (matches!(kind, CommandKind::Simulate | CommandKind::Coevolve | CommandKind::Analyze)
                && self.profile.as_ref().is_some_and(ProfileSpec::needs_seed))
            || kind == CommandKind::Sweep;
        if randomized && self.seed.is_none() {
            return Err(CliError::Input("this experiment is randomized and needs a `seed`".into()));
        }
        self.sim.validate()?;
        self.evo.validate()?;
        Ok(())
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_spec() {
        let text = r#"{
            "command": "simulate",
            "graph": {"kind": "karate_club"},
            "game": {"kind": "stag_hunt"},
            "profile": {"preset": "leaders-e1", "others": [0.9, 0.1]},
            "sim": {"alpha": 0.2},
            "seed": 4
        }"#;
        let spec: ExperimentSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.sim.alpha, 0.2);
        assert_eq!(spec.sim.horizon, SimConfig::default().horizon);
        let (net, _, x) = spec.build_instance().unwrap();
        assert_eq!(x.row(0), &[1.0, 0.0]);
        assert_eq!(x.row(5), &[0.9, 0.1]);
        assert_eq!(top_degree(&net, 2), vec![0, 33]);
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"graph": {"kind": "complete", "n": 3, "m": 2}}"#;
        assert!(serde_json::from_str::<ExperimentSpec>(text).is_err());
    }

    #[test]
    fn random_runs_require_a_seed() {
        let text = r#"{"graph": {"kind": "cycle", "n": 5}, "game": {"kind": "chicken"},
                       "profile": {"preset": "random-with-seed"}}"#;
        let spec: ExperimentSpec = serde_json::from_str(text).unwrap();
        assert!(spec.validate_for(CommandKind::Simulate).is_err());
        assert!(spec.validate_for(CommandKind::Coevolve).is_err());
    }

    #[test]
    fn ranges_expand() {
        let r = Range::Steps { from: 0.1, to: 0.25, count: 4 };
        let v = r.values().unwrap();
        assert_eq!(v.len(), 4);
        assert!((v[3] - 0.25).abs() < 1e-15);
        assert!(Range::List(vec![]).values().is_err());
    }

    #[test]
    fn seed_policies() {
        let net = Network::star(5).unwrap();
        assert_eq!(SeedSpec::Policy(SeedPolicy::MaxDegree).resolve(&net), vec![0]);
        assert_eq!(SeedSpec::Policy(SeedPolicy::MinDegree).resolve(&net), vec![1]);
        let spec: SeedSpec = serde_json::from_str("\"max-degree\"").unwrap();
        assert_eq!(spec, SeedSpec::Policy(SeedPolicy::MaxDegree));
    }
}
