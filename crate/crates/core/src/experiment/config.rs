use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::adversarial::{Opponent, VectorGameFile, VectorPayoffGame};
use crate::error::{Error, Result};
use crate::game::{CoalitionEntry, GameFile, MissingValue};
use crate::network::{Edge, Topology};
use crate::optim::Polyhedron;

/// Either a path (relative paths resolve against the config file's
/// directory) or the object itself, inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    File(PathBuf),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> Source<T> {
    pub fn load(&self, base_dir: &Path) -> Result<T> {
        match self {
            Source::Inline(v) => Ok(v.clone()),
            Source::File(p) => {
                let path = base_dir.join(p);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
                parse_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
            }
        }
    }
}

/// JSON parsing with the failing field path and position in the message.
pub(crate) fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Error::Config(inner.to_string())
        } else {
            Error::Config(format!("field `{path}`: {inner}"))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    #[default]
    Static,
    RoundRobin,
    Explicit,
}

/// Communication graphs. Players in edge lists are numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default)]
    pub topology: Option<Topology>,
    #[serde(default)]
    pub mode: ScheduleMode,
    #[serde(default = "default_edges_per_step")]
    pub edges_per_step: usize,
    /// Static mode: explicit edge list instead of a named topology.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    /// Explicit mode: one edge list per step, repeated cyclically.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phases: Vec<Vec<[usize; 2]>>,
    /// Connectivity window `Q` used by validation. Defaults to 1 for static
    /// graphs and to the schedule period otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

fn default_edges_per_step() -> usize {
    1
}

impl ScheduleSpec {
    pub fn static_topology(topology: Topology) -> Self {
        ScheduleSpec {
            topology: Some(topology),
            mode: ScheduleMode::Static,
            edges_per_step: 1,
            edges: None,
            phases: Vec::new(),
            window: None,
        }
    }
}

pub(crate) fn zero_based(edges: &[[usize; 2]], n: usize) -> Result<Vec<Edge>> {
    edges
        .iter()
        .map(|&[a, b]| {
            for v in [a, b] {
                if v == 0 || v > n {
                    return Err(Error::PlayerOutOfRange {
                        index: v,
                        players: n,
                    });
                }
            }
            Ok((a - 1, b - 1))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    CoreApproach {
        #[serde(default = "default_alpha_min")]
        alpha_min: f64,
    },
    Adversarial {
        game: Source<VectorGameFile>,
        #[serde(default = "default_opponent")]
        opponent: Opponent,
        #[serde(default = "default_margin")]
        margin: f64,
    },
}

fn default_alpha_min() -> f64 {
    0.05
}

fn default_opponent() -> Opponent {
    Opponent::WorstCase
}

fn default_margin() -> f64 {
    1e-6
}

impl PolicySpec {
    pub fn mode(&self) -> Mode {
        match self {
            PolicySpec::CoreApproach { .. } => Mode::Cooperative,
            PolicySpec::Adversarial { .. } => Mode::Adversarial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cooperative,
    Adversarial,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cooperative" => Ok(Mode::Cooperative),
            "adversarial" => Ok(Mode::Adversarial),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected cooperative or adversarial)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Cooperative => "cooperative",
            Mode::Adversarial => "adversarial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub projection: f64,
    pub lemma1: f64,
    pub lemma3: f64,
    /// Tolerance of the membership verdict on the consensus point.
    pub membership: f64,
    /// A consensus point is reported only below this consensus error.
    pub consensus: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            projection: 1e-9,
            lemma1: 1e-7,
            lemma3: 1e-9,
            membership: 1e-3,
            consensus: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Player `i` starts at `scale · b_i`; `scale` defaults to the grand
    /// coalition value.
    SelfReward {
        #[serde(default)]
        scale: Option<f64>,
    },
    /// Every player starts at the same point.
    Point(Vec<f64>),
    /// One starting point per player.
    Estimates(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingSpec {
    Floor(f64),
    Strict,
}

impl From<MissingSpec> for MissingValue {
    fn from(m: MissingSpec) -> Self {
        match m {
            MissingSpec::Floor(f) => MissingValue::Floor(f),
            MissingSpec::Strict => MissingValue::Strict,
        }
    }
}

/// `"a..b"` (inclusive) or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedList {
    Range(String),
    List(Vec<u64>),
}

impl SeedList {
    pub fn resolve(&self) -> Result<Vec<u64>> {
        match self {
            SeedList::Range(s) => parse_seed_range(s),
            SeedList::List(v) => Ok(v.clone()),
        }
    }
}

/// Parses `a..b` into `a, a+1, …, b`. A single number is a one-seed range.
pub fn parse_seed_range(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("bad seed range `{s}` (expected a..b)"));
    let s = s.trim();
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if b < a {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

/// A complete experiment description, usually read from a JSON file.
///
/// Exactly one of `game` (target is the core) and `target` (any polyhedron)
/// is set. `players` defaults to the game size and is required with a bare
/// polyhedron target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<Source<GameFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing: Option<MissingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Source<Polyhedron>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub players: Option<usize>,
    pub schedule: ScheduleSpec,
    pub policy: PolicySpec,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedList>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub strict: bool,
    /// Steps at which the total distance is also reported in the summary.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<usize>,
    /// Directory that relative file references resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub steps: Option<usize>,
    pub output: Option<PathBuf>,
    pub strict: bool,
    pub mode: Option<Mode>,
}

pub const PRESETS: [&str; 2] = ["paper-sim-4p", "adversarial-2x2"];

impl ExperimentConfig {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: ExperimentConfig = parse_json(text)?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-sim-4p" => Ok(four_player_cycle()),
            "adversarial-2x2" => Ok(adversarial_box()),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (available: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn mode(&self) -> Mode {
        self.policy.mode()
    }

    /// Seeds to run: `seeds`, else `seed`, else `[0]`.
    pub fn seed_list(&self) -> Result<Vec<u64>> {
        let seeds = match (&self.seeds, self.seed) {
            (Some(list), _) => list.resolve()?,
            (None, Some(s)) => vec![s],
            (None, None) => vec![0],
        };
        if seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        Ok(seeds)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Applies command-line overrides. Switching to cooperative mode replaces
    /// an adversarial policy by the default core-approach one; switching to
    /// adversarial mode requires an adversarial policy in the config.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seeds) = &o.seeds {
            self.seeds = Some(SeedList::List(seeds.clone()));
        }
        if let Some(steps) = o.steps {
            self.steps = steps;
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
        self.strict |= o.strict;
        match (o.mode, self.mode()) {
            (Some(Mode::Cooperative), Mode::Adversarial) => {
                self.policy = PolicySpec::CoreApproach {
                    alpha_min: default_alpha_min(),
                };
            }
            (Some(Mode::Adversarial), Mode::Cooperative) => {
                return Err(Error::Config(
                    "adversarial mode needs an `adversarial` policy section".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Structural checks that do not need any file or solver.
    pub fn check(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("field `steps`: must be at least 1".into()));
        }
        match (&self.game, &self.target) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set either `game` or `target`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "one of `game` or `target` is required".into(),
                ))
            }
            (None, Some(_)) if self.players.is_none() => {
                return Err(Error::Config(
                    "field `players` is required with `target`".into(),
                ))
            }
            _ => {}
        }
        if let PolicySpec::CoreApproach { alpha_min } = self.policy {
            if !(alpha_min > 0.0 && alpha_min <= 1.0) {
                return Err(Error::Config(format!(
                    "field `policy.core_approach.alpha_min`: must lie in (0, 1], got {alpha_min}"
                )));
            }
        }
        if let PolicySpec::Adversarial { margin, .. } = self.policy {
            if !(margin >= 0.0 && margin.is_finite()) {
                return Err(Error::Config(format!(
                    "field `policy.adversarial.margin`: must be a nonnegative number, got {margin}"
                )));
            }
        }
        self.seed_list()?;
        Ok(())
    }
}

fn four_player_cycle() -> ExperimentConfig {
    let entry = |members: &[usize], value: f64| CoalitionEntry {
        members: members.to_vec(),
        value,
    };
    let game = GameFile {
        n: 4,
        coalitions: vec![
            entry(&[1], 2.0),
            entry(&[2], 2.0),
            entry(&[3], 2.0),
            entry(&[4], 2.0),
            entry(&[1, 2], 5.0),
            entry(&[3, 4], 5.0),
            entry(&[1, 2, 3], 7.0),
        ],
        grand_value: 10.0,
    };
    ExperimentConfig {
        name: Some("paper-sim-4p".into()),
        game: Some(Source::Inline(game)),
        missing: None,
        target: None,
        players: None,
        schedule: ScheduleSpec::static_topology(Topology::Cycle),
        policy: PolicySpec::CoreApproach {
            alpha_min: default_alpha_min(),
        },
        steps: 10_000,
        seed: Some(7),
        seeds: None,
        output: None,
        tolerances: Tolerances::default(),
        initial: Some(InitialSpec::SelfReward { scale: Some(10.0) }),
        strict: false,
        checkpoints: Vec::new(),
        base_dir: PathBuf::new(),
    }
}

/// The shipped 2×2 game: payoffs `(1,0)` when the actions match and `(0,1)`
/// otherwise. Mixing uniformly guarantees an expected payoff of `(½, ½)`
/// whatever the opponent does; no single payoff lies in [`central_box`].
pub fn matching_vectors_game() -> VectorPayoffGame {
    let a = vec![1.0, 0.0];
    let b = vec![0.0, 1.0];
    VectorPayoffGame::new(vec![vec![a.clone(), b.clone()], vec![b, a]])
        .expect("shipped game is valid")
}

/// Half-width of [`central_box`]. Small next to the sampling noise at a few
/// hundred steps, so the distance is still visibly positive there.
pub const CENTRAL_BOX_HALF_WIDTH: f64 = 0.002;

/// `[½ − r, ½ + r]²` with `r = CENTRAL_BOX_HALF_WIDTH`.
pub fn central_box() -> Polyhedron {
    let (lo, hi) = (0.5 - CENTRAL_BOX_HALF_WIDTH, 0.5 + CENTRAL_BOX_HALF_WIDTH);
    Polyhedron::whole_space(2)
        .with_ge(vec![1.0, 0.0], lo)
        .and_then(|p| p.with_ge(vec![0.0, 1.0], lo))
        .and_then(|p| p.with_le(vec![1.0, 0.0], hi))
        .and_then(|p| p.with_le(vec![0.0, 1.0], hi))
        .expect("shipped box is valid")
}

fn adversarial_box() -> ExperimentConfig {
    ExperimentConfig {
        name: Some("adversarial-2x2".into()),
        game: None,
        missing: None,
        target: Some(Source::Inline(central_box())),
        players: Some(4),
        schedule: ScheduleSpec {
            mode: ScheduleMode::RoundRobin,
            edges_per_step: 2,
            ..ScheduleSpec::static_topology(Topology::Cycle)
        },
        policy: PolicySpec::Adversarial {
            game: Source::Inline(VectorGameFile::from(&matching_vectors_game())),
            opponent: Opponent::WorstCase,
            margin: default_margin(),
        },
        steps: 5000,
        seed: None,
        seeds: Some(SeedList::Range("1..30".into())),
        output: None,
        tolerances: Tolerances::default(),
        initial: Some(InitialSpec::Point(vec![0.0, 0.0])),
        strict: false,
        checkpoints: vec![500, 5000],
        base_dir: PathBuf::new(),
    }
}
