use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cascol::dynamics::{PaletteConfig, TuningParams, VertexType};
use cascol::ode::{IntegrationControl, DEFAULT_THRESHOLD};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Default bound on the extra-color fraction accepted by `verify`.
pub const DEFAULT_BOUND: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "cascol", version, about = "Certify, simulate and verify greedy cascade colorings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the type dynamics and write a subcriticality certificate.
    Certify(RunArgs),
    /// Write the integrated trajectory as CSV.
    Integrate(RunArgs),
    /// Run the coloring process on a random regular graph.
    Simulate(RunArgs),
    /// Final red fraction over a grid of step sizes and seeds.
    Sweep(RunArgs),
    /// Re-check a certificate or a coloring dump.
    Verify(RunArgs),
}

impl Command {
    pub fn split(self) -> (Mode, RunArgs) {
        match self {
            Command::Certify(a) => (Mode::Certify, a),
            Command::Integrate(a) => (Mode::Integrate, a),
            Command::Simulate(a) => (Mode::Simulate, a),
            Command::Sweep(a) => (Mode::Sweep, a),
            Command::Verify(a) => (Mode::Verify, a),
        }
    }
}

/// Flags shared by every subcommand. Anything not given on the command
/// line is looked up in the `--config` file, then defaulted.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// key=value file with defaults for any flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub p: Option<u32>,
    /// Override one activation weight, as `d,c=value`. Repeatable.
    #[arg(long = "weight", value_name = "D,C=W")]
    pub weights: Vec<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Integration step.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Keep every k-th integration step as a sample.
    #[arg(long)]
    pub stride: Option<u32>,
    #[arg(long)]
    pub halvings: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Comma-separated step sizes for `sweep`.
    #[arg(long)]
    pub epsilons: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of phase-1 steps.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Phase-1 horizon in units of time; steps = ceil(time / epsilon).
    #[arg(long)]
    pub time: Option<f64>,
    /// Certificate; its R sets the horizon unless --steps or --time is given.
    #[arg(long)]
    pub cert: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated process seeds for `sweep`.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Graph seed; defaults to the process seed.
    #[arg(long)]
    pub graph_seed: Option<u64>,
    /// Add buffer rounds after every step.
    #[arg(long)]
    pub modified: bool,
    #[arg(long)]
    pub graph: Option<GraphChoice>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Coloring dump: written by `simulate`, checked by `verify`.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Graph fixture for checking a dump.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Largest extra-color fraction `verify` accepts.
    #[arg(long)]
    pub bound: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Certify,
    Integrate,
    Simulate,
    Sweep,
    Verify,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GraphChoice {
    #[default]
    RandomRegular,
}

impl FromStr for GraphChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Fully resolved settings of one invocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub r: Option<u32>,
    pub p: Option<u32>,
    /// Weights that differ from the default scheme, keyed `"d,c"`.
    pub weight_overrides: BTreeMap<String, f64>,
    pub threshold: f64,
    pub control: IntegrationControl,
    pub epsilon: Option<f64>,
    pub epsilons: Vec<f64>,
    pub n: Option<usize>,
    pub steps: Option<u64>,
    pub time: Option<f64>,
    pub cert: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub graph_seed: Option<u64>,
    pub modified: bool,
    pub graph: GraphChoice,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    pub fixture: Option<PathBuf>,
    pub bound: f64,
}

const KEYS: &[&str] = &[
    "r", "p", "weights", "threshold", "step", "max_time", "stride", "halvings", "epsilon", "epsilons", "n", "steps",
    "time", "cert", "seed", "seeds", "graph_seed", "modified", "graph", "out", "summary", "dump", "fixture", "bound",
];

/// Parsed `key = value` lines; `#` starts a comment.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
    origin: PathBuf,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{}:{}: expected key = value", origin.display(), i + 1))
            })?;
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("{}:{}: unknown key {key:?}", origin.display(), i + 1)));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("{}:{}: {key:?} given twice", origin.display(), i + 1)));
            }
        }
        Ok(ConfigFile { values, origin: origin.into() })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse().map_err(|e| CliError::Config(format!("{}: {key} = {v:?}: {e}", self.origin.display())))
            })
            .transpose()
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

fn parse_list<T: FromStr>(key: &str, text: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| CliError::Config(format!("{key}: {s:?}: {e}"))))
        .collect()
}

fn parse_weight(text: &str) -> Result<(String, f64)> {
    let bad = || CliError::Config(format!("weight {text:?} is not of the form d,c=value"));
    let (t, w) = text.split_once('=').ok_or_else(bad)?;
    let t: VertexType = t.trim().parse().map_err(|_| bad())?;
    let w: f64 = w.trim().parse().map_err(|_| bad())?;
    Ok((t.to_string(), w))
}

impl RunConfig {
    /// Merges flags over the config file over defaults.
    pub fn resolve(mode: Mode, args: RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::read(path)?,
            None => ConfigFile::default(),
        };

        let mut weight_overrides = BTreeMap::new();
        if let Some(list) = file.raw("weights") {
            for item in list.split(|c: char| c == ';' || c.is_whitespace()).filter(|s| !s.is_empty()) {
                let (k, w) = parse_weight(item)?;
                weight_overrides.insert(k, w);
            }
        }
        for item in &args.weights {
            let (k, w) = parse_weight(item)?;
            weight_overrides.insert(k, w);
        }

        let defaults = IntegrationControl::default();
        let control = IntegrationControl {
            method: defaults.method,
            step: args.step.or(file.get("step")?).unwrap_or(defaults.step),
            max_time: args.max_time.or(file.get("max_time")?).unwrap_or(defaults.max_time),
            sample_stride: args.stride.or(file.get("stride")?).unwrap_or(defaults.sample_stride),
            halvings: args.halvings.or(file.get("halvings")?).unwrap_or(defaults.halvings),
        };

        let epsilons = match args.epsilons.as_deref().or(file.raw("epsilons")) {
            Some(list) => parse_list("epsilons", list)?,
            None => Vec::new(),
        };
        let seeds = match (args.seed, args.seeds.as_deref()) {
            (Some(s), _) => vec![s],
            (None, Some(list)) => parse_list("seeds", list)?,
            (None, None) => match (file.get::<u64>("seed")?, file.raw("seeds")) {
                (Some(s), _) => vec![s],
                (None, Some(list)) => parse_list("seeds", list)?,
                (None, None) => Vec::new(),
            },
        };

        let config = RunConfig {
            mode,
            r: args.r.or(file.get("r")?),
            p: args.p.or(file.get("p")?),
            weight_overrides,
            threshold: args.threshold.or(file.get("threshold")?).unwrap_or(DEFAULT_THRESHOLD),
            control,
            epsilon: args.epsilon.or(file.get("epsilon")?),
            epsilons,
            n: args.n.or(file.get("n")?),
            steps: args.steps.or(file.get("steps")?),
            time: args.time.or(file.get("time")?),
            cert: args.cert.or(file.get("cert")?),
            seeds,
            graph_seed: args.graph_seed.or(file.get("graph_seed")?),
            modified: args.modified || file.get("modified")?.unwrap_or(false),
            graph: args.graph.or(file.get("graph")?).unwrap_or_default(),
            out: args.out.or(file.get("out")?),
            summary: args.summary.or(file.get("summary")?),
            dump: args.dump.or(file.get("dump")?),
            fixture: args.fixture.or(file.get("fixture")?),
            bound: args.bound.or(file.get("bound")?).unwrap_or(DEFAULT_BOUND),
        };
        config.validate()?;
        Ok(config)
    }

    fn require<T: Copy>(&self, value: Option<T>, flag: &str) -> Result<T> {
        value.ok_or_else(|| CliError::Config(format!("{:?} needs --{flag}", self.mode).to_lowercase()))
    }

    pub fn palette(&self) -> Result<PaletteConfig> {
        let r = self.require(self.r, "r")?;
        let p = self.require(self.p, "p")?;
        Ok(PaletteConfig::new(r, p)?)
    }

    /// Default weights with the overrides applied.
    pub fn tuning(&self, epsilon: f64) -> Result<TuningParams> {
        let cfg = self.palette()?;
        let mut overrides = BTreeMap::new();
        for (k, &w) in &self.weight_overrides {
            let t: VertexType = k.parse().map_err(|_| CliError::Config(format!("bad type {k:?}")))?;
            overrides.insert(t, w);
        }
        Ok(TuningParams::with_overrides(cfg, &overrides, epsilon)?)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.bound) {
            return Err(CliError::Config(format!("bound {} must lie in [0, 1]", self.bound)));
        }
        match self.mode {
            Mode::Certify | Mode::Integrate => {
                self.palette()?;
                self.control.validate()?;
            }
            Mode::Simulate => {
                let cfg = self.palette()?;
                let eps = self.require(self.epsilon, "epsilon")?;
                self.tuning(eps)?;
                let n = self.require(self.n, "n")?;
                if (n * cfg.r as usize) % 2 != 0 {
                    return Err(CliError::Config(format!("n * r = {} must be even", n * cfg.r as usize)));
                }
                if self.seeds.len() != 1 {
                    return Err(CliError::Config("simulate needs exactly one --seed".into()));
                }
                self.require_horizon()?;
            }
            Mode::Sweep => {
                let cfg = self.palette()?;
                if self.epsilons.len() < 3 || self.seeds.len() < 3 {
                    return Err(CliError::Config("sweep needs at least 3 --epsilons and 3 --seeds".into()));
                }
                for &eps in &self.epsilons {
                    self.tuning(eps)?;
                }
                let n = self.require(self.n, "n")?;
                if (n * cfg.r as usize) % 2 != 0 {
                    return Err(CliError::Config(format!("n * r = {} must be even", n * cfg.r as usize)));
                }
                self.require_horizon()?;
            }
            Mode::Verify => match (&self.cert, &self.dump) {
                (Some(_), None) => {}
                (None, Some(_)) => {
                    if self.graph_seed.is_none() == self.fixture.is_none() {
                        return Err(CliError::Config(
                            "checking a dump needs exactly one of --graph-seed and --fixture".into(),
                        ));
                    }
                }
                _ => return Err(CliError::Config("verify needs exactly one of --cert and --dump".into())),
            },
        }
        Ok(())
    }

    fn require_horizon(&self) -> Result<()> {
        if self.steps.is_none() && self.time.is_none() && self.cert.is_none() {
            return Err(CliError::Config("the horizon needs --steps, --time or --cert".into()));
        }
        if let Some(t) = self.time {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(CliError::Config(format!("time {t} must be nonnegative")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(f: impl FnOnce(&mut RunArgs)) -> RunArgs {
        let mut a = RunArgs::default();
        f(&mut a);
        a
    }

    #[test]
    fn flags_win_over_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# sweep defaults\nr = 4\np = 3\nepsilon = 0.02\nn = 1000\nsteps = 10\nseed = 5\nweights = 2,2=0.5; 3,2=0.25\n").unwrap();
        let c = RunConfig::resolve(
            Mode::Simulate,
            args(|a| {
                a.config = Some(path.clone());
                a.epsilon = Some(0.01);
                a.weights = vec!["3,2=0.125".into()];
            }),
        )
        .unwrap();
        assert_eq!(c.epsilon, Some(0.01));
        assert_eq!(c.n, Some(1000));
        assert_eq!(c.seeds, vec![5]);
        assert_eq!(c.weight_overrides["2,2"], 0.5);
        assert_eq!(c.weight_overrides["3,2"], 0.125);
    }

    #[test]
    fn bad_files_and_missing_fields_are_config_errors() {
        let err = ConfigFile::parse("r = 4\nbogus = 1\n", Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
        assert_eq!(err.exit_code(), 2);
        assert!(ConfigFile::parse("r 4\n", Path::new("x")).is_err());

        let err = RunConfig::resolve(Mode::Simulate, args(|a| {
            a.r = Some(4);
            a.p = Some(3);
        }))
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);

        let odd = RunConfig::resolve(
            Mode::Simulate,
            args(|a| {
                a.r = Some(3);
                a.p = Some(3);
                a.epsilon = Some(0.01);
                a.n = Some(5);
                a.steps = Some(1);
                a.seed = Some(1);
            }),
        );
        assert!(odd.unwrap_err().to_string().contains("must be even"));
    }
}
