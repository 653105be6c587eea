use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use cascol::ode::{certify, integrate, Certificate};
use cascol::process::{gen_regular_graph, parse_fixture};
use cascol::stats::{red_scaling, run_simulation, SimulationConfig};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Mode, RunConfig};
use crate::dump::{check_dump, parse_dump, write_dump};
use crate::error::{CliError, Result};

/// Step size used to build tuning parameters when only the weights matter.
const NOMINAL_EPSILON: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Certification or verification failed; exit code 1.
    Failure,
}

/// Runs one resolved invocation, writing human-readable output to `out`.
pub fn execute(config: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    match config.mode {
        Mode::Certify => run_certify(config, out),
        Mode::Integrate => run_integrate(config, out),
        Mode::Simulate => run_simulate(config, out),
        Mode::Sweep => run_sweep(config, out),
        Mode::Verify => run_verify(config, out),
    }
}

fn say(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Write { path: "<stdout>".into(), source })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write { path: path.into(), source })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })
}

fn read_certificate(path: &Path) -> Result<Certificate> {
    Ok(Certificate::from_json(&read_file(path)?)?)
}

fn run_certify(config: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let cfg = config.palette()?;
    let tuning = config.tuning(config.epsilon.unwrap_or(NOMINAL_EPSILON))?;
    let cert = certify(cfg, &tuning, config.threshold, &config.control)?;
    if let Some(path) = &config.out {
        write_file(path, &cert.to_json()?)?;
    }
    let mut text = format!("(r, p) = ({}, {}), threshold {}\n", cfg.r, cfg.p, config.threshold);
    if let Some(r) = cert.r {
        let _ = writeln!(text, "R = {r}");
    }
    if let (Some(g), Some(m)) = (cert.max_g_on_0_r, cert.remainder_growth_at_r) {
        let _ = writeln!(text, "max g on [0, R] = {g}, remainder growth at R = {m}");
    }
    for d in &cert.diagnostics {
        let _ = writeln!(text, "{d}");
    }
    let status = if cert.is_certified() { Status::Success } else { Status::Failure };
    let _ = writeln!(text, "{}", if cert.is_certified() { "certified" } else { "not certified" });
    say(out, &text)?;
    Ok(status)
}

fn run_integrate(config: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let cfg = config.palette()?;
    let tuning = config.tuning(config.epsilon.unwrap_or(NOMINAL_EPSILON))?;
    let traj = integrate(cfg, &tuning, &config.control)?;
    let mut csv = String::from("time,g,remainder_growth");
    for t in cfg.types() {
        let _ = write!(csv, ",z_{}_{}", t.d, t.c);
    }
    csv.push('\n');
    for i in 0..traj.len() {
        let _ = write!(csv, "{},{},{}", traj.times[i], traj.g_values[i], traj.remainder_values[i]);
        for z in traj.states[i].as_slice() {
            let _ = write!(csv, ",{z}");
        }
        csv.push('\n');
    }
    match &config.out {
        Some(path) => write_file(path, &csv)?,
        None => say(out, &csv)?,
    }
    Ok(Status::Success)
}

/// Number of phase-1 steps: explicit, from a time horizon, or from the
/// certificate's `R`.
fn phase1_steps(config: &RunConfig, epsilon: f64, cert: Option<&Certificate>) -> Result<u64> {
    if let Some(steps) = config.steps {
        return Ok(steps);
    }
    let horizon = match (config.time, cert) {
        (Some(t), _) => t,
        (None, Some(c)) => c
            .r
            .ok_or_else(|| CliError::Config("certificate has no stopping time R".into()))?,
        (None, None) => return Err(CliError::Config("the horizon needs --steps, --time or --cert".into())),
    };
    Ok((horizon / epsilon - 1e-9).ceil().max(0.0) as u64)
}

/// Tuning weights come from the certificate when one is given.
fn simulation_config(
    config: &RunConfig,
    cert: Option<&Certificate>,
    epsilon: f64,
    seed: u64,
) -> Result<SimulationConfig> {
    let n = config.n.ok_or_else(|| CliError::Config("--n is required".into()))?;
    let tuning = match cert {
        Some(c) => {
            if !config.weight_overrides.is_empty() {
                return Err(CliError::Config("--weight cannot be combined with --cert".into()));
            }
            if c.cfg != config.palette()? {
                return Err(CliError::Config("certificate is for a different (r, p)".into()));
            }
            c.tuning_params(epsilon)?
        }
        None => config.tuning(epsilon)?,
    };
    let steps = phase1_steps(config, epsilon, cert)?;
    let graph_seed = config.graph_seed.unwrap_or(seed);
    Ok(SimulationConfig::new(&tuning, n, steps, graph_seed, seed, config.modified))
}

fn load_cert(config: &RunConfig) -> Result<Option<Certificate>> {
    config.cert.as_deref().map(read_certificate).transpose()
}

fn run_simulate(config: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let cert = load_cert(config)?;
    let epsilon = config.epsilon.ok_or_else(|| CliError::Config("--epsilon is required".into()))?;
    let sim_config = simulation_config(config, cert.as_ref(), epsilon, config.seeds[0])?;
    let sim = run_simulation(&sim_config)?;
    let csv = sim.stats.to_csv();
    match &config.out {
        Some(path) => write_file(path, &csv)?,
        None => say(out, &csv)?,
    }
    if let Some(path) = &config.summary {
        let mut summary: serde_json::Value =
            serde_json::from_str(&sim.stats.summary_json()?).expect("summary is valid JSON");
        summary["run"] = serde_json::to_value(config).expect("config serializes");
        write_file(path, &format!("{:#}\n", summary))?;
    }
    if let Some(path) = &config.dump {
        write_file(path, &write_dump(&sim.state))?;
    }
    if config.out.is_some() {
        let f = &sim.stats.final_stats;
        say(
            out,
            &format!(
                "steps {}, red fraction {}, extra fraction {}, violations {}\n",
                f.steps, f.red_frac, f.extra_frac, f.violations
            ),
        )?;
    }
    Ok(Status::Success)
}

fn run_sweep(config: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let cert = load_cert(config)?;
    let mut cells: Vec<(f64, u64)> =
        config.epsilons.iter().flat_map(|&e| config.seeds.iter().map(move |&s| (e, s))).collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    cells.dedup();
    let configs = cells
        .iter()
        .map(|&(e, s)| simulation_config(config, cert.as_ref(), e, s))
        .collect::<Result<Vec<_>>>()?;
    let results = configs
        .par_iter()
        .map(|c| run_simulation(c).map(|sim| sim.stats.final_stats))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = String::from("epsilon,seed,steps,red_frac,extra_frac,violations\n");
    for (c, f) in configs.iter().zip(&results) {
        let _ = writeln!(table, "{},{},{},{},{},{}", c.epsilon, c.seed, c.steps, f.red_frac, f.extra_frac, f.violations);
    }
    let pairs: Vec<(f64, f64)> = configs.iter().zip(&results).map(|(c, f)| (c.epsilon, f.red_frac)).collect();
    let scaling = red_scaling(&pairs)?;
    match &config.out {
        Some(path) => write_file(path, &table)?,
        None => say(out, &table)?,
    }
    let mut text = String::new();
    for &(e, mean, runs) in &scaling.levels {
        let _ = writeln!(text, "epsilon {e}: mean red fraction {mean} over {runs} runs");
    }
    match scaling.slope {
        Some(s) => {
            let _ = writeln!(text, "log-log slope {s}");
        }
        None => text.push_str("no red vertices at some epsilon; slope undefined\n"),
    }
    if !scaling.ratios.is_empty() {
        let ratios: Vec<String> = scaling.ratios.iter().map(|r| r.to_string()).collect();
        let _ = writeln!(text, "ratios between consecutive epsilons: {}", ratios.join(", "));
    }
    say(out, &text)?;
    if let Some(path) = &config.summary {
        let summary = json!({ "run": config, "scaling": scaling });
        write_file(path, &format!("{:#}\n", summary))?;
    }
    Ok(Status::Success)
}

fn run_verify(config: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    if let Some(path) = &config.cert {
        let cert = read_certificate(path)?;
        return match cert.verify() {
            Ok(()) if cert.is_certified() => {
                say(out, "certificate verified\n")?;
                Ok(Status::Success)
            }
            Ok(()) => {
                say(out, "certificate is consistent but not certified\n")?;
                Ok(Status::Failure)
            }
            Err(e @ cascol::Error::Verification(_)) => {
                say(out, &format!("{e}\n"))?;
                Ok(Status::Failure)
            }
            Err(e) => Err(e.into()),
        };
    }
    let path = config.dump.as_deref().expect("validated: verify has --cert or --dump");
    verify_coloring_dump(path, config, out)
}

/// Checks a dump for properness and the extra-color bound.
pub fn verify_coloring_dump(path: &Path, config: &RunConfig, out: &mut dyn Write) -> Result<Status> {
    let dump = parse_dump(&read_file(path)?)?;
    let graph = match (&config.fixture, config.graph_seed) {
        (Some(fixture), _) => parse_fixture(&read_file(fixture)?)?.graph,
        (None, Some(seed)) => gen_regular_graph(dump.n, dump.r, seed)?,
        (None, None) => return Err(CliError::Config("need --graph-seed or --fixture".into())),
    };
    let check = check_dump(&dump, &graph, config.bound)?;
    let mut text = String::new();
    for &(u, v) in &check.violations {
        let _ = writeln!(text, "violation: edge {u} {v}");
    }
    for &v in &check.missing {
        let _ = writeln!(text, "vertex {v} has no color");
    }
    let _ = writeln!(
        text,
        "{} violations, extra fraction {} (bound {})",
        check.violations.len(),
        check.extra_fraction,
        check.bound
    );
    say(out, &text)?;
    Ok(if check.passed() { Status::Success } else { Status::Failure })
}
