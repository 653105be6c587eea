use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{remainder_growth, PaletteConfig, TuningParams};
use crate::error::{Error, Result};
use crate::process::{
    complete_remainder, gen_regular_graph, run_phase1, tidy_to_proper, BufferReport, ColoringState, CompletionReport,
    KeyedRng, StepRecord, TidyReport,
};
use crate::stats::estimators::{component_stats, ComponentStats};
use crate::stats::histogram::Histogram;

/// Everything that determines a simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub r: u32,
    pub p: u32,
    pub epsilon: f64,
    pub n: usize,
    /// Number of phase-1 steps.
    pub steps: u64,
    pub graph_seed: u64,
    pub seed: u64,
    pub modified: bool,
    /// Activation weights keyed by `"d,c"`.
    pub weights: BTreeMap<String, f64>,
}

impl SimulationConfig {
    pub fn new(tuning: &TuningParams, n: usize, steps: u64, graph_seed: u64, seed: u64, modified: bool) -> Self {
        let cfg = tuning.cfg();
        SimulationConfig {
            r: cfg.r,
            p: cfg.p,
            epsilon: tuning.epsilon(),
            n,
            steps,
            graph_seed,
            seed,
            modified,
            weights: tuning.weight_map(),
        }
    }

    pub fn cfg(&self) -> Result<PaletteConfig> {
        PaletteConfig::new(self.r, self.p)
    }

    pub fn tuning(&self) -> Result<TuningParams> {
        TuningParams::from_weight_map(self.cfg()?, &self.weights, self.epsilon)
    }
}

/// State of a run after one phase-1 step (step 0 is the initial state).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub step: u64,
    pub time: f64,
    pub uncolored_frac: f64,
    pub red_frac: f64,
    pub extra_frac: f64,
    pub active: usize,
    pub colored: usize,
    pub rounds: usize,
    pub cascades: Histogram,
    /// Vertices colored in each buffer round.
    pub buffer: Vec<usize>,
    /// Empirical type distribution, canonical type order.
    pub z: Vec<f64>,
}

impl StepStats {
    fn initial(state: &ColoringState) -> Self {
        let n = state.n() as f64;
        StepStats {
            step: 0,
            time: 0.0,
            uncolored_frac: state.uncolored_count() as f64 / n,
            red_frac: state.red_count() as f64 / n,
            extra_frac: state.extra_count() as f64 / n,
            active: 0,
            colored: 0,
            rounds: 0,
            cascades: Histogram::new(),
            buffer: Vec::new(),
            z: state.empirical_z().into_vec(),
        }
    }

    fn from_record(record: &StepRecord, n: usize, epsilon: f64) -> Self {
        let n = n as f64;
        let report = &record.report;
        StepStats {
            step: report.step,
            time: report.step as f64 * epsilon,
            uncolored_frac: record.uncolored as f64 / n,
            red_frac: record.red as f64 / n,
            extra_frac: record.extra as f64 / n,
            active: report.active,
            colored: report.colored(),
            rounds: report.rounds,
            cascades: Histogram::from_values(report.cascade_sizes.iter().map(|&s| s as u64)),
            buffer: record.buffer.as_ref().map(|b| b.per_round.clone()).unwrap_or_default(),
            z: record.z.as_slice().to_vec(),
        }
    }
}

/// Summary of a finished run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalStats {
    pub steps: u64,
    pub phase1_uncolored: usize,
    pub phase1_red: usize,
    /// Remainder growth of the empirical distribution after phase 1, if
    /// defined.
    pub remainder_growth: Option<f64>,
    /// Uncolored components after phase 1.
    pub components: ComponentStats,
    pub cascades: Histogram,
    /// Rounds per step.
    pub rounds: Histogram,
    pub buffer: BufferReport,
    pub completion: CompletionReport,
    pub tidy: TidyReport,
    /// Red fraction before the final repair.
    pub red_frac: f64,
    pub extra_frac: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub config: SimulationConfig,
    pub steps: Vec<StepStats>,
    #[serde(rename = "final")]
    pub final_stats: FinalStats,
}

impl RunStats {
    /// One row per step, starting with the initial state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,time,uncolored_frac,red_frac,extra_frac,active,mean_cascade,max_cascade");
        if let Ok(cfg) = self.config.cfg() {
            for t in cfg.types() {
                let _ = write!(out, ",z_{}_{}", t.d, t.c);
            }
        }
        out.push('\n');
        for s in &self.steps {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.step,
                s.time,
                s.uncolored_frac,
                s.red_frac,
                s.extra_frac,
                s.active,
                s.cascades.mean().unwrap_or(0.0),
                s.cascades.max().unwrap_or(0)
            );
            for z in &s.z {
                let _ = write!(out, ",{z}");
            }
            out.push('\n');
        }
        out
    }

    /// The configuration and the final fields as JSON.
    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            config: &'a SimulationConfig,
            #[serde(rename = "final")]
            final_stats: &'a FinalStats,
        }
        let summary = Summary { config: &self.config, final_stats: &self.final_stats };
        serde_json::to_string_pretty(&summary).map_err(|e| Error::Internal(format!("serializing summary: {e}")))
    }
}

/// A finished run: the final coloring and its statistics.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub state: ColoringState,
    pub stats: RunStats,
}

/// Generates the graph, runs phase 1, completes the remainder and repairs
/// the red vertices with the extra color.
pub fn run_simulation(config: &SimulationConfig) -> Result<Simulation> {
    let tuning = config.tuning()?;
    let graph = Arc::new(gen_regular_graph(config.n, config.r, config.graph_seed)?);
    let mut state = ColoringState::new(graph, tuning.cfg())?;
    let rng = KeyedRng::new(config.seed);

    let mut steps = Vec::with_capacity(config.steps as usize + 1);
    steps.push(StepStats::initial(&state));
    let mut cascades = Histogram::new();
    let mut rounds = Histogram::new();
    let mut buffer = BufferReport::default();
    // one step at a time keeps the per-step records from piling up
    for _ in 0..config.steps {
        let record = run_phase1(&mut state, &tuning, 1, config.modified, &rng)?
            .pop()
            .expect("one step was requested");
        let row = StepStats::from_record(&record, config.n, config.epsilon);
        cascades.merge(&row.cascades);
        rounds.add(row.rounds as u64);
        if let Some(b) = &record.buffer {
            buffer.merge(b);
        }
        steps.push(row);
    }

    let phase1_uncolored = state.uncolored_count();
    let phase1_red = state.red_count();
    let growth = remainder_growth(&state.empirical_z()).ok();
    let components = component_stats(&state);
    let completion = complete_remainder(&mut state, &rng)?;
    let red_before = state.red_count();
    let tidy = tidy_to_proper(&mut state, &rng)?;
    let violations = state.verify_proper().len();
    let n = config.n as f64;
    let final_stats = FinalStats {
        steps: config.steps,
        phase1_uncolored,
        phase1_red,
        remainder_growth: growth,
        components,
        cascades,
        rounds,
        buffer,
        completion,
        tidy,
        red_frac: red_before as f64 / n,
        extra_frac: state.extra_count() as f64 / n,
        violations,
    };
    Ok(Simulation { state, stats: RunStats { config: config.clone(), steps, final_stats } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(steps: u64, modified: bool) -> SimulationConfig {
        let cfg = PaletteConfig::new(4, 3).unwrap();
        SimulationConfig::new(&TuningParams::standard(cfg, 0.05).unwrap(), 2000, steps, 1, 2, modified)
    }

    #[test]
    fn zero_steps_colors_everything_anyway() {
        let sim = run_simulation(&small(0, false)).unwrap();
        assert_eq!(sim.stats.steps.len(), 1);
        assert_eq!(sim.state.uncolored_count(), 0);
        assert_eq!(sim.stats.final_stats.violations, 0);
        assert_eq!(sim.stats.final_stats.components.count, 1);
    }

    #[test]
    fn csv_layout_and_fractions() {
        let sim = run_simulation(&small(40, true)).unwrap();
        let csv = sim.stats.to_csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("step,time,uncolored_frac,red_frac,extra_frac,active,mean_cascade,max_cascade,z_0_2,"));
        assert_eq!(header.split(',').count(), 8 + 10);
        assert_eq!(lines.count(), 41);
        for s in &sim.stats.steps {
            assert!(s.uncolored_frac + s.red_frac + s.extra_frac <= 1.0 + 1e-12);
            assert!(s.z.iter().sum::<f64>() <= s.uncolored_frac + 1e-12);
        }
        assert_eq!(sim.stats.final_stats.violations, 0);
    }

    #[test]
    fn runs_are_deterministic_and_summaries_parse() {
        let a = run_simulation(&small(30, false)).unwrap();
        let b = run_simulation(&small(30, false)).unwrap();
        assert_eq!(a.stats.to_csv(), b.stats.to_csv());
        assert_eq!(a.state.colors(), b.state.colors());
        let v: serde_json::Value = serde_json::from_str(&a.stats.summary_json().unwrap()).unwrap();
        assert_eq!(v["config"]["n"], 2000);
        assert!(v["final"]["violations"].is_number());
        let back: RunStats = serde_json::from_str(&serde_json::to_string(&a.stats).unwrap()).unwrap();
        assert_eq!(back.steps.len(), a.stats.steps.len());
    }
}
