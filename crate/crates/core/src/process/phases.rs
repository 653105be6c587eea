use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dynamics::{TuningParams, TypeDistribution};
use crate::error::{Error, Result};
use crate::process::graph::Graph;
use crate::process::rng::{Randomness, Stream};
use crate::process::rules::{add_hits, commit, greedy_step, propagate, StepReport, Tally};
use crate::process::solver::{solve_list_coloring, SolveOutcome, NODE_BUDGET};
use crate::process::state::{ColoringState, EXTRA, RED, UNCOLORED};

/// Activity of the buffer rounds that follow one step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BufferReport {
    /// `per_round[j - 1]`: vertices colored in buffer round `j`, by the
    /// component solver and by the cascades it triggered.
    pub per_round: Vec<usize>,
    pub components: usize,
    /// Components recolored red because they were infeasible or exceeded
    /// the search budget.
    pub failures: usize,
    pub new_red: usize,
}

impl BufferReport {
    pub fn total(&self) -> usize {
        self.per_round.iter().sum()
    }

    pub fn merge(&mut self, other: &BufferReport) {
        if self.per_round.len() < other.per_round.len() {
            self.per_round.resize(other.per_round.len(), 0);
        }
        for (a, b) in self.per_round.iter_mut().zip(&other.per_round) {
            *a += b;
        }
        self.components += other.components;
        self.failures += other.failures;
        self.new_red += other.new_red;
    }

    /// Share of buffer activity in rounds two and later.
    pub fn late_share(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.per_round.iter().skip(1).sum::<usize>() as f64 / total as f64
    }
}

/// State of the run after one step of phase 1.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub report: StepReport,
    pub buffer: Option<BufferReport>,
    pub z: TypeDistribution,
    pub uncolored: usize,
    pub red: usize,
    pub extra: usize,
}

/// Applies `steps` greedy steps, each followed by buffer rounds in
/// modified mode.
pub fn run_phase1<R: Randomness>(
    state: &mut ColoringState,
    tuning: &TuningParams,
    steps: u64,
    modified: bool,
    rng: &R,
) -> Result<Vec<StepRecord>> {
    let mut records = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        let report = greedy_step(state, tuning, rng)?;
        let buffer = if modified { Some(buffer_rounds(state, rng)?) } else { None };
        records.push(StepRecord {
            report,
            buffer,
            z: state.empirical_z(),
            uncolored: state.uncolored_count(),
            red: state.red_count(),
            extra: state.extra_count(),
        });
    }
    Ok(records)
}

/// Uncolored vertices within distance 3 of `seeds`, sorted.
fn uncolored_within_3(state: &mut ColoringState, seeds: &[u32]) -> Vec<u32> {
    let graph = std::sync::Arc::clone(state.graph_arc());
    let epoch = state.next_epoch();
    let mut layer: Vec<u32> = Vec::new();
    for &s in seeds {
        if state.mark[s as usize] != epoch {
            state.mark[s as usize] = epoch;
            layer.push(s);
        }
    }
    let mut found: Vec<u32> = layer.iter().copied().filter(|&v| state.is_uncolored(v as usize)).collect();
    for _ in 0..3 {
        let mut next = Vec::new();
        for &v in &layer {
            for &u in graph.neighbors(v as usize) {
                if state.mark[u as usize] != epoch {
                    state.mark[u as usize] = epoch;
                    next.push(u);
                    if state.is_uncolored(u as usize) {
                        found.push(u);
                    }
                }
            }
        }
        layer = next;
    }
    found.sort_unstable();
    found
}

/// Connected components of the subgraph induced on `vertices`, each
/// sorted, ordered by smallest vertex.
fn induced_components(graph: &Graph, vertices: &[u32]) -> Vec<Vec<u32>> {
    let members: HashSet<u32> = vertices.iter().copied().collect();
    let mut seen: HashSet<u32> = HashSet::with_capacity(vertices.len());
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    for &s in &sorted {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in graph.neighbors(v as usize) {
                if members.contains(&u) && seen.insert(u) {
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Solves list coloring on one component; `lists[i]` belongs to
/// `component[i]`.
fn solve_component(graph: &Graph, component: &[u32], lists: &[Vec<u8>]) -> SolveOutcome {
    let local: HashMap<u32, u32> = component.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let adj: Vec<Vec<u32>> = component
        .iter()
        .map(|&v| graph.neighbors(v as usize).iter().filter_map(|u| local.get(u).copied()).collect())
        .collect();
    solve_list_coloring(&adj, lists, NODE_BUDGET)
}

/// Available palette colors of `v`, in random preference order.
fn palette_list<R: Randomness>(state: &ColoringState, v: usize, rng: &R) -> Vec<u8> {
    let mask = state.available_mask(v);
    let mut colors: Vec<u8> = (0..state.cfg().p as u8).filter(|&c| mask & (1 << c) != 0).collect();
    colors.sort_by_key(|&c| rng.color_priority(Stream::Solve, v, state.step, c as u32));
    colors
}

/// Like [`palette_list`], but colors that would force an uncolored vertex
/// outside the region (marked with `epoch`) come last.
fn buffer_list<R: Randomness>(state: &ColoringState, v: usize, epoch: u32, rng: &R) -> Vec<u8> {
    let graph = state.graph();
    let mut forcing = [0u32; 64];
    for &u in graph.neighbors(v) {
        let u = u as usize;
        if state.is_uncolored(u) && state.mark[u] != epoch && state.available_count(u) == 2 {
            let mut mask = state.available_mask(u);
            while mask != 0 {
                forcing[mask.trailing_zeros() as usize] += 1;
                mask &= mask - 1;
            }
        }
    }
    let mut colors = palette_list(state, v, rng);
    colors.sort_by_key(|&c| forcing[c as usize]);
    colors
}

/// Buffer rounds after a step: while some red vertex colored during the
/// step has an uncolored vertex within distance 3, properly color every
/// component of those vertices and run the cascades this triggers.
/// Rule 3 counts only vertices colored in the same buffer round.
pub fn buffer_rounds<R: Randomness>(state: &mut ColoringState, rng: &R) -> Result<BufferReport> {
    let graph = std::sync::Arc::clone(state.graph_arc());
    let mut report = BufferReport::default();
    let first_checked = state.step_colored.len();
    loop {
        let seeds = std::mem::take(&mut state.fresh_reds);
        if seeds.is_empty() {
            break;
        }
        let region = uncolored_within_3(state, &seeds);
        if region.is_empty() {
            continue;
        }
        let before = state.step_colored.len();
        let components = induced_components(&graph, &region);
        let epoch = state.next_epoch();
        for &v in &region {
            state.mark[v as usize] = epoch;
        }
        let mut assignments = Vec::with_capacity(components.len());
        for comp in &components {
            let lists: Vec<Vec<u8>> = comp.iter().map(|&v| buffer_list(state, v as usize, epoch, rng)).collect();
            assignments.push(solve_component(&graph, comp, &lists));
        }
        report.components += components.len();
        for (comp, outcome) in components.iter().zip(assignments) {
            match outcome {
                SolveOutcome::Colored(colors) => {
                    for (&v, c) in comp.iter().zip(colors) {
                        commit(state, v as usize, c, u32::MAX);
                    }
                }
                SolveOutcome::Infeasible | SolveOutcome::BudgetExceeded => {
                    report.failures += 1;
                    report.new_red += comp.len();
                    for &v in comp {
                        commit(state, v as usize, RED, u32::MAX);
                    }
                }
            }
        }
        // Only vertices that start a cascade, by leaving an uncolored
        // neighbor with at most one color, count for rule 3.
        state.clear_hits();
        let mut frontier = Vec::new();
        for &v in &region {
            let v = v as usize;
            let active = state.code(v) == RED
                || graph.neighbors(v).iter().any(|&u| state.is_uncolored(u as usize) && state.available_count(u as usize) <= 1);
            if active {
                add_hits(state, v);
                frontier.push(v as u32);
            }
        }
        let mut tally = Tally::default();
        propagate(state, Vec::new(), frontier, &mut tally)?;
        report.new_red += tally.by_rule[2] + tally.by_rule[3];
        report.per_round.push(state.step_colored.len() - before);
    }
    state.check_vertices(state.step_colored[first_checked..].to_vec())?;
    Ok(report)
}

/// Outcome of coloring whole components with a solver.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionReport {
    pub components: usize,
    pub colored: usize,
    pub largest: usize,
    /// Components recolored red wholesale.
    pub failures: usize,
    pub failed_vertices: usize,
}

/// Colors every remaining component from its vertices' available lists.
pub fn complete_remainder<R: Randomness>(state: &mut ColoringState, rng: &R) -> Result<CompletionReport> {
    let graph = std::sync::Arc::clone(state.graph_arc());
    let remaining = state.uncolored_vertices().to_vec();
    let mut report = CompletionReport::default();
    for comp in induced_components(&graph, &remaining) {
        report.components += 1;
        report.largest = report.largest.max(comp.len());
        let lists: Vec<Vec<u8>> = comp.iter().map(|&v| palette_list(state, v as usize, rng)).collect();
        match solve_component(&graph, &comp, &lists) {
            SolveOutcome::Colored(colors) => {
                for (&v, c) in comp.iter().zip(colors) {
                    state.set_code(v as usize, c);
                }
                report.colored += comp.len();
            }
            _ => {
                report.failures += 1;
                report.failed_vertices += comp.len();
                for &v in &comp {
                    state.set_code(v as usize, RED);
                }
            }
        }
    }
    if !state.palette_conflicts().is_empty() {
        return Err(Error::Internal("completion produced a palette conflict".into()));
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TidyReport {
    pub red_before: usize,
    pub erased: usize,
    pub components: usize,
    pub failures: usize,
    pub extra_count: usize,
}

/// Erases the colors on red vertices and their neighbors and recolors
/// them with the palette plus the extra color: a formerly non-red vertex
/// may keep its color or take the extra one; a formerly red vertex may
/// take any color its remaining neighbors leave free.
pub fn tidy_to_proper<R: Randomness>(state: &mut ColoringState, rng: &R) -> Result<TidyReport> {
    if state.uncolored_count() > 0 {
        return Err(Error::Precondition(format!("{} vertices are still uncolored", state.uncolored_count())));
    }
    let graph = std::sync::Arc::clone(state.graph_arc());
    let p = state.cfg().p as u8;
    let reds: Vec<u32> = (0..state.n() as u32).filter(|&v| state.code(v as usize) == RED).collect();
    let mut report = TidyReport { red_before: reds.len(), ..Default::default() };
    if reds.is_empty() {
        report.extra_count = state.extra_count();
        return Ok(report);
    }

    let mut erased: Vec<u32> = reds.clone();
    for &v in &reds {
        erased.extend_from_slice(graph.neighbors(v as usize));
    }
    erased.sort_unstable();
    erased.dedup();
    let previous: HashMap<u32, u8> = erased.iter().map(|&v| (v, state.code(v as usize))).collect();
    for &v in &erased {
        state.set_code(v as usize, UNCOLORED);
    }
    report.erased = erased.len();

    let extra = p; // solver index of the extra color
    for comp in induced_components(&graph, &erased) {
        report.components += 1;
        let lists: Vec<Vec<u8>> = comp
            .iter()
            .map(|&v| {
                let free = state.available_mask(v as usize);
                match previous[&v] {
                    c if c < p => {
                        let mut l = Vec::with_capacity(2);
                        if free & (1 << c) != 0 {
                            l.push(c);
                        }
                        l.push(extra);
                        l
                    }
                    _ => {
                        let taken_before = graph.neighbors(v as usize).iter().fold(0u64, |m, u| match previous.get(u) {
                            Some(&c) if c < p => m | (1 << c),
                            _ => m,
                        });
                        let mut l: Vec<u8> = (0..p).filter(|&c| free & (1 << c) != 0).collect();
                        l.sort_by_key(|&c| {
                            (taken_before & (1 << c) != 0, rng.color_priority(Stream::Solve, v as usize, state.step, c as u32))
                        });
                        l.push(extra);
                        l
                    }
                }
            })
            .collect();
        match solve_component(&graph, &comp, &lists) {
            SolveOutcome::Colored(colors) => {
                for (&v, c) in comp.iter().zip(colors) {
                    state.set_code(v as usize, if c == extra { EXTRA } else { c });
                }
            }
            _ => {
                report.failures += 1;
                for &v in &comp {
                    state.set_code(v as usize, RED);
                }
            }
        }
    }
    report.extra_count = state.extra_count();
    Ok(report)
}
