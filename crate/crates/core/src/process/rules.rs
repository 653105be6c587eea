use std::collections::BTreeMap;

use crate::dynamics::{TuningParams, VertexType};
use crate::error::{Error, Result};
use crate::process::rng::{Randomness, Stream};
use crate::process::state::{ColoringState, RED, UNCOLORED};

const NO_ORIGIN: u32 = u32::MAX;

/// Summary of one process step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    pub step: u64,
    /// Size of the activated set.
    pub active: usize,
    /// Vertices colored by rule 1 (active), 2 (forced), 3 (red, two
    /// neighbors colored this step) and 4 (red, adjacent simultaneous pair).
    pub by_rule: [usize; 4],
    pub new_red: usize,
    /// Rounds with at least one commit.
    pub rounds: usize,
    /// Per active vertex, the number of vertices its cascade colored
    /// (including itself); red vertices of rule 3 are not attributed.
    pub cascade_sizes: Vec<u32>,
}

impl StepReport {
    pub fn colored(&self) -> usize {
        self.by_rule.iter().sum()
    }
}

/// One isolated cascade.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeRecord {
    pub root: usize,
    pub root_type: VertexType,
    /// `generations[k]` counts vertices colored in round `k` by their type
    /// before the cascade started.
    pub generations: Vec<BTreeMap<VertexType, u32>>,
    pub total: usize,
    /// Set when two colorings met, which needs a cycle.
    pub collision: bool,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Pending {
    pub v: u32,
    pub color: u8,
    pub origin: u32,
}

/// Counters and logs filled by [`propagate`].
#[derive(Debug, Default)]
pub(crate) struct Tally {
    pub by_rule: [usize; 4],
    pub rounds: usize,
    /// Commits attributed to each origin index.
    pub sizes: Vec<u32>,
    /// `(vertex, round)` for every commit, in commit order.
    pub log: Vec<(u32, u32)>,
    pub keep_log: bool,
}

/// Colors `v`, counting it as colored in the current step for rule 3.
pub(crate) fn commit(state: &mut ColoringState, v: usize, code: u8, origin: u32) {
    debug_assert_eq!(state.code(v), UNCOLORED);
    state.set_code(v, code);
    state.origin[v] = origin;
    state.step_colored.push(v as u32);
    if code == RED {
        state.fresh_reds.push(v as u32);
    }
    add_hits(state, v);
}

/// Registers `v` as colored this step with each of its neighbors.
pub(crate) fn add_hits(state: &mut ColoringState, v: usize) {
    let graph = std::sync::Arc::clone(state.graph_arc());
    for &u in graph.neighbors(v) {
        let h = &mut state.hits[u as usize];
        if *h == 0 {
            state.hit_touched.push(u);
        }
        *h += 1;
    }
}

/// Runs rule rounds to a fixpoint. Round 0 commits `pending` (after the
/// rule-4 screen); `frontier` lists vertices already committed whose
/// neighbors are examined first.
pub(crate) fn propagate(
    state: &mut ColoringState,
    mut pending: Vec<Pending>,
    mut frontier: Vec<u32>,
    tally: &mut Tally,
) -> Result<()> {
    let graph = std::sync::Arc::clone(state.graph_arc());
    let mut reds: Vec<(u32, u32)> = Vec::new();
    let mut candidates: Vec<u32> = Vec::new();
    let mut round = 0u32;
    loop {
        reds.clear();
        if !frontier.is_empty() {
            let epoch = state.next_epoch();
            candidates.clear();
            for &v in &frontier {
                for &u in graph.neighbors(v as usize) {
                    let ui = u as usize;
                    if state.code(ui) == UNCOLORED && state.mark[ui] != epoch {
                        state.mark[ui] = epoch;
                        candidates.push(u);
                    }
                }
            }
            candidates.sort_unstable();
            for &u in &candidates {
                let ui = u as usize;
                if state.hits[ui] >= 2 {
                    reds.push((u, NO_ORIGIN));
                    continue;
                }
                let avail = state.available_mask(ui);
                match avail.count_ones() {
                    0 => {
                        return Err(Error::Internal(format!(
                            "vertex {u} lost every color with fewer than two neighbors colored this step"
                        )))
                    }
                    1 => {
                        let origin = graph
                            .neighbors(ui)
                            .iter()
                            .map(|&w| state.origin[w as usize])
                            .find(|&o| o != NO_ORIGIN)
                            .unwrap_or(NO_ORIGIN);
                        pending.push(Pending { v: u, color: avail.trailing_zeros() as u8, origin });
                    }
                    _ => {}
                }
            }
        }

        // Rule 4: adjacent simultaneous colorings both become red.
        let epoch = state.next_epoch();
        for p in &pending {
            state.mark[p.v as usize] = epoch;
        }
        let mut clash = vec![false; pending.len()];
        for (i, p) in pending.iter().enumerate() {
            clash[i] = graph.neighbors(p.v as usize).iter().any(|&u| state.mark[u as usize] == epoch);
        }

        let mut committed = Vec::with_capacity(reds.len() + pending.len());
        for &(u, origin) in &reds {
            commit(state, u as usize, RED, origin);
            tally.by_rule[2] += 1;
            committed.push(u);
        }
        for (p, &clashed) in pending.iter().zip(&clash) {
            let rule = if clashed {
                3
            } else if round == 0 && frontier.is_empty() {
                0
            } else {
                1
            };
            let code = if clashed { RED } else { p.color };
            commit(state, p.v as usize, code, p.origin);
            tally.by_rule[rule] += 1;
            if p.origin != NO_ORIGIN {
                let o = p.origin as usize;
                if tally.sizes.len() <= o {
                    tally.sizes.resize(o + 1, 0);
                }
                tally.sizes[o] += 1;
            }
            committed.push(p.v);
        }
        if tally.keep_log {
            tally.log.extend(committed.iter().map(|&v| (v, round)));
        }
        if committed.is_empty() {
            break;
        }
        tally.rounds += 1;
        frontier = committed;
        pending.clear();
        round += 1;
    }
    Ok(())
}

/// The uniformly random available color of `v`: the one with the smallest
/// priority.
pub(crate) fn draw_color<R: Randomness>(state: &ColoringState, v: usize, rng: &R, stream: Stream) -> Option<u8> {
    let mut mask = state.available_mask(v);
    let mut best: Option<(u64, u8)> = None;
    while mask != 0 {
        let c = mask.trailing_zeros();
        mask &= mask - 1;
        let key = rng.color_priority(stream, v, state.step, c);
        if best.map_or(true, |(k, _)| key < k) {
            best = Some((key, c as u8));
        }
    }
    best.map(|(_, c)| c)
}

/// Weight table indexed by `d * (p + 1) + c`, zero outside the type space.
pub(crate) fn activation_table(tuning: &TuningParams) -> Vec<f64> {
    let cfg = tuning.cfg();
    let width = cfg.p as usize + 1;
    let mut table = vec![0.0; (cfg.r as usize + 1) * width];
    for t in cfg.types() {
        table[t.d as usize * width + t.c as usize] = tuning.epsilon() * tuning.weight(t);
    }
    table
}

/// One step of the greedy coloring process: activation from the types at
/// the start of the step, then rule rounds to a fixpoint. The per-step
/// scratch stays valid afterwards so buffer rounds can continue the step.
pub fn greedy_step<R: Randomness>(state: &mut ColoringState, tuning: &TuningParams, rng: &R) -> Result<StepReport> {
    if tuning.cfg() != state.cfg() {
        return Err(Error::Config("tuning parameters are for a different (r, p)".into()));
    }
    state.reset_scratch();
    state.step += 1;
    let step = state.step;
    let table = activation_table(tuning);
    let width = state.cfg().p as usize + 1;

    let mut active: Vec<u32> = state
        .uncolored_vertices()
        .iter()
        .copied()
        .filter(|&v| {
            let v = v as usize;
            let d = state.uncolored_degree(v) as usize;
            let c = state.available_count(v) as usize;
            let prob = table.get(d * width + c).copied().unwrap_or(0.0);
            prob > 0.0 && rng.unit(Stream::Activation, v, step) < prob
        })
        .collect();
    active.sort_unstable();

    let mut pending = Vec::with_capacity(active.len());
    for (i, &v) in active.iter().enumerate() {
        let color = draw_color(state, v as usize, rng, Stream::Draw).ok_or_else(|| {
            Error::Precondition(format!("active vertex {v} has no available color (list invariant violated)"))
        })?;
        pending.push(Pending { v, color, origin: i as u32 });
    }

    let mut tally = Tally { sizes: vec![0; active.len()], ..Default::default() };
    propagate(state, pending, Vec::new(), &mut tally)?;
    state.check_vertices(state.step_colored.clone())?;

    Ok(StepReport {
        step,
        active: active.len(),
        by_rule: tally.by_rule,
        new_red: tally.by_rule[2] + tally.by_rule[3],
        rounds: tally.rounds,
        cascade_sizes: tally.sizes,
    })
}

/// Runs the cascade from `v` alone (no activation) and reverts it. Rule 3
/// and 4 collisions, which need a cycle, stop the branch in red and set
/// the collision flag.
pub fn trace_cascade<R: Randomness>(state: &mut ColoringState, v: usize, rng: &R) -> Result<CascadeRecord> {
    if v >= state.n() {
        return Err(Error::Precondition(format!("vertex {v} out of range")));
    }
    let root_type =
        state.vertex_type_of(v).ok_or_else(|| Error::Precondition(format!("vertex {v} is already colored")))?;
    if root_type.c == 0 {
        return Err(Error::Precondition(format!("vertex {v} has no available color")));
    }
    state.reset_scratch();
    let color = draw_color(state, v, rng, Stream::Trace).expect("available color exists");

    let mut tally = Tally { keep_log: true, ..Default::default() };
    let result = propagate(state, vec![Pending { v: v as u32, color, origin: 0 }], Vec::new(), &mut tally);
    let collision = tally.by_rule[2] + tally.by_rule[3] > 0;

    for &(u, _) in tally.log.iter().rev() {
        state.set_code(u as usize, UNCOLORED);
    }
    state.reset_scratch();
    result?;

    let mut generations: Vec<BTreeMap<VertexType, u32>> = Vec::new();
    for &(u, round) in &tally.log {
        let t = state.vertex_type_of(u as usize).expect("reverted vertex is uncolored");
        if generations.len() <= round as usize {
            generations.resize(round as usize + 1, BTreeMap::new());
        }
        *generations[round as usize].entry(t).or_insert(0) += 1;
    }
    Ok(CascadeRecord { root: v, root_type, generations, total: tally.log.len(), collision })
}
