use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{q_vector, TypeDistribution};
use crate::error::{Error, Result};
use crate::ode::{interpolate, Certificate};
use crate::process::ColoringState;
use crate::stats::histogram::Histogram;
use crate::stats::run::RunStats;

/// Fewest observations [`cascade_tail_fit`] accepts.
pub const MIN_TAIL_SAMPLES: u64 = 100;

/// Half the l1 distance between two laws on the same support.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Largest deviation between a run and a certified trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryGap {
    /// Sup over compared steps of the max-norm distance.
    pub distance: f64,
    /// Time at which the sup is attained.
    pub time: f64,
    /// Number of steps with `time <= R`, including step 0.
    pub compared: usize,
}

/// Compares the empirical type distribution of every step with time at
/// most `R` against the certificate's trajectory, interpolated linearly
/// between stored samples.
pub fn trajectory_distance(stats: &RunStats, cert: &Certificate) -> Result<TrajectoryGap> {
    let config = &stats.config;
    if (config.r, config.p) != (cert.cfg.r, cert.cfg.p) {
        return Err(Error::Config(format!(
            "run has (r, p) = ({}, {}) but the certificate has ({}, {})",
            config.r, config.p, cert.cfg.r, cert.cfg.p
        )));
    }
    let same_weights = config.weights.len() == cert.tuning.weights.len()
        && config.weights.iter().all(|(k, w)| {
            cert.tuning.weights.get(k).is_some_and(|v| (v - w).abs() <= 1e-12 * w.abs().max(1.0))
        });
    if !same_weights {
        return Err(Error::Config("run and certificate use different activation weights".into()));
    }
    let r = cert
        .r
        .ok_or_else(|| Error::Precondition("certificate has no stopping time R".into()))?;
    let eps = config.epsilon;
    if !(eps > 0.0) || eps > r {
        return Err(Error::Config(format!("epsilon = {eps} does not resolve the certified horizon R = {r}")));
    }
    if let Some(row) = stats.steps.iter().find(|s| (s.time - s.step as f64 * eps).abs() > 1e-9 * s.time.max(1.0)) {
        return Err(Error::Config(format!(
            "step {} is recorded at time {} but epsilon = {eps}",
            row.step, row.time
        )));
    }

    let (times, states) = cert.trajectory_samples()?;
    if times.is_empty() {
        return Err(Error::Precondition("certificate stores no samples".into()));
    }
    let mut gap = TrajectoryGap { distance: 0.0, time: 0.0, compared: 0 };
    for row in stats.steps.iter().filter(|s| s.time <= r + 1e-12) {
        let sigma = interpolate(&times, &states, row.time);
        let d = row.z.iter().zip(sigma.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if d > gap.distance {
            gap.distance = d;
            gap.time = row.time;
        }
        gap.compared += 1;
    }
    if gap.compared == 0 {
        return Err(Error::InsufficientData("run has no steps before R".into()));
    }
    Ok(gap)
}

/// Exponential fit of a size distribution's tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub samples: u64,
    pub mean: f64,
    /// Least-squares slope of `ln P(size >= k)` against `k`.
    pub slope: Option<f64>,
    /// Root mean square residual of the fit.
    pub residual: f64,
    /// Fewer than two distinct sizes: no tail to fit.
    pub degenerate: bool,
}

impl TailFit {
    pub fn decay_rate(&self) -> Option<f64> {
        self.slope.map(|s| -s)
    }
}

pub fn cascade_tail_fit(hist: &Histogram) -> Result<TailFit> {
    let total = hist.samples();
    if total < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{total} samples, need at least {MIN_TAIL_SAMPLES}"
        )));
    }
    let mean = hist.mean().unwrap_or(0.0);
    let mut remaining = total;
    let mut points = Vec::new();
    for (k, c) in hist.iter() {
        points.push((k as f64, (remaining as f64 / total as f64).ln()));
        remaining -= c;
    }
    if points.len() < 2 {
        return Ok(TailFit { samples: total, mean, slope: None, residual: 0.0, degenerate: true });
    }
    let (slope, intercept) = least_squares(&points);
    let residual = (points.iter().map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>()
        / points.len() as f64)
        .sqrt();
    Ok(TailFit { samples: total, mean, slope: Some(slope), residual, degenerate: false })
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Dependence of the final red fraction on the step size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedScaling {
    /// `(epsilon, mean red fraction, runs)`, by decreasing epsilon.
    pub levels: Vec<(f64, f64, usize)>,
    /// Log-log slope of the mean red fraction against epsilon.
    pub slope: Option<f64>,
    /// Mean at each epsilon divided by the mean at the next larger one.
    pub ratios: Vec<f64>,
    /// Some level saw no red vertex at all.
    pub degenerate: bool,
}

pub fn red_scaling(results: &[(f64, f64)]) -> Result<RedScaling> {
    if let Some(&(eps, red)) = results.iter().find(|(e, f)| !(*e > 0.0) || !(0.0..=1.0).contains(f)) {
        return Err(Error::Config(format!("invalid result (epsilon {eps}, red fraction {red})")));
    }
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for &(eps, red) in results {
        groups.entry(eps.to_bits()).or_default().push(red);
    }
    if groups.len() < 3 || groups.values().any(|g| g.len() < 3) {
        return Err(Error::InsufficientData(
            "need at least 3 epsilon values with at least 3 runs each".into(),
        ));
    }
    let mut levels: Vec<(f64, f64, usize)> = groups
        .iter()
        .map(|(&bits, g)| (f64::from_bits(bits), g.iter().sum::<f64>() / g.len() as f64, g.len()))
        .collect();
    levels.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ratios = levels.windows(2).filter(|w| w[0].1 > 0.0).map(|w| w[1].1 / w[0].1).collect();
    let degenerate = levels.iter().any(|l| l.1 == 0.0);
    let slope = (!degenerate).then(|| {
        let points: Vec<(f64, f64)> = levels.iter().map(|l| (l.0.ln(), l.1.ln())).collect();
        least_squares(&points).0
    });
    Ok(RedScaling { levels, slope, ratios, degenerate })
}

/// Empirical type law of a random uncolored neighbor of an uncolored vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborLaw {
    pub law: Vec<f64>,
    /// Size-biased law of the current empirical type distribution.
    pub q: TypeDistribution,
    pub tv: f64,
    pub samples: usize,
}

/// Picks a uniform uncolored vertex with an uncolored neighbor, then a
/// uniform such neighbor, `samples` times. Boundary vertices are ignored
/// on both ends.
pub fn neighbor_type_law<R: Rng + ?Sized>(state: &ColoringState, samples: usize, rng: &mut R) -> Result<NeighborLaw> {
    let graph = state.graph();
    let inside = |v: usize| state.is_uncolored(v) && !graph.is_boundary(v);
    let eligible: Vec<u32> = state
        .uncolored_vertices()
        .iter()
        .copied()
        .filter(|&v| inside(v as usize) && graph.neighbors(v as usize).iter().any(|&u| inside(u as usize)))
        .collect();
    if eligible.is_empty() || samples == 0 {
        return Err(Error::InsufficientData("no uncolored vertex has an uncolored neighbor".into()));
    }
    let cfg = state.cfg();
    let mut law = vec![0.0; cfg.num_types()];
    let mut options = Vec::with_capacity(cfg.r as usize);
    for _ in 0..samples {
        let v = eligible[rng.gen_range(0..eligible.len())] as usize;
        options.clear();
        options.extend(graph.neighbors(v).iter().copied().filter(|&u| inside(u as usize)));
        let u = options[rng.gen_range(0..options.len())] as usize;
        let t = state.vertex_type_of(u).expect("neighbor is uncolored");
        law[cfg.index_of(t).expect("uncolored types lie in the type space")] += 1.0;
    }
    law.iter_mut().for_each(|x| *x /= samples as f64);
    let q = q_vector(&state.empirical_z())?;
    let tv = total_variation(&law, q.as_slice());
    Ok(NeighborLaw { law, q, tv, samples })
}

/// Connected components of the uncolored subgraph.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub count: usize,
    pub vertices: usize,
    pub mean_size: f64,
    pub max_size: usize,
    pub histogram: Histogram,
    /// Mean, over ordered pairs `(u, v)` of adjacent uncolored vertices, of
    /// the number of vertices `v` reaches without crossing the edge to `u`.
    pub mean_branch_size: Option<f64>,
}

pub fn component_stats(state: &ColoringState) -> ComponentStats {
    let graph = state.graph();
    let n = state.n();
    let mut disc = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut clock = 0u32;
    let mut stack: Vec<(u32, u32, usize)> = Vec::new();
    let mut roots: Vec<u32> = state.uncolored_vertices().to_vec();
    roots.sort_unstable();

    let mut stats = ComponentStats::default();
    let mut branch_total = 0.0;
    let mut directed = 0u64;
    for &root in &roots {
        if disc[root as usize] != u32::MAX {
            continue;
        }
        disc[root as usize] = clock;
        low[root as usize] = clock;
        clock += 1;
        stack.push((root, u32::MAX, 0));
        let mut size = 0u64;
        let mut entries = 0u64;
        let mut bridges = 0u64;
        while let Some(top) = stack.last_mut() {
            let (v, parent, next) = (top.0 as usize, top.1, top.2);
            let nb = graph.neighbors(v);
            if next < nb.len() {
                top.2 += 1;
                let u = nb[next];
                if !state.is_uncolored(u as usize) {
                    continue;
                }
                entries += 1;
                let ui = u as usize;
                if disc[ui] == u32::MAX {
                    disc[ui] = clock;
                    low[ui] = clock;
                    clock += 1;
                    stack.push((u, v as u32, 0));
                } else if u != parent {
                    low[v] = low[v].min(disc[ui]);
                }
            } else {
                stack.pop();
                size += 1;
                if let Some(&(w, _, _)) = stack.last() {
                    let w = w as usize;
                    low[w] = low[w].min(low[v]);
                    if low[v] > disc[w] {
                        bridges += 1;
                    }
                }
            }
        }
        // Across a bridge the two branches partition the component; across
        // any other edge each branch is the whole component.
        branch_total += size as f64 * (entries - bridges) as f64;
        directed += entries;
        stats.count += 1;
        stats.vertices += size as usize;
        stats.max_size = stats.max_size.max(size as usize);
        stats.histogram.add(size);
    }
    if stats.count > 0 {
        stats.mean_size = stats.vertices as f64 / stats.count as f64;
    }
    stats.mean_branch_size = (directed > 0).then(|| branch_total / directed as f64);
    stats
}
