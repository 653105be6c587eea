//! Monte Carlo of the cascade branching process, built directly from the
//! coloring rules, against the closed forms.
//!
//! A colored vertex takes one color. Each uncolored neighbor of type
//! `(d, c)` (counting the parent) loses that color with probability `c/p`
//! and then has type `(d - 1, c - 1)`, otherwise `(d - 1, c)`. A neighbor
//! left with one color is forced and repeats the step on its own `d - 1`
//! other neighbors.

use cascol::dynamics::{
    cascade_growth, delta_branch, delta_matrix, expected_cascade_size, q_vector, PaletteConfig, TypeDistribution,
    VertexType,
};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Oracle {
    cfg: PaletteConfig,
    types: Vec<VertexType>,
    law: WeightedIndex<f64>,
}

impl Oracle {
    fn new(z: &TypeDistribution) -> Self {
        let q = q_vector(z).unwrap();
        let cfg = z.cfg();
        Oracle { cfg, types: cfg.types().collect(), law: WeightedIndex::new(q.as_slice()).unwrap() }
    }

    /// Adds the net change in type counts of one branch to `net` and
    /// returns the number of forced vertices.
    fn branch<R: Rng>(&self, rng: &mut R, net: &mut [f64]) -> u64 {
        let p = self.cfg.p;
        let mut pending = 1u64;
        let mut forced = 0;
        while pending > 0 {
            pending -= 1;
            let t = self.types[self.law.sample(rng)];
            net[self.cfg.index_of(t).unwrap()] -= 1.0;
            let hit = rng.gen_range(0..p) < t.c;
            let after = VertexType::new(t.d - 1, if hit { t.c - 1 } else { t.c });
            if after.c == 1 {
                forced += 1;
                pending += u64::from(t.d - 1);
            } else {
                net[self.cfg.index_of(after).unwrap()] += 1.0;
            }
            assert!(forced < 1_000_000, "runaway branch");
        }
        forced
    }
}

fn random_subcritical(cfg: PaletteConfig, rng: &mut ChaCha8Rng, max_g: f64) -> TypeDistribution {
    loop {
        let z: Vec<f64> = (0..cfg.num_types()).map(|_| rng.gen::<f64>().powi(2)).collect();
        let total: f64 = z.iter().sum();
        let z = TypeDistribution::from_vec(cfg, z.iter().map(|x| x / total).collect()).unwrap();
        if cascade_growth(&z).unwrap() < max_g {
            return z;
        }
    }
}

fn check(z: &TypeDistribution, samples: usize, seed: u64) {
    let cfg = z.cfg();
    let oracle = Oracle::new(z);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = vec![0.0; cfg.num_types()];
    let mut sq = vec![0.0; cfg.num_types()];
    let mut forced = 0.0;
    let mut forced_sq = 0.0;
    for _ in 0..samples {
        let mut one = vec![0.0; cfg.num_types()];
        let f = oracle.branch(&mut rng, &mut one) as f64;
        forced += f;
        forced_sq += f * f;
        for (i, x) in one.iter().enumerate() {
            net[i] += x;
            sq[i] += x * x;
        }
    }
    let n = samples as f64;
    let se = |sum: f64, sum_sq: f64| ((sum_sq / n - (sum / n).powi(2)).max(0.0) / n).sqrt();
    for (i, t) in cfg.types().enumerate() {
        let mc = net[i] / n;
        let exact = delta_branch(z, t).unwrap();
        let tol = 5.0 * se(net[i], sq[i]) + 1e-3;
        assert!((mc - exact).abs() <= tol, "type {t}: monte carlo {mc} vs closed form {exact} (tol {tol})");
    }
    for s in cfg.types() {
        let mc = 1.0 + s.d as f64 * forced / n;
        let exact = expected_cascade_size(z, s).unwrap();
        let tol = s.d as f64 * (5.0 * se(forced, forced_sq) + 1e-3);
        assert!((mc - exact).abs() <= tol, "root {s}: monte carlo {mc} vs closed form {exact}");
    }
}

#[test]
fn mixed_state_matches_hand_values() {
    let cfg = PaletteConfig::new(4, 3).unwrap();
    let z = TypeDistribution::from_pairs(cfg, &[(VertexType::new(4, 3), 0.5), (VertexType::new(2, 2), 0.5)]).unwrap();
    assert!((cascade_growth(&z).unwrap() - 2.0 / 9.0).abs() < 1e-15);
    assert!((delta_branch(&z, VertexType::new(1, 2)).unwrap() - 1.0 / 7.0).abs() < 1e-15);
    assert!((expected_cascade_size(&z, VertexType::new(2, 2)).unwrap() - 11.0 / 7.0).abs() < 1e-15);
    check(&z, 200_000, 1);
}

#[test]
fn initial_state_single_step() {
    for (r, p) in [(4, 3), (6, 4)] {
        let cfg = PaletteConfig::new(r, p).unwrap();
        let z = TypeDistribution::initial(cfg);
        let m = delta_matrix(&z).unwrap();
        let root = cfg.initial_type();
        assert_eq!(m.get(root, root), -(r as f64) - 1.0);
        assert_eq!(m.get(root, VertexType::new(r - 1, p - 1)), r as f64);
        assert_eq!(m.get(root, VertexType::new(r - 1, p)), 0.0);
        check(&z, 20_000, 2);
    }
}

#[test]
fn random_subcritical_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (i, (r, p)) in [(4, 3), (4, 3), (6, 4), (6, 4), (5, 4)].into_iter().enumerate() {
        let cfg = PaletteConfig::new(r, p).unwrap();
        let z = random_subcritical(cfg, &mut rng, 0.7);
        check(&z, 100_000, 10 + i as u64);
    }
}

#[test]
fn delta_matrix_rows_match_oracle_root_rows() {
    // Each row is the root's loss plus deg(s) independent branches.
    let cfg = PaletteConfig::new(6, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let z = random_subcritical(cfg, &mut rng, 0.5);
    let oracle = Oracle::new(&z);
    let m = delta_matrix(&z).unwrap();
    let s = VertexType::new(3, 3);
    let samples = 50_000;
    let mut net = vec![0.0; cfg.num_types()];
    for _ in 0..samples {
        net[cfg.index_of(s).unwrap()] -= 1.0;
        for _ in 0..s.d {
            oracle.branch(&mut rng, &mut net);
        }
    }
    for t in cfg.types() {
        let mc = net[cfg.index_of(t).unwrap()] / samples as f64;
        assert!((mc - m.get(s, t)).abs() < 0.03, "({s}) -> ({t}): {mc} vs {}", m.get(s, t));
    }
}
