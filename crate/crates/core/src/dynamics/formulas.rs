//! Closed-form quantities of the cascade branching process.
//!
//! Everything here is a pure function of a [`TypeDistribution`]. The
//! size-biased law `q` is the type distribution of a uniformly random
//! uncolored neighbor of an uncolored vertex. A neighbor of type `(d, 2)`
//! loses a color to its colored parent with probability `2/p` and is then
//! forced, spawning `d - 1` further candidates, so the cascade is a
//! branching process with mean offspring
//!
//! ```text
//! g = (2/p) * sum_d (d - 1) q_(d,2)
//! ```
//!
//! and a branch away from the root contains `1/(1 - g)` vertices whose
//! parent was colored.

use crate::dynamics::types::{PaletteConfig, TuningParams, TypeDistribution, VertexType};
use crate::error::{Error, Result};

/// Per-distribution quantities shared by every formula below.
#[derive(Clone, Debug)]
pub(crate) struct BranchLaw {
    pub cfg: PaletteConfig,
    pub q: Vec<f64>,
    /// Mean offspring of the cascade.
    pub g: f64,
    /// Probability that a fresh branch neighbor is forced, `(2/p) sum_d q_(d,2)`.
    pub b: f64,
}

impl BranchLaw {
    pub fn new(z: &TypeDistribution) -> Result<Self> {
        let cfg = z.cfg();
        let zs = z.as_slice();
        let norm: f64 = cfg.types().zip(zs).map(|(t, &m)| t.d as f64 * m).sum();
        if !(norm > 0.0) {
            return Err(Error::Degenerate);
        }
        let q: Vec<f64> = cfg.types().zip(zs).map(|(t, &m)| t.d as f64 * m / norm).collect();
        let pf = cfg.p as f64;
        let mut g = 0.0;
        let mut b = 0.0;
        for d in 0..=cfg.r {
            let qd2 = q[cfg.index_of(VertexType::new(d, 2)).unwrap()];
            g += (d as f64 - 1.0) * qd2;
            b += qd2;
        }
        Ok(Self { cfg, q, g: 2.0 / pf * g, b: 2.0 / pf * b })
    }

    pub fn require_subcritical(&self) -> Result<()> {
        if self.g >= 1.0 {
            Err(Error::Supercritical { g: self.g })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn q_at(&self, t: VertexType) -> f64 {
        // Indices outside the type space contribute nothing.
        self.cfg.index_of(t).map_or(0.0, |i| self.q[i])
    }

    /// Expected net number of type-`t` vertices created along one branch,
    /// unnormalized by `1/(1 - g)`.
    fn branch_numerator(&self, t: VertexType) -> f64 {
        let pf = self.cfg.p as f64;
        let c = t.c as f64;
        -self.q_at(t)
            + (c + 1.0) / pf * self.q_at(VertexType::new(t.d + 1, t.c + 1))
            + (pf - c) / pf * self.q_at(VertexType::new(t.d + 1, t.c))
    }

    pub fn delta_branch(&self, t: VertexType) -> f64 {
        self.branch_numerator(t) / (1.0 - self.g)
    }

    pub fn delta_branch_all(&self) -> Vec<f64> {
        let scale = 1.0 / (1.0 - self.g);
        self.cfg.types().map(|t| self.branch_numerator(t) * scale).collect()
    }

    pub fn expected_cascade_size(&self, s: VertexType) -> f64 {
        1.0 + s.d as f64 * self.b / (1.0 - self.g)
    }

    pub fn remainder_growth(&self) -> f64 {
        self.cfg.types().zip(&self.q).map(|(t, &q)| (t.d as f64 - 1.0) * q).sum()
    }
}

/// Size-biased law `q_t = deg(t) z_t / sum_s deg(s) z_s`.
pub fn q_vector(z: &TypeDistribution) -> Result<TypeDistribution> {
    let law = BranchLaw::new(z)?;
    Ok(TypeDistribution::from_raw(z.cfg(), law.q))
}

/// Mean offspring `g` of the cascade branching process.
pub fn cascade_growth(z: &TypeDistribution) -> Result<f64> {
    Ok(BranchLaw::new(z)?.g)
}

/// Mean offspring `sum_s (deg(s) - 1) q_s` of the branching process that
/// describes a component of the uncolored remainder.
pub fn remainder_growth(z: &TypeDistribution) -> Result<f64> {
    Ok(BranchLaw::new(z)?.remainder_growth())
}

/// Expected net number of type-`t` vertices created along one branch of a
/// cascade.
pub fn delta_branch(z: &TypeDistribution, t: VertexType) -> Result<f64> {
    let law = BranchLaw::new(z)?;
    law.require_subcritical()?;
    Ok(law.delta_branch(t))
}

/// Expected change in type counts caused by one cascade, indexed by
/// (root type, affected type).
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaMatrix {
    cfg: PaletteConfig,
    entries: Vec<f64>,
}

impl DeltaMatrix {
    pub fn cfg(&self) -> PaletteConfig {
        self.cfg
    }

    pub fn get(&self, s: VertexType, t: VertexType) -> f64 {
        let n = self.cfg.num_types();
        match (self.cfg.index_of(s), self.cfg.index_of(t)) {
            (Some(i), Some(j)) => self.entries[i * n + j],
            _ => 0.0,
        }
    }

    pub fn row(&self, s: VertexType) -> &[f64] {
        let n = self.cfg.num_types();
        let i = self.cfg.index_of(s).expect("type outside the type space");
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn row_sum(&self, s: VertexType) -> f64 {
        self.row(s).iter().sum()
    }
}

/// `Delta_(s,t) = -[s = t] + deg(s) * delta_branch(z, t)`.
pub fn delta_matrix(z: &TypeDistribution) -> Result<DeltaMatrix> {
    let law = BranchLaw::new(z)?;
    law.require_subcritical()?;
    let cfg = z.cfg();
    let n = cfg.num_types();
    let branch = law.delta_branch_all();
    let mut entries = vec![0.0; n * n];
    for (i, s) in cfg.types().enumerate() {
        let row = &mut entries[i * n..(i + 1) * n];
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = s.d as f64 * branch[j];
        }
        row[i] -= 1.0;
    }
    Ok(DeltaMatrix { cfg, entries })
}

/// Expected number of vertices colored by a cascade started at a vertex of
/// type `s`, the root included.
pub fn expected_cascade_size(z: &TypeDistribution, s: VertexType) -> Result<f64> {
    let law = BranchLaw::new(z)?;
    law.require_subcritical()?;
    Ok(law.expected_cascade_size(s))
}

/// The vector field `F_t(z) = sum_s w_s z_s Delta_(s,t)(z)` (the epsilon-free
/// rate of change of the type distribution).
pub fn drift(z: &TypeDistribution, params: &TuningParams) -> Result<Vec<f64>> {
    check_cfg(z, params)?;
    let law = BranchLaw::new(z)?;
    law.require_subcritical()?;
    Ok(drift_with(&law, z.as_slice(), params.weights()))
}

/// Row-sum-free evaluation of the drift: since `Delta_(s,t)` is
/// `-[s = t] + deg(s) * B_t`, the double sum collapses to
/// `-w_t z_t + (sum_s w_s z_s deg(s)) * B_t`.
pub(crate) fn drift_with(law: &BranchLaw, z: &[f64], weights: &[f64]) -> Vec<f64> {
    let cfg = law.cfg;
    let launched: f64 = cfg
        .types()
        .zip(z.iter().zip(weights))
        .map(|(s, (&zs, &w))| w * zs * s.d as f64)
        .sum();
    law.delta_branch_all()
        .into_iter()
        .zip(z.iter().zip(weights))
        .map(|(bt, (&zt, &w))| -w * zt + launched * bt)
        .collect()
}

/// Result of one explicit Euler step.
#[derive(Clone, Debug)]
pub struct EulerOutcome {
    pub z: TypeDistribution,
    /// Entries that would have gone below `-1e-9` before being clamped to 0.
    pub clamped: usize,
}

/// Threshold below which a negative entry is reported rather than quietly
/// clamped.
pub const CLAMP_REPORT: f64 = -1e-9;

/// `z + epsilon * drift(z)`, with negative entries clamped to zero.
pub fn euler_step(z: &TypeDistribution, params: &TuningParams) -> Result<EulerOutcome> {
    let f = drift(z, params)?;
    let eps = params.epsilon();
    let next: Vec<f64> = z.as_slice().iter().zip(&f).map(|(a, b)| a + eps * b).collect();
    let (next, clamped) = clamp_nonnegative(next);
    Ok(EulerOutcome { z: TypeDistribution::from_raw(z.cfg(), next), clamped })
}

pub(crate) fn clamp_nonnegative(mut v: Vec<f64>) -> (Vec<f64>, usize) {
    let mut reported = 0;
    for x in v.iter_mut() {
        if *x < 0.0 {
            if *x < CLAMP_REPORT {
                reported += 1;
            }
            *x = 0.0;
        }
    }
    (v, reported)
}

fn check_cfg(z: &TypeDistribution, params: &TuningParams) -> Result<()> {
    if z.cfg() != params.cfg() {
        return Err(Error::Config(format!(
            "distribution is for {:?} but tuning is for {:?}",
            z.cfg(),
            params.cfg()
        )));
    }
    Ok(())
}
