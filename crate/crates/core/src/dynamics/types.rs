use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regularity `r` of the tree and palette size `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PaletteConfig {
    pub r: u32,
    pub p: u32,
}

impl PaletteConfig {
    /// Largest palette the process bookkeeping supports (colors are stored
    /// as bits of a `u64` together with the extra color).
    pub const MAX_PALETTE: u32 = 63;

    pub fn new(r: u32, p: u32) -> Result<Self> {
        let cfg = Self { r, p };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 3 {
            return Err(Error::Config(format!("regularity r = {} must be at least 3", self.r)));
        }
        if self.p < 2 || self.p > self.r {
            return Err(Error::Config(format!(
                "palette size p = {} must satisfy 2 <= p <= r = {}",
                self.p, self.r
            )));
        }
        if self.p > Self::MAX_PALETTE {
            return Err(Error::Config(format!("palette size p = {} is too large", self.p)));
        }
        Ok(())
    }

    /// Number of types, `(r + 1)(p - 1)`.
    pub fn num_types(&self) -> usize {
        ((self.r + 1) * (self.p - 1)) as usize
    }

    /// Index of `t` in the canonical (lexicographic by `(d, c)`) order, or
    /// `None` when `t` lies outside the type space.
    #[inline]
    pub fn index_of(&self, t: VertexType) -> Option<usize> {
        if t.d <= self.r && t.c >= 2 && t.c <= self.p {
            Some((t.d * (self.p - 1) + (t.c - 2)) as usize)
        } else {
            None
        }
    }

    #[inline]
    pub fn type_at(&self, index: usize) -> VertexType {
        let width = (self.p - 1) as usize;
        VertexType { d: (index / width) as u32, c: (index % width) as u32 + 2 }
    }

    pub fn types(&self) -> impl Iterator<Item = VertexType> + '_ {
        (0..self.num_types()).map(move |i| self.type_at(i))
    }

    /// The type every vertex has before anything is colored.
    pub fn initial_type(&self) -> VertexType {
        VertexType { d: self.r, c: self.p }
    }
}

/// Type of an uncolored vertex: `d` uncolored neighbors, `c` available
/// palette colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexType {
    pub d: u32,
    pub c: u32,
}

impl VertexType {
    pub const fn new(d: u32, c: u32) -> Self {
        Self { d, c }
    }
}

impl fmt::Display for VertexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.d, self.c)
    }
}

impl FromStr for VertexType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (d, c) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("type key {s:?} is not of the form \"d,c\"")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("type key {s:?} is not of the form \"d,c\"")))
        };
        Ok(Self { d: parse(d)?, c: parse(c)? })
    }
}

/// All types of `cfg` in canonical order.
pub fn type_space(cfg: PaletteConfig) -> Result<Vec<VertexType>> {
    cfg.validate()?;
    Ok(cfg.types().collect())
}

/// Nonnegative mass on each type. The mass missing from 1 is the colored
/// fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeDistribution {
    cfg: PaletteConfig,
    z: Vec<f64>,
}

impl TypeDistribution {
    /// Slack allowed on the total mass.
    pub const MASS_SLACK: f64 = 1e-9;

    pub fn zeros(cfg: PaletteConfig) -> Self {
        Self { cfg, z: vec![0.0; cfg.num_types()] }
    }

    /// All mass on `(r, p)`.
    pub fn initial(cfg: PaletteConfig) -> Self {
        let mut z = Self::zeros(cfg);
        z.set(cfg.initial_type(), 1.0);
        z
    }

    pub fn from_vec(cfg: PaletteConfig, z: Vec<f64>) -> Result<Self> {
        if z.len() != cfg.num_types() {
            return Err(Error::Config(format!(
                "distribution has {} entries, expected {}",
                z.len(),
                cfg.num_types()
            )));
        }
        let dist = Self { cfg, z };
        dist.validate()?;
        Ok(dist)
    }

    /// Builds a distribution from `(type, mass)` pairs; unspecified types get 0.
    pub fn from_pairs(cfg: PaletteConfig, pairs: &[(VertexType, f64)]) -> Result<Self> {
        let mut dist = Self::zeros(cfg);
        for &(t, mass) in pairs {
            let i = cfg
                .index_of(t)
                .ok_or_else(|| Error::Config(format!("type ({t}) is outside the type space")))?;
            dist.z[i] += mass;
        }
        dist.validate()?;
        Ok(dist)
    }

    /// Wraps a raw vector without validating entries. Used for intermediate
    /// integrator stages, which may dip slightly below zero.
    pub(crate) fn from_raw(cfg: PaletteConfig, z: Vec<f64>) -> Self {
        debug_assert_eq!(z.len(), cfg.num_types());
        Self { cfg, z }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((i, &x)) = self.z.iter().enumerate().find(|(_, x)| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::Config(format!(
                "entry for type ({}) is {x}, must be finite and nonnegative",
                self.cfg.type_at(i)
            )));
        }
        let total = self.total_mass();
        if total > 1.0 + Self::MASS_SLACK {
            return Err(Error::Config(format!("total mass {total} exceeds 1")));
        }
        Ok(())
    }

    pub fn cfg(&self) -> PaletteConfig {
        self.cfg
    }

    pub fn get(&self, t: VertexType) -> f64 {
        self.cfg.index_of(t).map_or(0.0, |i| self.z[i])
    }

    pub fn set(&mut self, t: VertexType, mass: f64) {
        let i = self.cfg.index_of(t).expect("type outside the type space");
        self.z[i] = mass;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.z
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexType, f64)> + '_ {
        self.z.iter().enumerate().map(move |(i, &x)| (self.cfg.type_at(i), x))
    }

    pub fn total_mass(&self) -> f64 {
        self.z.iter().sum()
    }

    /// Max-norm distance to another distribution over the same types.
    pub fn max_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.cfg, other.cfg);
        self.z.iter().zip(&other.z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Activation weights per type and the step size `epsilon`; a vertex of
/// type `t` is activated with probability `epsilon * weight(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TuningParams {
    cfg: PaletteConfig,
    weights: Vec<f64>,
    epsilon: f64,
}

impl TuningParams {
    pub fn new(cfg: PaletteConfig, weights: Vec<f64>, epsilon: f64) -> Result<Self> {
        if weights.len() != cfg.num_types() {
            return Err(Error::Config(format!(
                "{} weights given, expected {}",
                weights.len(),
                cfg.num_types()
            )));
        }
        let params = Self { cfg, weights, epsilon };
        params.validate()?;
        Ok(params)
    }

    /// `2^(2 - 2d)` for `d != 1` and `2^-10` for `d = 1`, independent of `c`.
    pub fn standard_weights(cfg: PaletteConfig) -> Vec<f64> {
        cfg.types()
            .map(|t| if t.d == 1 { 2f64.powi(-10) } else { 2f64.powi(2 - 2 * t.d as i32) })
            .collect()
    }

    pub fn standard(cfg: PaletteConfig, epsilon: f64) -> Result<Self> {
        Self::new(cfg, Self::standard_weights(cfg), epsilon)
    }

    pub fn zero(cfg: PaletteConfig, epsilon: f64) -> Result<Self> {
        Self::new(cfg, vec![0.0; cfg.num_types()], epsilon)
    }

    /// Standard weights with individual types overridden.
    pub fn with_overrides(
        cfg: PaletteConfig,
        overrides: &BTreeMap<VertexType, f64>,
        epsilon: f64,
    ) -> Result<Self> {
        let mut weights = Self::standard_weights(cfg);
        for (&t, &w) in overrides {
            let i = cfg
                .index_of(t)
                .ok_or_else(|| Error::Config(format!("weight given for type ({t}) outside the type space")))?;
            weights[i] = w;
        }
        Self::new(cfg, weights, epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config(format!("activation weight {w} must be finite and nonnegative")));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon = {} must be positive", self.epsilon)));
        }
        let top = self.max_weight();
        if self.epsilon * top > 1.0 {
            return Err(Error::Config(format!(
                "epsilon * max weight = {} * {} exceeds 1",
                self.epsilon, top
            )));
        }
        Ok(())
    }

    pub fn cfg(&self) -> PaletteConfig {
        self.cfg
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, t: VertexType) -> f64 {
        self.cfg.index_of(t).map_or(0.0, |i| self.weights[i])
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Same weights, different step size.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.cfg, self.weights.clone(), epsilon)
    }

    /// Inverse of [`weight_map`](Self::weight_map); every type needs a key.
    pub fn from_weight_map(cfg: PaletteConfig, map: &BTreeMap<String, f64>, epsilon: f64) -> Result<Self> {
        if let Some(key) = map.keys().find(|k| !cfg.types().any(|t| t.to_string() == **k)) {
            return Err(Error::Config(format!("weight given for unknown type {key:?}")));
        }
        let weights = cfg
            .types()
            .map(|t| {
                let key = t.to_string();
                map.get(&key).copied().ok_or_else(|| Error::Config(format!("no weight for type {key:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cfg, weights, epsilon)
    }

    /// Weights keyed by `"d,c"`.
    pub fn weight_map(&self) -> BTreeMap<String, f64> {
        self.cfg.types().zip(&self.weights).map(|(t, &w)| (t.to_string(), w)).collect()
    }
}
