use std::fmt;
use std::sync::Arc;

use crate::dynamics::{PaletteConfig, TypeDistribution, VertexType};
use crate::error::{Error, Result};
use crate::process::graph::{Fixture, Graph};

pub(crate) const UNCOLORED: u8 = u8::MAX;
pub(crate) const RED: u8 = u8::MAX - 1;
pub(crate) const EXTRA: u8 = u8::MAX - 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    Uncolored,
    Palette(u8),
    Red,
    Extra,
}

impl Color {
    pub(crate) fn code(self) -> u8 {
        match self {
            Color::Uncolored => UNCOLORED,
            Color::Palette(c) => c,
            Color::Red => RED,
            Color::Extra => EXTRA,
        }
    }

    pub(crate) fn from_code(code: u8) -> Self {
        match code {
            UNCOLORED => Color::Uncolored,
            RED => Color::Red,
            EXTRA => Color::Extra,
            c => Color::Palette(c),
        }
    }

    pub fn is_colored(self) -> bool {
        self != Color::Uncolored
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Uncolored => f.write_str("uncolored"),
            Color::Palette(c) => write!(f, "{c}"),
            Color::Red => f.write_str("red"),
            Color::Extra => f.write_str("extra"),
        }
    }
}

/// Partial coloring of a graph with palette `0..p`, the error marker red
/// and one extra color, plus the bookkeeping the process rules need.
#[derive(Clone, Debug)]
pub struct ColoringState {
    graph: Arc<Graph>,
    cfg: PaletteConfig,
    color: Vec<u8>,
    pub(crate) step: u64,
    uncolored_deg: Vec<u32>,
    /// `seen[v * p + c]`: neighbors of `v` with palette color `c`.
    seen: Vec<u32>,
    /// Bit `c` set iff some neighbor has palette color `c`.
    blocked: Vec<u64>,
    uncolored: Vec<u32>,
    position: Vec<u32>,
    red_count: usize,
    extra_count: usize,

    // Scratch owned by the rule engine; valid within one step.
    pub(crate) hits: Vec<u32>,
    pub(crate) hit_touched: Vec<u32>,
    pub(crate) origin: Vec<u32>,
    pub(crate) mark: Vec<u32>,
    pub(crate) mark_epoch: u32,
    pub(crate) fresh_reds: Vec<u32>,
    pub(crate) step_colored: Vec<u32>,
}

impl ColoringState {
    /// All-uncolored state at step 0.
    pub fn new(graph: Arc<Graph>, cfg: PaletteConfig) -> Result<Self> {
        cfg.validate()?;
        if graph.r() != cfg.r {
            return Err(Error::Config(format!("graph has degree {} but r = {}", graph.r(), cfg.r)));
        }
        let n = graph.n();
        if let Some(v) = (0..n).find(|&v| graph.degree(v) > cfg.r as usize) {
            return Err(Error::Config(format!("vertex {v} has degree above r = {}", cfg.r)));
        }
        let uncolored_deg = (0..n).map(|v| graph.degree(v) as u32).collect();
        Ok(ColoringState {
            cfg,
            color: vec![UNCOLORED; n],
            step: 0,
            uncolored_deg,
            seen: vec![0; n * cfg.p as usize],
            blocked: vec![0; n],
            uncolored: (0..n as u32).collect(),
            position: (0..n as u32).collect(),
            red_count: 0,
            extra_count: 0,
            hits: vec![0; n],
            hit_touched: Vec::new(),
            origin: vec![u32::MAX; n],
            mark: vec![0; n],
            mark_epoch: 0,
            fresh_reds: Vec::new(),
            step_colored: Vec::new(),
            graph,
        })
    }

    /// State on a fixture graph with its preset colors applied.
    pub fn from_fixture(fixture: &Fixture, p: u32) -> Result<Self> {
        let cfg = PaletteConfig::new(fixture.graph.r(), p)?;
        let mut state = Self::new(Arc::new(fixture.graph.clone()), cfg)?;
        for &(v, c) in &fixture.colors {
            state.set_color(v, c)?;
        }
        Ok(state)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn cfg(&self) -> PaletteConfig {
        self.cfg
    }

    pub fn n(&self) -> usize {
        self.color.len()
    }

    /// Number of completed process steps.
    pub fn step(&self) -> u64 {
        self.step
    }

    #[inline]
    pub fn color(&self, v: usize) -> Color {
        Color::from_code(self.color[v])
    }

    #[inline]
    pub(crate) fn code(&self, v: usize) -> u8 {
        self.color[v]
    }

    pub fn colors(&self) -> Vec<Color> {
        self.color.iter().map(|&c| Color::from_code(c)).collect()
    }

    #[inline]
    pub fn is_uncolored(&self, v: usize) -> bool {
        self.color[v] == UNCOLORED
    }

    pub fn uncolored_vertices(&self) -> &[u32] {
        &self.uncolored
    }

    pub fn uncolored_count(&self) -> usize {
        self.uncolored.len()
    }

    pub fn red_count(&self) -> usize {
        self.red_count
    }

    pub fn extra_count(&self) -> usize {
        self.extra_count
    }

    pub fn palette_count(&self) -> usize {
        self.n() - self.uncolored.len() - self.red_count - self.extra_count
    }

    #[inline]
    pub fn uncolored_degree(&self, v: usize) -> u32 {
        self.uncolored_deg[v]
    }

    /// Palette colors no neighbor of `v` has, as a bit mask.
    #[inline]
    pub fn available_mask(&self, v: usize) -> u64 {
        !self.blocked[v] & ((1u64 << self.cfg.p) - 1)
    }

    #[inline]
    pub fn available_count(&self, v: usize) -> u32 {
        self.available_mask(v).count_ones()
    }

    /// Type of an uncolored vertex, `None` for colored ones. Red neighbors
    /// lower `d` but block no color.
    #[inline]
    pub fn vertex_type_of(&self, v: usize) -> Option<VertexType> {
        self.is_uncolored(v).then(|| VertexType { d: self.uncolored_deg[v], c: self.available_count(v) })
    }

    /// Fraction of non-boundary vertices that are uncolored of each type.
    pub fn empirical_z(&self) -> TypeDistribution {
        let mut z = vec![0.0; self.cfg.num_types()];
        let g = &*self.graph;
        for &v in &self.uncolored {
            let v = v as usize;
            if g.is_boundary(v) {
                continue;
            }
            if let Some(i) = self.vertex_type_of(v).and_then(|t| self.cfg.index_of(t)) {
                z[i] += 1.0;
            }
        }
        let total = g.interior_count().max(1) as f64;
        z.iter_mut().for_each(|x| *x /= total);
        TypeDistribution::from_raw(self.cfg, z)
    }

    /// Sets the color of `v`, keeping all bookkeeping consistent.
    pub fn set_color(&mut self, v: usize, color: Color) -> Result<()> {
        if v >= self.n() {
            return Err(Error::Precondition(format!("vertex {v} out of range")));
        }
        if let Color::Palette(c) = color {
            if c as u32 >= self.cfg.p {
                return Err(Error::Precondition(format!("palette color {c} out of range for p = {}", self.cfg.p)));
            }
        }
        self.set_code(v, color.code());
        Ok(())
    }

    pub(crate) fn set_code(&mut self, v: usize, new: u8) {
        let old = self.color[v];
        if old == new {
            return;
        }
        let p = self.cfg.p as usize;
        let graph = Arc::clone(&self.graph);
        let was_uncolored = old == UNCOLORED;
        let is_uncolored = new == UNCOLORED;
        for &u in graph.neighbors(v) {
            let u = u as usize;
            if was_uncolored && !is_uncolored {
                self.uncolored_deg[u] -= 1;
            } else if !was_uncolored && is_uncolored {
                self.uncolored_deg[u] += 1;
            }
            if (old as usize) < p {
                let s = &mut self.seen[u * p + old as usize];
                *s -= 1;
                if *s == 0 {
                    self.blocked[u] &= !(1u64 << old);
                }
            }
            if (new as usize) < p {
                self.seen[u * p + new as usize] += 1;
                self.blocked[u] |= 1u64 << new;
            }
        }
        match old {
            UNCOLORED => {
                let i = self.position[v] as usize;
                let last = *self.uncolored.last().unwrap();
                self.uncolored.swap_remove(i);
                if last as usize != v {
                    self.position[last as usize] = i as u32;
                }
            }
            RED => self.red_count -= 1,
            EXTRA => self.extra_count -= 1,
            _ => {}
        }
        match new {
            UNCOLORED => {
                self.position[v] = self.uncolored.len() as u32;
                self.uncolored.push(v as u32);
            }
            RED => self.red_count += 1,
            EXTRA => self.extra_count += 1,
            _ => {}
        }
        self.color[v] = new;
    }

    /// Starts a fresh epoch of the vertex marks and returns its value.
    pub(crate) fn next_epoch(&mut self) -> u32 {
        self.mark_epoch = self.mark_epoch.wrapping_add(1);
        if self.mark_epoch == 0 {
            self.mark.fill(0);
            self.mark_epoch = 1;
        }
        self.mark_epoch
    }

    /// Forgets which neighbors were colored so far.
    pub(crate) fn clear_hits(&mut self) {
        for &v in &self.hit_touched {
            self.hits[v as usize] = 0;
        }
        self.hit_touched.clear();
    }

    /// Clears the per-step scratch.
    pub(crate) fn reset_scratch(&mut self) {
        self.clear_hits();
        for &v in &self.step_colored {
            self.origin[v as usize] = u32::MAX;
        }
        self.step_colored.clear();
        self.fresh_reds.clear();
    }

    /// Edges whose endpoints carry the same color, treating red and extra
    /// as ordinary colors. Uncolored endpoints never conflict.
    pub fn verify_proper(&self) -> Vec<(usize, usize)> {
        self.graph
            .edges()
            .filter(|&(u, v)| self.color[u] != UNCOLORED && self.color[u] == self.color[v])
            .collect()
    }

    /// Edges joining two equal palette colors.
    pub fn palette_conflicts(&self) -> Vec<(usize, usize)> {
        let p = self.cfg.p as u8;
        self.graph.edges().filter(|&(u, v)| self.color[u] < p && self.color[u] == self.color[v]).collect()
    }

    /// Full consistency check: palette properness, the two-colors list
    /// invariant, conservation and the incremental bookkeeping.
    pub fn check_invariants(&self) -> Result<()> {
        self.check_vertices((0..self.n()).map(|v| v as u32))?;
        if self.uncolored.len() + self.palette_count() + self.red_count + self.extra_count != self.n() {
            return Err(Error::Internal("color classes do not partition the vertices".into()));
        }
        let reds = self.color.iter().filter(|&&c| c == RED).count();
        let extras = self.color.iter().filter(|&&c| c == EXTRA).count();
        let unc = self.color.iter().filter(|&&c| c == UNCOLORED).count();
        if reds != self.red_count || extras != self.extra_count || unc != self.uncolored.len() {
            return Err(Error::Internal("color counters are out of sync".into()));
        }
        Ok(())
    }

    /// Invariants restricted to the given vertices and their neighbors.
    pub(crate) fn check_vertices(&self, vertices: impl IntoIterator<Item = u32>) -> Result<()> {
        let p = self.cfg.p as usize;
        let check = |v: usize| -> Result<()> {
            let nb = self.graph.neighbors(v);
            let code = self.color[v];
            if (code as usize) < p && nb.iter().any(|&u| self.color[u as usize] == code) {
                return Err(Error::Internal(format!("vertex {v} shares palette color {code} with a neighbor")));
            }
            let deg = nb.iter().filter(|&&u| self.color[u as usize] == UNCOLORED).count() as u32;
            if deg != self.uncolored_deg[v] {
                return Err(Error::Internal(format!("uncolored degree of {v} is stale")));
            }
            let mut blocked = 0u64;
            for c in 0..p {
                let seen = nb.iter().filter(|&&u| self.color[u as usize] as usize == c).count() as u32;
                if seen != self.seen[v * p + c] {
                    return Err(Error::Internal(format!("color counts of {v} are stale")));
                }
                if seen > 0 {
                    blocked |= 1 << c;
                }
            }
            if blocked != self.blocked[v] {
                return Err(Error::Internal(format!("blocked colors of {v} are stale")));
            }
            if code == UNCOLORED && self.available_count(v) < 2 {
                return Err(Error::Internal(format!(
                    "uncolored vertex {v} has {} available colors",
                    self.available_count(v)
                )));
            }
            Ok(())
        };
        for v in vertices {
            let v = v as usize;
            check(v)?;
            for &u in self.graph.neighbors(v) {
                check(u as usize)?;
            }
        }
        Ok(())
    }
}
