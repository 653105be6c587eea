use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::state::Color;

/// Per bad edge, the number of random double-edge switches tried before
/// generation gives up.
pub const MAX_REPAIR_ATTEMPTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    RandomRegular,
    TreeBall,
    Fixture,
}

/// Simple undirected graph in compressed adjacency form.
#[derive(Clone, Debug)]
pub struct Graph {
    kind: GraphKind,
    r: u32,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    boundary: Vec<bool>,
    boundary_count: usize,
}

impl Graph {
    fn from_adjacency(kind: GraphKind, r: u32, mut adj: Vec<Vec<u32>>, boundary: Vec<bool>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut targets = Vec::with_capacity(adj.iter().map(Vec::len).sum());
        offsets.push(0);
        for list in &mut adj {
            list.sort_unstable();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let boundary_count = boundary.iter().filter(|&&b| b).count();
        Graph { kind, r, offsets, targets, boundary, boundary_count }
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    /// Nominal degree.
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    /// Edges `(u, v)` with `u < v`, in increasing order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u).iter().map(|&v| v as usize).filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    /// Number of vertices that take part in type statistics.
    pub fn interior_count(&self) -> usize {
        self.n() - self.boundary_count
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Breadth-first distances from `source`, `u32::MAX` where unreachable.
    pub fn distances_from(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        let mut queue = std::collections::VecDeque::from([source]);
        dist[source] = 0;
        while let Some(v) = queue.pop_front() {
            for &u in self.neighbors(v) {
                let u = u as usize;
                if dist[u] == u32::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

/// Random simple `r`-regular graph on `n` vertices.
///
/// Half-edges are paired uniformly at random; self-loops and parallel edges
/// are then removed by random double-edge switches.
pub fn gen_regular_graph(n: usize, r: u32, seed: u64) -> Result<Graph> {
    if r < 1 {
        return Err(Error::Config("degree must be positive".into()));
    }
    if n <= r as usize {
        return Err(Error::Config(format!("need n > r, got n = {n}, r = {r}")));
    }
    if (n * r as usize) % 2 != 0 {
        return Err(Error::Config(format!("n * r = {} is odd", n * r as usize)));
    }
    if n > u32::MAX as usize {
        return Err(Error::Config(format!("n = {n} is too large")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| std::iter::repeat(v).take(r as usize)).collect();
    stubs.shuffle(&mut rng);
    let mut edges: Vec<(u32, u32)> = stubs.chunks_exact(2).map(|c| (c[0], c[1])).collect();

    let key = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };
    let mut count: HashMap<(u32, u32), u32> = HashMap::with_capacity(edges.len());
    for &(a, b) in &edges {
        *count.entry(key(a, b)).or_insert(0) += 1;
    }
    let is_bad = |count: &HashMap<(u32, u32), u32>, (a, b): (u32, u32)| a == b || count[&key(a, b)] > 1;

    for i in 0..edges.len() {
        let mut attempts = 0;
        while is_bad(&count, edges[i]) {
            attempts += 1;
            if attempts > MAX_REPAIR_ATTEMPTS {
                return Err(Error::Generation(format!(
                    "could not remove a self-loop or parallel edge after {MAX_REPAIR_ATTEMPTS} switches"
                )));
            }
            let j = rng.gen_range(0..edges.len());
            if j == i {
                continue;
            }
            let (a, b) = edges[i];
            let (c, d) = if rng.gen::<bool>() { edges[j] } else { (edges[j].1, edges[j].0) };
            // (a,b),(c,d) -> (a,c),(b,d)
            if a == c || b == d || count.contains_key(&key(a, c)) || count.contains_key(&key(b, d)) {
                continue;
            }
            for e in [key(a, b), key(edges[j].0, edges[j].1)] {
                let k = count.get_mut(&e).unwrap();
                *k -= 1;
                if *k == 0 {
                    count.remove(&e);
                }
            }
            edges[i] = (a, c);
            edges[j] = (b, d);
            *count.entry(key(a, c)).or_insert(0) += 1;
            *count.entry(key(b, d)).or_insert(0) += 1;
        }
    }
    // A switch at i may have been undone by a later switch; one pass over
    // the final multiset settles it.
    if edges.iter().any(|&e| is_bad(&count, e)) {
        return Err(Error::Generation("edge repair left a self-loop or parallel edge".into()));
    }

    let mut adj = vec![Vec::with_capacity(r as usize); n];
    for (a, b) in edges {
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    Ok(Graph::from_adjacency(GraphKind::RandomRegular, r, adj, vec![false; n]))
}

/// Ball of radius `depth` around vertex 0 in the `r`-regular tree.
/// Vertices at distance `depth` are boundary vertices of degree 1.
pub fn tree_ball(r: u32, depth: u32) -> Result<Graph> {
    if r < 2 || depth == 0 {
        return Err(Error::Config(format!("tree ball needs r >= 2 and depth >= 1, got r = {r}, depth = {depth}")));
    }
    let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
    let mut level = vec![0u32];
    for layer in 1..=depth {
        let mut next = Vec::new();
        for &v in &level {
            let children = if layer == 1 { r } else { r - 1 };
            for _ in 0..children {
                let u = adj.len() as u32;
                adj.push(vec![v]);
                adj[v as usize].push(u);
                next.push(u);
            }
        }
        if adj.len() > u32::MAX as usize / 2 {
            return Err(Error::Config("tree ball too large".into()));
        }
        level = next;
    }
    let mut boundary = vec![false; adj.len()];
    for &v in &level {
        boundary[v as usize] = true;
    }
    Ok(Graph::from_adjacency(GraphKind::TreeBall, r, adj, boundary))
}

/// A parsed graph fixture and its preset colors.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub graph: Graph,
    pub colors: Vec<(usize, Color)>,
}

/// Parses the fixture text format: a header line `n r`, then edge lines
/// `u v` and optional lines `color v c` where `c` is a palette index,
/// `red` or `extra`. Blank lines and lines starting with `#` are ignored.
pub fn parse_fixture(text: &str) -> Result<Fixture> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let bad = |line: usize, msg: &str| Error::Parse(format!("fixture line {line}: {msg}"));
    let (hline, header) = lines.next().ok_or_else(|| Error::Parse("empty fixture".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let [n, r] = head[..] else { return Err(bad(hline, "expected `n r`")) };
    let n: usize = n.parse().map_err(|_| bad(hline, "bad vertex count"))?;
    let r: u32 = r.parse().map_err(|_| bad(hline, "bad degree"))?;

    let mut adj = vec![Vec::new(); n];
    let mut colors = Vec::new();
    for (line, text) in lines {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let vertex = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| bad(line, "bad vertex"))?;
            if v >= n {
                return Err(bad(line, &format!("vertex {v} out of range")));
            }
            Ok(v)
        };
        match parts[..] {
            ["color", v, c] => {
                let v = vertex(v)?;
                let color = match c {
                    "red" => Color::Red,
                    "extra" => Color::Extra,
                    c => Color::Palette(c.parse().map_err(|_| bad(line, "bad color"))?),
                };
                colors.push((v, color));
            }
            [u, v] => {
                let (u, v) = (vertex(u)?, vertex(v)?);
                if u == v {
                    return Err(bad(line, "self-loop"));
                }
                if adj[u].contains(&(v as u32)) {
                    return Err(bad(line, "parallel edge"));
                }
                adj[u].push(v as u32);
                adj[v].push(u as u32);
            }
            _ => return Err(bad(line, "expected `u v` or `color v c`")),
        }
    }
    if let Some(v) = (0..n).find(|&v| adj[v].len() > r as usize) {
        return Err(Error::Parse(format!("vertex {v} has degree {} > r = {r}", adj[v].len())));
    }
    Ok(Fixture { graph: Graph::from_adjacency(GraphKind::Fixture, r, adj, vec![false; n]), colors })
}
