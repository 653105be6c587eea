//! Coloring dumps: a header line `n r p`, then one line `v color` per
//! vertex with colors `0..=p`, where `p` stands for the extra color.

use std::fmt::Write as _;

use cascol::process::{Color, ColoringState, Graph};

use crate::error::{CliError, Result};

/// Colors of a dump; `None` marks a vertex left red or uncolored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dump {
    pub n: usize,
    pub r: u32,
    pub p: u32,
    pub colors: Vec<Option<u32>>,
}

pub fn write_dump(state: &ColoringState) -> String {
    let p = state.cfg().p;
    let mut out = format!("{} {} {}\n", state.n(), state.cfg().r, p);
    for (v, c) in state.colors().into_iter().enumerate() {
        let _ = match c {
            Color::Palette(c) => writeln!(out, "{v} {c}"),
            Color::Extra => writeln!(out, "{v} {p}"),
            Color::Red => writeln!(out, "{v} red"),
            Color::Uncolored => writeln!(out, "{v} uncolored"),
        };
    }
    out
}

pub fn parse_dump(text: &str) -> Result<Dump> {
    let bad = |line: usize, msg: &str| CliError::Config(format!("dump line {line}: {msg}"));
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| CliError::Config("dump is empty".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let parsed: Option<(usize, u32, u32)> = match head.as_slice() {
        [n, r, p] => n.parse().ok().zip(r.parse().ok()).zip(p.parse().ok()).map(|((n, r), p)| (n, r, p)),
        _ => None,
    };
    let (n, r, p) = parsed.ok_or_else(|| bad(1, "expected header `n r p`"))?;
    let mut colors: Vec<Option<Option<u32>>> = vec![None; n];
    for (i, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [v, c] = fields.as_slice() else {
            return Err(bad(i, "expected `v color`"));
        };
        let v: usize = v.parse().map_err(|_| bad(i, "vertex is not an integer"))?;
        if v >= n {
            return Err(bad(i, "vertex out of range"));
        }
        let color = match *c {
            "red" | "uncolored" => None,
            c => match c.parse::<u32>() {
                Ok(c) if c <= p => Some(c),
                _ => return Err(bad(i, "color must be an integer in 0..=p")),
            },
        };
        if colors[v].replace(color).is_some() {
            return Err(bad(i, "vertex listed twice"));
        }
    }
    if let Some(v) = colors.iter().position(Option::is_none) {
        return Err(CliError::Config(format!("dump has no color for vertex {v}")));
    }
    Ok(Dump { n, r, p, colors: colors.into_iter().map(Option::unwrap).collect() })
}

/// Outcome of checking a dump against its graph.
#[derive(Clone, Debug, PartialEq)]
pub struct DumpCheck {
    pub violations: Vec<(usize, usize)>,
    /// Vertices left red or uncolored.
    pub missing: Vec<usize>,
    pub extra_fraction: f64,
    pub bound: f64,
}

impl DumpCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.missing.is_empty() && self.extra_fraction <= self.bound
    }
}

pub fn check_dump(dump: &Dump, graph: &Graph, bound: f64) -> Result<DumpCheck> {
    if graph.n() != dump.n || graph.r() != dump.r {
        return Err(CliError::Config(format!(
            "dump is for n = {}, r = {} but the graph has n = {}, r = {}",
            dump.n,
            dump.r,
            graph.n(),
            graph.r()
        )));
    }
    let violations = graph
        .edges()
        .filter(|&(u, v)| dump.colors[u].is_some() && dump.colors[u] == dump.colors[v])
        .collect();
    let missing = (0..dump.n).filter(|&v| dump.colors[v].is_none()).collect();
    let extra = dump.colors.iter().filter(|&&c| c == Some(dump.p)).count();
    Ok(DumpCheck { violations, missing, extra_fraction: extra as f64 / dump.n.max(1) as f64, bound })
}
