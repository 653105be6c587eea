//! Exact list coloring of small components.

/// Search nodes allowed per component before giving up.
pub const NODE_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// One color per vertex, taken from its list.
    Colored(Vec<u8>),
    Infeasible,
    BudgetExceeded,
}

/// Properly colors a graph given by local adjacency lists so that vertex
/// `v` takes a color from `lists[v]`. Earlier entries of a list are tried
/// first. Colors must be below 64.
///
/// Vertices whose list is longer than their degree among the vertices not
/// yet removed are peeled off first (they can always be colored last);
/// the remaining kernel is searched by backtracking with forward checking,
/// choosing the vertex with the fewest remaining colors.
pub fn solve_list_coloring(adj: &[Vec<u32>], lists: &[Vec<u8>], budget: u64) -> SolveOutcome {
    let n = adj.len();
    assert_eq!(lists.len(), n);
    if lists.iter().any(Vec::is_empty) {
        return SolveOutcome::Infeasible;
    }

    let mut remaining_deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut queued = vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&v| lists[v].len() > remaining_deg[v]).collect();
    queue.iter().for_each(|&v| queued[v] = true);
    let mut peel_order = Vec::new();
    while let Some(v) = queue.pop() {
        removed[v] = true;
        peel_order.push(v);
        for &u in &adj[v] {
            let u = u as usize;
            if removed[u] {
                continue;
            }
            remaining_deg[u] -= 1;
            if !queued[u] && lists[u].len() > remaining_deg[u] {
                queued[u] = true;
                queue.push(u);
            }
        }
    }

    let mut colors = vec![u8::MAX; n];
    let kernel: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    if !kernel.is_empty() {
        match backtrack(adj, lists, &kernel, budget) {
            Ok(assignment) => {
                for (&v, c) in kernel.iter().zip(assignment) {
                    colors[v] = c;
                }
            }
            Err(outcome) => return outcome,
        }
    }

    for &v in peel_order.iter().rev() {
        let used = adj[v].iter().fold(0u64, |m, &u| match colors[u as usize] {
            u8::MAX => m,
            c => m | (1 << c),
        });
        let c = *lists[v].iter().find(|&&c| used & (1 << c) == 0).expect("peeled vertex always has a free color");
        colors[v] = c;
    }
    SolveOutcome::Colored(colors)
}

struct Frame {
    var: usize,
    next: usize,
    trail_mark: usize,
}

fn backtrack(adj: &[Vec<u32>], lists: &[Vec<u8>], kernel: &[usize], budget: u64) -> Result<Vec<u8>, SolveOutcome> {
    let k = kernel.len();
    let mut local = vec![usize::MAX; adj.len()];
    for (i, &v) in kernel.iter().enumerate() {
        local[v] = i;
    }
    let kadj: Vec<Vec<usize>> = kernel
        .iter()
        .map(|&v| adj[v].iter().map(|&u| local[u as usize]).filter(|&u| u != usize::MAX).collect())
        .collect();
    let prefs: Vec<&[u8]> = kernel.iter().map(|&v| lists[v].as_slice()).collect();
    let mut domain: Vec<u64> = prefs.iter().map(|l| l.iter().fold(0u64, |m, &c| m | (1 << c))).collect();
    let mut assigned = vec![u8::MAX; k];
    let mut trail: Vec<(usize, u64)> = Vec::new();
    let mut frames: Vec<Frame> = Vec::new();
    let mut nodes = 0u64;

    'select: loop {
        let var = (0..k)
            .filter(|&i| assigned[i] == u8::MAX)
            .min_by_key(|&i| (domain[i].count_ones(), i));
        let Some(var) = var else {
            return Ok(assigned);
        };
        frames.push(Frame { var, next: 0, trail_mark: trail.len() });

        loop {
            let Some(frame) = frames.last_mut() else {
                return Err(SolveOutcome::Infeasible);
            };
            while trail.len() > frame.trail_mark {
                let (i, old) = trail.pop().unwrap();
                domain[i] = old;
            }
            let v = frame.var;
            assigned[v] = u8::MAX;
            let choice = prefs[v][frame.next..].iter().position(|&c| domain[v] & (1 << c) != 0);
            let Some(offset) = choice else {
                frames.pop();
                continue;
            };
            let c = prefs[v][frame.next + offset];
            frame.next += offset + 1;
            nodes += 1;
            if nodes > budget {
                return Err(SolveOutcome::BudgetExceeded);
            }
            assigned[v] = c;
            let bit = 1u64 << c;
            let mut wiped = false;
            for &u in &kadj[v] {
                if assigned[u] == u8::MAX && domain[u] & bit != 0 {
                    trail.push((u, domain[u]));
                    domain[u] &= !bit;
                    if domain[u] == 0 {
                        wiped = true;
                        break;
                    }
                }
            }
            if !wiped {
                continue 'select;
            }
        }
    }
}
