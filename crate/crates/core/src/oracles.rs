//! Brute-force reference answers and instance generators for the corpus
//! programs.
//!
//! Graphs use the matrix convention of the matching program: for `i < j`,
//! `a[i,j] = 1` marks an edge and `a[j,i] = 1` marks it as matched.

use core::fmt::Write;

use rand::Rng;

use crate::prelude::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("matched pair ({0}, {1}) is not an edge")]
    MatchedNonEdge(usize, usize),
    #[error("vertex {0} is matched twice")]
    DoubleMatched(usize),
    #[error("{0} vertices is too many for exhaustive search")]
    TooLarge(usize),
    #[error("the tr family needs an even n >= 4, got {0}")]
    BadTrSize(usize),
    #[error("job lengths must be 1 or 2")]
    BadJobLength,
}

/// Minimum makespan of jobs with lengths in {1, 2} on `n` machines.
///
/// Up to 12 jobs the answer comes from trying every assignment (up to
/// machine symmetry). Beyond that it is the smallest `T` with room for the
/// total work and with `n * floor(T/2)` slots for the long jobs.
pub fn brute_makespan(jobs: &[u8], n: usize) -> Result<u64, OracleError> {
    if jobs.iter().any(|&p| p != 1 && p != 2) {
        return Err(OracleError::BadJobLength);
    }
    if jobs.is_empty() || n == 0 {
        return Ok(0);
    }
    if jobs.len() <= 12 {
        let mut loads = vec![0u64; n];
        let mut best = u64::MAX;
        search(jobs, &mut loads, 0, &mut best);
        return Ok(best);
    }
    Ok(analytic_makespan(jobs, n))
}

fn search(jobs: &[u8], loads: &mut [u64], k: usize, best: &mut u64) {
    let cur = loads.iter().copied().max().unwrap_or(0);
    if cur >= *best {
        return;
    }
    if k == jobs.len() {
        *best = cur;
        return;
    }
    for m in 0..loads.len() {
        // Machines with equal load are interchangeable.
        if loads[..m].contains(&loads[m]) {
            continue;
        }
        loads[m] += u64::from(jobs[k]);
        search(jobs, loads, k + 1, best);
        loads[m] -= u64::from(jobs[k]);
    }
}

fn analytic_makespan(jobs: &[u8], n: usize) -> u64 {
    let n = n as u64;
    let total: u64 = jobs.iter().map(|&p| u64::from(p)).sum();
    let long = jobs.iter().filter(|&&p| p == 2).count() as u64;
    total.div_ceil(n).max(2 * long.div_ceil(n))
}

/// A graph with a matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphInstance {
    pub n: usize,
    /// Edges `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    /// Matched edges `(i, j)` with `i < j`.
    pub matching: Vec<(usize, usize)>,
}

/// Answer of the maximum-matching test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingAnswer {
    /// The matching is maximum.
    Max,
    /// A larger matching (an augmenting path) exists.
    Aug,
}

impl MatchingAnswer {
    /// Output bit of the matching program.
    pub fn bit(self) -> bool {
        self == MatchingAnswer::Aug
    }
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

impl GraphInstance {
    pub fn new(n: usize, edges: &[(usize, usize)], matching: &[(usize, usize)]) -> Self {
        let mut e: Vec<_> = edges.iter().map(|&(i, j)| ordered(i, j)).collect();
        e.sort_unstable();
        e.dedup();
        let mut m: Vec<_> = matching.iter().map(|&(i, j)| ordered(i, j)).collect();
        m.sort_unstable();
        GraphInstance { n, edges: e, matching: m }
    }

    /// Reads the program's matrix convention.
    #[allow(clippy::needless_range_loop)] // reads a[i][j] and a[j][i]
    pub fn from_matrix(a: &[Vec<bool>]) -> Self {
        let n = a.len();
        let mut edges = Vec::new();
        let mut matching = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if a[i][j] {
                    edges.push((i, j));
                }
                if a[j][i] {
                    matching.push((i, j));
                }
            }
        }
        GraphInstance { n, edges, matching }
    }

    pub fn to_matrix(&self) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; self.n]; self.n];
        for &(i, j) in &self.edges {
            a[i][j] = true;
        }
        for &(i, j) in &self.matching {
            a[j][i] = true;
        }
        a
    }

    /// Checks that the matching is a set of disjoint edges.
    pub fn validate(&self) -> Result<(), OracleError> {
        let mut used = vec![false; self.n];
        for &(i, j) in &self.matching {
            if !self.edges.contains(&(i, j)) {
                return Err(OracleError::MatchedNonEdge(i, j));
            }
            for v in [i, j] {
                if used[v] {
                    return Err(OracleError::DoubleMatched(v));
                }
                used[v] = true;
            }
        }
        Ok(())
    }

    /// Instance text for the matching program.
    pub fn to_instance_text(&self) -> String {
        let mut s = format!(
            "# n = {}, {} edges, matching of size {}\nmatrix a[{},{}] <- {{\n",
            self.n,
            self.edges.len(),
            self.matching.len(),
            self.n,
            self.n
        );
        for (k, row) in self.to_matrix().iter().enumerate() {
            let cells: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            let sep = if k + 1 < self.n { "," } else { "" };
            let _ = writeln!(s, "  {{{}}}{sep}", cells.join(","));
        }
        s.push_str("}\n");
        s
    }
}

/// Size of a maximum matching, by memoized search over vertex subsets.
pub fn max_matching_size(g: &GraphInstance) -> Result<usize, OracleError> {
    if g.n > 20 {
        return Err(OracleError::TooLarge(g.n));
    }
    let mut adj = vec![0u32; g.n];
    for &(i, j) in &g.edges {
        adj[i] |= 1 << j;
        adj[j] |= 1 << i;
    }
    let mut memo = vec![u8::MAX; 1 << g.n];
    Ok(usize::from(best(&adj, (1u32 << g.n) - 1, &mut memo)))
}

fn best(adj: &[u32], free: u32, memo: &mut [u8]) -> u8 {
    if free == 0 {
        return 0;
    }
    if memo[free as usize] != u8::MAX {
        return memo[free as usize];
    }
    let v = free.trailing_zeros();
    let rest = free & !(1 << v);
    // v stays exposed, or is matched to a free neighbour
    let mut b = best(adj, rest, memo);
    let mut nb = adj[v as usize] & rest;
    while nb != 0 {
        let u = nb.trailing_zeros();
        nb &= nb - 1;
        b = b.max(1 + best(adj, rest & !(1 << u), memo));
    }
    memo[free as usize] = b;
    b
}

/// Whether the given matching is maximum.
pub fn brute_matching_answer(g: &GraphInstance) -> Result<MatchingAnswer, OracleError> {
    g.validate()?;
    let best = max_matching_size(g)?;
    Ok(if best > g.matching.len() { MatchingAnswer::Aug } else { MatchingAnswer::Max })
}

/// The `tr` family: a chain of triangles that forces the most blossom
/// shrinks before the augmenting path from vertex 0 to vertex `n - 1` is
/// found.
///
/// Triangles `{2k-2, 2k-1, 2k}` for `k = 1..(n-2)/2`, matched edges
/// `(2k-1, 2k)`, and two edges joining the last triangle to vertex `n - 1`:
/// `3n/2 - 1` edges and `(n-2)/2` matched.
pub fn gen_tr_graph(n: usize) -> Result<GraphInstance, OracleError> {
    if n < 4 || n % 2 == 1 {
        return Err(OracleError::BadTrSize(n));
    }
    let mut edges = Vec::new();
    let mut matching = Vec::new();
    for k in 1..=(n - 2) / 2 {
        edges.extend([(2 * k - 2, 2 * k - 1), (2 * k - 2, 2 * k), (2 * k - 1, 2 * k)]);
        matching.push((2 * k - 1, 2 * k));
    }
    edges.extend([(n - 3, n - 1), (n - 2, n - 1)]);
    Ok(GraphInstance::new(n, &edges, &matching))
}

/// Random graph with edge probability `p` and a random valid matching.
pub fn random_graph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> GraphInstance {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    let mut order = edges.clone();
    for k in (1..order.len()).rev() {
        order.swap(k, rng.gen_range(0..=k));
    }
    let mut used = vec![false; n];
    let mut matching = Vec::new();
    for (i, j) in order {
        if !used[i] && !used[j] && rng.gen_bool(0.5) {
            used[i] = true;
            used[j] = true;
            matching.push((i, j));
        }
    }
    GraphInstance::new(n, &edges, &matching)
}

/// Instance text for the makespan program (`p[i] = 1` marks a job of
/// length 2).
pub fn makespan_instance_text(jobs: &[u8]) -> String {
    let bits: Vec<&str> = jobs.iter().map(|&p| if p == 2 { "1" } else { "0" }).collect();
    format!("array p[{}] <- {{{}}}\n", jobs.len(), bits.join(","))
}

/// Bits needed for the values `0..=v`.
fn bits_for(v: u64) -> u32 {
    (64 - v.leading_zeros()).max(1)
}

/// Parameter file for the makespan program on `m` jobs and `n` machines.
/// The word holds every makespan up to `2m`.
pub fn makespan_params(m: usize, n: usize, maxsteps: u64) -> String {
    let word = bits_for(2 * m as u64).max(bits_for(n as u64));
    format!("m = {m}\nn = {n}\nW = {word}\nmaxsteps = {maxsteps}\noutput T, x\n")
}

/// Parameter file for the matching program on `n` vertices, with the
/// iteration bounds of its `while` loops and no phase overrides.
pub fn matching_params(n: usize, maxsteps: u64) -> String {
    let word = bits_for(n as u64);
    let searches = n.div_ceil(2);
    let mut s = format!("n = {n}\nW = {word}\nmaxsteps = {maxsteps}\nbound.while9 = {searches}\n");
    for label in ["while13", "while17", "while29", "while33", "while40", "while42", "while45"] {
        let _ = writeln!(s, "bound.{label} = n");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn makespan_examples() {
        assert_eq!(brute_makespan(&[1, 1, 2, 2, 1, 1, 2, 2, 1, 1], 3), Ok(5));
        assert_eq!(brute_makespan(&[1; 10], 3), Ok(4));
        assert_eq!(brute_makespan(&[2, 2, 1, 1, 1], 3), Ok(3));
        assert_eq!(brute_makespan(&[2, 2, 2], 2), Ok(4));
        assert_eq!(brute_makespan(&[], 3), Ok(0));
        assert!(brute_makespan(&[3], 1).is_err());
    }

    #[test]
    fn analytic_agrees_with_search() {
        for m in 1..=9 {
            for mask in 0..1u32 << m {
                let jobs: Vec<u8> = (0..m).map(|j| if mask >> j & 1 == 1 { 2 } else { 1 }).collect();
                for n in 1..=4 {
                    assert_eq!(brute_makespan(&jobs, n).unwrap(), analytic_makespan(&jobs, n), "{jobs:?} on {n}");
                }
            }
        }
    }

    #[test]
    fn tr_family() {
        let g = gen_tr_graph(10).unwrap();
        assert_eq!((g.edges.len(), g.matching.len()), (14, 4));
        assert_eq!(brute_matching_answer(&g), Ok(MatchingAnswer::Aug));
        let g = gen_tr_graph(4).unwrap();
        assert_eq!((g.edges.len(), g.matching.len()), (5, 1));
        assert_eq!(gen_tr_graph(12).map(|g| g.edges.len()), Ok(17));
        assert!(gen_tr_graph(7).is_err());
    }

    #[test]
    fn matching_examples() {
        let empty = GraphInstance::new(0, &[], &[]);
        assert_eq!(brute_matching_answer(&empty), Ok(MatchingAnswer::Max));
        let path = GraphInstance::new(4, &[(0, 1), (1, 2), (2, 3)], &[(1, 2)]);
        assert_eq!(brute_matching_answer(&path), Ok(MatchingAnswer::Aug));
        let bad = GraphInstance::new(3, &[(0, 1)], &[(1, 2)]);
        assert!(brute_matching_answer(&bad).is_err());
        assert_eq!(GraphInstance::from_matrix(&path.to_matrix()), path);
    }
}
