//! Weighted graphs, the rudy/G-set text format, and the graph ↔ Ising ↔
//! Max-Cut mappings.
//!
//! Nodes are 0-based internally; rudy files are 1-based and converted at the
//! boundary. Edges are kept in canonical form `(i, j, w)` with `i < j`, sorted
//! by `(i, j)`, so rendering a graph and parsing it back is lossless.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub w: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    name: Option<String>,
}

impl<T: Real> Graph<T> {
    /// Builds a graph from `(i, j, w)` triples (0-based, any orientation).
    ///
    /// Self-loops, out-of-range endpoints, duplicate undirected edges and
    /// non-finite weights are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut out: Vec<Edge<T>> = Vec::new();
        for (k, (a, b, w)) in edges.into_iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge {k}: endpoint ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("edge {k}: self-loop on node {a}")));
            }
            if !w.finite() {
                return Err(Error::InvalidArgument(format!("edge {k}: non-finite weight")));
            }
            out.push(Edge {
                i: a.min(b),
                j: a.max(b),
                w,
            });
        }
        out.sort_by_key(|e| (e.i, e.j));
        if let Some(d) = out.windows(2).find(|p| (p[0].i, p[0].j) == (p[1].i, p[1].j)) {
            return Err(Error::InvalidArgument(format!(
                "duplicate edge ({}, {})",
                d[0].i, d[0].j
            )));
        }
        Ok(Graph {
            n,
            edges: out,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// ξ: the sum of edge weights (the edge count for unit weights).
    pub fn total_weight(&self) -> T {
        self.edges.iter().fold(T::zero(), |acc, e| acc + e.w)
    }

    pub fn has_nonnegative_weights(&self) -> bool {
        self.edges.iter().all(|e| e.w >= T::zero())
    }

    pub fn has_unit_weights(&self) -> bool {
        self.edges.iter().all(|e| e.w == T::one())
    }

    /// Symmetric weight matrix W (zero diagonal).
    pub fn weight_matrix(&self) -> DMatrix<T> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            w[(e.i, e.j)] = e.w;
            w[(e.j, e.i)] = e.w;
        }
        w
    }

    /// Weighted degrees `d_i = Σ_j W_ij`.
    pub fn degrees(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for e in &self.edges {
            d[e.i] += e.w;
            d[e.j] += e.w;
        }
        d
    }

    /// S_cut: total weight of edges whose endpoints have opposite spins.
    pub fn cut_of_spins(&self, s: &SpinConfig) -> Result<T> {
        check_dim(self.n, s.len())?;
        Ok(self
            .edges
            .iter()
            .filter(|e| s[e.i] != s[e.j])
            .fold(T::zero(), |acc, e| acc + e.w))
    }

    /// Inverts `H = ξ - 2·S_cut` (antiferromagnetic mapping).
    pub fn cut_from_energy(&self, h: T) -> T {
        cut_from_energy(self.total_weight(), h)
    }

    /// Renders the graph in rudy format (1-based, edges sorted by `(i, j)`).
    pub fn to_rudy(&self) -> String {
        let mut s = String::with_capacity(16 * (self.edges.len() + 1));
        let _ = writeln!(s, "{} {}", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.i + 1, e.j + 1, e.w);
        }
        s
    }
}

/// `(ξ - H) / 2`.
pub fn cut_from_energy<T: Real>(xi: T, h: T) -> T {
    (xi - h) / T::lit(2.0)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Parses a rudy / G-set file: a header `N M` followed by `M` lines `i j w`
/// with 1-based node indices.
pub fn parse_graph<T: Real>(text: &str) -> Result<Graph<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let hdr: Vec<&str> = header.split_whitespace().collect();
    if hdr.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header must be `N M`, got {header:?}"),
        });
    }
    let parse_count = |tok: &str, what: &str| {
        tok.parse::<usize>().map_err(|_| Error::Parse {
            line: hline,
            msg: format!("malformed {what} {tok:?}"),
        })
    };
    let n = parse_count(hdr[0], "node count")?;
    let m = parse_count(hdr[1], "edge count")?;
    if n == 0 {
        return Err(Error::Parse {
            line: hline,
            msg: "node count must be positive".into(),
        });
    }

    let mut edges: Vec<(usize, Edge<T>)> = Vec::with_capacity(m);
    for (line, l) in lines {
        if edges.len() == m {
            return Err(Error::Parse {
                line,
                msg: format!("more than the declared {m} edge lines"),
            });
        }
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected `i j w`, got {l:?}"),
            });
        }
        let node = |t: &str| -> Result<usize> {
            let v = t.parse::<usize>().map_err(|_| Error::Parse {
                line,
                msg: format!("malformed node index {t:?}"),
            })?;
            if v == 0 || v > n {
                return Err(Error::Parse {
                    line,
                    msg: format!("node index {v} out of range 1..={n}"),
                });
            }
            Ok(v - 1)
        };
        let a = node(tok[0])?;
        let b = node(tok[1])?;
        if a == b {
            return Err(Error::Parse {
                line,
                msg: format!("self-loop on node {}", a + 1),
            });
        }
        let w: f64 = tok[2].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("malformed weight {:?}", tok[2]),
        })?;
        if !w.is_finite() {
            return Err(Error::Parse {
                line,
                msg: "non-finite weight".into(),
            });
        }
        edges.push((
            line,
            Edge {
                i: a.min(b),
                j: a.max(b),
                w: T::lit(w),
            },
        ));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }

    edges.sort_by_key(|(line, e)| (e.i, e.j, *line));
    if let Some(p) = edges
        .windows(2)
        .find(|p| (p[0].1.i, p[0].1.j) == (p[1].1.i, p[1].1.j))
    {
        return Err(Error::Parse {
            line: p[1].0,
            msg: format!(
                "duplicate edge {} {} (first seen on line {})",
                p[1].1.i + 1,
                p[1].1.j + 1,
                p[0].0
            ),
        });
    }
    Ok(Graph {
        n,
        edges: edges.into_iter().map(|(_, e)| e).collect(),
        name: None,
    })
}

/// Samples `m` distinct edges uniformly without replacement, all with
/// weight `w`. Deterministic for a fixed seed.
pub fn generate_random_graph<T: Real>(n: usize, m: usize, w: T, seed: u64) -> Result<Graph<T>> {
    let max = n * n.saturating_sub(1) / 2;
    if m > max {
        return Err(Error::TooManyEdges {
            n,
            requested: m,
            max,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = rand::seq::index::sample(&mut rng, max, m).into_vec();
    picks.sort_unstable();

    // pair index k enumerates (0,1), (0,2), ..., (0,n-1), (1,2), ...
    let mut edges = Vec::with_capacity(m);
    let mut row = 0usize;
    let mut row_start = 0usize;
    for k in picks {
        while k >= row_start + (n - 1 - row) {
            row_start += n - 1 - row;
            row += 1;
        }
        edges.push(Edge {
            i: row,
            j: row + 1 + (k - row_start),
            w,
        });
    }
    Ok(Graph {
        n,
        edges,
        name: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingMode {
    /// `J_ij = -W_ij`; the Ising ground state is the maximum cut.
    Antiferromagnetic,
    /// `J_ij = +W_ij`.
    Ferromagnetic,
}

/// Symmetric Ising couplings with zero diagonal.
///
/// Stored densely for entry access and as per-node adjacency lists so that
/// right-hand sides cost `O(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix<T> {
    n: usize,
    dense: Vec<T>,
    adj: Vec<Vec<(usize, T)>>,
}

impl<T: Real> CouplingMatrix<T> {
    pub fn from_graph(g: &Graph<T>, mode: CouplingMode) -> Self {
        let n = g.n();
        let mut dense = vec![T::zero(); n * n];
        let mut adj = vec![Vec::new(); n];
        for e in g.edges() {
            let j = match mode {
                CouplingMode::Antiferromagnetic => -e.w,
                CouplingMode::Ferromagnetic => e.w,
            };
            dense[e.i * n + e.j] = j;
            dense[e.j * n + e.i] = j;
            adj[e.i].push((e.j, j));
            adj[e.j].push((e.i, j));
        }
        for row in &mut adj {
            row.sort_by_key(|&(k, _)| k);
        }
        CouplingMatrix { n, dense, adj }
    }

    /// Builds couplings from a row-major dense matrix, which must be exactly
    /// symmetric with a zero diagonal.
    pub fn from_dense(n: usize, values: Vec<T>) -> Result<Self> {
        check_dim(n * n, values.len())?;
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            if values[i * n + i] != T::zero() {
                return Err(Error::InvalidCouplings(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if v != values[j * n + i] {
                    return Err(Error::InvalidCouplings(format!("J[{i}][{j}] != J[{j}][{i}]")));
                }
                if !v.finite() {
                    return Err(Error::InvalidCouplings(format!("non-finite J[{i}][{j}]")));
                }
                if v != T::zero() {
                    adj[i].push((j, v));
                }
            }
        }
        Ok(CouplingMatrix {
            n,
            dense: values,
            adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.dense[i * self.n + j]
    }

    /// Nonzero couplings of node `i`, sorted by neighbour index.
    #[inline]
    pub fn neighbors(&self, i: usize) -> &[(usize, T)] {
        &self.adj[i]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.dense[i * self.n..(i + 1) * self.n]
    }

    pub fn nonzeros(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// `-Σ_{i<j} J_ij`, which equals ξ under the antiferromagnetic mapping.
    pub fn negated_pair_sum(&self) -> T {
        let mut s = T::zero();
        for (i, row) in self.adj.iter().enumerate() {
            for &(j, v) in row {
                if j > i {
                    s -= v;
                }
            }
        }
        s
    }

    pub fn to_matrix(&self) -> DMatrix<T> {
        DMatrix::from_row_slice(self.n, self.n, &self.dense)
    }

    /// `H = -Σ_{i<j} J_ij σ_i σ_j`.
    pub fn ising_energy(&self, s: &SpinConfig) -> Result<T> {
        check_dim(self.n, s.len())?;
        Ok(self.energy_unchecked(s.spins()))
    }

    pub(crate) fn energy_unchecked(&self, s: &[i8]) -> T {
        let mut h = T::zero();
        for (i, row) in self.adj.iter().enumerate() {
            let si = s[i];
            for &(j, v) in row {
                if j > i {
                    if si == s[j] {
                        h -= v;
                    } else {
                        h += v;
                    }
                }
            }
        }
        h
    }
}

/// `H = -Σ_{i<j} J_ij σ_i σ_j`.
pub fn ising_energy<T: Real>(j: &CouplingMatrix<T>, s: &SpinConfig) -> Result<T> {
    j.ising_energy(s)
}

/// A configuration of Ising spins, every entry exactly `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(k) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpins(format!(
                "entry {k} is {}, expected ±1",
                spins[k]
            )));
        }
        Ok(SpinConfig(spins))
    }

    pub fn all_up(n: usize) -> Self {
        SpinConfig(vec![1; n])
    }

    /// Enumeration order shared by the oracle and the stability scan:
    /// spin 0 is `+1` and spin `i ≥ 1` is `-1` iff bit `i - 1` of `index` is set.
    pub fn from_index(n: usize, index: u64) -> Self {
        let mut s = vec![1i8; n];
        for (i, v) in s.iter_mut().enumerate().skip(1) {
            if (index >> (i - 1)) & 1 == 1 {
                *v = -1;
            }
        }
        SpinConfig(s)
    }

    /// Inverse of [`SpinConfig::from_index`] for canonical configurations.
    pub fn index(&self) -> u64 {
        let c = self.canonical();
        c.0.iter()
            .skip(1)
            .enumerate()
            .fold(0u64, |acc, (b, &s)| if s < 0 { acc | (1 << b) } else { acc })
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self) -> Self {
        SpinConfig(self.0.iter().map(|&s| -s).collect())
    }

    /// Representative of the global-flip pair with spin 0 equal to `+1`.
    pub fn canonical(&self) -> Self {
        match self.0.first() {
            Some(&-1) => self.flipped(),
            _ => self.clone(),
        }
    }
}

impl std::ops::Index<usize> for SpinConfig {
    type Output = i8;
    fn index(&self, i: usize) -> &i8 {
        &self.0[i]
    }
}

impl std::fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Accepts `+-+-` strings or comma/space separated `1,-1,...` lists.
impl FromStr for SpinConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if !s.is_empty() && s.chars().all(|c| c == '+' || c == '-') {
            return Ok(SpinConfig(
                s.chars().map(|c| if c == '+' { 1 } else { -1 }).collect(),
            ));
        }
        let spins = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<i8>()
                    .map_err(|_| Error::InvalidSpins(format!("cannot parse {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SpinConfig::new(spins)
    }
}
