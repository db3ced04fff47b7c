//! Exhaustive Ising ground states for small instances.
//!
//! Spin 0 is fixed to `+1`, so `2^(n-1)` configurations cover every
//! flip-pair once. Configurations are visited in Gray-code order with
//! incremental local fields, `ΔH = 2σ_k h_k` per single flip, and the
//! sequence is split into blocks scanned in parallel.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{cut_from_energy, CouplingMatrix, SpinConfig};
use crate::scalar::Real;

pub const DEFAULT_N_LIMIT: usize = 24;

const BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub n_limit: usize,
    /// Ignore `n_limit` (still bounded by 63 nodes).
    pub force: bool,
    /// Cap on the number of minimizers returned; `degeneracy` is not capped.
    pub max_minimizers: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            n_limit: DEFAULT_N_LIMIT,
            force: false,
            max_minimizers: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult<T> {
    pub h_min: T,
    pub optimal_cut: T,
    /// Canonical minimizers (spin 0 up), ordered by configuration index.
    pub minimizers: Vec<SpinConfig>,
    /// Number of minimizing flip-pairs.
    pub degeneracy: u64,
}

struct BlockMin<T> {
    h: T,
    count: u64,
    indices: Vec<u64>,
}

#[inline]
fn gray(p: u64) -> u64 {
    p ^ (p >> 1)
}

fn scan_block<T: Real>(j: &CouplingMatrix<T>, start: u64, end: u64, tol: T, cap: usize) -> BlockMin<T> {
    let n = j.n();
    let mut s = SpinConfig::from_index(n, gray(start)).spins().to_vec();
    let mut field: Vec<T> = (0..n)
        .map(|i| {
            j.neighbors(i)
                .iter()
                .fold(T::zero(), |a, &(nb, v)| if s[nb] > 0 { a + v } else { a - v })
        })
        .collect();
    let mut h = j.energy_unchecked(&s);
    let mut best = BlockMin {
        h,
        count: 1,
        indices: vec![gray(start)],
    };
    let two = T::lit(2.0);
    for p in (start + 1)..end {
        let k = p.trailing_zeros() as usize + 1;
        let sk = s[k];
        h += if sk > 0 { two * field[k] } else { -two * field[k] };
        s[k] = -sk;
        for &(nb, v) in j.neighbors(k) {
            let dv = two * v;
            if sk > 0 {
                field[nb] -= dv;
            } else {
                field[nb] += dv;
            }
        }
        if h < best.h - tol {
            best.h = h;
            best.count = 1;
            best.indices.clear();
            best.indices.push(gray(p));
        } else if h <= best.h + tol {
            best.count += 1;
            if best.indices.len() < cap {
                best.indices.push(gray(p));
            }
        }
    }
    best
}

/// Exact minimum of `H(σ) = -Σ_{i<j} J_ij σ_i σ_j` by enumeration.
///
/// Energies accumulated incrementally are compared with a tolerance of
/// `1e-9·max(1, Σ|J_ij|)`; the returned minimizers are re-evaluated directly
/// and `h_min` is their exact energy.
pub fn exact_ground_state<T: Real>(j: &CouplingMatrix<T>, opts: &OracleOptions) -> Result<ExactResult<T>> {
    let n = j.n();
    let limit = if opts.force { 63 } else { opts.n_limit.min(63) };
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("graph has no nodes".into()));
    }
    let abs_sum = (0..n).fold(T::zero(), |a, i| {
        j.neighbors(i).iter().fold(a, |a, &(_, v)| a + v.abs())
    });
    let tol = T::lit(1e-9) * T::one().max(abs_sum);
    let cap = opts.max_minimizers.max(1);

    let total = 1u64 << (n - 1);
    let blocks: Vec<(u64, u64)> = (0..total.div_ceil(BLOCK))
        .map(|b| (b * BLOCK, ((b + 1) * BLOCK).min(total)))
        .collect();
    let parts: Vec<BlockMin<T>> = blocks
        .par_iter()
        .map(|&(a, b)| scan_block(j, a, b, tol, cap))
        .collect();

    let mut iter = parts.into_iter();
    let mut best = iter.next().expect("at least one block");
    for part in iter {
        if part.h < best.h - tol {
            best = part;
        } else if part.h <= best.h + tol {
            best.count += part.count;
            best.indices.extend(part.indices);
        }
    }
    best.indices.sort_unstable();
    best.indices.truncate(cap);

    let verified: Vec<(SpinConfig, T)> = best
        .indices
        .iter()
        .map(|&idx| {
            let s = SpinConfig::from_index(n, idx);
            let e = j.energy_unchecked(s.spins());
            (s, e)
        })
        .collect();
    let h_min = verified.iter().fold(verified[0].1, |m, &(_, e)| m.min(e));
    let minimizers = verified.into_iter().filter(|(_, e)| *e == h_min).map(|(s, _)| s).collect();
    Ok(ExactResult {
        h_min,
        optimal_cut: cut_from_energy(j.negated_pair_sum(), h_min),
        minimizers,
        degeneracy: best.count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_random_graph, CouplingMode, Graph};

    fn afm(g: &Graph<f64>) -> CouplingMatrix<f64> {
        CouplingMatrix::from_graph(g, CouplingMode::Antiferromagnetic)
    }

    fn naive(j: &CouplingMatrix<f64>) -> (f64, u64) {
        let n = j.n();
        let hs: Vec<f64> = (0..1u64 << (n - 1))
            .map(|i| j.ising_energy(&SpinConfig::from_index(n, i)).unwrap())
            .collect();
        let m = hs.iter().cloned().fold(f64::INFINITY, f64::min);
        (m, hs.iter().filter(|&&h| h == m).count() as u64)
    }

    #[test]
    fn triangle() {
        let g = Graph::new(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let r = exact_ground_state(&afm(&g), &OracleOptions::default()).unwrap();
        assert_eq!((r.h_min, r.optimal_cut, r.degeneracy), (-1.0, 2.0, 3));
        assert_eq!(r.minimizers.len(), 3);
    }

    #[test]
    fn pair_and_bipartite() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let r = exact_ground_state(&afm(&g), &OracleOptions::default()).unwrap();
        assert_eq!((r.h_min, r.optimal_cut), (-1.0, 1.0));

        let edges: Vec<_> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b, 1.0))).collect();
        let k33 = Graph::new(6, edges).unwrap();
        let r = exact_ground_state(&afm(&k33), &OracleOptions::default()).unwrap();
        assert_eq!((r.h_min, r.optimal_cut, r.degeneracy), (-9.0, 9.0, 1));
        assert_eq!(r.minimizers[0].to_string(), "+++---");
    }

    #[test]
    fn agrees_with_naive_enumeration() {
        for seed in 0..6 {
            let g = generate_random_graph(11, 25, 1.0, seed).unwrap();
            let j = afm(&g);
            let r = exact_ground_state(&j, &OracleOptions::default()).unwrap();
            assert_eq!((r.h_min, r.degeneracy), naive(&j));
            for s in &r.minimizers {
                assert_eq!(j.ising_energy(s).unwrap(), r.h_min);
            }
        }
    }

    #[test]
    fn multi_block_matches_naive() {
        let g = generate_random_graph(17, 50, 1.0, 3).unwrap();
        let j = afm(&g);
        let r = exact_ground_state(&j, &OracleOptions::default()).unwrap();
        assert_eq!((r.h_min, r.degeneracy), naive(&j));
        assert!(r.minimizers.windows(2).all(|w| w[0].index() < w[1].index()));
    }

    #[test]
    fn weighted_graph() {
        let g = Graph::new(4, [(0, 1, 0.3), (1, 2, 1.7), (2, 3, -0.4), (0, 3, 2.2), (0, 2, 0.9)]).unwrap();
        let j = afm(&g);
        let r = exact_ground_state(&j, &OracleOptions::default()).unwrap();
        assert_eq!(r.h_min, naive(&j).0);
    }

    #[test]
    fn size_limit() {
        let g = generate_random_graph(30, 40, 1.0, 1).unwrap();
        let opts = OracleOptions::default();
        assert!(matches!(
            exact_ground_state(&afm(&g), &opts),
            Err(Error::TooLarge { n: 30, limit: 24 })
        ));
        let small = generate_random_graph(10, 12, 1.0, 1).unwrap();
        let tight = OracleOptions { n_limit: 8, ..opts };
        assert!(exact_ground_state(&afm(&small), &tight).is_err());
        let forced = OracleOptions { force: true, ..tight };
        assert!(exact_ground_state(&afm(&small), &forced).is_ok());
    }

    #[test]
    fn minimizer_cap() {
        let j = CouplingMatrix::from_dense(5, vec![0.0; 25]).unwrap();
        let r = exact_ground_state(&j, &OracleOptions { max_minimizers: 3, ..Default::default() }).unwrap();
        assert_eq!(r.degeneracy, 16);
        assert_eq!(r.minimizers.len(), 3);
        assert_eq!(r.h_min, 0.0);
    }
}
