//! Local stability of Type I fixed points.
//!
//! A Type I fixed point has every phase on a multiple of π/2 and is a fixed
//! point of the DIM for any `K`, `K_s` and `J`. It belongs to one of two
//! homogeneous classes: all phases in `{0, π}` (spin states) or all in
//! `{π/2, 3π/2}`. Fixed points are stored as quarter turns, so the
//! trigonometric factors in the Jacobian are exact `0`/`±1`.
//!
//! The Jacobian of either model is symmetric,
//!
//! ```text
//! A = K·D - 2K_s·Δ,    Δ = diag(cos 2φ_i)
//! DIM: D_ij = -J_ij cos(φ_i + φ_j),  D_ii = -Σ_j J_ij cos(φ_i + φ_j)
//! OIM: D_ij = +J_ij cos(φ_i - φ_j),  D_ii = -Σ_j J_ij cos(φ_i - φ_j)
//! ```
//!
//! and its largest eigenvalue λ_L decides stability (`λ_L < 0`).

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::dynamics::ModelKind;
use crate::error::{Error, Result};
use crate::graph::{CouplingMatrix, SpinConfig};
use crate::scalar::{wrap_phase, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixedPointClass {
    /// Every phase in `{0, π}`.
    ZeroPi,
    /// Every phase in `{π/2, 3π/2}`.
    HalfPi,
}

impl FixedPointClass {
    fn name(self) -> &'static str {
        match self {
            FixedPointClass::ZeroPi => "{0, pi}",
            FixedPointClass::HalfPi => "{pi/2, 3pi/2}",
        }
    }
}

#[inline]
fn cos_quarter(q: u8) -> i8 {
    [1, 0, -1, 0][(q & 3) as usize]
}

#[inline]
fn sin_quarter(q: u8) -> i8 {
    [0, 1, 0, -1][(q & 3) as usize]
}

/// A homogeneous Type I fixed point, phases `q_i · π/2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeIFixedPoint {
    quarters: Vec<u8>,
    class: FixedPointClass,
}

impl TypeIFixedPoint {
    pub fn from_quarter_turns(quarters: Vec<u8>) -> Result<Self> {
        let quarters: Vec<u8> = quarters.into_iter().map(|q| q & 3).collect();
        let class = match quarters.first() {
            None => return Err(Error::NotTypeOne("empty phase vector".into())),
            Some(q) if q % 2 == 0 => FixedPointClass::ZeroPi,
            Some(_) => FixedPointClass::HalfPi,
        };
        let parity = quarters[0] % 2;
        if let Some(i) = quarters.iter().position(|q| q % 2 != parity) {
            return Err(Error::NotTypeOne(format!(
                "phase {i} is not in the {} class of phase 0",
                class.name()
            )));
        }
        Ok(TypeIFixedPoint { quarters, class })
    }

    /// `{0, π}` embedding: `+1 → 0`, `-1 → π`.
    pub fn from_spins(s: &SpinConfig) -> Self {
        TypeIFixedPoint {
            quarters: s.spins().iter().map(|&v| if v > 0 { 0 } else { 2 }).collect(),
            class: FixedPointClass::ZeroPi,
        }
    }

    /// `{π/2, 3π/2}` embedding: `+1 → π/2`, `-1 → 3π/2`.
    pub fn from_half_pi_spins(s: &SpinConfig) -> Self {
        TypeIFixedPoint {
            quarters: s.spins().iter().map(|&v| if v > 0 { 1 } else { 3 }).collect(),
            class: FixedPointClass::HalfPi,
        }
    }

    /// All phases at π/2.
    pub fn half_pi(n: usize) -> Self {
        TypeIFixedPoint {
            quarters: vec![1; n],
            class: FixedPointClass::HalfPi,
        }
    }

    /// Snaps phases to multiples of π/2; each must lie within `tol`.
    pub fn from_phases<T: Real>(phi: &[T], tol: T) -> Result<Self> {
        let quarter = T::frac_pi_2();
        let quarters = phi
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let p = wrap_phase(p);
                let q = (p / quarter).round();
                if (p - q * quarter).abs() > tol {
                    return Err(Error::NotTypeOne(format!("phase {i} = {p} is not a multiple of pi/2")));
                }
                Ok((q.to_f64_lossy() as i64).rem_euclid(4) as u8)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_quarter_turns(quarters)
    }

    pub fn len(&self) -> usize {
        self.quarters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quarters.is_empty()
    }

    pub fn class(&self) -> FixedPointClass {
        self.class
    }

    pub fn quarter_turns(&self) -> &[u8] {
        &self.quarters
    }

    pub fn phases<T: Real>(&self) -> Vec<T> {
        self.quarters
            .iter()
            .map(|&q| T::from_count(q as usize) * T::frac_pi_2())
            .collect()
    }

    /// Spin configuration of a `{0, π}` fixed point.
    pub fn spins(&self) -> Result<SpinConfig> {
        self.require(FixedPointClass::ZeroPi)?;
        SpinConfig::new(self.quarters.iter().map(|&q| if q == 0 { 1 } else { -1 }).collect())
    }

    fn require(&self, class: FixedPointClass) -> Result<()> {
        if self.class != class {
            return Err(Error::WrongFixedPointClass {
                expected: class.name(),
                found: self.class.name(),
            });
        }
        Ok(())
    }

    #[inline]
    fn cos_sum(&self, i: usize, j: usize) -> i8 {
        cos_quarter(self.quarters[i].wrapping_add(self.quarters[j]))
    }

    #[inline]
    fn cos_diff(&self, i: usize, j: usize) -> i8 {
        cos_quarter(self.quarters[i].wrapping_add(4 - self.quarters[j]))
    }
}

fn check_dim<T: Real>(j: &CouplingMatrix<T>, n: usize) -> Result<()> {
    if j.n() != n {
        return Err(Error::DimensionMismatch {
            expected: j.n(),
            found: n,
        });
    }
    Ok(())
}

#[inline]
fn signed<T: Real>(v: T, s: i8) -> T {
    match s {
        0 => T::zero(),
        1 => v,
        _ => -v,
    }
}

/// Right-hand side of the DIM at a Type I fixed point, evaluated with exact
/// quarter-turn trigonometry (every term is a product with `0`).
pub fn type_one_residual<T: Real>(j: &CouplingMatrix<T>, fp: &TypeIFixedPoint, k: T, ks: T) -> Result<Vec<T>> {
    check_dim(j, fp.len())?;
    let q = fp.quarter_turns();
    Ok((0..fp.len())
        .map(|i| {
            let coupling = j
                .neighbors(i)
                .iter()
                .fold(T::zero(), |acc, &(nb, v)| acc + signed(v, sin_quarter(q[i].wrapping_add(q[nb]))));
            -k * coupling - signed(ks, sin_quarter(2 * q[i]))
        })
        .collect())
}

/// Jacobian `A = K·D - 2K_s·Δ` together with its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBundle<T: Real> {
    pub a: DMatrix<T>,
    pub d: DMatrix<T>,
    pub delta_diag: Vec<T>,
    pub model: ModelKind,
}

/// The `D` matrix of the chosen model at a Type I fixed point.
pub fn d_matrix<T: Real>(model: ModelKind, j: &CouplingMatrix<T>, fp: &TypeIFixedPoint) -> Result<DMatrix<T>> {
    check_dim(j, fp.len())?;
    let n = fp.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = T::zero();
        for &(nb, v) in j.neighbors(i) {
            let (c, off) = match model {
                ModelKind::Dim => {
                    let c = fp.cos_sum(i, nb);
                    (c, -c)
                }
                ModelKind::Oim => {
                    let c = fp.cos_diff(i, nb);
                    (c, c)
                }
            };
            d[(i, nb)] = signed(v, off);
            diag -= signed(v, c);
        }
        d[(i, i)] = diag;
    }
    Ok(d)
}

/// Jacobian of `model` at a Type I fixed point. Exactly symmetric.
pub fn jacobian<T: Real>(
    model: ModelKind,
    j: &CouplingMatrix<T>,
    fp: &TypeIFixedPoint,
    k: T,
    ks: T,
) -> Result<JacobianBundle<T>> {
    let d = d_matrix(model, j, fp)?;
    let delta_diag: Vec<T> = fp
        .quarter_turns()
        .iter()
        .map(|&q| signed(T::one(), cos_quarter(2 * q)))
        .collect();
    let two_ks = T::lit(2.0) * ks;
    let mut a = &d * k;
    for (i, &dd) in delta_diag.iter().enumerate() {
        a[(i, i)] -= two_ks * dd;
    }
    Ok(JacobianBundle {
        a,
        d,
        delta_diag,
        model,
    })
}

/// Jacobian of the right-hand side at arbitrary phases.
pub fn phase_jacobian<T: Real>(model: ModelKind, j: &CouplingMatrix<T>, phi: &[T], k: T, ks: T) -> Result<DMatrix<T>> {
    check_dim(j, phi.len())?;
    let n = phi.len();
    let two = T::lit(2.0);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = T::zero();
        for &(nb, v) in j.neighbors(i) {
            let (c, off) = match model {
                ModelKind::Dim => {
                    let c = (phi[i] + phi[nb]).cos();
                    (c, -c)
                }
                ModelKind::Oim => {
                    let c = (phi[i] - phi[nb]).cos();
                    (c, c)
                }
            };
            a[(i, nb)] = k * v * off;
            diag -= k * v * c;
        }
        a[(i, i)] = diag - two * ks * (two * phi[i]).cos();
    }
    Ok(a)
}

/// ℵ with entries `K·J_ij cos(φ_i - φ_j)` off the diagonal, relating the
/// Jacobians at `{0, π}` fixed points: `A_DIM = A_OIM - 2ℵ`.
pub fn aleph_matrix<T: Real>(j: &CouplingMatrix<T>, fp: &TypeIFixedPoint, k: T) -> Result<DMatrix<T>> {
    Ok(aleph_matrix_unscaled(j, fp)? * k)
}

/// ℵ without the coupling constant, `J_ij cos(φ_i - φ_j)`; coincides with
/// [`aleph_matrix`] at `K = 1`.
pub fn aleph_matrix_unscaled<T: Real>(j: &CouplingMatrix<T>, fp: &TypeIFixedPoint) -> Result<DMatrix<T>> {
    check_dim(j, fp.len())?;
    fp.require(FixedPointClass::ZeroPi)?;
    let n = fp.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for &(nb, v) in j.neighbors(i) {
            m[(i, nb)] = signed(v, fp.cos_diff(i, nb));
        }
    }
    Ok(m)
}

fn max_abs<T: Real>(a: &DMatrix<T>) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

fn check_symmetric<T: Real>(a: &DMatrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let n = a.nrows();
    let mut asym = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    let tol = T::lit(1e-12).max(T::eps() * T::lit(10.0)) * T::one().max(max_abs(a));
    if asym > tol {
        return Err(Error::NotSymmetric {
            asymmetry: asym.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Largest eigenvalue and a unit eigenvector of a symmetric matrix.
pub fn largest_eigenpair<T: Real>(a: &DMatrix<T>) -> Result<(T, DVector<T>)> {
    check_symmetric(a)?;
    if a.nrows() == 0 {
        return Err(Error::Eigen("empty matrix".into()));
    }
    let eig = SymmetricEigen::try_new(a.clone(), T::eps(), 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let (idx, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.partial_cmp(y.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty");
    Ok((val, eig.eigenvectors.column(idx).into_owned()))
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn eigenvalues<T: Real>(a: &DMatrix<T>) -> Result<Vec<T>> {
    check_symmetric(a)?;
    let eig = SymmetricEigen::try_new(a.clone(), T::eps(), 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let mut v: Vec<T> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(v)
}

/// λ_L: the largest eigenvalue of a symmetric matrix.
pub fn lambda_max<T: Real>(a: &DMatrix<T>) -> Result<T> {
    largest_eigenpair(a).map(|(v, _)| v)
}

/// `λ_L(M) ≤ 1e-10 · max(1, ‖M‖_F)`.
pub fn check_negative_semidefinite<T: Real>(m: &DMatrix<T>) -> Result<bool> {
    let lam = lambda_max(m)?;
    Ok(lam <= T::lit(1e-10) * T::one().max(m.norm()))
}

/// `K_s` above which the all-π/2 fixed point of the DIM is unstable:
/// `-K·λ_L(D_DIM(π/2)) / 2`, which equals `-K·λ_L(-Dg - W) / 2` for
/// antiferromagnetic couplings.
pub fn critical_ks_destabilize_halfpi<T: Real>(j: &CouplingMatrix<T>, k: T) -> Result<T> {
    let d = d_matrix(ModelKind::Dim, j, &TypeIFixedPoint::half_pi(j.n()))?;
    Ok(-k * lambda_max(&d)? / T::lit(2.0))
}

/// `K_s` above which a `{0, π}` fixed point of the DIM is stable:
/// `K·λ_L(D_DIM(φ*)) / 2`.
pub fn critical_ks_stabilize_zeropi<T: Real>(j: &CouplingMatrix<T>, k: T, fp: &TypeIFixedPoint) -> Result<T> {
    fp.require(FixedPointClass::ZeroPi)?;
    let d = d_matrix(ModelKind::Dim, j, fp)?;
    Ok(k * lambda_max(&d)? / T::lit(2.0))
}

/// `K_s` at which the lowest `{0, π}` state and the π/2 state have equal
/// DIM energy: `K·(H_min + ξ) / N`.
pub fn ks_energy_crossover<T: Real>(k: T, h_min: T, xi: T, n: usize) -> T {
    assert!(n > 0, "node count must be positive");
    k * (h_min + xi) / T::from_count(n)
}

/// The three critical second-harmonic strengths of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport<T> {
    pub ks_destabilize_halfpi: T,
    pub ks_stabilize_zeropi: Vec<(SpinConfig, T)>,
    pub ks_energy_crossover: Option<T>,
}

pub fn threshold_report<T: Real>(
    j: &CouplingMatrix<T>,
    k: T,
    configs: &[SpinConfig],
    h_min: Option<T>,
    xi: T,
) -> Result<ThresholdReport<T>> {
    let ks_stabilize_zeropi = configs
        .iter()
        .map(|s| Ok((s.clone(), critical_ks_stabilize_zeropi(j, k, &TypeIFixedPoint::from_spins(s))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdReport {
        ks_destabilize_halfpi: critical_ks_destabilize_halfpi(j, k)?,
        ks_stabilize_zeropi,
        ks_energy_crossover: h_min.map(|h| ks_energy_crossover(k, h, xi, j.n())),
    })
}

/// One `{0, π}` configuration with its Ising energy and λ_L.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow<T> {
    pub config: SpinConfig,
    pub h: T,
    pub lambda_l: T,
    pub stable: bool,
}

pub fn stability_row<T: Real>(model: ModelKind, j: &CouplingMatrix<T>, s: &SpinConfig, k: T, ks: T) -> Result<StabilityRow<T>> {
    let h = j.ising_energy(s)?;
    let a = jacobian(model, j, &TypeIFixedPoint::from_spins(s), k, ks)?.a;
    let lambda_l = lambda_max(&a)?;
    Ok(StabilityRow {
        config: s.clone(),
        h,
        lambda_l,
        stable: lambda_l < T::zero(),
    })
}

/// Range of λ_L over all `{0, π}` configurations sharing one Ising energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow<T> {
    pub h: T,
    pub lambda_min: T,
    pub lambda_max: T,
    pub count: u64,
    /// Enumeration index (see [`SpinConfig::from_index`]) attaining `lambda_min`.
    pub argmin_index: u64,
    /// Enumeration index attaining `lambda_max`.
    pub argmax_index: u64,
}

const SCAN_BLOCK: u64 = 1 << 10;

/// Energy key: H rounded to 9 decimals.
fn energy_key<T: Real>(h: T) -> i64 {
    (h.to_f64_lossy() * 1e9).round() as i64
}

/// Enumerates all `2^(n-1)` `{0, π}` configurations (spin 0 fixed to `+1`),
/// computes λ_L of each Jacobian and groups by Ising energy, ascending.
pub fn stability_scan<T: Real>(
    model: ModelKind,
    j: &CouplingMatrix<T>,
    k: T,
    ks: T,
    n_limit: usize,
) -> Result<Vec<ScanRow<T>>> {
    let n = j.n();
    if n > n_limit || n > 63 || n == 0 {
        return Err(Error::TooLarge { n, limit: n_limit.min(63) });
    }
    let total = 1u64 << (n - 1);
    let blocks: Vec<u64> = (0..total.div_ceil(SCAN_BLOCK)).collect();
    let partial = blocks
        .par_iter()
        .map(|&b| {
            let mut acc: BTreeMap<i64, ScanRow<T>> = BTreeMap::new();
            for idx in (b * SCAN_BLOCK)..((b + 1) * SCAN_BLOCK).min(total) {
                let s = SpinConfig::from_index(n, idx);
                let row = stability_row(model, j, &s, k, ks)?;
                merge_row(
                    &mut acc,
                    energy_key(row.h),
                    ScanRow {
                        h: row.h,
                        lambda_min: row.lambda_l,
                        lambda_max: row.lambda_l,
                        count: 1,
                        argmin_index: idx,
                        argmax_index: idx,
                    },
                );
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut all: BTreeMap<i64, ScanRow<T>> = BTreeMap::new();
    for block in partial {
        for (key, row) in block {
            merge_row(&mut all, key, row);
        }
    }
    Ok(all.into_values().collect())
}

/// Blocks are merged in index order, so ties keep the lowest index.
fn merge_row<T: Real>(acc: &mut BTreeMap<i64, ScanRow<T>>, key: i64, row: ScanRow<T>) {
    match acc.get_mut(&key) {
        None => {
            acc.insert(key, row);
        }
        Some(cur) => {
            if row.lambda_min < cur.lambda_min {
                cur.lambda_min = row.lambda_min;
                cur.argmin_index = row.argmin_index;
            }
            if row.lambda_max > cur.lambda_max {
                cur.lambda_max = row.lambda_max;
                cur.argmax_index = row.argmax_index;
            }
            cur.count += row.count;
        }
    }
}

/// CSV with columns `H, lambda_min, lambda_max, count`.
pub fn write_scan_csv<T: Real, W: Write>(rows: &[ScanRow<T>], mut w: W) -> std::io::Result<()> {
    writeln!(w, "H,lambda_min,lambda_max,count")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.h, r.lambda_min, r.lambda_max, r.count)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::model_rhs;
    use crate::graph::{generate_random_graph, CouplingMode, Graph};

    fn pair() -> CouplingMatrix<f64> {
        CouplingMatrix::from_dense(2, vec![0.0, -1.0, -1.0, 0.0]).unwrap()
    }

    fn triangle() -> CouplingMatrix<f64> {
        let g = Graph::new(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic)
    }

    fn random(n: usize, m: usize, seed: u64) -> (Graph<f64>, CouplingMatrix<f64>) {
        let g = generate_random_graph(n, m, 1.0, seed).unwrap();
        let j = CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic);
        (g, j)
    }

    /// Central-difference Jacobian of the right-hand side.
    fn fd_jacobian(model: ModelKind, j: &CouplingMatrix<f64>, phi: &[f64], k: f64, ks: f64) -> DMatrix<f64> {
        let n = phi.len();
        let h = 1e-6;
        let mut a = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut p = phi.to_vec();
            p[c] += h;
            let up = model_rhs(model, j, &p, k, ks).unwrap();
            p[c] -= 2.0 * h;
            let dn = model_rhs(model, j, &p, k, ks).unwrap();
            for r in 0..n {
                a[(r, c)] = (up[r] - dn[r]) / (2.0 * h);
            }
        }
        a
    }

    #[test]
    fn fixed_point_classes() {
        assert!(TypeIFixedPoint::from_quarter_turns(vec![0, 2, 0]).is_ok());
        assert!(TypeIFixedPoint::from_quarter_turns(vec![1, 3, 5]).is_ok());
        assert!(matches!(
            TypeIFixedPoint::from_quarter_turns(vec![0, 1]),
            Err(Error::NotTypeOne(_))
        ));
        let fp = TypeIFixedPoint::from_phases(&[0.0, std::f64::consts::PI, -1e-12], 1e-9).unwrap();
        assert_eq!(fp.quarter_turns(), &[0, 2, 0]);
        assert!(TypeIFixedPoint::from_phases(&[0.3], 1e-9).is_err());
        assert!(TypeIFixedPoint::half_pi(3).spins().is_err());
    }

    #[test]
    fn dim_pair_jacobian() {
        let fp = TypeIFixedPoint::from_quarter_turns(vec![0, 2]).unwrap();
        let jb = jacobian(ModelKind::Dim, &pair(), &fp, 1.0, 1.0).unwrap();
        assert_eq!(jb.a, DMatrix::from_row_slice(2, 2, &[-3.0, -1.0, -1.0, -3.0]));
        let ev = eigenvalues(&jb.a).unwrap();
        assert!((ev[0] + 4.0).abs() < 1e-12 && (ev[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn dim_half_pi_is_minus_degree_minus_weight() {
        let (g, j) = random(9, 15, 2);
        let d = d_matrix(ModelKind::Dim, &j, &TypeIFixedPoint::half_pi(9)).unwrap();
        let dg = DMatrix::from_diagonal(&DVector::from_vec(g.degrees()));
        assert_eq!(d, -(dg + g.weight_matrix()));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (_, j) = random(8, 14, 9);
        for idx in [0u64, 5, 77] {
            let fp = TypeIFixedPoint::from_spins(&SpinConfig::from_index(8, idx));
            for model in ModelKind::ALL {
                let a = jacobian(model, &j, &fp, 0.9, 1.3).unwrap().a;
                let fd = fd_jacobian(model, &j, &fp.phases::<f64>(), 0.9, 1.3);
                assert!((a - fd).amax() < 1e-6);
            }
        }
        let fp = TypeIFixedPoint::from_half_pi_spins(&SpinConfig::from_index(8, 3));
        let a = jacobian(ModelKind::Dim, &j, &fp, 1.0, 0.5).unwrap().a;
        assert!((a - fd_jacobian(ModelKind::Dim, &j, &fp.phases::<f64>(), 1.0, 0.5)).amax() < 1e-6);
    }

    #[test]
    fn phase_jacobian_agrees_at_type_one_points() {
        let (_, j) = random(7, 12, 4);
        let fp = TypeIFixedPoint::from_spins(&SpinConfig::from_index(7, 21));
        for model in ModelKind::ALL {
            let a = jacobian(model, &j, &fp, 1.1, 0.7).unwrap().a;
            let b = phase_jacobian(model, &j, &fp.phases::<f64>(), 1.1, 0.7).unwrap();
            assert!((a - b).amax() < 1e-12);
        }
    }

    #[test]
    fn residual_is_exactly_zero() {
        let (_, j) = random(10, 20, 1);
        for fp in [
            TypeIFixedPoint::from_spins(&SpinConfig::from_index(10, 300)),
            TypeIFixedPoint::half_pi(10),
            TypeIFixedPoint::from_half_pi_spins(&SpinConfig::from_index(10, 7)),
        ] {
            let r = type_one_residual(&j, &fp, 1.7, 2.3).unwrap();
            assert!(r.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn aleph_examples() {
        let fp = TypeIFixedPoint::from_quarter_turns(vec![0, 2]).unwrap();
        let a = aleph_matrix(&pair(), &fp, 1.0).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let empty = CouplingMatrix::from_dense(3, vec![0.0; 9]).unwrap();
        let fp3 = TypeIFixedPoint::from_spins(&SpinConfig::from_index(3, 2));
        assert_eq!(aleph_matrix(&empty, &fp3, 2.0).unwrap(), DMatrix::zeros(3, 3));
        assert!(matches!(
            aleph_matrix(&pair(), &TypeIFixedPoint::half_pi(2), 1.0),
            Err(Error::WrongFixedPointClass { .. })
        ));
    }

    #[test]
    fn lambda_max_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0f64, -1.0, -1.0, -1.0]);
        assert!(lambda_max(&m).unwrap().abs() < 1e-12);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![-3.0, 2.5, 1.0]));
        assert_eq!(lambda_max(&m).unwrap(), 2.5);
        let m = DMatrix::from_row_slice(2, 2, &[-3.0f64, -1.0, -1.0, -3.0]);
        assert!((lambda_max(&m).unwrap() + 2.0).abs() < 1e-12);
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0 + 1e-6, 0.0]);
        assert!(matches!(lambda_max(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn rayleigh_quotient_of_eigenvector() {
        let (_, j) = random(12, 30, 6);
        let a = jacobian(ModelKind::Oim, &j, &TypeIFixedPoint::from_spins(&SpinConfig::from_index(12, 99)), 1.0, 0.4)
            .unwrap()
            .a;
        let (lam, v) = largest_eigenpair(&a).unwrap();
        let rq = (v.transpose() * &a * &v)[(0, 0)] / v.norm_squared();
        assert!((lam - rq).abs() <= 1e-9 * a.norm());
    }

    #[test]
    fn thresholds_small_graphs() {
        assert!(critical_ks_destabilize_halfpi(&pair(), 1.0).unwrap().abs() < 1e-12);
        let fp = TypeIFixedPoint::from_quarter_turns(vec![0, 2]).unwrap();
        assert!(critical_ks_stabilize_zeropi(&pair(), 1.0, &fp).unwrap().abs() < 1e-12);
        let excited = TypeIFixedPoint::from_quarter_turns(vec![0, 0]).unwrap();
        assert!((critical_ks_stabilize_zeropi(&pair(), 1.0, &excited).unwrap() - 1.0).abs() < 1e-12);
        assert!(critical_ks_stabilize_zeropi(&pair(), 1.0, &TypeIFixedPoint::half_pi(2)).is_err());

        // triangle: Dg + W = [[2,1,1],[1,2,1],[1,1,2]] has spectrum {1, 1, 4}
        let t = critical_ks_destabilize_halfpi(&triangle(), 1.0).unwrap();
        assert!((t - 0.5).abs() < 1e-12, "{t}");
        let t2 = critical_ks_destabilize_halfpi(&triangle(), 2.0).unwrap();
        assert!((t2 - 2.0 * t).abs() < 1e-12);
    }

    #[test]
    fn crossover_examples() {
        assert!((ks_energy_crossover(1.0f64, -20.0, 56.0, 15) - 2.4).abs() < 1e-12);
        assert!((ks_energy_crossover(1.0f64, -1.0, 3.0, 3) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ks_energy_crossover(1.0, -9.0, 9.0, 6), 0.0);
    }

    #[test]
    fn negative_semidefinite_checks() {
        let (_, j) = random(10, 25, 8);
        let d = d_matrix(ModelKind::Dim, &j, &TypeIFixedPoint::half_pi(10)).unwrap();
        assert!(check_negative_semidefinite(&d).unwrap());
        assert!(!check_negative_semidefinite(&DMatrix::<f64>::identity(3, 3)).unwrap());
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(check_negative_semidefinite(&bad).is_err());
    }

    #[test]
    fn pair_scan() {
        let rows = stability_scan(ModelKind::Dim, &pair(), 1.0, 1.0, 24).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].h, -1.0);
        assert!((rows[0].lambda_min + 2.0).abs() < 1e-12);
        assert!((rows[0].lambda_max + 2.0).abs() < 1e-12);
        // (0,0): A = [[1-2, 1], [1, 1-2]] → eigenvalues {0, -2}
        assert_eq!(rows[1].h, 1.0);
        assert!(rows[1].lambda_max.abs() < 1e-12);
        assert_eq!(rows.iter().map(|r| r.count).sum::<u64>(), 2);

        let mut buf = Vec::new();
        write_scan_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("H,lambda_min,lambda_max,count\n-1,"));
    }

    #[test]
    fn scan_size_limit() {
        let (_, j) = random(12, 20, 1);
        assert!(matches!(
            stability_scan(ModelKind::Dim, &j, 1.0, 1.0, 10),
            Err(Error::TooLarge { n: 12, limit: 10 })
        ));
    }

    #[test]
    fn scan_rows_are_consistent() {
        let (_, j) = random(11, 22, 5);
        let rows = stability_scan(ModelKind::Oim, &j, 1.0, 0.8, 24).unwrap();
        assert_eq!(rows.iter().map(|r| r.count).sum::<u64>(), 1 << 10);
        assert!(rows.windows(2).all(|w| w[0].h < w[1].h));
        for r in &rows {
            let lo = stability_row(ModelKind::Oim, &j, &SpinConfig::from_index(11, r.argmin_index), 1.0, 0.8).unwrap();
            let hi = stability_row(ModelKind::Oim, &j, &SpinConfig::from_index(11, r.argmax_index), 1.0, 0.8).unwrap();
            assert_eq!((lo.h, lo.lambda_l), (r.h, r.lambda_min));
            assert_eq!((hi.h, hi.lambda_l), (r.h, r.lambda_max));
        }
    }
}
