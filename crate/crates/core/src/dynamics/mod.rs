//! Oscillator Ising machine (OIM) and dynamical Ising machine (DIM) phase
//! dynamics.
//!
//! Both models share the form
//!
//! ```text
//! dφ_i/dt = -K Σ_{j≠i} J_ij sin(φ_i ∓ φ_j) - K_s sin(2φ_i)
//! E(φ)    = -K Σ_{i≠j} J_ij cos(φ_i ∓ φ_j) - K_s Σ_i cos(2φ_i)
//! ```
//!
//! with the phase difference (`-`) for the OIM and the phase sum (`+`) for
//! the DIM. In both cases `∂E/∂φ_k = -2 dφ_k/dt`, so the flow is a gradient
//! descent on `E` and `dE/dt = -2 Σ_k (dφ_k/dt)² ≤ 0`.
//!
//! The coupling sums are evaluated with the angle-addition identities, so one
//! evaluation costs `n` sine/cosine pairs plus two sparse products over the
//! edges.

mod integrator;
mod schedule;

pub use integrator::{integrate, IntegratorConfig, Trajectory};
pub use schedule::AnnealSchedule;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CouplingMatrix, SpinConfig};
use crate::scalar::{circular_distance, wrap_phase, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Kuramoto-type coupling through phase differences.
    Oim,
    /// Coupling through phase sums.
    Dim,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Dim, ModelKind::Oim];

    /// `+1` for the phase sum, `-1` for the phase difference.
    #[inline]
    fn sign<T: Real>(self) -> T {
        match self {
            ModelKind::Dim => T::one(),
            ModelKind::Oim => -T::one(),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Oim => "OIM",
            ModelKind::Dim => "DIM",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oim" => Ok(ModelKind::Oim),
            "dim" => Ok(ModelKind::Dim),
            _ => Err(Error::InvalidArgument(format!("unknown model {s:?}"))),
        }
    }
}

/// Oscillator phases at time `t`, wrapped to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState<T> {
    phi: Vec<T>,
    pub t: T,
}

impl<T: Real> PhaseState<T> {
    pub fn new(phi: Vec<T>, t: T) -> Self {
        PhaseState {
            phi: phi.into_iter().map(wrap_phase).collect(),
            t,
        }
    }

    /// I.i.d. uniform phases on `[0, 2π)`.
    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let u = Uniform::new(0.0, std::f64::consts::TAU).expect("valid range");
        PhaseState::new((0..n).map(|_| T::lit(u.sample(rng))).collect(), T::zero())
    }

    /// `{0, π}` embedding of a spin configuration (`+1 → 0`, `-1 → π`).
    pub fn from_spins(s: &SpinConfig) -> Self {
        PhaseState::new(
            s.spins()
                .iter()
                .map(|&v| if v > 0 { T::zero() } else { T::pi() })
                .collect(),
            T::zero(),
        )
    }

    pub fn phases(&self) -> &[T] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Adds `shift` to every phase (re-wrapped).
    pub fn shifted(&self, shift: T) -> Self {
        PhaseState::new(self.phi.iter().map(|&p| p + shift).collect(), self.t)
    }

    pub(crate) fn phases_mut(&mut self) -> &mut [T] {
        &mut self.phi
    }
}

fn check_len<T: Real>(j: &CouplingMatrix<T>, phi: &[T]) -> Result<()> {
    if j.n() != phi.len() {
        return Err(Error::DimensionMismatch {
            expected: j.n(),
            found: phi.len(),
        });
    }
    Ok(())
}

/// Scratch buffers for repeated right-hand-side evaluations.
#[derive(Debug, Clone)]
pub(crate) struct Workspace<T> {
    sin: Vec<T>,
    cos: Vec<T>,
    jc: Vec<T>,
    js: Vec<T>,
}

impl<T: Real> Workspace<T> {
    pub(crate) fn new(n: usize) -> Self {
        Workspace {
            sin: vec![T::zero(); n],
            cos: vec![T::zero(); n],
            jc: vec![T::zero(); n],
            js: vec![T::zero(); n],
        }
    }

    /// Fills `sin`, `cos` and the sparse products `Σ_j J_ij cos φ_j`,
    /// `Σ_j J_ij sin φ_j`.
    fn load(&mut self, j: &CouplingMatrix<T>, phi: &[T]) {
        for (k, &p) in phi.iter().enumerate() {
            let (s, c) = p.sin_cos();
            self.sin[k] = s;
            self.cos[k] = c;
        }
        for i in 0..phi.len() {
            let (mut a, mut b) = (T::zero(), T::zero());
            for &(nb, v) in j.neighbors(i) {
                a += v * self.cos[nb];
                b += v * self.sin[nb];
            }
            self.jc[i] = a;
            self.js[i] = b;
        }
    }

    pub(crate) fn rhs_into(
        &mut self,
        model: ModelKind,
        j: &CouplingMatrix<T>,
        phi: &[T],
        k: T,
        ks: T,
        out: &mut [T],
    ) {
        self.load(j, phi);
        let sg: T = model.sign();
        let two = T::lit(2.0);
        for i in 0..phi.len() {
            let (s, c) = (self.sin[i], self.cos[i]);
            // Σ_j J_ij sin(φ_i ± φ_j) = sin φ_i Σ J cos φ_j ± cos φ_i Σ J sin φ_j
            let coupling = s * self.jc[i] + sg * c * self.js[i];
            out[i] = -k * coupling - ks * two * s * c;
        }
    }

    pub(crate) fn energy(&mut self, model: ModelKind, j: &CouplingMatrix<T>, phi: &[T], k: T, ks: T) -> T {
        self.load(j, phi);
        let sg: T = model.sign();
        let mut pair = T::zero();
        let mut shi = T::zero();
        for i in 0..phi.len() {
            let (s, c) = (self.sin[i], self.cos[i]);
            // cos(φ_i ± φ_j) = cos φ_i cos φ_j ∓ sin φ_i sin φ_j
            pair += c * self.jc[i] - sg * s * self.js[i];
            shi += c * c - s * s;
        }
        -k * pair - ks * shi
    }
}

/// Phase velocities `dφ/dt` of the chosen model.
pub fn model_rhs<T: Real>(model: ModelKind, j: &CouplingMatrix<T>, phi: &[T], k: T, ks: T) -> Result<Vec<T>> {
    check_len(j, phi)?;
    let mut out = vec![T::zero(); phi.len()];
    Workspace::new(phi.len()).rhs_into(model, j, phi, k, ks, &mut out);
    Ok(out)
}

/// Lyapunov energy of the chosen model (double sum over ordered pairs).
pub fn model_energy<T: Real>(model: ModelKind, j: &CouplingMatrix<T>, phi: &[T], k: T, ks: T) -> Result<T> {
    check_len(j, phi)?;
    Ok(Workspace::new(phi.len()).energy(model, j, phi, k, ks))
}

/// `∂E/∂φ_k` from the term-by-term derivative of the energy.
///
/// Evaluated edge by edge with direct trigonometry, independently of
/// [`model_rhs`]; the two satisfy `∂E/∂φ_k = -2 dφ_k/dt`.
pub fn energy_gradient<T: Real>(model: ModelKind, j: &CouplingMatrix<T>, phi: &[T], k: T, ks: T) -> Result<Vec<T>> {
    check_len(j, phi)?;
    let sg: T = model.sign();
    let two = T::lit(2.0);
    let mut g = vec![T::zero(); phi.len()];
    for (a, ga) in g.iter_mut().enumerate() {
        let mut acc = T::zero();
        for &(b, v) in j.neighbors(a) {
            // row term d/dφ_a cos(φ_a ± φ_b) and column term d/dφ_a cos(φ_b ± φ_a)
            acc += k * v * (phi[a] + sg * phi[b]).sin();
            acc += k * v * sg * (phi[b] + sg * phi[a]).sin();
        }
        *ga = acc + two * ks * (two * phi[a]).sin();
    }
    Ok(g)
}

/// `2K·H(s) - N·K_s`: the model energy at the `{0, π}` embedding of `s`.
pub fn fixed_point_energy<T: Real>(j: &CouplingMatrix<T>, s: &SpinConfig, k: T, ks: T) -> Result<T> {
    let h = j.ising_energy(s)?;
    Ok(T::lit(2.0) * k * h - T::from_count(s.len()) * ks)
}

/// `dE/dt = -2 Σ_k (dφ_k/dt)²`.
pub fn energy_rate<T: Real>(model: ModelKind, j: &CouplingMatrix<T>, phi: &[T], k: T, ks: T) -> Result<T> {
    let rhs = model_rhs(model, j, phi, k, ks)?;
    Ok(-T::lit(2.0) * rhs.iter().fold(T::zero(), |a, &v| a + v * v))
}

/// `σ_i = +1` when the phase lies within π/2 of 0 (mod 2π), else `-1`.
/// A distance of exactly π/2 resolves to `+1`.
pub fn round_to_spins<T: Real>(phi: &[T]) -> SpinConfig {
    let half = T::frac_pi_2();
    SpinConfig::new(
        phi.iter()
            .map(|&p| if circular_distance(p, T::zero()) <= half { 1 } else { -1 })
            .collect(),
    )
    .expect("entries are ±1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_random_graph, CouplingMode, Graph};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn pair() -> CouplingMatrix<f64> {
        CouplingMatrix::from_dense(2, vec![0.0, -1.0, -1.0, 0.0]).unwrap()
    }

    fn triangle() -> CouplingMatrix<f64> {
        let g = Graph::new(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic)
    }

    /// Direct double sum over ordered pairs.
    fn energy_oracle(model: ModelKind, j: &CouplingMatrix<f64>, phi: &[f64], k: f64, ks: f64) -> f64 {
        let n = phi.len();
        let sg = if model == ModelKind::Dim { 1.0 } else { -1.0 };
        let mut e = 0.0;
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    e -= k * j.get(a, b) * (phi[a] + sg * phi[b]).cos();
                }
            }
            e -= ks * (2.0 * phi[a]).cos();
        }
        e
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn dim_rhs_examples() {
        let j = pair();
        let r = model_rhs(ModelKind::Dim, &j, &[FRAC_PI_2, FRAC_PI_2], 1.7, 0.3).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-15), "{r:?}");
        let r = model_rhs(ModelKind::Dim, &j, &[FRAC_PI_4, FRAC_PI_4], 1.0, 0.0).unwrap();
        assert!(close(r[0], 1.0, 1e-15) && close(r[1], 1.0, 1e-15), "{r:?}");
    }

    #[test]
    fn oim_rhs_vanishes_at_aligned_zero() {
        let g: Graph<f64> = generate_random_graph(8, 12, 1.0, 3).unwrap();
        let j = CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic);
        let r = model_rhs(ModelKind::Oim, &j, &[0.0; 8], 1.3, 2.0).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_examples() {
        let j = pair();
        let e = model_energy(ModelKind::Dim, &j, &[FRAC_PI_2, FRAC_PI_2], 0.5, 0.0).unwrap();
        assert!(close(e, -1.0, 1e-15), "{e}");
        let e = model_energy(ModelKind::Dim, &j, &[0.0, PI], 0.5, 1.0).unwrap();
        assert!(close(e, -3.0, 1e-15), "{e}");

        let t = triangle();
        let e = model_energy(ModelKind::Oim, &t, &[0.0; 3], 0.7, 0.4).unwrap();
        // -K Σ_{i≠j} J_ij - N·Ks with Σ_{i≠j} J_ij = -6
        assert!(close(e, 0.7 * 6.0 - 3.0 * 0.4, 1e-15));
    }

    #[test]
    fn energy_matches_double_sum() {
        let g: Graph<f64> = generate_random_graph(9, 17, 1.0, 11).unwrap();
        let j = CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic);
        let mut rng = rand::rng();
        for _ in 0..20 {
            let phi: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..6.3)).collect();
            for m in ModelKind::ALL {
                let a = model_energy(m, &j, &phi, 0.8, 1.1).unwrap();
                let b = energy_oracle(m, &j, &phi, 0.8, 1.1);
                assert!(close(a, b, 1e-12), "{m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gradient_route_agrees_with_rhs() {
        let g: Graph<f64> = generate_random_graph(10, 20, 1.0, 5).unwrap();
        let j = CouplingMatrix::from_graph(&g, CouplingMode::Antiferromagnetic);
        let mut rng = rand::rng();
        let phi: Vec<f64> = (0..10).map(|_| rng.random_range(0.0..6.3)).collect();
        for m in ModelKind::ALL {
            let g = energy_gradient(m, &j, &phi, 1.2, 0.6).unwrap();
            let r = model_rhs(m, &j, &phi, 1.2, 0.6).unwrap();
            for (a, b) in g.iter().zip(&r) {
                assert!(close(*a, -2.0 * b, 1e-12));
            }
        }
    }

    #[test]
    fn fixed_point_energy_examples() {
        let t = triangle();
        let s: SpinConfig = "++-".parse().unwrap();
        assert_eq!(fixed_point_energy(&t, &s, 0.5, 0.0).unwrap(), -1.0);
        assert_eq!(fixed_point_energy(&t, &SpinConfig::all_up(3), 0.5, 2.0).unwrap(), -3.0);
        let phi = PhaseState::<f64>::from_spins(&s);
        let e = model_energy(ModelKind::Dim, &t, phi.phases(), 0.5, 0.0).unwrap();
        assert!(close(e, -1.0, 1e-14));
    }

    #[test]
    fn energy_rate_examples() {
        let j = pair();
        let r = energy_rate(ModelKind::Dim, &j, &[FRAC_PI_4, FRAC_PI_4], 1.0, 0.0).unwrap();
        assert!(close(r, -4.0, 1e-14));
        let r = energy_rate(ModelKind::Dim, &j, &[FRAC_PI_2, FRAC_PI_2], 1.0, 3.0).unwrap();
        assert!(r.abs() < 1e-28);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_to_spins(&[0.05, 3.10]).to_string(), "+-");
        assert_eq!(round_to_spins(&[2.0 * PI - 0.05, PI + 0.05]).to_string(), "+-");
        assert_eq!(round_to_spins(&[FRAC_PI_2, PI]).to_string(), "+-");
        assert_eq!(round_to_spins(&[-FRAC_PI_2 + 1e-9]).to_string(), "+");
    }

    #[test]
    fn model_parsing() {
        assert_eq!("DIM".parse::<ModelKind>().unwrap(), ModelKind::Dim);
        assert_eq!("oim".parse::<ModelKind>().unwrap(), ModelKind::Oim);
        assert!("sb".parse::<ModelKind>().is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let j = pair();
        assert!(model_rhs(ModelKind::Dim, &j, &[0.0; 3], 1.0, 0.0).is_err());
        assert!(model_energy(ModelKind::Oim, &j, &[0.0], 1.0, 0.0).is_err());
    }
}
