use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{check_len, AnnealSchedule, ModelKind, PhaseState, Workspace};
use crate::error::{Error, Result};
use crate::graph::CouplingMatrix;
use crate::scalar::{wrap_phase, Real};

/// Euler–Maruyama settings.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    /// Diffusion coefficient of the additive white noise (rad / √time).
    pub noise_amplitude: T,
    pub seed: u64,
    /// Record every `record_stride`-th step.
    pub record_stride: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        IntegratorConfig {
            dt: T::lit(0.01),
            noise_amplitude: T::lit(0.05),
            seed: 0,
            record_stride: 1,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.finite() {
            return Err(Error::InvalidIntegrator(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.noise_amplitude >= T::zero()) || !self.noise_amplitude.finite() {
            return Err(Error::InvalidIntegrator(format!(
                "noise amplitude must be >= 0, got {}",
                self.noise_amplitude
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidIntegrator("record stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// Recorded time evolution of one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub phases: Vec<Vec<T>>,
    pub ks_values: Vec<T>,
    pub energies: Vec<T>,
    pub final_state: PhaseState<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with columns `t, Ks, E, phi_0 … phi_{n-1}`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.final_state.len();
        write!(w, "t,Ks,E")?;
        for i in 0..n {
            write!(w, ",phi_{i}")?;
        }
        writeln!(w)?;
        for k in 0..self.times.len() {
            write!(w, "{},{},{}", self.times[k], self.ks_values[k], self.energies[k])?;
            for p in &self.phases[k] {
                write!(w, ",{p}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads the format written by [`Trajectory::write_csv`]. The last row
    /// becomes the final state.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let bad = |line: usize, msg: String| Error::Parse { line, msg };
        let header = match lines.next() {
            Some((_, l)) => l.map_err(|e| bad(1, e.to_string()))?,
            None => return Err(Error::EmptyTrajectory),
        };
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 3 || cols[..3] != ["t", "Ks", "E"] {
            return Err(bad(1, "header must start with t,Ks,E".into()));
        }
        let n = cols.len() - 3;
        let mut tr = Trajectory {
            times: vec![],
            phases: vec![],
            ks_values: vec![],
            energies: vec![],
            final_state: PhaseState::new(vec![], T::zero()),
        };
        for (idx, line) in lines {
            let line = line.map_err(|e| bad(idx + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .trim()
                .split(',')
                .map(|v| v.parse::<f64>().map(T::lit))
                .collect::<std::result::Result<Vec<T>, _>>()
                .map_err(|e| bad(idx + 1, e.to_string()))?;
            if vals.len() != n + 3 {
                return Err(bad(idx + 1, format!("expected {} columns, got {}", n + 3, vals.len())));
            }
            tr.times.push(vals[0]);
            tr.ks_values.push(vals[1]);
            tr.energies.push(vals[2]);
            tr.phases.push(vals[3..].to_vec());
        }
        let last = tr.phases.last().ok_or(Error::EmptyTrajectory)?;
        tr.final_state = PhaseState::new(last.clone(), *tr.times.last().unwrap());
        Ok(tr)
    }
}

/// Integrates `dφ = rhs(φ, K_s(t)) dt + σ dW` with Euler–Maruyama, wrapping
/// phases to `[0, 2π)` after every step.
///
/// The run covers `[phi0.t, schedule.total_time()]` in `round(span / dt)`
/// steps. Noise increments come from a ChaCha8 stream seeded with
/// `cfg.seed`, `n` standard normals per step in node order, so two models run
/// with the same seed see the same noise.
pub fn integrate<T: Real>(
    model: ModelKind,
    j: &CouplingMatrix<T>,
    phi0: &PhaseState<T>,
    schedule: &AnnealSchedule<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    check_len(j, phi0.phases())?;
    cfg.validate()?;
    let n = phi0.len();
    let k = schedule.k();
    let t0 = phi0.t;
    let span = schedule.total_time() - t0;
    let steps = if span > T::zero() {
        (span / cfg.dt).round().to_f64_lossy() as usize
    } else {
        0
    };

    let mut ws = Workspace::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noisy = cfg.noise_amplitude > T::zero();
    let kick = cfg.noise_amplitude * cfg.dt.sqrt();

    let mut state = phi0.clone();
    let mut vel = vec![T::zero(); n];
    let cap = steps / cfg.record_stride + 1;
    let mut tr = Trajectory {
        times: Vec::with_capacity(cap),
        phases: Vec::with_capacity(cap),
        ks_values: Vec::with_capacity(cap),
        energies: Vec::with_capacity(cap),
        final_state: phi0.clone(),
    };
    let record = |tr: &mut Trajectory<T>, st: &PhaseState<T>, ws: &mut Workspace<T>| {
        let ks = schedule.ks_at(st.t);
        tr.times.push(st.t);
        tr.ks_values.push(ks);
        tr.energies.push(ws.energy(model, j, st.phases(), k, ks));
        tr.phases.push(st.phases().to_vec());
    };
    record(&mut tr, &state, &mut ws);

    for step in 0..steps {
        let ks = schedule.ks_at(state.t);
        ws.rhs_into(model, j, state.phases(), k, ks, &mut vel);
        let phi = state.phases_mut();
        for (p, &v) in phi.iter_mut().zip(&vel) {
            let mut x = *p + v * cfg.dt;
            if noisy {
                let z: f64 = StandardNormal.sample(&mut rng);
                x += kick * T::lit(z);
            }
            if !x.finite() {
                return Err(Error::NonFinite {
                    step,
                    t: state.t.to_f64_lossy(),
                });
            }
            *p = wrap_phase(x);
        }
        state.t = t0 + T::from_count(step + 1) * cfg.dt;
        if (step + 1) % cfg.record_stride == 0 {
            record(&mut tr, &state, &mut ws);
        }
    }
    tr.final_state = state;
    Ok(tr)
}
