use crate::error::{Error, Result};
use crate::scalar::Real;

/// Constant coupling `K` and a piecewise-linear second-harmonic strength
/// `K_s(t)` over `[0, total_time]`.
///
/// `K_s` is held at the first breakpoint value before it and at the last
/// breakpoint value after it.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule<T> {
    k: T,
    points: Vec<(T, T)>,
    total_time: T,
}

impl<T: Real> AnnealSchedule<T> {
    pub fn new(k: T, points: Vec<(T, T)>, total_time: T) -> Result<Self> {
        if !(k > T::zero()) || !k.finite() {
            return Err(Error::InvalidSchedule(format!("K must be positive, got {k}")));
        }
        if points.is_empty() {
            return Err(Error::InvalidSchedule("no K_s breakpoints".into()));
        }
        if !(total_time > T::zero()) || !total_time.finite() {
            return Err(Error::InvalidSchedule(format!(
                "horizon must be positive, got {total_time}"
            )));
        }
        for (idx, &(t, ks)) in points.iter().enumerate() {
            if !t.finite() || !ks.finite() || ks < T::zero() {
                return Err(Error::InvalidSchedule(format!(
                    "breakpoint {idx} = ({t}, {ks}) must be finite with K_s >= 0"
                )));
            }
        }
        if let Some(w) = points.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidSchedule(format!(
                "breakpoint times must increase strictly ({} then {})",
                w[0].0, w[1].0
            )));
        }
        Ok(AnnealSchedule {
            k,
            points,
            total_time,
        })
    }

    /// `K_s` held at `ks` for the whole horizon.
    pub fn constant(k: T, ks: T, total_time: T) -> Result<Self> {
        Self::new(k, vec![(T::zero(), ks)], total_time)
    }

    /// `K_s` ramps linearly from 0 at `t = 0` to `ks_max` at `t = total_time`.
    pub fn linear_ramp(k: T, ks_max: T, total_time: T) -> Result<Self> {
        Self::new(k, vec![(T::zero(), T::zero()), (total_time, ks_max)], total_time)
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn total_time(&self) -> T {
        self.total_time
    }

    pub fn ks_at(&self, t: T) -> T {
        let p = &self.points;
        if t <= p[0].0 {
            return p[0].1;
        }
        let last = p[p.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        let seg = p.partition_point(|&(pt, _)| pt <= t);
        let (t0, k0) = p[seg - 1];
        let (t1, k1) = p[seg];
        k0 + (k1 - k0) * (t - t0) / (t1 - t0)
    }
}
