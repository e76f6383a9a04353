use std::ops::{Add, Mul};

use nalgebra::{DVector, DVectorView, DVectorViewMut};

use super::Liouvillian;
use crate::error::{invalid, Error, Result};
use crate::fock::DensityMatrix;
use crate::{CMatrix, C64};

/// `exp(s L)` on the sink-augmented vector space, reusable across inputs.
#[derive(Debug, Clone)]
pub struct Propagator {
    liouvillian: Liouvillian,
    matrix: CMatrix,
}

impl Propagator {
    pub fn new(l: &Liouvillian, s: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(invalid(format!(
                "evolution parameter must be >= 0, got {s}"
            )));
        }
        let scaled = l.augmented() * C64::new(s, 0.0);
        Ok(Self {
            liouvillian: l.clone(),
            matrix: scaled.exp(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let v = self.liouvillian.vectorize(rho)?;
        Ok(self.liouvillian.devectorize(&(&self.matrix * v)))
    }
}

/// Exact evolution `rho(s) = exp(s L) rho0`, with the absorbed scalar
/// carried along as an extra vector component.
pub fn evolve_expm(l: &Liouvillian, rho0: &DensityMatrix, s: f64) -> Result<DensityMatrix> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            actual: rho0.dim(),
        });
    }
    if s == 0.0 {
        return Ok(rho0.clone());
    }
    Propagator::new(l, s)?.apply(rho0)
}

/// Number of equal steps covering `span` with no step longer than `max_step`.
pub fn rk4_steps(span: f64, max_step: f64) -> usize {
    ((span / max_step).ceil() as usize).max(1)
}

/// Largest RK4 step used when the integrator serves as an oracle.
pub const ORACLE_MAX_STEP: f64 = 1e-3;

/// Step count for an oracle-grade RK4 run: no step longer than
/// `min(ORACLE_MAX_STEP, 0.1 / max_rate)`.
pub fn oracle_steps(l: &Liouvillian, s: f64) -> usize {
    let rate = l.max_rate().max(f64::MIN_POSITIVE);
    rk4_steps(s, ORACLE_MAX_STEP.min(0.1 / rate))
}

/// Classical fixed-step fourth-order Runge-Kutta on a flat state vector.
///
/// `rhs(y, dy)` writes the derivative; `observe(step, y)` sees the state
/// after every completed step.
pub fn rk4_integrate<T, F, O>(
    mut y: Vec<T>,
    span: f64,
    steps: usize,
    mut rhs: F,
    mut observe: O,
) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    F: FnMut(&[T], &mut [T]),
    O: FnMut(usize, &[T]),
{
    let n = y.len();
    let h = span / steps as f64;
    let mut k1 = vec![T::default(); n];
    let mut k2 = vec![T::default(); n];
    let mut k3 = vec![T::default(); n];
    let mut k4 = vec![T::default(); n];
    let mut tmp = vec![T::default(); n];
    for step in 1..=steps {
        rhs(&y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        rhs(&tmp, &mut k4);
        for i in 0..n {
            y[i] = y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        observe(step, &y);
    }
    y
}

/// Fixed-step RK4 evolution of `rho0` over `[0, s]`.
///
/// Refuses with [`Error::Stiffness`] when `max_rate * (s / steps) > 1`.
pub fn evolve_rk4(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    s: f64,
    steps: usize,
) -> Result<DensityMatrix> {
    if steps < 1 {
        return Err(invalid("RK4 needs at least one step"));
    }
    if !s.is_finite() || s < 0.0 {
        return Err(invalid(format!(
            "evolution parameter must be >= 0, got {s}"
        )));
    }
    let v0 = l.vectorize(rho0)?;
    if s == 0.0 {
        return Ok(rho0.clone());
    }
    let step = s / steps as f64;
    let rate = l.max_rate();
    if rate * step > 1.0 {
        return Err(Error::Stiffness { step, rate });
    }
    let a = l.augmented();
    let n = a.nrows();
    let y = rk4_integrate(
        v0.as_slice().to_vec(),
        s,
        steps,
        |y: &[C64], dy: &mut [C64]| {
            let yv = DVectorView::from_slice(y, n);
            let mut out = DVectorViewMut::from_slice(dy, n);
            out.gemv(C64::new(1.0, 0.0), &a, &yv, C64::new(0.0, 0.0));
        },
        |_, _| {},
    );
    Ok(l.devectorize(&DVector::from_vec(y)))
}
