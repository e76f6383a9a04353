//! Long two-photon-absorbing filter cell acting on a weak laser pulse.
//!
//! With a random laser phase the pulse is a Poisson mixture of number
//! states and stays diagonal, so the master equation reduces to rate
//! equations for the photon-number probabilities. Path time is measured in
//! units of the inverse TPA rate, so the cell spans `tau in [0, gamma2]`:
//!
//! ```text
//! dP_n/dtau = -[n(n-1)/2 + g n] P_n + (n+2)(n+1)/2 P_{n+2} + g (n+1) P_{n+1}
//! ```
//!
//! where `g = R1/R2`. The pair-absorption coefficient makes `|2>` decay at
//! exactly the TPA rate, the same convention the Zeno gate uses.

use crate::error::{invalid, Result};
use crate::fock::{auto_nmax, poisson_distribution, DensityMatrix, PhotonDistribution};
use crate::numerics::{
    build_liouvillian, evolve_expm, rk4_integrate, rk4_steps, DecayChannel, DecayKind,
};
use crate::CMatrix;

/// Default filter strength `R2 L / c`.
pub const DEFAULT_FILTER_GAMMA2: f64 = 15.0;
/// Upper bound on the RK step in path time.
const MAX_STEP: f64 = 0.01;
/// Fraction of the inverse fastest rate used as the RK step.
const STEP_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// Mean photon number of the input pulse.
    pub mu: f64,
    /// Single-photon loss relative to TPA, `R1/R2`.
    pub loss_ratio: f64,
    /// Overall TPA strength of the cell, `R2 L / c`.
    pub gamma2: f64,
}

impl FilterParams {
    pub fn new(mu: f64, loss_ratio: f64) -> Self {
        Self {
            mu,
            loss_ratio,
            gamma2: DEFAULT_FILTER_GAMMA2,
        }
    }

    pub fn with_gamma2(mut self, gamma2: f64) -> Self {
        self.gamma2 = gamma2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=8.0).contains(&self.mu) {
            return Err(invalid(format!("filter mu {} outside [0, 8]", self.mu)));
        }
        if !(0.0..=1.0).contains(&self.loss_ratio) {
            return Err(invalid(format!(
                "filter loss ratio {} outside [0, 1]",
                self.loss_ratio
            )));
        }
        if !self.gamma2.is_finite() || self.gamma2 < 0.0 {
            return Err(invalid(format!(
                "filter gamma2 must be >= 0, got {}",
                self.gamma2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub dist: PhotonDistribution,
    pub p0: f64,
    pub p1: f64,
    /// Probability of two or more photons surviving.
    pub p_multi: f64,
    /// Mass missing from the distribution (truncation only, since absorbed
    /// pairs feed lower photon numbers).
    pub absorbed: f64,
}

impl FilterOutput {
    fn from_dist(dist: PhotonDistribution) -> Self {
        let p0 = dist.prob(0);
        let p1 = dist.prob(1);
        let p_multi = dist.multi();
        let absorbed = (1.0 - dist.total()).max(0.0);
        Self {
            dist,
            p0,
            p1,
            p_multi,
            absorbed,
        }
    }
}

/// Coefficients of the diagonal rate equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEquations {
    /// Multiplier of the pair-absorption term (1 on, 0 off).
    pub tpa: f64,
    /// Per-photon loss rate.
    pub loss: f64,
}

impl RateEquations {
    fn state_rate(&self, n: usize) -> f64 {
        let n = n as f64;
        self.tpa * n * (n - 1.0) / 2.0 + self.loss * n
    }

    fn derivative(&self, p: &[f64], dp: &mut [f64]) {
        let len = p.len();
        for n in 0..len {
            let mut v = -self.state_rate(n) * p[n];
            if n + 2 < len {
                v += self.tpa * ((n + 2) * (n + 1)) as f64 / 2.0 * p[n + 2];
            }
            if n + 1 < len {
                v += self.loss * (n + 1) as f64 * p[n + 1];
            }
            dp[n] = v;
        }
    }

    /// Step count for `span` at this truncation.
    pub fn steps(&self, n_max: usize, span: f64) -> usize {
        let rate = self.state_rate(n_max).max(1e-300);
        rk4_steps(span, MAX_STEP.min(STEP_FRACTION / rate))
    }
}

/// Integrates the rate equations from `initial` over `span`, calling
/// `observe(step, probs)` after every RK step.
pub fn evolve_distribution<O>(
    initial: &PhotonDistribution,
    rates: RateEquations,
    span: f64,
    observe: O,
) -> Result<PhotonDistribution>
where
    O: FnMut(usize, &[f64]),
{
    if span == 0.0 {
        return Ok(initial.clone());
    }
    let steps = rates.steps(initial.n_max(), span);
    let out = rk4_integrate(
        initial.probs().to_vec(),
        span,
        steps,
        |p, dp| rates.derivative(p, dp),
        observe,
    );
    PhotonDistribution::from_numeric(out, 1e-12)
}

/// Filter cell with a step observer, for invariant checks along the path.
pub fn filter_trajectory<O>(params: &FilterParams, observe: O) -> Result<FilterOutput>
where
    O: FnMut(usize, &[f64]),
{
    params.validate()?;
    let initial = poisson_distribution(params.mu, auto_nmax(params.mu)?)?;
    let rates = RateEquations {
        tpa: 1.0,
        loss: params.loss_ratio,
    };
    let dist = evolve_distribution(&initial, rates, params.gamma2, observe)?;
    Ok(FilterOutput::from_dist(dist))
}

/// Output statistics of a phase-averaged coherent pulse after the cell.
pub fn filter_evolve(params: &FilterParams) -> Result<FilterOutput> {
    filter_trajectory(params, |_, _| {})
}

/// Probability that two or more photons survive the cell.
pub fn filter_multi_residual(params: &FilterParams) -> Result<f64> {
    Ok(filter_evolve(params)?.p_multi)
}

/// Pure single-photon loss with total exponent `gamma1`, TPA disabled.
/// A Poisson(mu) input must come out Poisson(mu e^-gamma1).
pub fn loss_only_check(mu: f64, gamma1: f64) -> Result<PhotonDistribution> {
    if !gamma1.is_finite() || gamma1 < 0.0 {
        return Err(invalid(format!("loss exponent must be >= 0, got {gamma1}")));
    }
    let initial = poisson_distribution(mu, auto_nmax(mu)?)?;
    evolve_distribution(
        &initial,
        RateEquations {
            tpa: 0.0,
            loss: 1.0,
        },
        gamma1,
        |_, _| {},
    )
}

/// The same cell solved as a full single-mode master equation: number
/// basis `|0>..|n_max>`, a Liouvillian with pair-absorption and loss
/// channels, and the matrix-exponential propagator.
pub fn master_equation_reference(params: &FilterParams) -> Result<FilterOutput> {
    params.validate()?;
    let n_max = auto_nmax(params.mu)?;
    let initial = poisson_distribution(params.mu, n_max)?;
    let d = n_max + 1;
    let mut channels = Vec::new();
    for n in 1..d {
        if n >= 2 {
            let rate = (n * (n - 1)) as f64 / 2.0;
            channels.push(DecayChannel::tpa(n, rate, Some(n - 2)));
        }
        if params.loss_ratio > 0.0 {
            channels.push(DecayChannel {
                kind: DecayKind::SinglePhotonLoss,
                state: n,
                rate: params.loss_ratio * n as f64,
                feed_target: Some(n - 1),
            });
        }
    }
    let l = build_liouvillian(&CMatrix::zeros(d, d), &channels)?;
    let rho = evolve_expm(&l, &DensityMatrix::diagonal(initial.probs()), params.gamma2)?;
    let dist = PhotonDistribution::from_numeric(rho.populations(), 1e-12)?;
    Ok(FilterOutput::from_dist(dist))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_is_fixed_point() {
        let out = filter_evolve(&FilterParams::new(0.0, 1e-3)).unwrap();
        assert_eq!(out.p0, 1.0);
        assert_eq!(out.p1, 0.0);
        assert_eq!(out.p_multi, 0.0);
        assert_eq!(
            filter_multi_residual(&FilterParams::new(0.0, 0.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn lossless_single_photon_probability_is_odd_parity() {
        let out = filter_evolve(&FilterParams::new(3.5, 0.0)).unwrap();
        let expect = (1.0 - (-7.0f64).exp()) / 2.0;
        assert!((out.p1 - expect).abs() < 1e-6, "{} vs {expect}", out.p1);
        assert!((out.p1 - 0.499544).abs() < 1e-6);
    }

    #[test]
    fn two_photon_closed_form() {
        let initial = PhotonDistribution::new(vec![0.0, 0.0, 1.0]).unwrap();
        for tau in [0.3, 1.0, 4.0] {
            let out = evolve_distribution(
                &initial,
                RateEquations {
                    tpa: 1.0,
                    loss: 0.0,
                },
                tau,
                |_, _| {},
            )
            .unwrap();
            assert!((out.prob(2) - (-tau).exp()).abs() < 1e-9);
            assert!((out.prob(0) - (1.0 - (-tau).exp())).abs() < 1e-9);
        }
    }

    #[test]
    fn multi_residual_examples() {
        let r = filter_multi_residual(&FilterParams::new(3.5, 1e-3)).unwrap();
        assert!(r < 1e-6, "{r}");
        let r = filter_multi_residual(&FilterParams::new(3.5, 1e-3).with_gamma2(0.0)).unwrap();
        let expect = 1.0 - (-3.5f64).exp() * 4.5;
        assert!((r - expect).abs() < 1e-12);
        assert!((r - 0.8641).abs() < 1e-4);
    }

    #[test]
    fn loss_only_is_poisson_thinning() {
        let same = loss_only_check(2.0, 0.0).unwrap();
        let p2 = poisson_distribution(2.0, same.n_max()).unwrap();
        assert_eq!(same.probs(), p2.probs());

        let halved = loss_only_check(2.0, std::f64::consts::LN_2).unwrap();
        let p1 = poisson_distribution(1.0, halved.n_max()).unwrap();
        for (a, b) in halved.probs().iter().zip(p1.probs()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }

        let vac = loss_only_check(0.0, 3.0).unwrap();
        assert_eq!(vac.prob(0), 1.0);
        assert!(loss_only_check(1.0, -1.0).is_err());
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(filter_evolve(&FilterParams::new(9.0, 0.0)).is_err());
        assert!(filter_evolve(&FilterParams::new(1.0, 1.5)).is_err());
        assert!(filter_evolve(&FilterParams::new(1.0, 0.0).with_gamma2(-1.0)).is_err());
    }

    #[test]
    fn parity_conserved_along_lossless_path() {
        let params = FilterParams::new(2.0, 0.0);
        let initial = poisson_distribution(2.0, auto_nmax(2.0).unwrap()).unwrap();
        let (e0, o0) = initial.even_odd();
        let mut worst = 0.0f64;
        filter_trajectory(&params, |_, p| {
            let even: f64 = p.iter().step_by(2).sum();
            let odd: f64 = p.iter().skip(1).step_by(2).sum();
            worst = worst.max((even - e0).abs()).max((odd - o0).abs());
        })
        .unwrap();
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn output_accounts_for_all_mass() {
        for loss in [0.0, 1e-2, 1.0] {
            let out = filter_evolve(&FilterParams::new(3.5, loss)).unwrap();
            let total = out.p0 + out.p1 + out.p_multi + out.absorbed;
            assert!((total - 1.0).abs() < 1e-10);
            assert!(out.absorbed < 1e-11);
        }
    }

    #[test]
    fn agrees_with_master_equation() {
        for (mu, loss) in [(0.5, 0.0), (1.0, 1e-3), (2.0, 1e-2)] {
            let p = FilterParams::new(mu, loss);
            let a = filter_evolve(&p).unwrap();
            let b = master_equation_reference(&p).unwrap();
            let dev = a
                .dist
                .probs()
                .iter()
                .zip(b.dist.probs())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(dev < 1e-9, "mu={mu} loss={loss}: {dev:.3e}");
        }
    }
}
