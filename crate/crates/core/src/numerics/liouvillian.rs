use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::fock::{DensityMatrix, Mode, StateSpace};
use crate::{CMatrix, C64};

/// Largest tolerated `|h - h^dagger|` entry for a Hamiltonian.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayKind {
    TpaStateDecay,
    SinglePhotonLoss,
}

/// One basis state decaying at a fixed rate.
///
/// The decayed population lands on the diagonal of `feed_target`, or in the
/// absorbed scalar when there is no target. The feed target must have fewer
/// photons than the decaying state; with bases ordered by photon number this
/// means a smaller index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayChannel {
    pub kind: DecayKind,
    pub state: usize,
    pub rate: f64,
    pub feed_target: Option<usize>,
}

impl DecayChannel {
    pub fn tpa(state: usize, rate: f64, feed_target: Option<usize>) -> Self {
        Self {
            kind: DecayKind::TpaStateDecay,
            state,
            rate,
            feed_target,
        }
    }

    /// Per-photon loss at `rate` from `mode`, expanded over `space`: a state
    /// with `n` photons in `mode` decays at `n * rate` into the state with
    /// `n - 1` photons there (or into the sink when `to_sink`).
    pub fn single_photon_loss(
        space: &StateSpace,
        mode: Mode,
        rate: f64,
        to_sink: bool,
    ) -> Vec<Self> {
        space
            .basis()
            .iter()
            .enumerate()
            .filter(|(_, occ)| occ.get(mode) > 0)
            .map(|(i, occ)| {
                let n = occ.get(mode);
                let target = occ.with(mode, n - 1);
                Self {
                    kind: DecayKind::SinglePhotonLoss,
                    state: i,
                    rate: n as f64 * rate,
                    feed_target: if to_sink {
                        None
                    } else {
                        space.index_of(target)
                    },
                }
            })
            .collect()
    }
}

/// Generator of `d rho/ds = -i[h, rho] + sum of decay terms`, acting on
/// row-major vectorized density matrices (`rho[a][b]` at `a * d + b`).
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    generator: CMatrix,
    sink_row: DVector<f64>,
    state_rates: Vec<f64>,
}

/// Builds the Liouvillian for Hamiltonian `h` and the given decay channels.
///
/// A state `d` with total decay rate `r_d` loses population at `r_d`, and
/// the coherence between `d` and `j` decays at `(r_d + r_j) / 2`. This is
/// the Lindblad form with one jump operator `sqrt(r) |feed><d|` per channel.
pub fn build_liouvillian(h: &CMatrix, channels: &[DecayChannel]) -> Result<Liouvillian> {
    if !h.is_square() {
        return Err(invalid("Hamiltonian must be square"));
    }
    let d = h.nrows();
    let herm = (h - h.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if herm > HERMITIAN_TOL {
        return Err(invalid(format!(
            "Hamiltonian is not Hermitian (deviation {herm:.3e})"
        )));
    }

    let mut state_rates = vec![0.0; d];
    for ch in channels {
        if !ch.rate.is_finite() || ch.rate < 0.0 {
            return Err(invalid(format!("decay rate must be >= 0, got {}", ch.rate)));
        }
        if ch.state >= d {
            return Err(invalid(format!(
                "decaying state {} outside dimension {d}",
                ch.state
            )));
        }
        if let Some(f) = ch.feed_target {
            if f >= ch.state {
                return Err(invalid(format!(
                    "feed target {f} must hold fewer photons than decaying state {}",
                    ch.state
                )));
            }
        }
        state_rates[ch.state] += ch.rate;
    }

    let n = d * d;
    let mut g = CMatrix::zeros(n, n);
    let minus_i = C64::new(0.0, -1.0);
    let plus_i = C64::new(0.0, 1.0);
    for a in 0..d {
        for b in 0..d {
            let row = a * d + b;
            for k in 0..d {
                // -i (h rho)_{ab}
                g[(row, k * d + b)] += minus_i * h[(a, k)];
                // +i (rho h)_{ab}
                g[(row, a * d + k)] += plus_i * h[(k, b)];
            }
            g[(row, row)] -= C64::new(0.5 * (state_rates[a] + state_rates[b]), 0.0);
        }
    }

    let mut sink_row = DVector::zeros(n);
    for ch in channels {
        let src = ch.state * d + ch.state;
        match ch.feed_target {
            Some(f) => g[(f * d + f, src)] += C64::new(ch.rate, 0.0),
            None => sink_row[src] += ch.rate,
        }
    }

    Ok(Liouvillian {
        dim: d,
        generator: g,
        sink_row,
        state_rates,
    })
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn sink_row(&self) -> &DVector<f64> {
        &self.sink_row
    }

    /// Total decay rate of each basis state.
    pub fn state_rates(&self) -> &[f64] {
        &self.state_rates
    }

    /// Infinity norm of the generator; bounds every rate in the dynamics.
    pub fn max_rate(&self) -> f64 {
        self.generator
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Generator extended by the sink: acts on `[vec(rho); absorbed]`.
    pub(crate) fn augmented(&self) -> CMatrix {
        let n = self.dim * self.dim;
        let mut a = CMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n)).copy_from(&self.generator);
        for j in 0..n {
            a[(n, j)] = C64::new(self.sink_row[j], 0.0);
        }
        a
    }

    /// Time derivative of `(rho, absorbed)`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<(CMatrix, f64)> {
        let v = self.vectorize(rho)?;
        let dv = self.augmented() * v;
        Ok(self.devectorize_parts(&dv))
    }

    pub(crate) fn vectorize(&self, rho: &DensityMatrix) -> Result<DVector<C64>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rho.dim(),
            });
        }
        let d = self.dim;
        let m = rho.elements();
        let mut v = DVector::zeros(d * d + 1);
        for a in 0..d {
            for b in 0..d {
                v[a * d + b] = m[(a, b)];
            }
        }
        v[d * d] = C64::new(rho.absorbed(), 0.0);
        Ok(v)
    }

    pub(crate) fn devectorize_parts(&self, v: &DVector<C64>) -> (CMatrix, f64) {
        let d = self.dim;
        let m = CMatrix::from_fn(d, d, |a, b| v[a * d + b]);
        (m, v[d * d].re)
    }

    pub(crate) fn devectorize(&self, v: &DVector<C64>) -> DensityMatrix {
        let (m, absorbed) = self.devectorize_parts(v);
        DensityMatrix::from_parts(m, absorbed.max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_h(d: usize) -> CMatrix {
        CMatrix::zeros(d, d)
    }

    #[test]
    fn zero_generator_without_channels() {
        let l = build_liouvillian(&zero_h(10), &[]).unwrap();
        assert!(l.generator().iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert_eq!(l.max_rate(), 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = zero_h(3);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            build_liouvillian(&h, &[]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn rejects_bad_channels() {
        let h = zero_h(4);
        assert!(build_liouvillian(&h, &[DecayChannel::tpa(2, -1.0, None)]).is_err());
        assert!(build_liouvillian(&h, &[DecayChannel::tpa(5, 1.0, None)]).is_err());
        assert!(build_liouvillian(&h, &[DecayChannel::tpa(2, 1.0, Some(3))]).is_err());
        assert!(build_liouvillian(&h, &[DecayChannel::tpa(2, 1.0, Some(0))]).is_ok());
    }

    #[test]
    fn coherence_decays_at_mean_rate() {
        let h = zero_h(3);
        let l = build_liouvillian(
            &h,
            &[
                DecayChannel::tpa(2, 4.0, Some(0)),
                DecayChannel::tpa(1, 2.0, None),
            ],
        )
        .unwrap();
        let g = l.generator();
        assert_eq!(g[(2 * 3 + 2, 2 * 3 + 2)].re, -4.0);
        assert_eq!(g[(2 * 3 + 1, 2 * 3 + 1)].re, -3.0);
        assert_eq!(g[(2 * 3, 2 * 3)].re, -2.0);
        assert_eq!(g[(0, 2 * 3 + 2)].re, 4.0);
        assert_eq!(l.sink_row()[3 + 1], 2.0);
    }

    #[test]
    fn probability_flux_balances() {
        // column sums over diagonal rows plus sink flux vanish
        let s = StateSpace::canonical();
        let mut chans = vec![
            DecayChannel::tpa(6, 3.0, Some(0)),
            DecayChannel::tpa(5, 3.0, None),
        ];
        chans.extend(DecayChannel::single_photon_loss(s, Mode::C, 0.5, false));
        chans.extend(DecayChannel::single_photon_loss(s, Mode::T, 0.25, true));
        let mut h = zero_h(10);
        h[(1, 2)] = C64::new(1.0, 0.0);
        h[(2, 1)] = C64::new(1.0, 0.0);
        let l = build_liouvillian(&h, &chans).unwrap();
        let d = 10;
        for col in 0..d * d {
            let mut sum = C64::new(l.sink_row()[col], 0.0);
            for a in 0..d {
                sum += l.generator()[(a * d + a, col)];
            }
            assert!(sum.norm() < 1e-12, "column {col}: {sum}");
        }
    }

    #[test]
    fn loss_expansion_scales_with_occupation() {
        let s = StateSpace::canonical();
        let chans = DecayChannel::single_photon_loss(s, Mode::C, 0.1, false);
        // |010>, |011>, |020>, |110>
        assert_eq!(chans.len(), 4);
        let c020 = chans.iter().find(|c| c.state == 6).unwrap();
        assert!((c020.rate - 0.2).abs() < 1e-15);
        assert_eq!(c020.feed_target, Some(2));
        let sunk = DecayChannel::single_photon_loss(s, Mode::T, 0.1, true);
        assert!(sunk.iter().all(|c| c.feed_target.is_none()));
    }
}
