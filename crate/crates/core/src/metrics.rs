//! Threshold detectors and the figures of merit of the full source.
//!
//! A herald is a click at `D_z` with no click at the veto detector `D_t`.
//! It is good when the control output `c` then holds exactly one photon.
//! Input pulses with photons beyond the two-photon space are counted as
//! errors outright.

use crate::circuit::{CircuitOutput, GateParams, HeraldingCircuit};
use crate::error::{invalid, Result};
use crate::filter::{filter_evolve, FilterParams};
use crate::fock::{basis_state, DensityMatrix, PhotonDistribution, StateSpace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Quantum efficiency.
    pub eta: f64,
    /// Dark-count probability per pulse.
    pub dark: f64,
}

impl DetectorParams {
    pub const IDEAL: Self = Self {
        eta: 1.0,
        dark: 0.0,
    };
    /// Commercially available single-photon counters.
    pub const REALISTIC: Self = Self {
        eta: 0.75,
        dark: 1e-5,
    };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(invalid(format!(
                "detector efficiency {} outside [0, 1]",
                self.eta
            )));
        }
        if !(0.0..1.0).contains(&self.dark) {
            return Err(invalid(format!(
                "dark-count probability {} outside [0, 1)",
                self.dark
            )));
        }
        Ok(())
    }
}

/// Probability that a threshold detector clicks on `n` photons.
pub fn click_probability(n: usize, det: &DetectorParams) -> f64 {
    1.0 - (1.0 - det.dark) * (1.0 - det.eta).powi(n as i32)
}

/// Herald probabilities `(good, bad)` read off the number-basis diagonal.
pub fn herald_statistics(output: &CircuitOutput, det: &DetectorParams) -> (f64, f64) {
    herald_probabilities(&output.rho, det, true)
}

/// As [`herald_statistics`], optionally without the `D_t` veto.
pub fn herald_probabilities(rho: &DensityMatrix, det: &DetectorParams, veto: bool) -> (f64, f64) {
    let space = StateSpace::canonical();
    let mut good = 0.0;
    let mut bad = 0.0;
    for (i, occ) in space.basis().iter().enumerate() {
        let mut w = click_probability(occ.z, det);
        if veto {
            w *= 1.0 - click_probability(occ.t, det);
        }
        let p = rho.population(i) * w;
        if occ.c == 1 {
            good += p;
        } else {
            bad += p;
        }
    }
    (good, bad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceMetrics {
    /// Probability per shot of a herald with exactly one photon in `c`.
    pub p_s: f64,
    /// Probability per shot of a false herald, out-of-space inputs included.
    pub p_e: f64,
    /// Heralding efficiency `p_s / (p_s + p_e)`.
    pub h: f64,
    /// `sqrt(h)`.
    pub f: f64,
    /// Input weight outside the two-photon space.
    pub p_multi_input: f64,
    /// `<1|rho_c|1>` of the heralded output, in-space inputs only.
    pub conditional_single_photon: f64,
    /// Heralding efficiency with the `D_t` veto switched off.
    pub h_no_veto: f64,
}

/// The six in-space input pairs `(n_c, n_t)`.
pub const INPUT_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)];

/// Circuit outputs for every in-space number-state input.
#[derive(Debug, Clone)]
pub struct PairResponses {
    outputs: Vec<CircuitOutput>,
}

impl PairResponses {
    pub fn compute(circuit: &HeraldingCircuit) -> Result<Self> {
        let outputs = INPUT_PAIRS
            .iter()
            .map(|&(c, t)| circuit.run_pair(c, t))
            .collect::<Result<_>>()?;
        Ok(Self { outputs })
    }

    pub fn outputs(&self) -> &[CircuitOutput] {
        &self.outputs
    }

    /// Combines the responses with the filtered input statistics.
    pub fn metrics(
        &self,
        dc: &PhotonDistribution,
        dt: &PhotonDistribution,
        det: &DetectorParams,
    ) -> SourceMetrics {
        let mut in_space = 0.0;
        let (mut good, mut bad) = (0.0, 0.0);
        let (mut good_nv, mut bad_nv) = (0.0, 0.0);
        for (&(nc, nt), out) in INPUT_PAIRS.iter().zip(&self.outputs) {
            let w = dc.prob(nc) * dt.prob(nt);
            in_space += w;
            let (g, b) = herald_probabilities(&out.rho, det, true);
            good += w * g;
            bad += w * b;
            let (g, b) = herald_probabilities(&out.rho, det, false);
            good_nv += w * g;
            bad_nv += w * b;
        }
        let p_multi_input = (dc.total() * dt.total() - in_space).max(0.0);
        assemble(good, bad, p_multi_input, good_nv, bad_nv)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a + b > 0.0 {
        a / (a + b)
    } else {
        0.0
    }
}

fn assemble(good: f64, bad: f64, p_multi_input: f64, good_nv: f64, bad_nv: f64) -> SourceMetrics {
    let p_s = good;
    let p_e = bad + p_multi_input;
    let h = ratio(p_s, p_e);
    SourceMetrics {
        p_s,
        p_e,
        h,
        f: h.sqrt(),
        p_multi_input,
        conditional_single_photon: ratio(good, bad),
        h_no_veto: ratio(good_nv, bad_nv + p_multi_input),
    }
}

/// Figures of merit of the whole source at one operating point: filter
/// both pulses, run every in-space occupation pair through the circuit and
/// weight the herald statistics by the input probabilities.
pub fn source_point(
    fp_c: &FilterParams,
    fp_t: &FilterParams,
    gp: &GateParams,
    det: &DetectorParams,
) -> Result<SourceMetrics> {
    det.validate()?;
    let dc = filter_evolve(fp_c)?.dist;
    let dt = filter_evolve(fp_t)?.dist;
    let responses = PairResponses::compute(&HeraldingCircuit::new(*gp)?)?;
    Ok(responses.metrics(&dc, &dt, det))
}

/// [`source_point`] evaluated from a single circuit run on the mixed input
/// state `sum_{n_c,n_t} P_{n_c} P_{n_t} |0 n_c n_t><0 n_c n_t|` instead of
/// one run per occupation pair.
pub fn source_point_mixture(
    fp_c: &FilterParams,
    fp_t: &FilterParams,
    gp: &GateParams,
    det: &DetectorParams,
) -> Result<SourceMetrics> {
    det.validate()?;
    let dc = filter_evolve(fp_c)?.dist;
    let dt = filter_evolve(fp_t)?.dist;
    let space = StateSpace::canonical();
    let states = INPUT_PAIRS
        .iter()
        .map(|&(c, t)| basis_state(space, 0, c, t))
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<(f64, &DensityMatrix)> = INPUT_PAIRS
        .iter()
        .zip(&states)
        .map(|(&(c, t), rho)| (dc.prob(c) * dt.prob(t), rho))
        .collect();
    let input = DensityMatrix::mix(&parts)?;
    let in_space = input.trace();
    let out = HeraldingCircuit::new(*gp)?.run_mixture(&input)?;
    let (good, bad) = herald_statistics(&out, det);
    let (good_nv, bad_nv) = herald_probabilities(&out.rho, det, false);
    let p_multi_input = (dc.total() * dt.total() - in_space).max(0.0);
    Ok(assemble(good, bad, p_multi_input, good_nv, bad_nv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::InputLabel;

    fn output(z: usize, c: usize, t: usize) -> CircuitOutput {
        let rho = basis_state(StateSpace::canonical(), z, c, t).unwrap();
        CircuitOutput {
            absorbed: 0.0,
            rho,
            input_label: InputLabel::Mixture,
        }
    }

    #[test]
    fn click_examples() {
        let ideal = DetectorParams::IDEAL;
        assert_eq!(click_probability(0, &ideal), 0.0);
        assert_eq!(click_probability(1, &ideal), 1.0);
        let real = DetectorParams::REALISTIC;
        let p = click_probability(2, &real);
        assert!((p - 0.937500625).abs() < 1e-15, "{p}");
        assert!((click_probability(0, &real) - 1e-5).abs() < 1e-16);
    }

    #[test]
    fn herald_examples() {
        let ideal = DetectorParams::IDEAL;
        assert_eq!(herald_statistics(&output(1, 1, 0), &ideal), (1.0, 0.0));
        assert_eq!(herald_statistics(&output(0, 1, 1), &ideal), (0.0, 0.0));
        assert_eq!(herald_statistics(&output(1, 0, 0), &ideal), (0.0, 1.0));
        // veto suppresses the |101> herald
        assert_eq!(herald_statistics(&output(1, 0, 1), &ideal), (0.0, 0.0));
        assert_eq!(
            herald_probabilities(&output(1, 0, 1).rho, &ideal, false),
            (0.0, 1.0)
        );
    }

    #[test]
    fn detector_validation() {
        assert!(DetectorParams {
            eta: 1.2,
            dark: 0.0
        }
        .validate()
        .is_err());
        assert!(DetectorParams {
            eta: 0.5,
            dark: 1.0
        }
        .validate()
        .is_err());
        assert!(DetectorParams::REALISTIC.validate().is_ok());
    }

    #[test]
    fn identity_circuit_never_heralds() {
        let fp = FilterParams::new(3.5, 0.0);
        let m = source_point(&fp, &fp, &GateParams::new(0.0, 0.0), &DetectorParams::IDEAL).unwrap();
        assert!(m.p_s.abs() < 1e-12);
        assert!((m.p_e - m.p_multi_input).abs() < 1e-12);
        assert!(m.p_multi_input < 1e-6);
    }

    #[test]
    fn vacuum_inputs_produce_nothing() {
        let fp = FilterParams::new(0.0, 1e-3);
        let m = source_point(
            &fp,
            &fp,
            &GateParams::new(100.0, 1e-3),
            &DetectorParams::REALISTIC,
        )
        .unwrap();
        assert_eq!(m.p_s, 0.0);
        assert_eq!(m.p_multi_input, 0.0);
        // only the herald dark count with a silent veto remains
        assert!((m.p_e - 1e-5 * (1.0 - 1e-5)).abs() < 1e-15);
    }

    #[test]
    fn metrics_identities() {
        let fp = FilterParams::new(3.5, 1e-3);
        let m = source_point(
            &fp,
            &fp,
            &GateParams::new(30.0, 1e-3),
            &DetectorParams::REALISTIC,
        )
        .unwrap();
        assert!(m.p_s + m.p_e <= 1.0);
        assert!((m.h - m.p_s / (m.p_s + m.p_e)).abs() < 1e-15);
        assert_eq!(m.f, m.h.sqrt());
    }
}
