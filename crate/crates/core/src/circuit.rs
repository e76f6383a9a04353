//! The heralding circuit: Hadamard beam splitter on the target modes, the
//! SWAP' Zeno gate between `c` and `t`, output reversal, second Hadamard.
//!
//! The gate runs in a dimensionless parameter `s in [0, 1]` over which the
//! evanescent coupling turns through the swap angle `pi/2`. Only the TPA
//! strength `gamma2 = R2 dt` and loss `gamma1 = R1 dt` remain as knobs.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::fock::{basis_state, basis_vector, DensityMatrix, Mode, Occupation, StateSpace};
use crate::numerics::{build_liouvillian, DecayChannel, Liouvillian, Propagator};
use crate::{CMatrix, C64};

/// Where population removed by TPA inside the gate goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TpaFeed {
    /// Onto the photonless state `|000>`.
    #[default]
    Vacuum,
    /// Into the absorbed scalar.
    Sink,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    /// TPA strength of the gate, `R2 dt`.
    pub gamma2: f64,
    /// `R1 / R2`.
    pub loss_ratio: f64,
    /// Also apply single-photon loss to the spectator rail `z`.
    pub loss_on_z: bool,
    pub tpa_feed: TpaFeed,
}

impl GateParams {
    pub fn new(gamma2: f64, loss_ratio: f64) -> Self {
        Self {
            gamma2,
            loss_ratio,
            loss_on_z: false,
            tpa_feed: TpaFeed::Vacuum,
        }
    }

    /// Single-photon loss over one gate transit, `R1 dt`.
    pub fn gamma1(&self) -> f64 {
        self.loss_ratio * self.gamma2
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma2.is_finite() || self.gamma2 < 0.0 {
            return Err(invalid(format!(
                "gate gamma2 must be >= 0, got {}",
                self.gamma2
            )));
        }
        if !(0.0..=1.0).contains(&self.loss_ratio) {
            return Err(invalid(format!(
                "gate loss ratio {} outside [0, 1]",
                self.loss_ratio
            )));
        }
        Ok(())
    }
}

/// Unitary of a passive two-mode transformation on `z` and `t`, lifted to
/// the three-mode space: `z^dag -> m[0][0] z^dag + m[0][1] t^dag` and
/// `t^dag -> m[1][0] z^dag + m[1][1] t^dag`.
pub fn lift_mode_map(space: &StateSpace, m: [[f64; 2]; 2]) -> CMatrix {
    let d = space.len();
    let mut u = CMatrix::zeros(d, d);
    let fact = |n: usize| (1..=n).product::<usize>() as f64;
    for (j, occ) in space.basis().iter().enumerate() {
        // coefficients of z^a c^b t^e (creation operators on vacuum)
        let mut poly: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        poly.insert(
            (0, occ.c, 0),
            1.0 / (fact(occ.z) * fact(occ.c) * fact(occ.t)).sqrt(),
        );
        let multiply = |poly: &mut BTreeMap<_, f64>, row: [f64; 2]| {
            let mut next = BTreeMap::new();
            for (&(a, b, e), &v) in poly.iter() {
                *next.entry((a + 1, b, e)).or_insert(0.0) += row[0] * v;
                *next.entry((a, b, e + 1)).or_insert(0.0) += row[1] * v;
            }
            *poly = next;
        };
        for _ in 0..occ.z {
            multiply(&mut poly, m[0]);
        }
        for _ in 0..occ.t {
            multiply(&mut poly, m[1]);
        }
        for ((a, b, e), v) in poly {
            let i = space
                .index_of(Occupation::new(a, b, e))
                .expect("photon number is conserved");
            u[(i, j)] += C64::new(v * (fact(a) * fact(b) * fact(e)).sqrt(), 0.0);
        }
    }
    u
}

/// The 50/50 beam splitter `z^dag -> (z^dag + t^dag)/sqrt2`,
/// `t^dag -> (z^dag - t^dag)/sqrt2`.
pub fn hadamard_unitary(space: &StateSpace) -> CMatrix {
    let r = FRAC_1_SQRT_2;
    lift_mode_map(space, [[r, r], [r, -r]])
}

/// Matrix of `c^dag t + t^dag c` in units of the coupling strength.
pub fn coupling_hamiltonian(space: &StateSpace) -> CMatrix {
    let d = space.len();
    let mut h = CMatrix::zeros(d, d);
    for (j, occ) in space.basis().iter().enumerate() {
        if occ.t > 0 {
            let i = space
                .index_of(Occupation::new(occ.z, occ.c + 1, occ.t - 1))
                .unwrap();
            h[(i, j)] += C64::new(((occ.t * (occ.c + 1)) as f64).sqrt(), 0.0);
        }
        if occ.c > 0 {
            let i = space
                .index_of(Occupation::new(occ.z, occ.c - 1, occ.t + 1))
                .unwrap();
            h[(i, j)] += C64::new(((occ.c * (occ.t + 1)) as f64).sqrt(), 0.0);
        }
    }
    h
}

/// Reference matrices in block form, single-photon basis `|001>,|010>,|100>`
/// and two-photon basis `|011>,|002>,|020>,|101>,|110>,|200>`.
pub mod printed {
    use std::f64::consts::{FRAC_1_SQRT_2 as R, SQRT_2};

    const R2: f64 = 0.5;

    pub const U1: [[f64; 3]; 3] = [[-R, 0.0, R], [0.0, 1.0, 0.0], [R, 0.0, R]];

    pub const U2: [[f64; 6]; 6] = [
        [-R, 0.0, 0.0, 0.0, R, 0.0],
        [0.0, R2, 0.0, -R, 0.0, R2],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, -R, 0.0, 0.0, 0.0, R],
        [R, 0.0, 0.0, 0.0, R, 0.0],
        [0.0, R2, 0.0, R, 0.0, R2],
    ];

    pub const H1: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];

    pub const H2: [[f64; 6]; 6] = [
        [0.0, SQRT_2, SQRT_2, 0.0, 0.0, 0.0],
        [SQRT_2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [SQRT_2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ];
}

/// Entrywise deviation of a constructed operator from its block form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDeviation {
    pub vacuum: f64,
    pub single: f64,
    pub double: f64,
    /// Largest entry coupling different photon-number blocks.
    pub off_block: f64,
}

impl BlockDeviation {
    pub fn max(&self) -> f64 {
        self.vacuum
            .max(self.single)
            .max(self.double)
            .max(self.off_block)
    }
}

/// Compares `m` against `vacuum (+) single (+) double`.
pub fn block_deviation(
    m: &CMatrix,
    vacuum: f64,
    single: &[[f64; 3]; 3],
    double: &[[f64; 6]; 6],
) -> BlockDeviation {
    let photons = StateSpace::canonical().photon_numbers();
    let mut dev = BlockDeviation {
        vacuum: (m[(0, 0)] - C64::new(vacuum, 0.0)).norm(),
        single: 0.0,
        double: 0.0,
        off_block: 0.0,
    };
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            match (photons[i], photons[j]) {
                (1, 1) => {
                    dev.single = dev
                        .single
                        .max((z - C64::new(single[i - 1][j - 1], 0.0)).norm())
                }
                (2, 2) => {
                    dev.double = dev
                        .double
                        .max((z - C64::new(double[i - 4][j - 4], 0.0)).norm())
                }
                (a, b) if a != b => dev.off_block = dev.off_block.max(z.norm()),
                _ => {}
            }
        }
    }
    dev
}

/// Diagonal phase `i^(n_c + n_t)` applied at the end of the gate.
pub fn gate_phase(space: &StateSpace) -> CMatrix {
    let d = space.len();
    let powers = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ];
    let mut p = CMatrix::zeros(d, d);
    for (i, occ) in space.basis().iter().enumerate() {
        p[(i, i)] = powers[(occ.c + occ.t) % 4];
    }
    p
}

/// Permutation relabelling modes `c` and `t`.
pub fn reversal_permutation(space: &StateSpace) -> CMatrix {
    let d = space.len();
    let mut p = CMatrix::zeros(d, d);
    for (j, occ) in space.basis().iter().enumerate() {
        let i = space.index_of(occ.swap_ct()).unwrap();
        p[(i, j)] = C64::new(1.0, 0.0);
    }
    p
}

/// SWAP' gate with a precomputed propagator, reusable across inputs.
#[derive(Debug, Clone)]
pub struct ZenoGate {
    params: GateParams,
    propagator: Propagator,
    phase: CMatrix,
}

/// Generator of the gate evolution over `s in [0, 1]`: coherent coupling
/// through the angle `pi/2`, TPA decay of `|020>` and `|002>`, and
/// per-photon loss on `c` and `t` (and `z` when requested).
pub fn gate_liouvillian(params: &GateParams) -> Result<Liouvillian> {
    params.validate()?;
    let space = StateSpace::canonical();
    let h = coupling_hamiltonian(space) * C64::new(FRAC_PI_2, 0.0);
    let vacuum = space.require(Occupation::new(0, 0, 0))?;
    let feed = match params.tpa_feed {
        TpaFeed::Vacuum => Some(vacuum),
        TpaFeed::Sink => None,
    };
    let mut channels = vec![
        DecayChannel::tpa(
            space.require(Occupation::new(0, 2, 0))?,
            params.gamma2,
            feed,
        ),
        DecayChannel::tpa(
            space.require(Occupation::new(0, 0, 2))?,
            params.gamma2,
            feed,
        ),
    ];
    let gamma1 = params.gamma1();
    if gamma1 > 0.0 {
        channels.extend(DecayChannel::single_photon_loss(
            space,
            Mode::C,
            gamma1,
            false,
        ));
        channels.extend(DecayChannel::single_photon_loss(
            space,
            Mode::T,
            gamma1,
            false,
        ));
        if params.loss_on_z {
            channels.extend(DecayChannel::single_photon_loss(
                space,
                Mode::Z,
                gamma1,
                false,
            ));
        }
    }
    build_liouvillian(&h, &channels)
}

impl ZenoGate {
    pub fn new(params: GateParams) -> Result<Self> {
        let l = gate_liouvillian(&params)?;
        let propagator = Propagator::new(&l, 1.0)?;
        Ok(Self {
            params,
            propagator,
            phase: gate_phase(StateSpace::canonical()),
        })
    }

    pub fn params(&self) -> &GateParams {
        &self.params
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(self.propagator.apply(rho)?.conjugate(&self.phase))
    }
}

/// Evolves `rho` through the Zeno gate and applies the `pi/2` phase on
/// modes `c` and `t`.
pub fn swap_prime(rho: &DensityMatrix, params: GateParams) -> Result<DensityMatrix> {
    ZenoGate::new(params)?.apply(rho)
}

/// Relabels modes `c` and `t`.
pub fn reverse_outputs(rho: &DensityMatrix) -> DensityMatrix {
    rho.conjugate(&reversal_permutation(StateSpace::canonical()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputLabel {
    /// Number state `|0 n_c n_t>`.
    Pair {
        n_c: usize,
        n_t: usize,
    },
    Mixture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitOutput {
    pub rho: DensityMatrix,
    pub absorbed: f64,
    pub input_label: InputLabel,
}

/// Hadamard, SWAP', reversal, Hadamard.
#[derive(Debug, Clone)]
pub struct HeraldingCircuit {
    gate: ZenoGate,
    hadamard: CMatrix,
    reversal: CMatrix,
}

impl HeraldingCircuit {
    pub fn new(params: GateParams) -> Result<Self> {
        let space = StateSpace::canonical();
        Ok(Self {
            gate: ZenoGate::new(params)?,
            hadamard: hadamard_unitary(space),
            reversal: reversal_permutation(space),
        })
    }

    pub fn gate(&self) -> &ZenoGate {
        &self.gate
    }

    pub fn run(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let rho = rho.conjugate(&self.hadamard);
        let rho = self.gate.apply(&rho)?;
        Ok(rho.conjugate(&self.reversal).conjugate(&self.hadamard))
    }

    /// Runs `|0 n_c n_t>` through the circuit.
    pub fn run_pair(&self, n_c: usize, n_t: usize) -> Result<CircuitOutput> {
        check_pair(n_c, n_t)?;
        let input = basis_state(StateSpace::canonical(), 0, n_c, n_t)?;
        let rho = self.run(&input)?;
        Ok(CircuitOutput {
            absorbed: rho.absorbed(),
            rho,
            input_label: InputLabel::Pair { n_c, n_t },
        })
    }

    pub fn run_mixture(&self, input: &DensityMatrix) -> Result<CircuitOutput> {
        let rho = self.run(input)?;
        Ok(CircuitOutput {
            absorbed: rho.absorbed(),
            rho,
            input_label: InputLabel::Mixture,
        })
    }
}

fn check_pair(n_c: usize, n_t: usize) -> Result<()> {
    if n_c > 2 || n_t > 2 || n_c + n_t > 2 {
        return Err(invalid(format!(
            "input occupation (n_c={n_c}, n_t={n_t}) outside the two-photon space"
        )));
    }
    Ok(())
}

/// Runs `|0 n_c n_t>` through the full heralding circuit.
pub fn run_circuit(n_c: usize, n_t: usize, params: GateParams) -> Result<CircuitOutput> {
    check_pair(n_c, n_t)?;
    HeraldingCircuit::new(params)?.run_pair(n_c, n_t)
}

/// Phase-sensitive fidelity of the SWAP' sign flip on `|011>`.
///
/// A global sign is invisible in a density matrix, so the vacuum serves as
/// phase reference: the probe `(|000> + |011>)/sqrt2` is sent through the
/// gate and compared with the ideal output `(|000> - |011>)/sqrt2`. The
/// value is 0 without TPA and tends to 1 in the Zeno limit.
pub fn zeno_phase_fidelity(params: GateParams) -> Result<f64> {
    let space = StateSpace::canonical();
    let d = space.len();
    let vac = space.require(Occupation::new(0, 0, 0))?;
    let pair = space.require(Occupation::new(0, 1, 1))?;
    let probe: DVector<C64> =
        (basis_vector(d, vac) + basis_vector(d, pair)) * C64::new(FRAC_1_SQRT_2, 0.0);
    let target: DVector<C64> =
        (basis_vector(d, vac) - basis_vector(d, pair)) * C64::new(FRAC_1_SQRT_2, 0.0);
    let out = swap_prime(&DensityMatrix::pure(&probe), params)?;
    Ok(out.expectation(&target))
}
