//! Truncated Fock-space representation of the three-mode heralding circuit.
//!
//! Kets are written `|n_z n_c n_t>`: photon numbers in the target logical-0
//! mode `z`, the control mode `c` and the target logical-1 mode `t`. The
//! space keeps every state with at most two photons in total.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::{CMatrix, C64};

/// Tolerance on the truncated Poisson tail used by [`auto_nmax`].
pub const POISSON_TAIL_TOL: f64 = 1e-12;
/// Largest photon-number cutoff [`auto_nmax`] may return.
pub const MAX_NMAX: usize = 40;
/// Largest mean photon number accepted by [`auto_nmax`].
pub const MAX_MU: f64 = 8.0;
/// Global photon cap of the three-mode space.
pub const PHOTON_CAP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Target logical 0, watched by the herald detector.
    Z,
    /// Control logical 1, the heralded output.
    C,
    /// Target logical 1, watched by the veto detector.
    T,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Z, Mode::C, Mode::T];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Z => "z",
            Mode::C => "c",
            Mode::T => "t",
        };
        f.write_str(s)
    }
}

/// Photon numbers `(n_z, n_c, n_t)` of a three-mode number state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation {
    pub z: usize,
    pub c: usize,
    pub t: usize,
}

impl Occupation {
    pub const fn new(z: usize, c: usize, t: usize) -> Self {
        Self { z, c, t }
    }

    pub fn total(&self) -> usize {
        self.z + self.c + self.t
    }

    pub fn get(&self, mode: Mode) -> usize {
        match mode {
            Mode::Z => self.z,
            Mode::C => self.c,
            Mode::T => self.t,
        }
    }

    pub fn with(mut self, mode: Mode, n: usize) -> Self {
        match mode {
            Mode::Z => self.z = n,
            Mode::C => self.c = n,
            Mode::T => self.t = n,
        }
        self
    }

    /// Relabel modes `c` and `t`.
    pub fn swap_ct(self) -> Self {
        Self::new(self.z, self.t, self.c)
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}{}{}>", self.z, self.c, self.t)
    }
}

/// Ordered basis of the three-mode space with at most two photons.
///
/// The order is fixed: vacuum, then `|001>, |010>, |100>`, then
/// `|011>, |002>, |020>, |101>, |110>, |200>`. Basis indices are therefore
/// nondecreasing in total photon number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    basis: Vec<Occupation>,
    // index[z][c][t], usize::MAX when outside the space
    lookup: [[[usize; PHOTON_CAP + 1]; PHOTON_CAP + 1]; PHOTON_CAP + 1],
}

impl StateSpace {
    fn build() -> Self {
        let basis = vec![
            Occupation::new(0, 0, 0),
            Occupation::new(0, 0, 1),
            Occupation::new(0, 1, 0),
            Occupation::new(1, 0, 0),
            Occupation::new(0, 1, 1),
            Occupation::new(0, 0, 2),
            Occupation::new(0, 2, 0),
            Occupation::new(1, 0, 1),
            Occupation::new(1, 1, 0),
            Occupation::new(2, 0, 0),
        ];
        let mut lookup = [[[usize::MAX; PHOTON_CAP + 1]; PHOTON_CAP + 1]; PHOTON_CAP + 1];
        for (i, o) in basis.iter().enumerate() {
            lookup[o.z][o.c][o.t] = i;
        }
        Self { basis, lookup }
    }

    /// The shared ten-state space.
    pub fn canonical() -> &'static StateSpace {
        static SPACE: OnceLock<StateSpace> = OnceLock::new();
        SPACE.get_or_init(StateSpace::build)
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Occupation] {
        &self.basis
    }

    pub fn occupation(&self, index: usize) -> Occupation {
        self.basis[index]
    }

    pub fn index_of(&self, occ: Occupation) -> Option<usize> {
        if occ.total() > PHOTON_CAP {
            return None;
        }
        Some(self.lookup[occ.z][occ.c][occ.t])
    }

    /// Index of `occ`, or an out-of-space error.
    pub fn require(&self, occ: Occupation) -> Result<usize> {
        self.index_of(occ).ok_or(Error::OutOfSpace {
            z: occ.z,
            c: occ.c,
            t: occ.t,
        })
    }

    pub fn photon_numbers(&self) -> Vec<usize> {
        self.basis.iter().map(Occupation::total).collect()
    }
}

/// Photon-number probabilities of a single optical mode, `probs[n]` for
/// `n = 0..=n_max`. A total below one is mass lost to absorption or
/// truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
}

impl PhotonDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(invalid("photon distribution needs n_max >= 1"));
        }
        if let Some((n, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(invalid(format!(
                "probability P_{n} = {p} is negative or not finite"
            )));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(invalid(format!("probabilities sum to {total} > 1")));
        }
        Ok(Self { probs })
    }

    /// Builds a distribution, clipping round-off negatives (above `-tol`) to zero.
    pub(crate) fn from_numeric(mut probs: Vec<f64>, tol: f64) -> Result<Self> {
        for p in probs.iter_mut() {
            if *p < 0.0 && *p > -tol {
                *p = 0.0;
            }
        }
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// `P_n`, zero beyond the cutoff.
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Probability of two or more photons.
    pub fn multi(&self) -> f64 {
        self.probs.iter().skip(2).sum()
    }

    pub fn even_odd(&self) -> (f64, f64) {
        let even = self.probs.iter().step_by(2).sum();
        let odd = self.probs.iter().skip(1).step_by(2).sum();
        (even, odd)
    }
}

/// Mass of a Poisson(`mu`) distribution beyond `n_max`, summed term by term.
pub fn poisson_tail(mu: f64, n_max: usize) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let mut term = (-mu).exp();
    for k in 1..=n_max {
        term *= mu / k as f64;
    }
    let mut tail = 0.0;
    let mut k = n_max + 1;
    loop {
        term *= mu / k as f64;
        tail += term;
        if term < 1e-30 * tail.max(f64::MIN_POSITIVE) || term == 0.0 {
            break;
        }
        k += 1;
    }
    tail
}

/// Phase-averaged coherent state: Poisson weights `e^-mu mu^n / n!`.
pub fn poisson_distribution(mu: f64, n_max: usize) -> Result<PhotonDistribution> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(invalid(format!(
            "mean photon number must be >= 0, got {mu}"
        )));
    }
    if n_max < 1 {
        return Err(invalid("n_max must be >= 1"));
    }
    let mut probs = Vec::with_capacity(n_max + 1);
    let mut term = (-mu).exp();
    probs.push(term);
    for n in 1..=n_max {
        term *= mu / n as f64;
        probs.push(term);
    }
    PhotonDistribution::new(probs)
}

/// Smallest cutoff whose Poisson tail is below [`POISSON_TAIL_TOL`].
pub fn auto_nmax(mu: f64) -> Result<usize> {
    if !(0.0..=MAX_MU).contains(&mu) {
        return Err(invalid(format!(
            "mean photon number {mu} outside [0, {MAX_MU}]"
        )));
    }
    let n = (1..=MAX_NMAX)
        .find(|&n| poisson_tail(mu, n) < POISSON_TAIL_TOL)
        .expect("mu <= 8 always converges below the cutoff cap");
    Ok(n)
}

/// Density matrix with an explicit absorbed-probability scalar.
///
/// `trace + absorbed` is conserved by every evolution in this crate. The
/// matrix dimension is not tied to the three-mode space so the same type
/// serves single-mode oracle calculations; functions that interpret basis
/// labels check for the canonical dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: CMatrix,
    absorbed: f64,
}

/// Measured invariant margins of a [`DensityMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    /// `max |rho - rho^dagger|`.
    pub hermiticity: f64,
    pub min_diagonal: f64,
    /// `|trace + absorbed - 1|`.
    pub conservation: f64,
    pub min_eigenvalue: f64,
}

impl Invariants {
    pub const HERMITICITY_TOL: f64 = 1e-12;
    pub const DIAGONAL_TOL: f64 = 1e-12;
    pub const CONSERVATION_TOL: f64 = 1e-10;
    pub const EIGENVALUE_TOL: f64 = 1e-10;

    pub fn holds(&self) -> bool {
        self.hermiticity <= Self::HERMITICITY_TOL
            && self.min_diagonal >= -Self::DIAGONAL_TOL
            && self.conservation <= Self::CONSERVATION_TOL
            && self.min_eigenvalue >= -Self::EIGENVALUE_TOL
    }
}

impl DensityMatrix {
    pub fn new(elements: CMatrix, absorbed: f64) -> Result<Self> {
        if !elements.is_square() {
            return Err(invalid("density matrix must be square"));
        }
        if !absorbed.is_finite() || absorbed < 0.0 {
            return Err(invalid(format!(
                "absorbed mass must be >= 0, got {absorbed}"
            )));
        }
        Ok(Self { elements, absorbed })
    }

    /// `|psi><psi|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: &DVector<C64>) -> Self {
        Self {
            elements: psi * psi.adjoint(),
            absorbed: 0.0,
        }
    }

    /// Diagonal mixture with the given populations.
    pub fn diagonal(populations: &[f64]) -> Self {
        let d = populations.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, p) in populations.iter().enumerate() {
            m[(i, i)] = C64::new(*p, 0.0);
        }
        Self {
            elements: m,
            absorbed: 0.0,
        }
    }

    pub(crate) fn from_parts(elements: CMatrix, absorbed: f64) -> Self {
        Self { elements, absorbed }
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_elements(self) -> CMatrix {
        self.elements
    }

    pub fn absorbed(&self) -> f64 {
        self.absorbed
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    pub fn population(&self, i: usize) -> f64 {
        self.elements[(i, i)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.population(i)).collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.elements * &self.elements).trace().re
    }

    /// `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &DVector<C64>) -> f64 {
        (psi.adjoint() * &self.elements * psi)[(0, 0)].re
    }

    /// `U rho U^dagger`, absorbed mass unchanged.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        Self {
            elements: u * &self.elements * u.adjoint(),
            absorbed: self.absorbed,
        }
    }

    /// Weighted sum of density matrices of equal dimension.
    pub fn mix(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| invalid("empty mixture"))?;
        let d = first.dim();
        let mut elements = CMatrix::zeros(d, d);
        let mut absorbed = 0.0;
        for (w, rho) in parts {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: rho.dim(),
                });
            }
            elements += &rho.elements * C64::new(*w, 0.0);
            absorbed += w * rho.absorbed;
        }
        Ok(Self { elements, absorbed })
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.elements - self.elements.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.elements + self.elements.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn invariants(&self) -> Invariants {
        let min_diagonal = (0..self.dim())
            .map(|i| self.population(i))
            .fold(f64::INFINITY, f64::min);
        Invariants {
            hermiticity: self.hermiticity_error(),
            min_diagonal,
            conservation: (self.trace() + self.absorbed - 1.0).abs(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    /// Largest elementwise distance between two states, absorbed mass included.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        let m = (&self.elements - &other.elements)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        m.max((self.absorbed - other.absorbed).abs())
    }
}

/// Pure number state `|n_z n_c n_t><n_z n_c n_t|` over `space`.
pub fn basis_state(
    space: &StateSpace,
    n_z: usize,
    n_c: usize,
    n_t: usize,
) -> Result<DensityMatrix> {
    let i = space.require(Occupation::new(n_z, n_c, n_t))?;
    Ok(DensityMatrix::pure(&basis_vector(space.len(), i)))
}

/// Unit vector `e_i` of dimension `d`.
pub fn basis_vector(d: usize, i: usize) -> DVector<C64> {
    let mut v = DVector::zeros(d);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Photon-number distribution of one mode read off the diagonal of `rho`.
/// Absorbed mass is not included.
pub fn mode_number_marginal(
    space: &StateSpace,
    rho: &DensityMatrix,
    mode: Mode,
) -> Result<PhotonDistribution> {
    if rho.dim() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            actual: rho.dim(),
        });
    }
    let mut probs = vec![0.0; PHOTON_CAP + 1];
    for (i, occ) in space.basis().iter().enumerate() {
        probs[occ.get(mode)] += rho.population(i);
    }
    PhotonDistribution::from_numeric(probs, 1e-12)
}
