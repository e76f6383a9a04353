//! Property suite behind the `verify` command.
//!
//! Each check measures a margin on fixed seeds and grids and compares it to
//! a pinned bound. The report lists every check whether it passes or not.

use std::fmt;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{
    block_deviation, coupling_hamiltonian, gate_liouvillian, hadamard_unitary, printed,
    run_circuit, swap_prime, zeno_phase_fidelity, GateParams, TpaFeed, ZenoGate,
};
use crate::error::Result;
use crate::filter::{filter_evolve, filter_trajectory, master_equation_reference, FilterParams};
use crate::fock::{
    auto_nmax, basis_state, mode_number_marginal, poisson_distribution, poisson_tail,
    DensityMatrix, Invariants, Mode, StateSpace,
};
use crate::metrics::{source_point, source_point_mixture, DetectorParams};
use crate::numerics::{evolve_expm, evolve_rk4, oracle_steps};
use crate::sweep::{run_fig4, Experiment, Grid, SweepSpec, Table};
use crate::{CMatrix, C64};

/// Gate strengths of the Zeno monotonicity grid.
pub const ZENO_GRID: [f64; 7] = [1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0];
/// Required phase-flip fidelity at the top of [`ZENO_GRID`].
pub const ZENO_THRESHOLD: f64 = 0.995;
/// Largest tolerated expm/RK4 deviation.
pub const ORACLE_TOL: f64 = 1e-8;
/// Largest tolerated rate-equation/master-equation deviation.
pub const FILTER_ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    /// Negative control: perturb one entry of the constructed two-photon
    /// Hadamard block before comparing with the printed matrix.
    pub corrupt_u2: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub kind: Bound,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, bound: f64) -> Self {
        Self {
            name,
            measured,
            bound,
            kind: Bound::AtMost,
        }
    }

    fn at_least(name: &'static str, measured: f64, bound: f64) -> Self {
        Self {
            name,
            measured,
            bound,
            kind: Bound::AtLeast,
        }
    }

    pub fn passed(&self) -> bool {
        match self.kind {
            Bound::AtMost => self.measured <= self.bound,
            Bound::AtLeast => self.measured >= self.bound,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let op = match self.kind {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "{status} {:<34} measured={:.6e} {op} {:.6e}",
            self.name, self.measured, self.bound
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} checks, {} passed, {} failed",
            self.checks.len(),
            self.checks.len() - failed,
            failed
        )
    }
}

/// Random mixed state `A A^dagger / tr` of dimension `d`.
pub fn random_density_matrix(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / C64::new(tr, 0.0), 0.0).expect("square")
}

/// A randomized gate configuration with `gamma2 <= gamma2_max`.
pub fn random_gate_params(rng: &mut impl Rng, gamma2_max: f64) -> GateParams {
    let mut p = GateParams::new(
        rng.random_range(0.0..gamma2_max),
        rng.random_range(0.0..0.05),
    );
    p.loss_on_z = rng.random_bool(0.3);
    p.tpa_feed = if rng.random_bool(0.5) {
        TpaFeed::Vacuum
    } else {
        TpaFeed::Sink
    };
    p
}

/// Largest expm/RK4 deviation over `cases` random gate configurations,
/// each evolved over the full gate parameter `s = 1`.
pub fn gate_oracle_deviation(seed: u64, cases: usize, gamma2_max: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let params = random_gate_params(&mut rng, gamma2_max);
        let rho = random_density_matrix(&mut rng, StateSpace::canonical().len());
        let l = gate_liouvillian(&params)?;
        let a = evolve_expm(&l, &rho, 1.0)?;
        let b = evolve_rk4(&l, &rho, 1.0, oracle_steps(&l, 1.0))?;
        worst = worst.max(a.max_abs_diff(&b));
    }
    Ok(worst)
}

/// Largest rate-equation/master-equation deviation over a grid of `mu <= 2`.
pub fn filter_oracle_deviation() -> Result<f64> {
    let mut worst = 0.0f64;
    for mu in [0.25, 0.5, 1.0, 1.5, 2.0] {
        for loss in [0.0, 1e-3, 1e-1] {
            let p = FilterParams::new(mu, loss);
            let a = filter_evolve(&p)?;
            let b = master_equation_reference(&p)?;
            for (x, y) in a.dist.probs().iter().zip(b.dist.probs()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Ok(worst)
}

/// Phase-flip fidelity over [`ZENO_GRID`] at zero loss.
pub fn zeno_curve() -> Result<Vec<f64>> {
    ZENO_GRID
        .iter()
        .map(|&g| zeno_phase_fidelity(GateParams::new(g, 0.0)))
        .collect()
}

/// Largest deviation of the constructed operators from the printed blocks.
pub fn printed_matrix_deviation(corrupt_u2: bool) -> f64 {
    let space = StateSpace::canonical();
    let mut u = hadamard_unitary(space);
    if corrupt_u2 {
        u[(5, 7)] += C64::new(1e-3, 0.0);
    }
    let h = coupling_hamiltonian(space);
    block_deviation(&u, 1.0, &printed::U1, &printed::U2)
        .max()
        .max(block_deviation(&h, 0.0, &printed::H1, &printed::H2).max())
}

fn worst_invariants(states: &[DensityMatrix]) -> (f64, f64, f64, f64) {
    let mut herm = 0.0f64;
    let mut diag = f64::INFINITY;
    let mut cons = 0.0f64;
    let mut eig = f64::INFINITY;
    for s in states {
        let inv = s.invariants();
        herm = herm.max(inv.hermiticity);
        diag = diag.min(inv.min_diagonal);
        cons = cons.max(inv.conservation);
        eig = eig.min(inv.min_eigenvalue);
    }
    (herm, diag, cons, eig)
}

fn fock_checks(report: &mut VerifyReport, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut worst = 0.0f64;
    for i in 0..=16 {
        let mu = 0.5 * i as f64;
        let n = auto_nmax(mu)?;
        let p = poisson_distribution(mu, n)?;
        worst = worst.max((p.total() + poisson_tail(mu, n) - 1.0).abs());
    }
    report
        .checks
        .push(Check::at_most("poisson_normalization", worst, 1e-12));

    let space = StateSpace::canonical();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let rho = random_density_matrix(rng, space.len());
        for mode in Mode::ALL {
            let m = mode_number_marginal(space, &rho, mode)?;
            worst = worst.max((m.total() - rho.trace()).abs());
        }
    }
    report
        .checks
        .push(Check::at_most("marginal_sums_to_trace", worst, 1e-12));
    Ok(())
}

fn numerics_checks(report: &mut VerifyReport, rng: &mut ChaCha8Rng) -> Result<()> {
    report.checks.push(Check::at_most(
        "expm_rk4_oracle",
        gate_oracle_deviation(7, 20, 30.0)?,
        ORACLE_TOL,
    ));

    // conservation, invariants and monotone absorption along sink-mode paths
    let mut states = Vec::new();
    let mut absorption_drop = 0.0f64;
    for _ in 0..5 {
        let mut params = random_gate_params(rng, 50.0);
        params.tpa_feed = TpaFeed::Sink;
        let l = gate_liouvillian(&params)?;
        let rho = random_density_matrix(rng, 10);
        let mut last = 0.0;
        for k in 0..=8 {
            let out = evolve_expm(&l, &rho, 0.25 * k as f64)?;
            absorption_drop = absorption_drop.max(last - out.absorbed());
            last = out.absorbed();
            states.push(out);
        }
    }
    let (herm, diag, cons, eig) = worst_invariants(&states);
    report.checks.push(Check::at_most(
        "probability_conservation",
        cons,
        Invariants::CONSERVATION_TOL,
    ));
    report.checks.push(Check::at_most(
        "hermiticity",
        herm,
        Invariants::HERMITICITY_TOL,
    ));
    report.checks.push(Check::at_least(
        "min_diagonal",
        diag,
        -Invariants::DIAGONAL_TOL,
    ));
    report.checks.push(Check::at_least(
        "min_eigenvalue",
        eig,
        -Invariants::EIGENVALUE_TOL,
    ));
    report.checks.push(Check::at_most(
        "monotone_absorption_drop",
        absorption_drop,
        0.0,
    ));

    // zero rates: unitary evolution
    let l = gate_liouvillian(&GateParams::new(0.0, 0.0))?;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let rho = random_density_matrix(rng, 10);
        let out = evolve_expm(&l, &rho, 0.7)?;
        let mut e0: Vec<f64> = rho
            .elements()
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        let mut e1: Vec<f64> = out
            .elements()
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        e0.sort_by(f64::total_cmp);
        e1.sort_by(f64::total_cmp);
        let spec = e0
            .iter()
            .zip(&e1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst
            .max((out.purity() - rho.purity()).abs())
            .max((out.trace() - rho.trace()).abs())
            .max(spec);
    }
    report
        .checks
        .push(Check::at_most("unitary_invariants", worst, 1e-10));
    Ok(())
}

fn filter_checks(report: &mut VerifyReport) -> Result<()> {
    let mut parity = 0.0f64;
    let mut norm = 0.0f64;
    for mu in [0.5, 1.0, 2.0, 3.5, 5.0] {
        let initial = poisson_distribution(mu, auto_nmax(mu)?)?;
        let (e0, o0) = initial.even_odd();
        let t0 = initial.total();
        filter_trajectory(&FilterParams::new(mu, 0.0), |_, p| {
            let even: f64 = p.iter().step_by(2).sum();
            let odd: f64 = p.iter().skip(1).step_by(2).sum();
            parity = parity.max((even - e0).abs()).max((odd - o0).abs());
        })?;
        filter_trajectory(&FilterParams::new(mu, 1e-2), |_, p| {
            norm = norm.max((p.iter().sum::<f64>() - t0).abs());
        })?;
    }
    report
        .checks
        .push(Check::at_most("filter_parity_invariance", parity, 1e-10));
    report
        .checks
        .push(Check::at_most("filter_normalization", norm, 1e-10));

    let mut violation = 0.0f64;
    let mut prev: Option<(f64, f64)> = None;
    for loss in Grid::log(1e-4, 1.0, 21).values() {
        let out = filter_evolve(&FilterParams::new(3.5, loss))?;
        if let Some((p0, p1)) = prev {
            violation = violation.max(p0 - out.p0).max(out.p1 - p1);
        }
        prev = Some((out.p0, out.p1));
    }
    report
        .checks
        .push(Check::at_most("filter_monotone_skew", violation, 0.0));
    report.checks.push(Check::at_most(
        "filter_master_equation_oracle",
        filter_oracle_deviation()?,
        FILTER_ORACLE_TOL,
    ));
    Ok(())
}

fn circuit_checks(report: &mut VerifyReport, opts: &VerifyOptions) -> Result<()> {
    let space = StateSpace::canonical();
    let mut worst = 0.0f64;
    for (c, t) in crate::metrics::INPUT_PAIRS {
        let out = run_circuit(c, t, GateParams::new(0.0, 0.0))?;
        let idx = space.require(crate::fock::Occupation::new(0, c, t))?;
        worst = worst.max(1.0 - out.rho.population(idx));
    }
    report.checks.push(Check::at_most(
        "circuit_identity_at_zero_rates",
        worst,
        1e-9,
    ));

    let mut worst = 0.0f64;
    let gate = ZenoGate::new(GateParams::new(0.0, 0.0))?;
    for i in 0..space.len() {
        for j in 0..space.len() {
            let mut psi = DVector::zeros(space.len());
            psi[i] += C64::new(0.6, 0.0);
            psi[j] += C64::new(0.0, 0.8);
            let psi = psi.normalize();
            let out = gate.apply(&DensityMatrix::pure(&psi))?;
            worst = worst
                .max((out.purity() - 1.0).abs())
                .max((out.trace() - 1.0).abs());
        }
    }
    report
        .checks
        .push(Check::at_most("swap_prime_unitarity", worst, 1e-10));

    let curve = zeno_curve()?;
    let drop = curve.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    report
        .checks
        .push(Check::at_most("zeno_monotonicity_drop", drop, 0.0));
    report.checks.push(Check::at_least(
        "zeno_flip_fidelity_at_1000",
        *curve.last().unwrap(),
        ZENO_THRESHOLD,
    ));

    report.checks.push(Check::at_most(
        "printed_matrix_match",
        printed_matrix_deviation(opts.corrupt_u2),
        1e-12,
    ));

    let mut worst = 0.0f64;
    for g in [0.5, 10.0, 200.0] {
        let mut p = GateParams::new(g, 1e-2);
        p.tpa_feed = TpaFeed::Sink;
        for i in 0..space.len() {
            let occ = space.occupation(i);
            let out = swap_prime(&basis_state(space, occ.z, occ.c, occ.t)?, p)?;
            worst = worst.max((out.trace() + out.absorbed() - 1.0).abs());
        }
    }
    report
        .checks
        .push(Check::at_most("swap_prime_conservation", worst, 1e-10));
    Ok(())
}

fn metrics_checks(report: &mut VerifyReport) -> Result<()> {
    let real = DetectorParams::REALISTIC;
    let ideal = DetectorParams::IDEAL;

    let mut worst = 0.0f64;
    for g in [0.0, 1.0, 30.0, 1000.0] {
        for loss in [0.0, 1e-3, 1e-2] {
            let fp = FilterParams::new(3.5, loss);
            for det in [ideal, real] {
                let m = source_point(&fp, &fp, &GateParams::new(g, loss), &det)?;
                worst = worst
                    .max(m.p_s + m.p_e - 1.0)
                    .max(-m.h)
                    .max(m.h - 1.0)
                    .max((m.f - m.h.sqrt()).abs());
            }
        }
    }
    report
        .checks
        .push(Check::at_most("metrics_bounds", worst, 0.0));

    let fp = FilterParams::new(3.5, 0.0);
    let m = source_point(&fp, &fp, &GateParams::new(0.0, 0.0), &ideal)?;
    report.checks.push(Check::at_most(
        "identity_error_floor",
        (m.p_e - m.p_multi_input).abs().max(m.p_s.abs()),
        1e-12,
    ));

    let mut violation = 0.0f64;
    for g in [1.0, 10.0, 100.0] {
        let mut prev = f64::INFINITY;
        for loss in [0.0, 1e-4, 1e-3, 1e-2] {
            let fp = FilterParams::new(3.5, loss);
            let ps = source_point(&fp, &fp, &GateParams::new(g, loss), &real)?.p_s;
            violation = violation.max(ps - prev);
            prev = ps;
        }
    }
    report
        .checks
        .push(Check::at_most("ps_loss_monotonicity", violation, 0.0));

    let mut violation = 0.0f64;
    let fp = FilterParams::new(3.5, 1e-3);
    let gp = GateParams::new(30.0, 1e-3);
    let mut prev = -1.0;
    for eta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let ps = source_point(&fp, &fp, &gp, &DetectorParams { eta, dark: 1e-5 })?.p_s;
        violation = violation.max(prev - ps);
        prev = ps;
    }
    report
        .checks
        .push(Check::at_most("ps_efficiency_monotonicity", violation, 0.0));

    let mut worst = 0.0f64;
    for mu in [0.1, 0.5] {
        let fp = FilterParams::new(mu, 1e-3);
        let gp = GateParams::new(20.0, 1e-3);
        let a = source_point(&fp, &fp, &gp, &real)?;
        let b = source_point_mixture(&fp, &fp, &gp, &real)?;
        worst = worst.max((a.p_s - b.p_s).abs()).max((a.p_e - b.p_e).abs());
    }
    report
        .checks
        .push(Check::at_most("pair_vs_mixture", worst, 1e-10));
    Ok(())
}

fn small_fig4(workers: usize) -> Result<Table> {
    let mut spec = SweepSpec::new(Experiment::Fig4);
    spec.grid = Some(Grid::log(0.1, 1000.0, 5));
    spec.workers = workers;
    run_fig4(&spec)
}

fn sweep_checks(report: &mut VerifyReport) -> Result<()> {
    let a = small_fig4(1)?;
    let b = small_fig4(4)?;
    let differs = if a.to_csv() == b.to_csv() { 0.0 } else { 1.0 };
    report
        .checks
        .push(Check::at_most("csv_worker_invariance", differs, 0.0));

    let mut worst = 0.0f64;
    for row in 0..a.rows.len() {
        for col in ["ps", "pe", "h"] {
            let v = a.value(row, col).unwrap_or(f64::NAN);
            if !(0.0..=1.0).contains(&v) {
                worst = worst.max(1.0);
            }
        }
    }
    report
        .checks
        .push(Check::at_most("csv_probability_range", worst, 0.0));
    Ok(())
}

/// Runs every property check at fixed seeds and grids.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2006);
    fock_checks(&mut report, &mut rng)?;
    numerics_checks(&mut report, &mut rng)?;
    filter_checks(&mut report)?;
    circuit_checks(&mut report, opts)?;
    metrics_checks(&mut report)?;
    sweep_checks(&mut report)?;
    Ok(report)
}
