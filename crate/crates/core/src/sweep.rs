//! Named parameter sweeps and their CSV tables.
//!
//! Every cell of a sweep is an independent pure computation. Cells are
//! evaluated on a worker pool and collected by grid index, so the output
//! does not depend on the number of workers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::circuit::{GateParams, HeraldingCircuit};
use crate::error::{invalid, Error, Result};
use crate::filter::{filter_evolve, FilterOutput, FilterParams, DEFAULT_FILTER_GAMMA2};
use crate::fock::PhotonDistribution;
use crate::metrics::{DetectorParams, PairResponses, SourceMetrics};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// Sweep axis `start:stop:count:lin|log`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Scale,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        Self {
            start,
            stop,
            count,
            scale: Scale::Linear,
        }
    }

    pub fn log(start: f64, stop: f64, count: usize) -> Self {
        Self {
            start,
            stop,
            count,
            scale: Scale::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(invalid(format!(
                "grid needs at least 2 points, got {}",
                self.count
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(invalid("grid bounds must be finite"));
        }
        if self.scale == Scale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(invalid("log grid requires positive bounds"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                // pin endpoints exactly
                if i == 0 {
                    return self.start;
                }
                if i == self.count - 1 {
                    return self.stop;
                }
                let f = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + f * (self.stop - self.start),
                    Scale::Log => {
                        let (a, b) = (self.start.log10(), self.stop.log10());
                        10f64.powf(a + f * (b - a))
                    }
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count, scale] = parts.as_slice() else {
            return Err(invalid(format!(
                "grid '{s}' is not <start>:<stop>:<count>:<lin|log>"
            )));
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad grid number '{v}'")))
        };
        let grid = Grid {
            start: num(start)?,
            stop: num(stop)?,
            count: count
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad grid count '{count}'")))?,
            scale: match scale.trim() {
                "lin" => Scale::Linear,
                "log" => Scale::Log,
                other => {
                    return Err(invalid(format!(
                        "grid scale must be lin or log, got '{other}'"
                    )))
                }
            },
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig2a,
    Fig2b,
    Fig4,
    Fig5,
    Point,
    Verify,
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig2a" => Self::Fig2a,
            "fig2b" => Self::Fig2b,
            "fig4" => Self::Fig4,
            "fig5" => Self::Fig5,
            "point" => Self::Point,
            "verify" => Self::Verify,
            _ => return Err(invalid(format!("unknown experiment '{s}'"))),
        })
    }
}

/// Parameter overrides; `None` keeps the experiment default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub mu: Option<f64>,
    pub loss_ratio: Option<f64>,
    pub gamma2_filter: Option<f64>,
    pub gamma2_gate: Option<f64>,
    pub eta: Option<f64>,
    pub dark: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub experiment: Experiment,
    /// Replaces the default axis of the experiment.
    pub grid: Option<Grid>,
    pub fixed: Overrides,
    /// Worker threads; 0 means available parallelism.
    pub workers: usize,
}

impl SweepSpec {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            grid: None,
            fixed: Overrides::default(),
            workers: 0,
        }
    }
}

pub mod defaults {
    use super::Grid;

    pub const MU: f64 = 3.5;
    pub const FIG2A_LOSS: f64 = 1e-3;
    pub const POINT_LOSS: f64 = 1e-3;
    pub const POINT_GAMMA2_GATE: f64 = 100.0;
    /// Loss curves of the source figures, relative to the TPA rate.
    pub const LOSS_CURVES: [f64; 4] = [0.0, 1e-2, 1e-3, 1e-4];

    pub fn fig2a_grid() -> Grid {
        Grid::linear(0.0, 5.0, 101)
    }

    pub fn fig2b_grid() -> Grid {
        Grid::log(1e-4, 1.0, 41)
    }

    /// Gate TPA strengths; the exact zero point is prepended separately.
    pub fn gate_grid() -> Grid {
        Grid::log(0.1, 1000.0, 61)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(&'static str),
}

/// Formats like C's `%.12e`: twelve mantissa digits, signed two-digit exponent.
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => f.write_str(&format_sci(*x)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Numeric value of `column` in `row`.
    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        let j = self.header.iter().position(|h| *h == column)?;
        match self.rows.get(row)?.get(j)? {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    pub fn text(&self, row: usize, column: &str) -> Option<&'static str> {
        let j = self.header.iter().position(|h| *h == column)?;
        match self.rows.get(row)?.get(j)? {
            Cell::Text(s) => Some(s),
            Cell::Num(_) => None,
        }
    }
}

/// Maps `f` over `items` on `workers` threads, preserving order.
pub fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

fn axis(spec: &SweepSpec, default: Grid) -> Result<Vec<f64>> {
    let grid = spec.grid.unwrap_or(default);
    grid.validate()?;
    Ok(grid.values())
}

/// Gate axis with the exact zero point in front.
fn gate_axis(spec: &SweepSpec) -> Result<Vec<f64>> {
    let mut values = axis(spec, defaults::gate_grid())?;
    if !values.contains(&0.0) {
        values.insert(0, 0.0);
    }
    Ok(values)
}

fn filter_row(x: f64, out: &FilterOutput, with_multi: bool) -> Vec<Cell> {
    let mut row = vec![Cell::Num(x), Cell::Num(out.p0), Cell::Num(out.p1)];
    if with_multi {
        row.push(Cell::Num(out.p_multi));
    }
    row
}

/// Filter output statistics against the input mean photon number.
pub fn run_fig2a(spec: &SweepSpec) -> Result<Table> {
    let mus = axis(spec, defaults::fig2a_grid())?;
    let loss = spec.fixed.loss_ratio.unwrap_or(defaults::FIG2A_LOSS);
    let gamma2 = spec.fixed.gamma2_filter.unwrap_or(DEFAULT_FILTER_GAMMA2);
    let rows = par_map(&mus, spec.workers, |&mu| {
        let out = filter_evolve(&FilterParams::new(mu, loss).with_gamma2(gamma2))?;
        Ok(filter_row(mu, &out, true))
    })?;
    Ok(Table {
        header: vec!["mu", "p0", "p1", "p_multi"],
        rows,
    })
}

/// Filter output statistics against the relative single-photon loss.
pub fn run_fig2b(spec: &SweepSpec) -> Result<Table> {
    let losses = axis(spec, defaults::fig2b_grid())?;
    let mu = spec.fixed.mu.unwrap_or(defaults::MU);
    let gamma2 = spec.fixed.gamma2_filter.unwrap_or(DEFAULT_FILTER_GAMMA2);
    let rows = par_map(&losses, spec.workers, |&loss| {
        let out = filter_evolve(&FilterParams::new(mu, loss).with_gamma2(gamma2))?;
        Ok(filter_row(loss, &out, false))
    })?;
    Ok(Table {
        header: vec!["loss_ratio", "p0", "p1"],
        rows,
    })
}

fn loss_curves(spec: &SweepSpec) -> Vec<f64> {
    match spec.fixed.loss_ratio {
        Some(l) => vec![l],
        None => defaults::LOSS_CURVES.to_vec(),
    }
}

fn realistic(spec: &SweepSpec) -> DetectorParams {
    DetectorParams {
        eta: spec.fixed.eta.unwrap_or(DetectorParams::REALISTIC.eta),
        dark: spec.fixed.dark.unwrap_or(DetectorParams::REALISTIC.dark),
    }
}

/// Source metrics on the (loss curve, gate strength) lattice, one entry per
/// detector, indexed `[detector][loss][gamma2]`.
/// Metrics indexed by detector, loss curve and gate strength.
type Lattice = Vec<Vec<Vec<SourceMetrics>>>;

fn source_lattice(
    spec: &SweepSpec,
    detectors: &[DetectorParams],
) -> Result<(Vec<f64>, Vec<f64>, Lattice)> {
    for det in detectors {
        det.validate()?;
    }
    let gammas = gate_axis(spec)?;
    let losses = loss_curves(spec);
    let mu = spec.fixed.mu.unwrap_or(defaults::MU);
    let gamma2_filter = spec.fixed.gamma2_filter.unwrap_or(DEFAULT_FILTER_GAMMA2);
    // filter and gate share the relative loss
    let filtered: Vec<PhotonDistribution> = losses
        .iter()
        .map(|&l| {
            filter_evolve(&FilterParams::new(mu, l).with_gamma2(gamma2_filter)).map(|o| o.dist)
        })
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, f64)> = (0..losses.len())
        .flat_map(|li| gammas.iter().map(move |&g| (li, g)))
        .collect();
    let per_cell = par_map(&cells, spec.workers, |&(li, g)| {
        let responses =
            PairResponses::compute(&HeraldingCircuit::new(GateParams::new(g, losses[li]))?)?;
        let dist = &filtered[li];
        Ok(detectors
            .iter()
            .map(|det| responses.metrics(dist, dist, det))
            .collect::<Vec<_>>())
    })?;
    let mut lattice = vec![vec![Vec::with_capacity(gammas.len()); losses.len()]; detectors.len()];
    for (&(li, _), metrics) in cells.iter().zip(per_cell) {
        for (di, m) in metrics.into_iter().enumerate() {
            lattice[di][li].push(m);
        }
    }
    Ok((gammas, losses, lattice))
}

/// Production and error rates against gate TPA strength, for each loss
/// curve and both detector presets.
pub fn run_fig4(spec: &SweepSpec) -> Result<Table> {
    let detectors = [DetectorParams::IDEAL, realistic(spec)];
    let names = ["ideal", "realistic"];
    let (gammas, losses, lattice) = source_lattice(spec, &detectors)?;
    let mut rows = Vec::new();
    for (di, name) in names.iter().enumerate() {
        for (li, &loss) in losses.iter().enumerate() {
            for (gi, &g) in gammas.iter().enumerate() {
                let m = &lattice[di][li][gi];
                rows.push(vec![
                    Cell::Num(g),
                    Cell::Num(loss),
                    Cell::Text(name),
                    Cell::Num(m.p_s),
                    Cell::Num(m.p_e),
                    Cell::Num(m.h),
                ]);
            }
        }
    }
    Ok(Table {
        header: vec!["gamma2", "loss_ratio", "detector", "ps", "pe", "h"],
        rows,
    })
}

/// Source fidelity against gate TPA strength with realistic detectors.
pub fn run_fig5(spec: &SweepSpec) -> Result<Table> {
    let (gammas, losses, lattice) = source_lattice(spec, &[realistic(spec)])?;
    let mut rows = Vec::new();
    for (li, &loss) in losses.iter().enumerate() {
        for (gi, &g) in gammas.iter().enumerate() {
            rows.push(vec![
                Cell::Num(g),
                Cell::Num(loss),
                Cell::Num(lattice[0][li][gi].f),
            ]);
        }
    }
    Ok(Table {
        header: vec!["gamma2", "loss_ratio", "f"],
        rows,
    })
}

/// Resolved parameters of a single operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointParams {
    pub filter: FilterParams,
    pub gate: GateParams,
    pub detector: DetectorParams,
}

impl PointParams {
    pub fn resolve(o: &Overrides) -> Self {
        let loss = o.loss_ratio.unwrap_or(defaults::POINT_LOSS);
        Self {
            filter: FilterParams::new(o.mu.unwrap_or(defaults::MU), loss)
                .with_gamma2(o.gamma2_filter.unwrap_or(DEFAULT_FILTER_GAMMA2)),
            gate: GateParams::new(o.gamma2_gate.unwrap_or(defaults::POINT_GAMMA2_GATE), loss),
            detector: DetectorParams {
                eta: o.eta.unwrap_or(DetectorParams::REALISTIC.eta),
                dark: o.dark.unwrap_or(DetectorParams::REALISTIC.dark),
            },
        }
    }
}

/// One operating point with identical filter cells on both inputs.
pub fn run_point(spec: &SweepSpec) -> Result<(Table, SourceMetrics)> {
    let p = PointParams::resolve(&spec.fixed);
    let m = crate::metrics::source_point(&p.filter, &p.filter, &p.gate, &p.detector)?;
    let row = vec![
        Cell::Num(p.filter.mu),
        Cell::Num(p.filter.loss_ratio),
        Cell::Num(p.filter.gamma2),
        Cell::Num(p.gate.gamma2),
        Cell::Num(p.detector.eta),
        Cell::Num(p.detector.dark),
        Cell::Num(m.p_s),
        Cell::Num(m.p_e),
        Cell::Num(m.h),
        Cell::Num(m.f),
        Cell::Num(m.p_multi_input),
    ];
    let header = vec![
        "mu",
        "loss_ratio",
        "gamma2_filter",
        "gamma2_gate",
        "eta",
        "dark",
        "ps",
        "pe",
        "h",
        "f",
        "p_multi_input",
    ];
    Ok((
        Table {
            header,
            rows: vec![row],
        },
        m,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_format_matches_printf() {
        assert_eq!(format_sci(1.0), "1.000000000000e+00");
        assert_eq!(format_sci(0.0), "0.000000000000e+00");
        assert_eq!(format_sci(-0.0), "0.000000000000e+00");
        assert_eq!(format_sci(1e-5), "1.000000000000e-05");
        assert_eq!(format_sci(-2.5e-120), "-2.500000000000e-120");
        assert_eq!(format_sci(123456.0), "1.234560000000e+05");
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "0:5:101:lin".parse().unwrap();
        assert_eq!(g, Grid::linear(0.0, 5.0, 101));
        let v = g.values();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[100], 5.0);
        assert!((v[70] - 3.5).abs() < 1e-15);

        let v = Grid::log(1e-4, 1.0, 41).values();
        assert!((v[10] - 1e-3).abs() < 1e-18);
        assert_eq!(v[40], 1.0);

        assert!("1:2:1:lin".parse::<Grid>().is_err());
        assert!("0:2:5:log".parse::<Grid>().is_err());
        assert!("0:2:5".parse::<Grid>().is_err());
        assert!("0:2:5:cubic".parse::<Grid>().is_err());
    }

    #[test]
    fn gate_axis_prepends_zero() {
        let v = gate_axis(&SweepSpec::new(Experiment::Fig4)).unwrap();
        assert_eq!(v.len(), 62);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 0.1);
        assert_eq!(v[61], 1000.0);
    }

    #[test]
    fn experiment_names() {
        assert_eq!("fig5".parse::<Experiment>().unwrap(), Experiment::Fig5);
        assert!("fig3".parse::<Experiment>().is_err());
    }

    #[test]
    fn csv_layout() {
        let t = Table {
            header: vec!["a", "b"],
            rows: vec![vec![Cell::Num(0.5), Cell::Text("x")]],
        };
        assert_eq!(t.to_csv(), "a,b\n5.000000000000e-01,x\n");
        assert_eq!(t.value(0, "a"), Some(0.5));
        assert_eq!(t.text(0, "b"), Some("x"));
    }
}
