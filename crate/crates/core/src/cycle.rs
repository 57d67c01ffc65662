//! The four-stroke cycle: expansion, truncated heating, compression, and
//! the optional cooling stroke. Also the ω_c and p⁺_hot sweeps built on it.

use crate::bath::{BathSpec, RateTrajectory, Statistics};
use crate::dynamics::{evolve_open, propagate_unitary, Direction, OdeOptions, Trajectory, DEFAULT_UNITARY_STEPS};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matcore::{CMat2, DensityMatrix};
use crate::measures::{cycle_energetics, overall_performance, Energetics, NonMarkovReport};
use crate::model::{
    beta_from_population, hamiltonian_at, jump_operator, state_from_population, transition_energy, StrokePhase,
    SystemParams,
};

/// Drop below η_max that still counts as part of the peak window.
pub const PEAK_WINDOW_DROP: f64 = 5e-4;
/// Tolerance on |η − η_sat| for the equilibration time.
pub const EQUILIBRATION_TOL: f64 = 1e-3;
/// Length of the final stretch averaged into η_sat, ms.
pub const SATURATION_WINDOW: f64 = 1.0;

/// Spectral parameters of a fermionic reservoir whose temperature is set
/// later from a target population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams {
    pub alpha: f64,
    pub omega_c: f64,
    pub mu: f64,
}

impl ReservoirParams {
    pub fn bath(&self, beta: f64) -> Result<BathSpec> {
        BathSpec::new(self.alpha, self.omega_c, beta, self.mu, Statistics::Fermionic)
    }
}

/// Heating-stroke sample times: a fine uniform block from 0, then a coarse
/// uniform tail. All values in ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingGrid {
    pub dense_step: f64,
    pub dense_end: f64,
    pub tail_step: f64,
    pub t_max: f64,
}

impl Default for HeatingGrid {
    fn default() -> Self {
        HeatingGrid {
            dense_step: 0.25e-3,
            dense_end: 1.0,
            tail_step: 10e-3,
            t_max: 10.0,
        }
    }
}

impl HeatingGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        let HeatingGrid {
            dense_step,
            dense_end,
            tail_step,
            t_max,
        } = *self;
        for (name, v) in [("dense_step", dense_step), ("tail_step", tail_step)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidGrid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(t_max > 0.0 && t_max.is_finite()) || !(dense_end >= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "need t_max > 0 and dense_end >= 0 (t_max = {t_max}, dense_end = {dense_end})"
            )));
        }
        let dense_to = dense_end.min(t_max);
        let n = (dense_to / dense_step).round() as usize;
        if (n as f64 * dense_step - dense_to).abs() > 1e-9 * dense_to.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "dense block end {dense_to} ms is not a multiple of the step {dense_step} ms"
            )));
        }
        let mut t: Vec<f64> = (0..=n).map(|i| i as f64 * dense_step).collect();
        let m = ((t_max - dense_to) / tail_step).round() as usize;
        t.extend((1..=m).map(|j| dense_to + j as f64 * tail_step));
        if t.len() < 2 {
            return Err(Error::InvalidGrid("heating grid has fewer than two samples".into()));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    pub system: SystemParams,
    pub hot: ReservoirParams,
    pub cold: ReservoirParams,
    pub p_plus_cold: f64,
    pub p_plus_hot: f64,
    /// Require p⁺_hot ≥ 1/2 (population-inverted hot reservoir).
    pub negative_temperature: bool,
    pub heating: HeatingGrid,
    /// O_p averaging window, ms.
    pub t_f: f64,
    /// Q integration window, ms.
    pub q_window: (f64, f64),
    pub unitary_steps: usize,
    pub ode: OdeOptions,
    /// Heating states with an eigenvalue below `-pos_tol` are reported.
    pub pos_tol: f64,
}

impl CycleConfig {
    /// Baseline engine with the given hot-bath cutoff; the cold bath shares
    /// the hot bath's spectral parameters.
    pub fn baseline(omega_c: f64) -> Self {
        let hot = ReservoirParams {
            alpha: 0.6,
            omega_c,
            mu: 0.0,
        };
        CycleConfig {
            system: SystemParams::baseline(),
            hot,
            cold: hot,
            p_plus_cold: 0.261,
            p_plus_hot: 0.99,
            negative_temperature: true,
            heating: HeatingGrid::default(),
            t_f: 1.0,
            q_window: (0.0, 10.0),
            unitary_steps: DEFAULT_UNITARY_STEPS,
            ode: OdeOptions::default(),
            pos_tol: 1e-8,
        }
    }

    pub fn with_omega_c(&self, omega_c: f64) -> Self {
        let mut c = *self;
        c.hot.omega_c = omega_c;
        c
    }

    pub fn with_p_plus_hot(&self, p: f64) -> Self {
        let mut c = *self;
        c.p_plus_hot = p;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_plus_cold > 0.0 && self.p_plus_cold < 0.5) {
            return Err(Error::OutOfRange {
                name: "p_plus_cold",
                value: self.p_plus_cold,
                allowed: "(0, 0.5)",
            });
        }
        let hot_ok = if self.negative_temperature {
            (0.5..1.0).contains(&self.p_plus_hot)
        } else {
            self.p_plus_hot > 0.0 && self.p_plus_hot < 1.0
        };
        if !hot_ok {
            return Err(Error::OutOfRange {
                name: "p_plus_hot",
                value: self.p_plus_hot,
                allowed: if self.negative_temperature {
                    "[0.5, 1) with negative_temperature"
                } else {
                    "(0, 1)"
                },
            });
        }
        if !(self.t_f >= 0.0 && self.t_f <= self.heating.t_max) {
            return Err(Error::OutOfRange {
                name: "t_f",
                value: self.t_f,
                allowed: "[0, t_max]",
            });
        }
        let (q0, q1) = self.q_window;
        if !(q0 >= 0.0 && q1 >= q0 && q1.is_finite()) {
            return Err(Error::InvalidParams(format!("Q window [{q0}, {q1}] is invalid")));
        }
        if !(self.pos_tol >= 0.0) {
            return Err(Error::OutOfRange {
                name: "pos_tol",
                value: self.pos_tol,
                allowed: "[0, inf)",
            });
        }
        if self.unitary_steps == 0 {
            return Err(Error::InvalidParams("unitary_steps must be at least 1".into()));
        }
        self.heating.times()?;
        self.hot_bath()?;
        self.cold_bath()?;
        Ok(())
    }

    pub fn h_cold(&self) -> Result<CMat2> {
        hamiltonian_at(&self.system, StrokePhase::Cold)
    }

    pub fn h_hot(&self) -> Result<CMat2> {
        hamiltonian_at(&self.system, StrokePhase::Hot)
    }

    pub fn epsilon_hot(&self) -> Result<f64> {
        Ok(transition_energy(&self.h_hot()?)?.epsilon)
    }

    pub fn epsilon_cold(&self) -> Result<f64> {
        Ok(transition_energy(&self.h_cold()?)?.epsilon)
    }

    pub fn beta_hot(&self) -> Result<f64> {
        beta_from_population(&self.h_hot()?, self.p_plus_hot)
    }

    pub fn beta_cold(&self) -> Result<f64> {
        beta_from_population(&self.h_cold()?, self.p_plus_cold)
    }

    pub fn hot_bath(&self) -> Result<BathSpec> {
        self.hot.bath(self.beta_hot()?)
    }

    pub fn cold_bath(&self) -> Result<BathSpec> {
        self.cold.bath(self.beta_cold()?)
    }
}

/// A refined local maximum of η(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: f64,
    pub eta: f64,
}

/// The global maximum of η(t) with its near-maximal window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakWindow {
    pub peak: Peak,
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Debug, Clone)]
pub struct CycleResult {
    pub epsilon_hot: f64,
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub w1: f64,
    pub times: Vec<f64>,
    pub energetics: Vec<Energetics>,
    /// Absent when no sample operates as an engine.
    pub eta_max: Option<PeakWindow>,
    /// Interior local maxima of η over engine samples, in time order.
    pub peaks: Vec<Peak>,
    pub eta_sat: Option<f64>,
    pub t_eq: Option<f64>,
    pub o_p: f64,
    pub non_markov: NonMarkovReport,
    pub heating: Trajectory,
    pub diagnostics: Vec<String>,
}

impl CycleResult {
    pub fn no_engine(&self) -> bool {
        self.eta_max.is_none()
    }

    pub fn q(&self) -> f64 {
        self.non_markov.q
    }

    /// η at each sample when the sample operates as an engine.
    pub fn engine_eta(&self) -> Vec<Option<f64>> {
        self.energetics
            .iter()
            .map(|e| if e.valid_engine { e.eta } else { None })
            .collect()
    }
}

/// Vertex of the parabola through three points, clamped to their span.
fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> (f64, f64) {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    // Newton form: y = y0 + d01 (x − x0) + a (x − x0)(x − x1)
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !(a < 0.0) {
        return p1;
    }
    let x = (0.5 * (x0 + x1) - d01 / (2.0 * a)).clamp(x0, x2);
    let y = y0 + (x - x0) * (d01 + a * (x - x1));
    (x, y.max(y1))
}

fn refine(times: &[f64], eta: &[Option<f64>], i: usize) -> Peak {
    if i == 0 || i + 1 >= times.len() {
        return Peak {
            t: times[i],
            eta: eta[i].unwrap_or(f64::NAN),
        };
    }
    match (eta[i - 1], eta[i], eta[i + 1]) {
        (Some(a), Some(b), Some(c)) => {
            let (t, e) = parabola_vertex((times[i - 1], a), (times[i], b), (times[i + 1], c));
            Peak { t, eta: e }
        }
        (_, Some(b), _) => Peak { t: times[i], eta: b },
        _ => Peak {
            t: times[i],
            eta: f64::NAN,
        },
    }
}

/// Interior local maxima of a partially defined series.
pub fn local_peaks(times: &[f64], eta: &[Option<f64>]) -> Vec<Peak> {
    let mut out = Vec::new();
    for i in 1..times.len().saturating_sub(1) {
        if let (Some(a), Some(b), Some(c)) = (eta[i - 1], eta[i], eta[i + 1]) {
            if b > a && b >= c {
                out.push(refine(times, eta, i));
            }
        }
    }
    out
}

/// Global maximum with its connected window `η ≥ η_max − drop`; window
/// edges are placed by linear interpolation between bracketing samples.
pub fn peak_window(times: &[f64], eta: &[Option<f64>], drop: f64) -> Option<PeakWindow> {
    let (imax, _) = eta
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|v| (i, v)))
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        })?;
    let peak = refine(times, eta, imax);
    let thr = peak.eta - drop;
    let crossing = |inside: usize, outside: usize| -> f64 {
        match eta[outside] {
            Some(vo) => {
                let vi = eta[inside].unwrap_or(thr);
                let (ti, to) = (times[inside], times[outside]);
                if vi == vo {
                    ti
                } else {
                    ti + (to - ti) * ((vi - thr) / (vi - vo)).clamp(0.0, 1.0)
                }
            }
            None => times[inside],
        }
    };
    let mut lo = imax;
    while lo > 0 && eta[lo - 1].is_some_and(|v| v >= thr) {
        lo -= 1;
    }
    let t_lo = if lo == 0 { times[0] } else { crossing(lo, lo - 1) };
    let mut hi = imax;
    while hi + 1 < times.len() && eta[hi + 1].is_some_and(|v| v >= thr) {
        hi += 1;
    }
    let t_hi = if hi + 1 == times.len() {
        times[hi]
    } else {
        crossing(hi, hi + 1)
    };
    Some(PeakWindow {
        peak,
        t_lo: t_lo.min(peak.t),
        t_hi: t_hi.max(peak.t),
    })
}

/// Mean of η over the final `window` ms, by the trapezoid rule.
pub fn saturation_value(times: &[f64], eta: &[Option<f64>], window: f64) -> Option<f64> {
    let end = *times.last()?;
    let start = (end - window).max(times[0]);
    let first = times.iter().position(|&t| t >= start - 1e-12)?;
    let mut acc = 0.0;
    let mut span = 0.0;
    for i in first..times.len() - 1 {
        let (a, b) = (eta[i]?, eta[i + 1]?);
        let h = times[i + 1] - times[i];
        acc += 0.5 * h * (a + b);
        span += h;
    }
    if span > 0.0 {
        Some(acc / span)
    } else {
        eta[first]
    }
}

/// Earliest sample time after which every sample stays within `tol` of
/// `eta_sat`.
pub fn equilibration_time(times: &[f64], eta: &[Option<f64>], eta_sat: f64, tol: f64) -> Option<f64> {
    let mut first = None;
    for i in (0..times.len()).rev() {
        match eta[i] {
            Some(v) if (v - eta_sat).abs() < tol => first = Some(i),
            _ => break,
        }
    }
    first.map(|i| times[i])
}

/// Expansion unitary, initial state and expanded state shared by every
/// variant of the cycle.
struct Prelude {
    h_cold: CMat2,
    h_hot: CMat2,
    u: CMat2,
    rho_in: DensityMatrix,
    rho_exp: DensityMatrix,
}

fn prelude(cfg: &CycleConfig) -> Result<Prelude> {
    let h_cold = cfg.h_cold()?;
    let h_hot = cfg.h_hot()?;
    let u = propagate_unitary(&cfg.system, Direction::Expansion, cfg.unitary_steps)?;
    let rho_in = state_from_population(&h_cold, cfg.p_plus_cold)?;
    let rho_exp = rho_in.evolve(&u)?;
    Ok(Prelude {
        h_cold,
        h_hot,
        u,
        rho_in,
        rho_exp,
    })
}

fn close_cycle(pre: &Prelude, rho_heat: &DensityMatrix) -> Result<Energetics> {
    let rho_comp = rho_heat.evolve(&pre.u.adjoint())?;
    cycle_energetics(&pre.rho_in, &pre.rho_exp, rho_heat, &rho_comp, &pre.h_cold, &pre.h_hot)
}

/// Hot-bath rates over `[0, t_end]`.
pub fn hot_rates(cfg: &CycleConfig, t_end: f64, exec: Execution) -> Result<RateTrajectory> {
    RateTrajectory::compute(&cfg.hot_bath()?, cfg.epsilon_hot()?, t_end, None, exec)
}

pub fn run_cycle(cfg: &CycleConfig, exec: Execution) -> Result<CycleResult> {
    cfg.validate()?;
    let pre = prelude(cfg)?;
    let times = cfg.heating.times()?;
    let t_max = *times.last().unwrap_or(&0.0);
    let rates = hot_rates(cfg, t_max.max(cfg.q_window.1), exec)?;
    let a = jump_operator(&pre.h_hot)?;
    let heating = evolve_open(&pre.rho_exp, &pre.h_hot, &rates, &a, &times, cfg.ode)?;
    let energetics = heating
        .states()
        .iter()
        .map(|rho| close_cycle(&pre, rho))
        .collect::<Result<Vec<_>>>()?;

    let eps = cfg.epsilon_hot()?;
    let eta: Vec<Option<f64>> = energetics
        .iter()
        .map(|e| if e.valid_engine { e.eta } else { None })
        .collect();
    let eta_max = peak_window(&times, &eta, PEAK_WINDOW_DROP);
    let peaks = local_peaks(&times, &eta);
    let eta_sat = saturation_value(&times, &eta, SATURATION_WINDOW);
    let t_eq = eta_sat.and_then(|s| equilibration_time(&times, &eta, s, EQUILIBRATION_TOL));
    let o_p = overall_performance(&times, &energetics, cfg.t_f, eps)?;
    let non_markov = NonMarkovReport::new(&rates, cfg.q_window.0, cfg.q_window.1)?;

    let mut diagnostics: Vec<String> = rates.warnings().to_vec();
    let violations = heating.positivity_violations(cfg.pos_tol);
    if let Some(&(t, m)) = violations
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
    {
        diagnostics.push(format!(
            "positivity: {} samples with min eigenvalue below -{:.1e} (lowest {m:.3e} at t = {t} ms)",
            violations.len(),
            cfg.pos_tol
        ));
    }
    if eta_max.is_none() {
        diagnostics.push("no engine operation at any sampled time".into());
    }

    Ok(CycleResult {
        epsilon_hot: eps,
        beta_hot: cfg.beta_hot()?,
        beta_cold: cfg.beta_cold()?,
        w1: energetics[0].w1,
        times,
        energetics,
        eta_max,
        peaks,
        eta_sat,
        t_eq,
        o_p,
        non_markov,
        heating,
        diagnostics,
    })
}

/// Open evolution of `rho_comp` under H_cold and the cold reservoir,
/// sampled on `grid`.
pub fn run_cooling(cfg: &CycleConfig, rho_comp: &DensityMatrix, grid: &[f64], exec: Execution) -> Result<Trajectory> {
    let h = cfg.h_cold()?;
    let a = jump_operator(&h)?;
    let t_end = grid.last().copied().unwrap_or(0.0);
    let rates = if t_end > 0.0 {
        RateTrajectory::compute(&cfg.cold_bath()?, cfg.epsilon_cold()?, t_end, None, exec)?
    } else {
        RateTrajectory::constant(0.0, 0.0, Statistics::Fermionic, 1.0)?
    };
    evolve_open(rho_comp, &h, &rates, &a, grid, cfg.ode)
}

/// The compressed state after heating for exactly `t_tilde` ms.
pub fn compressed_state(cfg: &CycleConfig, t_tilde: f64, exec: Execution) -> Result<DensityMatrix> {
    let pre = prelude(cfg)?;
    let rho_heat = heat_for(cfg, &pre, t_tilde, exec)?;
    rho_heat.evolve(&pre.u.adjoint())
}

fn heat_for(cfg: &CycleConfig, pre: &Prelude, t_tilde: f64, exec: Execution) -> Result<DensityMatrix> {
    if t_tilde == 0.0 {
        return Ok(pre.rho_exp);
    }
    if !(t_tilde > 0.0 && t_tilde.is_finite()) {
        return Err(Error::OutOfRange {
            name: "t_tilde",
            value: t_tilde,
            allowed: "[0, inf)",
        });
    }
    let rates = hot_rates(cfg, t_tilde, exec)?;
    let a = jump_operator(&pre.h_hot)?;
    let traj = evolve_open(&pre.rho_exp, &pre.h_hot, &rates, &a, &[0.0, t_tilde], cfg.ode)?;
    Ok(*traj.final_state())
}

/// Summary of one cutoff in [`sweep_cutoff`].
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSummary {
    pub eta_max: Option<PeakWindow>,
    pub peaks: Vec<Peak>,
    pub eta_sat: Option<f64>,
    pub t_eq: Option<f64>,
    pub o_p: f64,
    pub q: f64,
}

impl From<&CycleResult> for CutoffSummary {
    fn from(r: &CycleResult) -> Self {
        CutoffSummary {
            eta_max: r.eta_max,
            peaks: r.peaks.clone(),
            eta_sat: r.eta_sat,
            t_eq: r.t_eq,
            o_p: r.o_p,
            q: r.q(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffRow {
    pub omega_c: f64,
    pub result: std::result::Result<CutoffSummary, Error>,
}

/// Run the full cycle for each cutoff; a failing point is recorded in its
/// row and the sweep continues.
pub fn sweep_cutoff(cfg: &CycleConfig, omega_c_list: &[f64], exec: Execution) -> Result<Vec<CutoffRow>> {
    if omega_c_list.is_empty() {
        return Err(Error::InvalidParams("omega_c list is empty".into()));
    }
    Ok(exec.map(omega_c_list, |&wc| CutoffRow {
        omega_c: wc,
        result: run_cycle(&cfg.with_omega_c(wc), Execution::Sequential).map(|r| CutoffSummary::from(&r)),
    }))
}

/// Non-Markovianity report of the hot-bath rates at one cutoff.
pub fn cutoff_non_markovianity(cfg: &CycleConfig, omega_c: f64, exec: Execution) -> Result<NonMarkovReport> {
    let c = cfg.with_omega_c(omega_c);
    let (t0, t1) = c.q_window;
    let rates = hot_rates(&c, t1.max(f64::MIN_POSITIVE), exec)?;
    NonMarkovReport::new(&rates, t0, t1)
}

/// Bisect for the cutoff where Q switches from zero (at `markovian`) to
/// positive (at `non_markovian`), to within `resolution`.
pub fn bisect_q_onset(
    cfg: &CycleConfig,
    mut non_markovian: f64,
    mut markovian: f64,
    resolution: f64,
    exec: Execution,
) -> Result<(f64, f64)> {
    let q = |wc| cutoff_non_markovianity(cfg, wc, exec).map(|r| r.q);
    if q(non_markovian)? <= 0.0 || q(markovian)? > 0.0 {
        return Err(Error::InvalidParams(format!(
            "Q does not change sign between omega_c = {non_markovian} and {markovian}"
        )));
    }
    while (markovian - non_markovian).abs() > resolution {
        let mid = 0.5 * (markovian + non_markovian);
        if q(mid)? > 0.0 {
            non_markovian = mid;
        } else {
            markovian = mid;
        }
    }
    Ok((non_markovian, markovian))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRow {
    pub p_plus_hot: f64,
    pub energetics: Energetics,
}

impl PopulationRow {
    pub fn eta(&self) -> Option<f64> {
        self.energetics.eta
    }
    pub fn valid_engine(&self) -> bool {
        self.energetics.valid_engine
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSweep {
    pub rows: Vec<PopulationRow>,
    /// Smallest p⁺_hot on the grid with engine operation.
    pub onset: Option<f64>,
}

impl PopulationSweep {
    fn new(rows: Vec<PopulationRow>) -> Self {
        let onset = rows
            .iter()
            .filter(|r| r.valid_engine())
            .map(|r| r.p_plus_hot)
            .fold(None, |m: Option<f64>, p| Some(m.map_or(p, |m| m.min(p))));
        PopulationSweep { rows, onset }
    }
}

fn check_populations(p_grid: &[f64]) -> Result<()> {
    if p_grid.is_empty() {
        return Err(Error::InvalidParams("p_plus_hot grid is empty".into()));
    }
    for &p in p_grid {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::OutOfRange {
                name: "p_plus_hot",
                value: p,
                allowed: "(0, 1)",
            });
        }
    }
    Ok(())
}

/// Finite-time cycle at a fixed heating time for each hot population.
pub fn sweep_population(cfg: &CycleConfig, p_grid: &[f64], t_tilde: f64, exec: Execution) -> Result<PopulationSweep> {
    check_populations(p_grid)?;
    if !(t_tilde >= 0.0 && t_tilde <= cfg.heating.t_max) {
        return Err(Error::OutOfRange {
            name: "t_tilde",
            value: t_tilde,
            allowed: "[0, t_max]",
        });
    }
    let pre = prelude(cfg)?;
    let rows = exec.map(p_grid, |&p| -> Result<PopulationRow> {
        let mut c = cfg.with_p_plus_hot(p);
        c.negative_temperature = false;
        let rho_heat = heat_for(&c, &pre, t_tilde, Execution::Sequential)?;
        Ok(PopulationRow {
            p_plus_hot: p,
            energetics: close_cycle(&pre, &rho_heat)?,
        })
    });
    Ok(PopulationSweep::new(rows.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Perfect-thermalization cycle for each hot population.
pub fn ift_reference(cfg: &CycleConfig, p_grid: &[f64]) -> Result<PopulationSweep> {
    check_populations(p_grid)?;
    let pre = prelude(cfg)?;
    let rows = p_grid
        .iter()
        .map(|&p| {
            let rho_heat = state_from_population(&pre.h_hot, p)?;
            Ok(PopulationRow {
                p_plus_hot: p,
                energetics: close_cycle(&pre, &rho_heat)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationSweep::new(rows))
}

/// `start, start + step, …` up to `stop` inclusive, built from integer
/// multiples and rounded to 12 decimals.
pub fn population_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(Error::InvalidParams(format!(
            "bad population grid: start {start}, stop {stop}, step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}
