//! Non-Markovianity witness and quantifier, plus the work/heat/efficiency
//! bookkeeping of one cycle.

use crate::bath::RateTrajectory;
use crate::error::{Error, Result};
use crate::matcore::{CMat2, DensityMatrix};

/// Witness values at or below this are treated as exactly zero.
pub const WITNESS_FLOOR: f64 = 1e-12;

/// `f = max(0, −Γ) + max(0, −γ̃)`, floored at [`WITNESS_FLOOR`].
pub fn witness_value(big_gamma: f64, gamma_tilde: f64) -> f64 {
    let f = (-big_gamma).max(0.0) + (-gamma_tilde).max(0.0);
    if f <= WITNESS_FLOOR {
        0.0
    } else {
        f
    }
}

/// Canonical rates Λ₂ = Γ, Λ₃ = γ̃ and the witness on the rate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub times: Vec<f64>,
    pub lambda_big_gamma: Vec<f64>,
    pub lambda_gamma_tilde: Vec<f64>,
    pub f: Vec<f64>,
}

pub fn witness_f(rates: &RateTrajectory) -> Witness {
    let mut w = Witness {
        times: Vec::with_capacity(rates.len()),
        lambda_big_gamma: Vec::with_capacity(rates.len()),
        lambda_gamma_tilde: Vec::with_capacity(rates.len()),
        f: Vec::with_capacity(rates.len()),
    };
    for (t, r) in rates.samples() {
        w.times.push(t);
        w.lambda_big_gamma.push(r.big_gamma);
        w.lambda_gamma_tilde.push(r.gamma_tilde);
        w.f.push(witness_value(r.big_gamma, r.gamma_tilde));
    }
    w
}

fn lerp(times: &[f64], values: &[f64], i: usize, t: f64) -> f64 {
    let (t0, t1) = (times[i], times[i + 1]);
    let s = (t - t0) / (t1 - t0);
    values[i] + s * (values[i + 1] - values[i])
}

/// Integral of the piecewise-linear interpolant of `(times, values)` over
/// `[t0, t1]`. On grid-aligned windows this is the trapezoid rule, and it
/// is additive over adjacent windows.
pub fn integrate_linear(times: &[f64], values: &[f64], t0: f64, t1: f64) -> Result<f64> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::InvalidGrid("times and values must be nonempty and equal length".into()));
    }
    let (start, end) = (times[0], times[times.len() - 1]);
    if !(t0 <= t1) {
        return Err(Error::InvalidParams(format!("window [{t0}, {t1}] is reversed")));
    }
    for t in [t0, t1] {
        if t < start || t > end {
            return Err(Error::OutsideGrid { t, start, end });
        }
    }
    let mut total = 0.0;
    for i in 0..times.len().saturating_sub(1) {
        let (a, b) = (times[i].max(t0), times[i + 1].min(t1));
        if b <= a {
            continue;
        }
        let fa = lerp(times, values, i, a);
        let fb = lerp(times, values, i, b);
        total += 0.5 * (b - a) * (fa + fb);
    }
    Ok(total)
}

/// `Q(t0, t1) = ∫ f(s) ds`, trapezoid on the sample grid.
pub fn quantifier_q(w: &Witness, t0: f64, t1: f64) -> Result<f64> {
    integrate_linear(&w.times, &w.f, t0, t1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonMarkovReport {
    pub witness: Witness,
    pub window: (f64, f64),
    pub q: f64,
}

impl NonMarkovReport {
    pub fn new(rates: &RateTrajectory, t0: f64, t1: f64) -> Result<Self> {
        let witness = witness_f(rates);
        let q = quantifier_q(&witness, t0, t1)?;
        Ok(NonMarkovReport {
            witness,
            window: (t0, t1),
            q,
        })
    }

    pub fn is_markovian(&self) -> bool {
        self.q == 0.0
    }
}

/// Work, heat and efficiency of one cycle closed at a given heating time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energetics {
    pub w1: f64,
    pub w2: f64,
    pub w: f64,
    pub q_hot: f64,
    /// `−W/Q_hot`, absent when the heat intake vanishes.
    pub eta: Option<f64>,
    pub valid_engine: bool,
}

pub fn cycle_energetics(
    rho_in: &DensityMatrix,
    rho_exp: &DensityMatrix,
    rho_heat: &DensityMatrix,
    rho_comp: &DensityMatrix,
    h_cold: &CMat2,
    h_hot: &CMat2,
) -> Result<Energetics> {
    for h in [h_cold, h_hot] {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: h.hermitian_deviation(),
            });
        }
    }
    let e_heat = rho_heat.expectation(h_hot);
    let e_exp = rho_exp.expectation(h_hot);
    let w1 = e_exp - rho_in.expectation(h_cold);
    let w2 = rho_comp.expectation(h_cold) - e_heat;
    let q_hot = e_heat - e_exp;
    let w = w1 + w2;
    let scale = h_hot.max_abs().max(h_cold.max_abs()).max(1.0);
    let eta = if q_hot.abs() <= 64.0 * f64::EPSILON * scale {
        None
    } else {
        Some(-w / q_hot)
    };
    Ok(Energetics {
        w1,
        w2,
        w,
        q_hot,
        eta,
        valid_engine: w < 0.0 && q_hot > 0.0,
    })
}

/// Heat released to the cold bath while relaxing from `rho_comp` to
/// `rho_final`.
pub fn cooling_heat(rho_comp: &DensityMatrix, rho_final: &DensityMatrix, h_cold: &CMat2) -> f64 {
    rho_final.expectation(h_cold) - rho_comp.expectation(h_cold)
}

/// Samples with `|Q_hot|` below this multiple of ε score η = 0 in O_p.
pub const OP_HEAT_FLOOR: f64 = 1e-9;

/// Integrand value of O_p for one sample.
pub fn op_score(e: &Energetics, epsilon: f64) -> f64 {
    if e.q_hot.abs() < OP_HEAT_FLOOR * epsilon {
        return 0.0;
    }
    match e.eta {
        Some(v) if v.is_finite() => v,
        _ => 0.0,
    }
}

/// `O_p = (1/t_f) ∫₀^{t_f} η(t) dt` with the scoring of [`op_score`].
pub fn overall_performance(
    times: &[f64],
    samples: &[Energetics],
    t_f: f64,
    epsilon: f64,
) -> Result<f64> {
    if times.len() != samples.len() || times.is_empty() {
        return Err(Error::InvalidGrid("times and samples must be nonempty and equal length".into()));
    }
    if !(t_f >= 0.0) {
        return Err(Error::OutOfRange {
            name: "t_f",
            value: t_f,
            allowed: "[0, inf)",
        });
    }
    let scores: Vec<f64> = samples.iter().map(|e| op_score(e, epsilon)).collect();
    if t_f == 0.0 {
        return Ok(scores[0]);
    }
    Ok(integrate_linear(times, &scores, times[0], t_f)? / t_f)
}
