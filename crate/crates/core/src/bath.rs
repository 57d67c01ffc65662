//! Reservoir model: Lorentz-Drude spectral density, thermal occupation, and
//! the second-order time-dependent dissipation/fluctuation coefficients.
//!
//! The time integral inside each coefficient is done analytically,
//!
//! ```text
//! ∫₀ᵗ cos[(ω′ − ε)(t − s)] ds = sin[(ω′ − ε)t] / (ω′ − ε),
//! ```
//!
//! so a coefficient at time `t` is a single oscillatory frequency integral
//! of the spectral envelope against a sinc kernel that narrows as `t` grows.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quad::{integrate_panels, uniform_panels, PanelRule};
use crate::spline::CubicSpline;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Fermionic,
    Bosonic,
}

impl Statistics {
    /// Sign in Γ = 2γ ∓ γ̃: −1 for fermions, +1 for bosons.
    pub fn gamma_sign(self) -> f64 {
        match self {
            Statistics::Fermionic => -1.0,
            Statistics::Bosonic => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    alpha: f64,
    omega_c: f64,
    beta: f64,
    mu: f64,
    statistics: Statistics,
}

impl BathSpec {
    pub fn new(alpha: f64, omega_c: f64, beta: f64, mu: f64, statistics: Statistics) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                allowed: "[0, inf)",
            });
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(Error::OutOfRange {
                name: "omega_c",
                value: omega_c,
                allowed: "(0, inf)",
            });
        }
        if !beta.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParams(format!("beta = {beta}, mu = {mu} must be finite")));
        }
        match statistics {
            Statistics::Bosonic if !(beta > 0.0 && mu <= 0.0) => {
                return Err(Error::InvalidParams(format!(
                    "a bosonic bath needs beta > 0 and mu <= 0 (beta = {beta}, mu = {mu})"
                )))
            }
            Statistics::Fermionic if mu < 0.0 => {
                return Err(Error::OutOfRange {
                    name: "mu",
                    value: mu,
                    allowed: "[0, inf) for a fermionic bath",
                })
            }
            _ => {}
        }
        Ok(BathSpec {
            alpha,
            omega_c,
            beta,
            mu,
            statistics,
        })
    }

    /// Fermionic bath with μ = 0.
    pub fn fermionic(alpha: f64, omega_c: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, omega_c, beta, 0.0, Statistics::Fermionic)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    /// Same bath with a different coupling strength.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.omega_c, self.beta, self.mu, self.statistics)
    }

    #[inline]
    fn density_unchecked(&self, w: f64) -> f64 {
        let wc2 = self.omega_c * self.omega_c;
        self.alpha * w * wc2 / (wc2 + w * w)
    }

    #[inline]
    fn occupation_unchecked(&self, w: f64) -> f64 {
        let x = self.beta * (w - self.mu);
        match self.statistics {
            Statistics::Fermionic => 1.0 / (x.exp() + 1.0),
            Statistics::Bosonic => 1.0 / x.exp_m1(),
        }
    }
}

/// Lorentz-Drude spectral density `J(ω′) = α ω′ ω_c² / (ω_c² + ω′²)`.
pub fn spectral_density(b: &BathSpec, omega_p: f64) -> Result<f64> {
    if !(omega_p >= 0.0) {
        return Err(Error::OutOfRange {
            name: "omega'",
            value: omega_p,
            allowed: "[0, inf)",
        });
    }
    Ok(b.density_unchecked(omega_p))
}

/// Thermal occupation `[exp(β(ω′ − μ)) ± 1]⁻¹` (+ fermions, − bosons).
pub fn occupation(b: &BathSpec, omega_p: f64) -> Result<f64> {
    if b.statistics == Statistics::Bosonic && !(b.beta * (omega_p - b.mu) > 0.0) {
        return Err(Error::BosonicPole { omega: omega_p });
    }
    Ok(b.occupation_unchecked(omega_p))
}

/// Coefficients at one instant, kHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub big_gamma: f64,
}

impl Rates {
    pub fn new(gamma: f64, gamma_tilde: f64, statistics: Statistics) -> Self {
        Rates {
            gamma,
            gamma_tilde,
            big_gamma: 2.0 * gamma + statistics.gamma_sign() * gamma_tilde,
        }
    }
}

/// Quadrature settings for [`rate_coefficients_with`].
#[derive(Debug, Clone, Copy)]
pub struct RateQuadrature {
    /// Absolute tolerance on each coefficient, kHz.
    pub abs_tol: f64,
    /// Multiplier on the default upper frequency limit.
    pub upper_scale: f64,
}

impl Default for RateQuadrature {
    fn default() -> Self {
        RateQuadrature {
            abs_tol: 1e-8,
            upper_scale: 1.0,
        }
    }
}

/// Upper frequency limit of the ω′ integral at time `t`.
pub fn omega_max(b: &BathSpec, epsilon: f64, t: f64) -> f64 {
    let mut w = 10.0 * b.omega_c.max(epsilon);
    if t > 0.0 {
        w = w.max(epsilon + 200.0 / t);
    }
    w
}

/// `sin(x t)/x`, continuous through x = 0.
#[inline]
fn sinc_kernel(x: f64, t: f64) -> f64 {
    let xt = x * t;
    if xt.abs() < 1e-6 {
        t * (1.0 - xt * xt / 6.0)
    } else {
        xt.sin() / x
    }
}

/// Initial panels for the ω′ integral: split at ε, quarter-period panels of
/// the sinc kernel within ten kernel periods of ε, and up to two periods
/// further out, never wider than ω_c/2 inside the Lorentzian body.
fn rate_panels(b: &BathSpec, epsilon: f64, t: f64, upper: f64) -> Vec<(f64, f64)> {
    let period = 2.0 * PI / t;
    let near = 10.0 * period;
    let body = 10.0 * b.omega_c.max(epsilon);
    let fine = 0.25 * period;
    let coarse = 2.0 * period;
    let body_width = 0.5 * b.omega_c;

    let mut cuts = vec![0.0, epsilon, upper];
    for c in [epsilon - near, epsilon + near, body] {
        if c > 0.0 && c < upper && c != epsilon {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut panels = Vec::new();
    for w in cuts.windows(2) {
        let (a, z) = (w[0], w[1]);
        let mid = 0.5 * (a + z);
        let mut width = if (mid - epsilon).abs() < near { fine } else { coarse };
        if mid < body {
            width = width.min(body_width);
        }
        panels.extend(uniform_panels(a, z, width));
    }
    panels
}

/// `(γ(t), γ̃(t), Γ(t))` with the default quadrature settings.
pub fn rate_coefficients(b: &BathSpec, epsilon: f64, t: f64) -> Result<Rates> {
    rate_coefficients_with(b, epsilon, t, RateQuadrature::default())
}

pub fn rate_coefficients_with(
    b: &BathSpec,
    epsilon: f64,
    t: f64,
    q: RateQuadrature,
) -> Result<Rates> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            allowed: "[0, inf)",
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            allowed: "(0, inf)",
        });
    }
    if t == 0.0 || b.alpha == 0.0 {
        return Ok(Rates::new(0.0, 0.0, b.statistics));
    }
    let upper = omega_max(b, epsilon, t) * q.upper_scale;
    let inv_2pi = 0.5 / PI;
    let integrand = |w: f64| {
        let k = sinc_kernel(w - epsilon, t) * b.density_unchecked(w) * inv_2pi;
        [k, 2.0 * k * b.occupation_unchecked(w)]
    };
    let rule = PanelRule {
        abs_tol: q.abs_tol,
        max_depth: 40,
    };
    let r = integrate_panels(&integrand, rate_panels(b, epsilon, t, upper), upper, rule);
    if !r.converged || !r.value.iter().all(|v| v.is_finite()) {
        return Err(Error::QuadratureNonConvergence {
            t,
            estimate: r.error_estimate,
        });
    }
    let tail = sine_tail(
        |w| {
            let e = b.density_unchecked(w) * inv_2pi / (w - epsilon);
            [e, 2.0 * e * b.occupation_unchecked(w)]
        },
        upper,
        epsilon,
        t,
    );
    Ok(Rates::new(r.value[0] + tail[0], r.value[1] + tail[1], b.statistics))
}

/// Asymptotic value of `∫_W^∞ env(ω) sin((ω − ε)t) dω` for a smooth, slowly
/// decaying envelope, from three rounds of integration by parts:
/// `env cos θ / t − env′ sin θ / t² − env″ cos θ / t³` at `W`, `θ = (W − ε)t`.
fn sine_tail<F>(env: F, w: f64, epsilon: f64, t: f64) -> [f64; 2]
where
    F: Fn(f64) -> [f64; 2],
{
    let theta = (w - epsilon) * t;
    let (s, c) = theta.sin_cos();
    let h = 1e-3 * w;
    let (e0, ep, em) = (env(w), env(w + h), env(w - h));
    let mut out = [0.0; 2];
    for k in 0..2 {
        let d1 = (ep[k] - em[k]) / (2.0 * h);
        let d2 = (ep[k] - 2.0 * e0[k] + em[k]) / (h * h);
        out[k] = e0[k] * c / t - d1 * s / (t * t) - d2 * c / (t * t * t);
    }
    out
}

/// Change in the coefficients when the upper frequency limit is doubled.
pub fn upper_limit_sensitivity(b: &BathSpec, epsilon: f64, t: f64) -> Result<f64> {
    let base = rate_coefficients(b, epsilon, t)?;
    let wide = rate_coefficients_with(
        b,
        epsilon,
        t,
        RateQuadrature {
            upper_scale: 2.0,
            ..Default::default()
        },
    )?;
    Ok((base.gamma - wide.gamma)
        .abs()
        .max((base.gamma_tilde - wide.gamma_tilde).abs()))
}

/// Long-time constants `(J(ε)/2, J(ε)·n̄(ε))`.
pub fn markov_limits(b: &BathSpec, epsilon: f64) -> Result<(f64, f64)> {
    let j = spectral_density(b, epsilon)?;
    if j == 0.0 {
        return Ok((0.0, 0.0));
    }
    Ok((0.5 * j, j * occupation(b, epsilon)?))
}

/// Coefficients sampled on a time grid, with cubic interpolation between
/// samples. Immutable once built.
#[derive(Debug, Clone)]
pub struct RateTrajectory {
    statistics: Statistics,
    times: Vec<f64>,
    gamma: CubicSpline,
    gamma_tilde: CubicSpline,
    warnings: Vec<String>,
}

impl RateTrajectory {
    /// Grid spacing bound `min(0.2/ε, 0.05/ω_c)` ms.
    pub fn default_spacing(b: &BathSpec, epsilon: f64) -> f64 {
        (0.2 / epsilon).min(0.05 / b.omega_c)
    }

    /// Evaluate the coefficients on a uniform grid over `[0, t_end]` with
    /// spacing at most `max_spacing` (or the default bound).
    pub fn compute(
        b: &BathSpec,
        epsilon: f64,
        t_end: f64,
        max_spacing: Option<f64>,
        exec: Execution,
    ) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::OutOfRange {
                name: "t_end",
                value: t_end,
                allowed: "(0, inf)",
            });
        }
        let h_max = max_spacing.unwrap_or_else(|| Self::default_spacing(b, epsilon));
        let n = (t_end / h_max).ceil().max(2.0) as usize;
        let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        let samples = exec.map(&times, |&t| rate_coefficients(b, epsilon, t));
        let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
        let mut traj = Self::from_samples(
            times,
            samples.iter().map(|r| r.gamma).collect(),
            samples.iter().map(|r| r.gamma_tilde).collect(),
            b.statistics,
        )?;
        let max_big = samples.iter().map(|r| r.big_gamma.abs()).fold(0.0, f64::max);
        if max_big >= epsilon / 5.0 {
            traj.warnings.push(format!(
                "weak-coupling check: max |Gamma| = {max_big:.4} kHz is not small against epsilon = {epsilon:.4}"
            ));
        }
        Ok(traj)
    }

    pub fn from_samples(
        times: Vec<f64>,
        gamma: Vec<f64>,
        gamma_tilde: Vec<f64>,
        statistics: Statistics,
    ) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(Error::InvalidGrid("rate grid must start at t = 0".into()));
        }
        let mut warnings = Vec::new();
        if let Some((t, v)) = times
            .iter()
            .zip(&gamma_tilde)
            .find(|(_, &v)| v < -1e-12)
        {
            warnings.push(format!("gamma_tilde = {v:.3e} < 0 at t = {t} ms"));
        }
        Ok(RateTrajectory {
            statistics,
            gamma: CubicSpline::new(times.clone(), gamma)?,
            gamma_tilde: CubicSpline::new(times.clone(), gamma_tilde)?,
            times,
            warnings,
        })
    }

    /// Time-independent coefficients over `[0, t_end]`.
    pub fn constant(gamma: f64, gamma_tilde: f64, statistics: Statistics, t_end: f64) -> Result<Self> {
        let times = vec![0.0, 0.5 * t_end, t_end];
        Self::from_samples(times, vec![gamma; 3], vec![gamma_tilde; 3], statistics)
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("non-empty grid")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample `i` of the grid.
    pub fn sample(&self, i: usize) -> Rates {
        Rates::new(
            self.gamma.values()[i],
            self.gamma_tilde.values()[i],
            self.statistics,
        )
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, Rates)> + '_ {
        (0..self.len()).map(move |i| (self.times[i], self.sample(i)))
    }

    /// Interpolated coefficients at `t` (clamped to the grid).
    pub fn at(&self, t: f64) -> Rates {
        Rates::new(self.gamma.eval(t), self.gamma_tilde.eval(t), self.statistics)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}
