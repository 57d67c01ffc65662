//! Unitary propagation for the driven strokes and time-local open-system
//! evolution for the isochoric strokes.
//!
//! Open evolution works on the real 4-vector `x = (Tr ρ, ⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`,
//! so `ρ = (x₀·I + x·σ)/2`. Every term of the master equation is a fixed
//! 4×4 real matrix in these coordinates and the generator at time `t` is
//! `M_H + Γ(t)·M_down + γ̃(t)·M_up`.

use crate::bath::RateTrajectory;
use crate::error::{Error, Result};
use crate::matcore::{expm_bloch, herm_eig2, CMat2, DensityMatrix, C64};
use crate::model::{expansion_bloch, hamiltonian_at, SystemParams, StrokePhase};

/// Midpoint steps used for the stroke unitaries unless overridden.
pub const DEFAULT_UNITARY_STEPS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Expansion,
    Compression,
}

/// Time-ordered exponential of `h(t)` over `[0, t_end]` as a product of
/// midpoint exponentials, latest step leftmost.
pub fn time_ordered<F>(h: F, t_end: f64, n_steps: usize) -> Result<CMat2>
where
    F: Fn(f64) -> Result<CMat2>,
{
    if n_steps == 0 {
        return Err(Error::InvalidParams("n_steps must be at least 1".into()));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::OutOfRange {
            name: "t_end",
            value: t_end,
            allowed: "[0, inf)",
        });
    }
    let dt = t_end / n_steps as f64;
    let mut u = CMat2::identity();
    for k in 0..n_steps {
        let m = h((k as f64 + 0.5) * dt)?;
        if !m.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: m.hermitian_deviation(),
            });
        }
        u = expm_bloch(m.bloch(), dt) * u;
    }
    Ok(u)
}

/// The expansion unitary `U_{τ,0}`, or its adjoint for compression.
pub fn propagate_unitary(p: &SystemParams, direction: Direction, n_steps: usize) -> Result<CMat2> {
    if n_steps == 0 {
        return Err(Error::InvalidParams("n_steps must be at least 1".into()));
    }
    let dt = p.tau() / n_steps as f64;
    let mut u = CMat2::identity();
    for k in 0..n_steps {
        u = expm_bloch(expansion_bloch(p, (k as f64 + 0.5) * dt), dt) * u;
    }
    Ok(match direction {
        Direction::Expansion => u,
        Direction::Compression => u.adjoint(),
    })
}

/// Deviation of `U†U` from the identity, entrywise max.
pub fn unitarity_defect(u: &CMat2) -> f64 {
    (u.adjoint() * *u - CMat2::identity()).max_abs()
}

/// Adiabaticity parameter ξ(τ) = |⟨Ψ₊^hot|U|Ψ₋^cold⟩|² with the default
/// step count.
pub fn adiabaticity(p: &SystemParams) -> Result<f64> {
    adiabaticity_with(p, DEFAULT_UNITARY_STEPS)
}

/// ξ(τ) computed both ways, `|⟨Ψ₊^hot|U|Ψ₋^cold⟩|²` and
/// `|⟨Ψ₋^hot|U|Ψ₊^cold⟩|²`; the two must agree to 1e-9.
pub fn adiabaticity_with(p: &SystemParams, n_steps: usize) -> Result<f64> {
    let u = propagate_unitary(p, Direction::Expansion, n_steps)?;
    let cold = herm_eig2(&hamiltonian_at(p, StrokePhase::Cold)?)?;
    let hot = herm_eig2(&hamiltonian_at(p, StrokePhase::Hot)?)?;
    let up = u.matrix_element(&hot.v_plus, &cold.v_minus).norm_sqr();
    let down = u.matrix_element(&hot.v_minus, &cold.v_plus).norm_sqr();
    if (up - down).abs() > 1e-9 {
        return Err(Error::Consistency(format!(
            "transition probabilities differ: {up} vs {down}"
        )));
    }
    Ok(0.5 * (up + down))
}

/// Real 4×4 matrix acting on `(Tr ρ, ⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
pub type Super4 = [[f64; 4]; 4];

fn pauli(k: usize) -> CMat2 {
    match k {
        0 => CMat2::identity(),
        1 => CMat2::sigma_x(),
        2 => CMat2::sigma_y(),
        _ => CMat2::sigma_z(),
    }
}

/// Matrix of a Hermiticity-preserving linear map in Bloch coordinates.
fn bloch_matrix<F: Fn(&CMat2) -> CMat2>(map: F) -> Super4 {
    let mut m = [[0.0; 4]; 4];
    for k in 0..4 {
        let image = map(&pauli(k).scale_re(0.5));
        for (j, row) in m.iter_mut().enumerate() {
            row[k] = pauli(j).trace_product(&image).re;
        }
    }
    m
}

/// `L_{X,Y}[ρ] = XρY − ½{YX, ρ}`.
pub fn dissipator(x: &CMat2, y: &CMat2, rho: &CMat2) -> CMat2 {
    let yx = *y * *x;
    *x * *rho * *y - (yx * *rho + *rho * yx).scale_re(0.5)
}

/// Constant pieces of the master-equation generator for a fixed
/// Hamiltonian and jump operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub hamiltonian: Super4,
    /// Coefficient matrix of Γ(t), the `L_{A,A†}` channel.
    pub down: Super4,
    /// Coefficient matrix of γ̃(t), the `L_{A†,A}` channel.
    pub up: Super4,
}

impl Generator {
    pub fn new(h: &CMat2, a: &CMat2) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: h.hermitian_deviation(),
            });
        }
        let ad = a.adjoint();
        let minus_i = C64::new(0.0, -1.0);
        Ok(Generator {
            hamiltonian: bloch_matrix(|r| (*h * *r - *r * *h).scale(minus_i)),
            down: bloch_matrix(|r| dissipator(a, &ad, r)),
            up: bloch_matrix(|r| dissipator(&ad, a, r)),
        })
    }

    /// `M_H + Γ·M_down + γ̃·M_up`.
    pub fn at(&self, big_gamma: f64, gamma_tilde: f64) -> Super4 {
        let mut m = self.hamiltonian;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += big_gamma * self.down[i][j] + gamma_tilde * self.up[i][j];
            }
        }
        m
    }
}

/// The full generator written in the eigenbasis of `h`, acting on
/// `(ρ₊₊, ρ₋₋, ρ₊₋, ρ₋₊)`.
pub fn eigenbasis_superoperator(
    h: &CMat2,
    a: &CMat2,
    big_gamma: f64,
    gamma_tilde: f64,
) -> Result<[[C64; 4]; 4]> {
    let e = herm_eig2(h)?;
    let basis = [
        (e.v_plus, e.v_plus),
        (e.v_minus, e.v_minus),
        (e.v_plus, e.v_minus),
        (e.v_minus, e.v_plus),
    ];
    let ad = a.adjoint();
    let minus_i = C64::new(0.0, -1.0);
    let apply = |r: &CMat2| {
        (*h * *r - *r * *h).scale(minus_i)
            + dissipator(a, &ad, r).scale_re(big_gamma)
            + dissipator(&ad, a, r).scale_re(gamma_tilde)
    };
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for (k, (v, w)) in basis.iter().enumerate() {
        let image = apply(&CMat2::outer(v, w));
        for (j, (x, y)) in basis.iter().enumerate() {
            m[j][k] = image.matrix_element(x, y);
        }
    }
    Ok(m)
}

/// Largest entry coupling the population block to the coherence block of
/// [`eigenbasis_superoperator`].
pub fn decoupling_residual(m: &[[C64; 4]; 4]) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if (i < 2) != (j < 2) {
                worst = worst.max(x.norm());
            }
        }
    }
    worst
}

/// Adaptive-step controls for [`evolve_open`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

/// Sampled density-matrix evolution with per-sample diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
    trace_dev: Vec<f64>,
    min_eig: Vec<f64>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }
    pub fn trace_deviations(&self) -> &[f64] {
        &self.trace_dev
    }
    pub fn min_eigenvalues(&self) -> &[f64] {
        &self.min_eig
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectories hold at least one sample")
    }
    pub fn max_trace_deviation(&self) -> f64 {
        self.trace_dev.iter().copied().fold(0.0, f64::max)
    }
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig.iter().copied().fold(f64::INFINITY, f64::min)
    }
    /// Times at which the smallest eigenvalue dips below `-threshold`.
    pub fn positivity_violations(&self, threshold: f64) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.min_eig)
            .filter(|(_, &m)| m < -threshold)
            .map(|(&t, &m)| (t, m))
            .collect()
    }
}

fn to_vec(rho: &DensityMatrix) -> [f64; 4] {
    let (r0, r) = rho.bloch();
    [r0, r[0], r[1], r[2]]
}

fn mat_vec(m: &Super4, x: &[f64; 4]) -> [f64; 4] {
    let mut y = [0.0; 4];
    for (yi, row) in y.iter_mut().zip(m) {
        *yi = row[0] * x[0] + row[1] * x[1] + row[2] * x[2] + row[3] * x[3];
    }
    y
}

fn axpy(x: &[f64; 4], terms: &[(f64, &[f64; 4])]) -> [f64; 4] {
    let mut y = *x;
    for (c, k) in terms {
        for i in 0..4 {
            y[i] += c * k[i];
        }
    }
    y
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate the master equation with generator `H`, jump operator `a` and
/// the rates in `rates`, sampling the state at each time in `grid`.
pub fn evolve_open(
    rho0: &DensityMatrix,
    h: &CMat2,
    rates: &RateTrajectory,
    a: &CMat2,
    grid: &[f64],
    opts: OdeOptions,
) -> Result<Trajectory> {
    if grid.first() != Some(&0.0) {
        return Err(Error::InvalidGrid("grid must be nonempty and start at t = 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    let t_last = *grid.last().unwrap_or(&0.0);
    if t_last > rates.t_end() * (1.0 + 1e-12) {
        return Err(Error::OutsideGrid {
            t: t_last,
            start: 0.0,
            end: rates.t_end(),
        });
    }
    let gen = Generator::new(h, a)?;
    let rhs = |t: f64, x: &[f64; 4]| {
        let r = rates.at(t);
        mat_vec(&gen.at(r.big_gamma, r.gamma_tilde), x)
    };

    let mut traj = Trajectory {
        times: Vec::with_capacity(grid.len()),
        states: Vec::with_capacity(grid.len()),
        trace_dev: Vec::with_capacity(grid.len()),
        min_eig: Vec::with_capacity(grid.len()),
    };
    let mut x = to_vec(rho0);
    let push = |t: f64, rho: DensityMatrix, traj: &mut Trajectory| {
        traj.times.push(t);
        traj.min_eig.push(rho.min_eigenvalue());
        traj.trace_dev.push((rho.trace() - 1.0).abs());
        traj.states.push(rho);
    };
    let record = |t: f64, x: &[f64; 4], traj: &mut Trajectory| -> Result<()> {
        if (x[0] - 1.0).abs() > 1e-8 {
            return Err(Error::TraceViolation { trace: x[0] });
        }
        let m = CMat2::from_bloch(0.5 * x[0], [0.5 * x[1], 0.5 * x[2], 0.5 * x[3]]);
        push(t, DensityMatrix::from_matrix(m)?, traj);
        Ok(())
    };
    push(0.0, *rho0, &mut traj);

    let mut t = 0.0;
    let mut k1 = rhs(t, &x);
    let scale0 = 1.0 + gen.at(0.0, 0.0).iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let mut h_step = (0.01 / scale0).min(grid.get(1).copied().unwrap_or(1.0));
    let mut steps = 0usize;
    for &target in &grid[1..] {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepSizeUnderflow { t });
            }
            let remaining = target - t;
            let last = h_step >= remaining;
            let hs = if last { remaining } else { h_step };
            if hs <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::StepSizeUnderflow { t });
            }
            let k2 = rhs(t + C2 * hs, &axpy(&x, &[(hs * A21, &k1)]));
            let k3 = rhs(t + C3 * hs, &axpy(&x, &[(hs * A31, &k1), (hs * A32, &k2)]));
            let k4 = rhs(
                t + C4 * hs,
                &axpy(&x, &[(hs * A41, &k1), (hs * A42, &k2), (hs * A43, &k3)]),
            );
            let k5 = rhs(
                t + C5 * hs,
                &axpy(
                    &x,
                    &[(hs * A51, &k1), (hs * A52, &k2), (hs * A53, &k3), (hs * A54, &k4)],
                ),
            );
            let k6 = rhs(
                t + hs,
                &axpy(
                    &x,
                    &[
                        (hs * A61, &k1),
                        (hs * A62, &k2),
                        (hs * A63, &k3),
                        (hs * A64, &k4),
                        (hs * A65, &k5),
                    ],
                ),
            );
            let t_new = if last { target } else { t + hs };
            let x_new = axpy(
                &x,
                &[(hs * B1, &k1), (hs * B3, &k3), (hs * B4, &k4), (hs * B5, &k5), (hs * B6, &k6)],
            );
            let k7 = rhs(t_new, &x_new);
            let mut err = 0.0;
            for i in 0..4 {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.atol + opts.rtol * x[i].abs().max(x_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / 4.0).sqrt();
            if !err.is_finite() {
                return Err(Error::StepSizeUnderflow { t });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = t_new;
                x = x_new;
                k1 = k7;
                if !last {
                    h_step = hs * factor;
                }
            } else {
                h_step = hs * factor.min(1.0);
            }
        }
        record(target, &x, &mut traj)?;
    }
    Ok(traj)
}
