//! Stroke Hamiltonians of the driven spin-½ working substance and the
//! population-parameterised thermal states.
//!
//! Units: ħ = k_B = 1, time in ms, `nu` in kHz (cycles/ms), energies and
//! angular frequencies in rad/ms.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matcore::{herm_eig2, CMat2, DensityMatrix, Eigen2};

/// Driving protocol parameters. `omega` and `omega_tilde` are always derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    nu_cold: f64,
    nu_hot: f64,
    tau: f64,
    g: f64,
}

impl SystemParams {
    pub fn new(nu_cold: f64, nu_hot: f64, tau: f64, g: f64) -> Result<Self> {
        if !(nu_cold > 0.0 && nu_hot > nu_cold && nu_hot.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need nu_hot > nu_cold > 0, got nu_cold = {nu_cold}, nu_hot = {nu_hot}"
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::OutOfRange {
                name: "tau",
                value: tau,
                allowed: "(0, inf)",
            });
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::OutOfRange {
                name: "g",
                value: g,
                allowed: "[0, inf)",
            });
        }
        Ok(SystemParams {
            nu_cold,
            nu_hot,
            tau,
            g,
        })
    }

    /// Construct without the `nu_hot > nu_cold` ordering check, for
    /// constant-gap reference protocols.
    pub fn new_unordered(nu_cold: f64, nu_hot: f64, tau: f64, g: f64) -> Result<Self> {
        if !(nu_cold >= 0.0 && nu_hot >= 0.0 && tau > 0.0 && g >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "nu_cold = {nu_cold}, nu_hot = {nu_hot}, tau = {tau}, g = {g}"
            )));
        }
        Ok(SystemParams {
            nu_cold,
            nu_hot,
            tau,
            g,
        })
    }

    /// The parameter set used throughout the reference study:
    /// 2.0 kHz → 3.6 kHz in 100 μs with g = 0.2.
    pub fn baseline() -> Self {
        SystemParams {
            nu_cold: 2.0,
            nu_hot: 3.6,
            tau: 0.1,
            g: 0.2,
        }
    }

    pub fn nu_cold(&self) -> f64 {
        self.nu_cold
    }
    pub fn nu_hot(&self) -> f64 {
        self.nu_hot
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Field rotation rate π/(2τ), rad/ms.
    pub fn omega(&self) -> f64 {
        PI / (2.0 * self.tau)
    }

    /// Longitudinal field strength g·ω, rad/ms.
    pub fn omega_tilde(&self) -> f64 {
        self.g * self.omega()
    }

    /// Linear frequency ramp ν(t).
    pub fn nu_at(&self, t: f64) -> f64 {
        let s = t / self.tau;
        self.nu_cold * (1.0 - s) + self.nu_hot * s
    }

    /// Bound on ‖dH_exp/dt‖_max, used for continuity checks.
    pub fn hamiltonian_lipschitz(&self) -> f64 {
        let dnu = (self.nu_hot - self.nu_cold).abs() / self.tau;
        let numax = self.nu_cold.max(self.nu_hot);
        PI * (dnu + numax * self.omega())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrokePhase {
    Cold,
    Hot,
    Expansion(f64),
    Compression(f64),
}

/// Bloch coefficients of the expansion Hamiltonian at time `t`.
pub(crate) fn expansion_bloch(p: &SystemParams, t: f64) -> (f64, [f64; 3]) {
    let nu = p.nu_at(t);
    let (s, c) = (p.omega() * t).sin_cos();
    (0.0, [-PI * nu * c, -PI * nu * s, 0.5 * p.omega_tilde()])
}

pub fn hamiltonian_at(p: &SystemParams, phase: StrokePhase) -> Result<CMat2> {
    let check = |t: f64| {
        if (0.0..=p.tau).contains(&t) {
            Ok(t)
        } else {
            Err(Error::OutOfRange {
                name: "t",
                value: t,
                allowed: "[0, tau]",
            })
        }
    };
    let half_wt = 0.5 * p.omega_tilde();
    let h = match phase {
        StrokePhase::Cold => CMat2::from_bloch(0.0, [-PI * p.nu_cold, 0.0, half_wt]),
        StrokePhase::Hot => CMat2::from_bloch(0.0, [0.0, -PI * p.nu_hot, half_wt]),
        StrokePhase::Expansion(t) => {
            let (c0, c) = expansion_bloch(p, check(t)?);
            CMat2::from_bloch(c0, c)
        }
        StrokePhase::Compression(t) => {
            let (c0, c) = expansion_bloch(p, p.tau - check(t)?);
            -CMat2::from_bloch(c0, c)
        }
    };
    Ok(h)
}

/// The single allowed transition of a non-degenerate two-level Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    /// ε = e₊ − e₋ > 0, rad/ms.
    pub epsilon: f64,
    pub eigen: Eigen2,
}

pub fn transition_energy(h: &CMat2) -> Result<Transition> {
    let eigen = herm_eig2(h)?;
    if eigen.degenerate {
        return Err(Error::Degenerate { gap: eigen.gap() });
    }
    Ok(Transition {
        epsilon: eigen.gap(),
        eigen,
    })
}

/// Lowering jump operator `A(ε) = |−⟩⟨−|σx|+⟩⟨+|` of the σx coupling.
pub fn jump_operator(h: &CMat2) -> Result<CMat2> {
    let tr = transition_energy(h)?;
    let Eigen2 { v_minus, v_plus, .. } = tr.eigen;
    let amp = CMat2::sigma_x().matrix_element(&v_minus, &v_plus);
    Ok(CMat2::outer(&v_minus, &v_plus).scale(amp))
}

/// `ρ = p₊|Ψ₊⟩⟨Ψ₊| + (1 − p₊)|Ψ₋⟩⟨Ψ₋|` in the eigenbasis of `h`.
pub fn state_from_population(h: &CMat2, p_plus: f64) -> Result<DensityMatrix> {
    if !(0.0..1.0).contains(&p_plus) {
        return Err(Error::OutOfRange {
            name: "p_plus",
            value: p_plus,
            allowed: "[0, 1)",
        });
    }
    let tr = transition_energy(h)?;
    let m = tr.eigen.projector_plus().scale_re(p_plus)
        + tr.eigen.projector_minus().scale_re(1.0 - p_plus);
    DensityMatrix::from_matrix((m + m.adjoint()).scale_re(0.5))
}

/// Local inverse temperature `ln((1 − p₊)/p₊)/ε` (ms/rad); negative for
/// population inversion.
pub fn beta_from_population(h: &CMat2, p_plus: f64) -> Result<f64> {
    if p_plus == 0.0 || p_plus == 1.0 {
        return Err(Error::InfiniteBeta(p_plus));
    }
    if !(0.0..1.0).contains(&p_plus) {
        return Err(Error::OutOfRange {
            name: "p_plus",
            value: p_plus,
            allowed: "(0, 1)",
        });
    }
    let eps = transition_energy(h)?.epsilon;
    Ok(((1.0 - p_plus) / p_plus).ln() / eps)
}
