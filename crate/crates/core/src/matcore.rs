//! Dense 2×2 complex linear algebra for a single spin-½.
//!
//! Everything here goes through the Bloch decomposition `M = c0·I + c·σ`,
//! which gives closed forms for the spectrum and for `exp(-i s M)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Entrywise tolerance for accepting a matrix as Hermitian, relative to
/// `max(1, max|m_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative gap below which a Hermitian matrix is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat2(pub [[C64; 2]; 2]);

/// A column 2-vector.
pub type CVec2 = [C64; 2];

impl CMat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        CMat2([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        CMat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        CMat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn sigma_x() -> Self {
        CMat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn sigma_y() -> Self {
        CMat2([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]])
    }

    pub const fn sigma_z() -> Self {
        CMat2([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    /// `c0·I + cx·σx + cy·σy + cz·σz` for real coefficients.
    pub fn from_bloch(c0: f64, c: [f64; 3]) -> Self {
        CMat2([
            [C64::new(c0 + c[2], 0.0), C64::new(c[0], -c[1])],
            [C64::new(c[0], c[1]), C64::new(c0 - c[2], 0.0)],
        ])
    }

    /// Real Bloch coefficients `(c0, [cx, cy, cz])` of the Hermitian part.
    pub fn bloch(&self) -> (f64, [f64; 3]) {
        let m = &self.0;
        let c0 = 0.5 * (m[0][0].re + m[1][1].re);
        let cz = 0.5 * (m[0][0].re - m[1][1].re);
        // Average the two off-diagonal entries so tiny anti-Hermitian noise cancels.
        let off = 0.5 * (m[1][0] + m[0][1].conj());
        (c0, [off.re, off.im, cz])
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &CVec2, w: &CVec2) -> Self {
        CMat2([
            [v[0] * w[0].conj(), v[0] * w[1].conj()],
            [v[1] * w[0].conj(), v[1] * w[1].conj()],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        CMat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        CMat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn apply(&self, v: &CVec2) -> CVec2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// `⟨v|M|w⟩`.
    pub fn matrix_element(&self, v: &CVec2, w: &CVec2) -> C64 {
        let mw = self.apply(w);
        v[0].conj() * mw[0] + v[1].conj() * mw[1]
    }

    /// `M·X·M†`.
    pub fn conjugate(&self, x: &CMat2) -> CMat2 {
        *self * *x * self.adjoint()
    }

    /// `Tr[self · other]`.
    pub fn trace_product(&self, other: &CMat2) -> C64 {
        let a = &self.0;
        let b = &other.0;
        a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> f64 {
        let m = &self.0;
        m[0][0]
            .im
            .abs()
            .max(m[1][1].im.abs())
            .max((m[0][1] - m[1][0].conj()).norm())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL * self.max_abs().max(1.0)
    }

    /// Squared Hilbert-Schmidt norm `Tr[M†M]`.
    pub fn hs_norm_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, rhs: CMat2) -> CMat2 {
        let (a, b) = (&self.0, &rhs.0);
        CMat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, rhs: CMat2) -> CMat2 {
        self + (-rhs)
    }
}

impl Neg for CMat2 {
    type Output = CMat2;
    fn neg(self) -> CMat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, rhs: CMat2) -> CMat2 {
        let (a, b) = (&self.0, &rhs.0);
        CMat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Spectrum of a Hermitian 2×2 matrix, ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2 {
    pub e_minus: f64,
    pub e_plus: f64,
    pub v_minus: CVec2,
    pub v_plus: CVec2,
    pub degenerate: bool,
}

impl Eigen2 {
    pub fn gap(&self) -> f64 {
        self.e_plus - self.e_minus
    }

    pub fn projector_plus(&self) -> CMat2 {
        CMat2::outer(&self.v_plus, &self.v_plus)
    }

    pub fn projector_minus(&self) -> CMat2 {
        CMat2::outer(&self.v_minus, &self.v_minus)
    }
}

/// Closed-form eigendecomposition of a Hermitian 2×2 matrix.
pub fn herm_eig2(m: &CMat2) -> Result<Eigen2> {
    if !m.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: m.hermitian_deviation(),
        });
    }
    let (c0, [cx, cy, cz]) = m.bloch();
    let r = (cx * cx + cy * cy + cz * cz).sqrt();
    let e_minus = c0 - r;
    let e_plus = c0 + r;
    let degenerate = (e_plus - e_minus) < DEGENERACY_TOL * e_plus.abs().max(1.0);
    if degenerate {
        return Ok(Eigen2 {
            e_minus,
            e_plus,
            v_minus: [ZERO, ONE],
            v_plus: [ONE, ZERO],
            degenerate,
        });
    }
    // Pick the better-conditioned of the two equivalent forms of the
    // upper-eigenvalue vector; the lower one is its orthogonal complement.
    let v: CVec2 = if cz >= 0.0 {
        [C64::new(r + cz, 0.0), C64::new(cx, cy)]
    } else {
        [C64::new(cx, -cy), C64::new(r - cz, 0.0)]
    };
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v_plus = [v[0] / norm, v[1] / norm];
    let v_minus = [-v_plus[1].conj(), v_plus[0].conj()];
    Ok(Eigen2 {
        e_minus,
        e_plus,
        v_minus,
        v_plus,
        degenerate,
    })
}

/// `exp(-i·s·M)` for Hermitian `M`.
pub fn expm_aherm(m: &CMat2, s: f64) -> Result<CMat2> {
    if !m.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: m.hermitian_deviation(),
        });
    }
    if !s.is_finite() {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            allowed: "finite reals",
        });
    }
    Ok(expm_bloch(m.bloch(), s))
}

/// Unchecked kernel of [`expm_aherm`] on Bloch coefficients.
pub(crate) fn expm_bloch((c0, c): (f64, [f64; 3]), s: f64) -> CMat2 {
    let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let theta = s * r;
    let cos = theta.cos();
    // sin(s r)/r without dividing by zero
    let sinc = if theta.abs() < 1e-8 {
        s * (1.0 - theta * theta / 6.0)
    } else {
        theta.sin() / r
    };
    let phase = C64::from_polar(1.0, -s * c0);
    let a = C64::new(cos, -sinc * c[2]);
    let d = C64::new(cos, sinc * c[2]);
    // -i·sinc·(cx σx + cy σy) off-diagonals
    let b = C64::new(-sinc * c[1], -sinc * c[0]);
    let cc = C64::new(sinc * c[1], -sinc * c[0]);
    CMat2::new(a, b, cc, d).scale(phase)
}

/// Default tolerance on negative eigenvalues before a state is reported as
/// non-positive.
pub const DEFAULT_POS_TOL: f64 = 1e-8;

const TRACE_TOL: f64 = 1e-10;
const STATE_HERMITIAN_TOL: f64 = 1e-12;

/// A unit-trace Hermitian 2×2 matrix.
///
/// Positivity is not enforced at construction: time-local generators with
/// negative rates can push states slightly outside the physical set, so the
/// minimum eigenvalue is reported instead via [`DensityMatrix::min_eigenvalue`]
/// and [`DensityMatrix::check_positive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(CMat2);

impl DensityMatrix {
    pub fn from_matrix(m: CMat2) -> Result<Self> {
        let dev = m.hermitian_deviation();
        if dev > STATE_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceViolation { trace: tr });
        }
        Ok(DensityMatrix(m))
    }

    /// From a (trace, Bloch vector) pair: `ρ = (r0·I + r·σ)/2`.
    pub fn from_bloch(r0: f64, r: [f64; 3]) -> Result<Self> {
        Self::from_matrix(CMat2::from_bloch(0.5 * r0, [0.5 * r[0], 0.5 * r[1], 0.5 * r[2]]))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(CMat2::identity().scale_re(0.5))
    }

    pub fn matrix(&self) -> &CMat2 {
        &self.0
    }

    /// `(Tr ρ, ⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
    pub fn bloch(&self) -> (f64, [f64; 3]) {
        let (c0, c) = self.0.bloch();
        (2.0 * c0, [2.0 * c[0], 2.0 * c[1], 2.0 * c[2]])
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (c0, c) = self.0.bloch();
        c0 - (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
    }

    pub fn check_positive(&self, pos_tol: f64) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -pos_tol {
            Err(Error::NotPositive {
                min_eigenvalue: min,
                tolerance: pos_tol,
            })
        } else {
            Ok(())
        }
    }

    /// `Tr[ρ O]` for Hermitian `O`.
    pub fn expectation(&self, op: &CMat2) -> f64 {
        self.0.trace_product(op).re
    }

    /// `⟨v|ρ|v⟩`.
    pub fn population(&self, v: &CVec2) -> f64 {
        self.0.matrix_element(v, v).re
    }

    /// `U ρ U†`, re-validated.
    pub fn evolve(&self, u: &CMat2) -> Result<Self> {
        let m = u.conjugate(&self.0);
        // Re-symmetrise: products of unitaries leave ~1e-16 anti-Hermitian noise.
        let m = (m + m.adjoint()).scale_re(0.5);
        Self::from_matrix(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMat2, b: &CMat2, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn pauli_spectra() {
        let e = herm_eig2(&CMat2::sigma_z()).unwrap();
        assert_eq!((e.e_minus, e.e_plus), (-1.0, 1.0));
        assert!((e.v_minus[1].norm() - 1.0).abs() < 1e-15);
        assert!((e.v_plus[0].norm() - 1.0).abs() < 1e-15);
        let e = herm_eig2(&CMat2::sigma_x()).unwrap();
        assert!((e.e_minus + 1.0).abs() < 1e-15 && (e.e_plus - 1.0).abs() < 1e-15);
        let e = herm_eig2(&CMat2::sigma_y()).unwrap();
        assert!((e.e_minus + 1.0).abs() < 1e-15 && (e.e_plus - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hot_hamiltonian_levels() {
        // -π·3.6 σy + (π/2) σz: levels ±π·sqrt(3.6² + 0.5²)
        let h = CMat2::from_bloch(0.0, [0.0, -std::f64::consts::PI * 3.6, std::f64::consts::FRAC_PI_2]);
        let e = herm_eig2(&h).unwrap();
        let expected = std::f64::consts::PI * (3.6f64 * 3.6 + 0.25).sqrt();
        assert!((e.e_plus - expected).abs() < 1e-12);
        assert!((e.e_minus + expected).abs() < 1e-12);
        assert!((expected / std::f64::consts::PI - 3.63456).abs() < 1e-5);
    }

    #[test]
    fn degenerate_is_flagged() {
        let e = herm_eig2(&CMat2::identity().scale_re(3.0)).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.e_minus, e.e_plus);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMat2::new(ONE, ONE, ZERO, ONE);
        assert!(matches!(herm_eig2(&m), Err(Error::NotHermitian { .. })));
        assert!(expm_aherm(&m, 1.0).is_err());
    }

    #[test]
    fn expm_examples() {
        let u = expm_aherm(&CMat2::sigma_x(), std::f64::consts::FRAC_PI_2).unwrap();
        assert!(close(&u, &CMat2::sigma_x().scale(-I), 1e-15));
        let u = expm_aherm(&CMat2::from_bloch(0.3, [1.0, -2.0, 0.5]), 0.0).unwrap();
        assert!(close(&u, &CMat2::identity(), 0.0));
        let theta = 0.731;
        let u = expm_aherm(&CMat2::sigma_z(), theta).unwrap();
        let want = CMat2::new(C64::from_polar(1.0, -theta), ZERO, ZERO, C64::from_polar(1.0, theta));
        assert!(close(&u, &want, 1e-15));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::from_matrix(CMat2::identity()).is_err());
        let rho = DensityMatrix::from_bloch(1.0, [0.0, 0.0, 1.2]).unwrap();
        assert!(rho.min_eigenvalue() < -0.09);
        assert!(matches!(
            rho.check_positive(DEFAULT_POS_TOL),
            Err(Error::NotPositive { .. })
        ));
        assert!(DensityMatrix::maximally_mixed().check_positive(0.0).is_ok());
    }
}
