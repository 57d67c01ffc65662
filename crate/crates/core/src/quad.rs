//! Adaptive panel Gauss-Legendre quadrature for two-component integrands.
//!
//! Each panel is accepted when the n-point rule on the whole panel agrees
//! with the sum over its two halves; otherwise the halves are refined
//! recursively. The per-panel tolerance is the global absolute tolerance
//! scaled by the panel's share of the total length.

use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn order16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Apply the rule on [a, b].
    pub fn integrate<F, const K: usize>(&self, f: &F, a: f64, b: f64) -> [f64; K]
    where
        F: Fn(f64) -> [f64; K],
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = [0.0; K];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            for k in 0..K {
                acc[k] += w * v[k];
            }
        }
        acc.map(|s| s * half)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const K: usize> {
    pub value: [f64; K],
    /// Sum of the accepted per-panel |whole − halves| differences.
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Settings for [`integrate_panels`].
#[derive(Debug, Clone, Copy)]
pub struct PanelRule {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for PanelRule {
    fn default() -> Self {
        PanelRule {
            abs_tol: 1e-8,
            max_depth: 40,
        }
    }
}

/// Integrate `f` over consecutive `panels` (each `(a, b)`), refining each
/// adaptively. `total_len` is the length the tolerance is distributed over.
pub fn integrate_panels<F, const K: usize>(
    f: &F,
    panels: impl IntoIterator<Item = (f64, f64)>,
    total_len: f64,
    rule: PanelRule,
) -> QuadResult<K>
where
    F: Fn(f64) -> [f64; K],
{
    let gl = GaussLegendre::order16();
    let mut out = QuadResult {
        value: [0.0; K],
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };
    let density = rule.abs_tol / total_len;
    for (a, b) in panels {
        if b <= a {
            continue;
        }
        let whole = gl.integrate(f, a, b);
        out.evaluations += gl.len();
        refine(f, gl, a, b, whole, density, rule.max_depth, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn refine<F, const K: usize>(
    f: &F,
    gl: &GaussLegendre,
    a: f64,
    b: f64,
    whole: [f64; K],
    density: f64,
    depth: u32,
    out: &mut QuadResult<K>,
) where
    F: Fn(f64) -> [f64; K],
{
    let m = 0.5 * (a + b);
    let left = gl.integrate(f, a, m);
    let right = gl.integrate(f, m, b);
    out.evaluations += 2 * gl.len();
    let mut diff = 0.0f64;
    for k in 0..K {
        diff = diff.max((left[k] + right[k] - whole[k]).abs());
    }
    let tol = density * (b - a);
    if diff <= tol || depth == 0 || m <= a || m >= b {
        if diff > tol {
            out.converged = false;
        }
        for k in 0..K {
            out.value[k] += left[k] + right[k];
        }
        out.error_estimate += diff;
        return;
    }
    refine(f, gl, a, m, left, density, depth - 1, out);
    refine(f, gl, m, b, right, density, depth - 1, out);
}

/// Split [a, b] into equal panels no wider than `max_width`.
pub fn uniform_panels(a: f64, b: f64, max_width: f64) -> impl Iterator<Item = (f64, f64)> {
    let n = if b > a {
        ((b - a) / max_width).ceil().max(1.0) as usize
    } else {
        0
    };
    let h = if n > 0 { (b - a) / n as f64 } else { 0.0 };
    (0..n).map(move |i| {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == n { b } else { a + (i + 1) as f64 * h };
        (lo, hi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_point_rule_is_exact_to_degree_31() {
        let gl = GaussLegendre::order16();
        assert!((gl.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in [0u32, 2, 10, 30] {
            let v = gl.integrate(&|x: f64| [x.powi(deg as i32)], -1.0, 1.0)[0];
            assert!((v - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "degree {deg}");
        }
        let odd = gl.integrate(&|x: f64| [x.powi(31)], -1.0, 1.0)[0];
        assert!(odd.abs() < 1e-14);
    }

    #[test]
    fn small_rules_match_tables() {
        let gl = GaussLegendre::new(2);
        assert!((gl.nodes()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let gl = GaussLegendre::new(3);
        assert!((gl.nodes()[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((gl.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_a_sharp_peak() {
        // ∫_0^1 1/(1e-4 + (x - 0.3)²) dx in closed form
        let e = 1e-4f64;
        let f = |x: f64| [1.0 / (e + (x - 0.3).powi(2)), 1.0];
        let se = e.sqrt();
        let exact = ((0.7 / se).atan() + (0.3 / se).atan()) / se;
        let r = integrate_panels(&f, uniform_panels(0.0, 1.0, 0.5), 1.0, PanelRule::default());
        assert!(r.converged);
        assert!((r.value[0] - exact).abs() < 1e-7);
        assert!((r.value[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn depth_limit_reports_nonconvergence() {
        let f = |x: f64| [if x < 0.123456 { 0.0 } else { 1.0 }];
        let rule = PanelRule {
            abs_tol: 1e-14,
            max_depth: 3,
        };
        let r = integrate_panels(&f, uniform_panels(0.0, 1.0, 1.0), 1.0, rule);
        assert!(!r.converged);
    }
}
