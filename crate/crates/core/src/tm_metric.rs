//! Fiber metric, the unit-volume fiber ball and integration over `TM`.
//!
//! The fiber metric is `v_ij = 2 u_i u_j - g_ij` for a unit timelike `u`:
//! positive definite with `det v = -det g`. Fiber integrals run in
//! v-orthonormal coordinates `z = Lᵀ y` (`v = L Lᵀ`) over the 4-ball
//! `|z|² ≤ c`, whose Euclidean volume `π² c² / 2` is 1 for `c = √2/π`.

use std::f64::consts::PI;

use nalgebra::Matrix4;

use crate::bundle_geom::{BundleFrame, BundlePoint, NVARS};
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::spacetime::SpacetimeModel;
use crate::tensor::{self, Mat4, Vec4, DIM};

/// Bound `c` of the fiber ball `v(y, y) ≤ c` giving unit volume.
pub const BALL_BOUND: f64 = std::f64::consts::SQRT_2 / PI;

/// Radial shift applied to quadrature nodes that land on the null cone.
pub const NULL_CONE_SHIFT: f64 = 1e-9;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(x, w)| (mid + half * x, half * w)).collect()
}

#[derive(Debug, Clone)]
pub struct FiberMetric {
    pub x: [f64; DIM],
    /// Unit timelike vector used in the construction.
    pub u: [f64; DIM],
    pub v: Mat4<f64>,
    pub det_v: f64,
    pub det_g: f64,
    /// Lower Cholesky factor `L` with `v = L Lᵀ`.
    pub cholesky: Mat4<f64>,
    /// `L⁻ᵀ`, mapping orthonormal coordinates back to fiber vectors.
    inv_lt: Mat4<f64>,
    g: Mat4<f64>,
}

impl FiberMetric {
    /// `g_x(y, y)`.
    pub fn base_norm2(&self, y: &[f64; DIM]) -> f64 {
        quad_form(&self.g, y)
    }

    pub fn fiber_norm2(&self, y: &[f64; DIM]) -> f64 {
        quad_form(&self.v, y)
    }

    /// Fiber vector with v-orthonormal coordinates `z`.
    pub fn from_orthonormal(&self, z: &[f64; DIM]) -> [f64; DIM] {
        std::array::from_fn(|i| (0..DIM).map(|j| self.inv_lt[i][j] * z[j]).sum())
    }
}

fn quad_form(m: &Mat4<f64>, y: &[f64; DIM]) -> f64 {
    let mut acc = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            acc += m[i][j] * y[i] * y[j];
        }
    }
    acc
}

/// Fiber metric at `x` from the timelike vector `u` (default: `∂_0`).
pub fn fiber_metric(model: &SpacetimeModel, x: &[f64; DIM], u: Option<[f64; DIM]>) -> Result<FiberMetric> {
    let g = model.metric_values(x)?;
    let u = u.unwrap_or([1.0, 0.0, 0.0, 0.0]);
    let uu = quad_form(&g, &u);
    if !(uu > 0.0) {
        return Err(Error::Singular(format!(
            "fiber metric needs a timelike u, got g(u,u) = {uu:e}"
        )));
    }
    let s = uu.sqrt();
    let u: [f64; DIM] = u.map(|c| c / s);
    let u_lower: [f64; DIM] = std::array::from_fn(|i| (0..DIM).map(|j| g[i][j] * u[j]).sum());
    let v: Mat4<f64> = std::array::from_fn(|i| std::array::from_fn(|j| 2.0 * u_lower[i] * u_lower[j] - g[i][j]));
    let vm = Matrix4::from_fn(|i, j| v[i][j]);
    let chol = vm
        .cholesky()
        .ok_or_else(|| Error::Singular("fiber metric is not positive definite".into()))?;
    let l = chol.l();
    let inv_lt = l
        .transpose()
        .solve_upper_triangular(&Matrix4::identity())
        .expect("Cholesky factor has a positive diagonal");
    Ok(FiberMetric {
        x: *x,
        u,
        det_v: vm.determinant(),
        det_g: Matrix4::from_fn(|i, j| g[i][j]).determinant(),
        cholesky: std::array::from_fn(|i| std::array::from_fn(|j| l[(i, j)])),
        inv_lt: std::array::from_fn(|i| std::array::from_fn(|j| inv_lt[(i, j)])),
        v,
        g,
    })
}

#[derive(Debug, Clone)]
pub struct FiberBall {
    pub metric: FiberMetric,
    /// The ball is `v(y, y) ≤ bound`.
    pub bound: f64,
}

impl FiberBall {
    pub fn contains(&self, y: &[f64; DIM]) -> bool {
        self.metric.fiber_norm2(y) <= self.bound
    }

    /// Euclidean volume in v-orthonormal coordinates.
    pub fn volume(&self) -> f64 {
        PI * PI * self.bound * self.bound / 2.0
    }
}

pub fn fiber_ball(model: &SpacetimeModel, x: &[f64; DIM]) -> Result<FiberBall> {
    fiber_ball_with_bound(model, x, BALL_BOUND)
}

pub fn fiber_ball_with_bound(model: &SpacetimeModel, x: &[f64; DIM], bound: f64) -> Result<FiberBall> {
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::Config(format!("fiber ball bound must be positive, got {bound}")));
    }
    Ok(FiberBall {
        metric: fiber_metric(model, x, None)?,
        bound,
    })
}

/// Node counts of the 4-ball product rule in hyperspherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiberQuadrature {
    pub radial: usize,
    pub polar1: usize,
    pub polar2: usize,
    pub azimuth: usize,
}

impl Default for FiberQuadrature {
    fn default() -> Self {
        FiberQuadrature {
            radial: 16,
            polar1: 16,
            polar2: 16,
            azimuth: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberIntegral {
    pub value: f64,
    /// Nodes moved off the null cone before evaluation.
    pub perturbed_nodes: usize,
}

/// `∫_ball f(y) d⁴z` in v-orthonormal coordinates.
pub fn fiber_integral(
    ball: &FiberBall,
    quad: FiberQuadrature,
    mut f: impl FnMut(&[f64; DIM]) -> Result<f64>,
) -> Result<FiberIntegral> {
    let radius = ball.bound.sqrt();
    let rho = gauss_legendre_on(quad.radial, 0.0, radius);
    let psi1 = gauss_legendre_on(quad.polar1, 0.0, PI);
    let psi2 = gauss_legendre_on(quad.polar2, 0.0, PI);
    let phi = gauss_legendre_on(quad.azimuth, 0.0, 2.0 * PI);
    let mut total = 0.0;
    let mut perturbed = 0;
    for &(r0, wr) in &rho {
        let mut shell = 0.0;
        for &(a, wa) in &psi1 {
            let (sa, ca) = a.sin_cos();
            for &(b, wb) in &psi2 {
                let (sb, cb) = b.sin_cos();
                let wang = wa * wb * sa * sa * sb;
                for &(c, wc) in &phi {
                    let (sc, cc) = c.sin_cos();
                    let dir = [ca, sa * cb, sa * sb * cc, sa * sb * sc];
                    let mut r = r0;
                    let mut y = ball.metric.from_orthonormal(&dir.map(|d| d * r));
                    let scale = y.iter().map(|v| v * v).sum::<f64>();
                    if ball.metric.base_norm2(&y).abs() <= 1e-14 * scale {
                        r += NULL_CONE_SHIFT;
                        y = ball.metric.from_orthonormal(&dir.map(|d| d * r));
                        perturbed += 1;
                    }
                    shell += wang * wc * f(&y)?;
                }
            }
        }
        total += wr * r0.powi(3) * shell;
    }
    Ok(FiberIntegral {
        value: total,
        perturbed_nodes: perturbed,
    })
}

/// Base coordinate box `[lo, hi]` per coordinate.
pub type BaseBox = [[f64; 2]; DIM];

fn base_nodes(bx: &BaseBox, n: usize) -> Vec<([f64; DIM], f64)> {
    let rules: Vec<Vec<(f64, f64)>> = bx.iter().map(|[a, b]| gauss_legendre_on(n, *a, *b)).collect();
    let mut out = Vec::with_capacity(n.pow(4));
    for a in &rules[0] {
        for b in &rules[1] {
            for c in &rules[2] {
                for d in &rules[3] {
                    out.push(([a.0, b.0, c.0, d.0], a.1 * b.1 * c.1 * d.1));
                }
            }
        }
    }
    out
}

/// `∫_Δ f(x) √-g d⁴x` with an `n`-point rule per coordinate.
pub fn base_integral(
    model: &SpacetimeModel,
    bx: &BaseBox,
    n: usize,
    mut f: impl FnMut(&[f64; DIM]) -> Result<f64>,
) -> Result<f64> {
    let mut total = 0.0;
    for (x, w) in base_nodes(bx, n) {
        let g = model.metric_values(&x)?;
        let det = Matrix4::from_fn(|i, j| g[i][j]).determinant();
        total += w * (-det).sqrt() * f(&x)?;
    }
    Ok(total)
}

/// `∫_{Δ×Δ̃} f(x, y) √(-g v) d⁴x d⁴y`, product of the base rule and the
/// fiber-ball rule.
pub fn tm_integral(
    model: &SpacetimeModel,
    bx: &BaseBox,
    n: usize,
    quad: FiberQuadrature,
    mut f: impl FnMut(&[f64; DIM], &[f64; DIM]) -> Result<f64>,
) -> Result<f64> {
    let mut total = 0.0;
    for (x, w) in base_nodes(bx, n) {
        let ball = fiber_ball(model, &x)?;
        // d⁴z = √v d⁴y, so √(-g v) d⁴y = √-g d⁴z.
        let sqrt_g = (-ball.metric.det_g).sqrt();
        let inner = fiber_integral(&ball, quad, |y| f(&x, y))?;
        total += w * sqrt_g * inner.value;
    }
    Ok(total)
}

/// Coordinate jets `x^i` seeded in slots `0..4` of `nvars` variables.
pub fn coordinate_jets(x: &[f64; DIM], order: usize, nvars: usize) -> Result<Vec4<Jet>> {
    let mut out: Vec4<Jet> = std::array::from_fn(|_| Jet::zero(order, nvars));
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = Jet::variable(i, x[i], order, nvars)?;
    }
    Ok(out)
}

/// Divergence of the horizontal lift `Y^i δ_i` of a base vector field and
/// the base divergence `(1/√-g) ∂_i(√-g Y^i)`, in that order. `field` maps
/// coordinate jets to the components `Y^i`.
pub fn lift_divergence(
    model: &SpacetimeModel,
    p: BundlePoint,
    alpha: f64,
    field: impl Fn(&Vec4<Jet>) -> Result<Vec4<Jet>>,
) -> Result<(f64, f64)> {
    let frame = BundleFrame::new(model, p, alpha, 1)?;
    let lifted = field(&coordinate_jets(&p.x, 1, NVARS)?)?;
    let horizontal = frame.horizontal_divergence(&lifted)?;

    let g = model.metric_jet(&p.x, 1)?;
    let sqrt_g = (-tensor::det(&g)).sqrt()?;
    let y = field(&coordinate_jets(&p.x, 1, DIM)?)?;
    let mut div = 0.0;
    for i in 0..DIM {
        div += (&sqrt_g * &y[i]).d1(i);
    }
    Ok((horizontal, div / sqrt_g.value()))
}
