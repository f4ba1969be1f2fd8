//! Tangent-bundle geometry of the Randers spray family.
//!
//! A [`BundleFrame`] holds 8-variable jets at a bundle point `(x, y)`: slots
//! `0..4` are base coordinates, slots `4..8` fiber coordinates. Base fields
//! (`g`, `Γ`, `F`) enter through 4-variable jets padded with zeros, so frame
//! jets are exact in every coefficient of x-degree at most 1. Every quantity
//! below reads only such coefficients: at most one base derivative is ever
//! taken of a fiber-dependent object.
//!
//! Spray data:
//!
//! ```text
//! ‖y‖   = √(g_ij y^i y^j),    l^i = y^i/‖y‖,    F^i = F^i_j y^j
//! B^i   = -(α/2) ‖y‖ F^i
//! G^i   = ½ Γ^i_jk y^j y^k + B^i
//! N^i_j = ∂G^i/∂y^j = Γ^i_jk y^k + B^i_j
//! ```

use crate::base_geom::BaseGeometry;
use crate::conventions::{Conventions, DivergenceFrame};
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::spacetime::SpacetimeModel;
use crate::tensor::{self, Arr3, Arr4, Mat4, Vec4, DIM};

/// Number of jet variables in a frame.
pub const NVARS: usize = 2 * DIM;

/// Slot of fiber coordinate `y^m`.
pub const fn ys(m: usize) -> usize {
    DIM + m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundlePoint {
    pub x: [f64; DIM],
    pub y: [f64; DIM],
}

impl BundlePoint {
    pub fn new(x: [f64; DIM], y: [f64; DIM]) -> Self {
        BundlePoint { x, y }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        BundlePoint {
            x: self.x,
            y: self.y.map(|v| v * lambda),
        }
    }
}

/// `‖y‖`, `l^i` and `l_i` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportingElement {
    pub norm: f64,
    pub l_upper: [f64; DIM],
    pub l_lower: [f64; DIM],
}

/// Fiber derivatives of `B^i`: `(B^i_j, B^i_jk, B^i_jkl)`.
#[derive(Debug, Clone)]
pub struct FiberDerivatives {
    pub first: Mat4<f64>,
    pub second: Arr3<f64>,
    pub third: Arr4<f64>,
}

/// Curvature of the Berwald-type connection read off the tidal tensor.
#[derive(Debug, Clone)]
pub struct DCurvature {
    /// `tensor[j][i][k][l] = R_j^i_kl = ½ (E^i_k)_{·jl}`.
    pub tensor: Arr4<f64>,
    /// `R_jl = -½ (E^i_i)_{·jl}`.
    pub ricci: Mat4<f64>,
    /// `g^jl R_jl`.
    pub scalar: f64,
}

/// Terms of `R = r + div + quad`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Theorem1 {
    #[serde(rename = "R")]
    pub bundle_scalar: f64,
    #[serde(rename = "r")]
    pub base_scalar: f64,
    pub div_term: f64,
    pub quad_term: f64,
    /// `(3α²/2) F_ij F^ij`.
    pub quad_closed_form: f64,
    pub residual: f64,
}

/// Jets of the spray family at one bundle point.
#[derive(Debug, Clone)]
pub struct BundleFrame {
    pub point: BundlePoint,
    pub alpha: f64,
    pub order: usize,
    pub conventions: Conventions,
    /// Base geometry at `x` with metric order 2.
    pub base: BaseGeometry,
    pub g: Mat4<Jet>,
    pub ginv: Mat4<Jet>,
    pub gamma: Arr3<Jet>,
    pub f_mixed: Mat4<Jet>,
    /// Seeded fiber coordinates `y^i`.
    pub yv: Vec4<Jet>,
    pub norm: Jet,
    pub l_lower: Vec4<Jet>,
    /// `F^i = F^i_j y^j`.
    pub f_y: Vec4<Jet>,
    pub spray_b: Vec4<Jet>,
    pub spray: Vec4<Jet>,
    /// Closed-form `N^i_j`.
    pub connection: Mat4<Jet>,
}

fn lift(j: &Jet, order: usize) -> Jet {
    j.embed(NVARS, 0).with_order(order)
}

fn lift_mat(m: &Mat4<Jet>, order: usize) -> Mat4<Jet> {
    tensor::map_mat(m, |j| lift(j, order))
}

fn mat_of(f: impl Fn(usize, usize) -> Jet) -> Mat4<Jet> {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

fn arr3_of<T>(f: impl Fn(usize, usize, usize) -> T) -> [[[T; DIM]; DIM]; DIM] {
    std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(i, j, k))))
}

fn arr4_of<T>(f: impl Fn(usize, usize, usize, usize) -> T) -> [[[[T; DIM]; DIM]; DIM]; DIM] {
    std::array::from_fn(|i| arr3_of(|j, k, l| f(i, j, k, l)))
}

/// Maximum coefficient difference over monomials of x-degree at most 1,
/// the coefficients a frame computes exactly.
pub fn max_diff_exact_part(a: &Jet, b: &Jet) -> f64 {
    let order = a.order().min(b.order());
    let (a, b) = (a.truncate(order), b.truncate(order));
    a.monomials()
        .zip(a.coeffs().iter().zip(b.coeffs()))
        .filter(|(e, _)| e[..DIM].iter().map(|&d| d as usize).sum::<usize>() <= 1)
        .fold(0.0, |m, (_, (x, y))| m.max((x - y).abs()))
}

impl BundleFrame {
    /// Frame with jets of `order` (1..=3). Order 1 suffices for `N` and `E`
    /// values; fiber Hessians of `E` and the Ricci decomposition need 3.
    pub fn new(
        model: &SpacetimeModel,
        point: BundlePoint,
        alpha: f64,
        order: usize,
    ) -> Result<Self> {
        Self::with_conventions(model, point, alpha, order, Conventions::default())
    }

    pub fn with_conventions(
        model: &SpacetimeModel,
        point: BundlePoint,
        alpha: f64,
        order: usize,
        conventions: Conventions,
    ) -> Result<Self> {
        let base = BaseGeometry::with_conventions(model, &point.x, 2, conventions)?;
        Self::from_base(base, point.y, alpha, order)
    }

    pub fn from_base(base: BaseGeometry, y: [f64; DIM], alpha: f64, order: usize) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::Config(format!("bundle frame order must be 1..=3, got {order}")));
        }
        if base.order < 2 {
            return Err(Error::Config("bundle frame needs base metric order >= 2".into()));
        }
        if !alpha.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("alpha and y must be finite".into()));
        }
        let point = BundlePoint { x: base.x, y };
        let g = lift_mat(&base.g, order);
        let ginv = lift_mat(&base.ginv, order);
        let gamma: Arr3<Jet> = std::array::from_fn(|i| lift_mat(&base.gamma[i], order));
        let f_mixed = lift_mat(&base.f_mixed, order);
        let yv: Vec4<Jet> = std::array::from_fn(|m| {
            Jet::variable(ys(m), y[m], order, NVARS).expect("fiber slot in range")
        });

        let y_lower: Vec4<Jet> = std::array::from_fn(|i| tensor::dot(&g[i], &yv));
        let norm2 = tensor::dot(&y_lower, &yv);
        if !(norm2.value() > 0.0) {
            return Err(Error::Singular(format!(
                "fiber vector is not timelike: g(y,y) = {:e}",
                norm2.value()
            )));
        }
        let norm = norm2.sqrt()?;
        let inv_norm = norm.recip()?;
        let l_lower: Vec4<Jet> = std::array::from_fn(|i| &y_lower[i] * &inv_norm);
        let f_y: Vec4<Jet> = std::array::from_fn(|i| tensor::dot(&f_mixed[i], &yv));
        let half_alpha = -0.5 * alpha;
        let spray_b: Vec4<Jet> = std::array::from_fn(|i| &(&norm * &f_y[i]) * half_alpha);
        let spray: Vec4<Jet> = std::array::from_fn(|i| {
            let mut acc = spray_b[i].clone();
            for j in 0..DIM {
                let gy = tensor::dot(&gamma[i][j], &yv);
                acc += &(&gy * &yv[j]) * 0.5;
            }
            acc
        });
        let connection = mat_of(|i, j| {
            let bij = (&f_y[i] * &l_lower[j] + &norm * &f_mixed[i][j]) * half_alpha;
            tensor::dot(&gamma[i][j], &yv) + bij
        });
        Ok(BundleFrame {
            point,
            alpha,
            order,
            conventions: base.conventions,
            base,
            g,
            ginv,
            gamma,
            f_mixed,
            yv,
            norm,
            l_lower,
            f_y,
            spray_b,
            spray,
            connection,
        })
    }

    fn require_order(&self, needed: usize, what: &str) -> Result<()> {
        if self.order < needed {
            return Err(Error::Config(format!("{what} needs a frame of order >= {needed}")));
        }
        Ok(())
    }

    pub fn supporting_element(&self) -> SupportingElement {
        let norm = self.norm.value();
        SupportingElement {
            norm,
            l_upper: self.point.y.map(|v| v / norm),
            l_lower: tensor::values_vec(&self.l_lower),
        }
    }

    pub fn spray_b_values(&self) -> Vec4<f64> {
        tensor::values_vec(&self.spray_b)
    }

    pub fn spray_values(&self) -> Vec4<f64> {
        tensor::values_vec(&self.spray)
    }

    pub fn connection_values(&self) -> Mat4<f64> {
        tensor::values_mat(&self.connection)
    }

    /// `N^i_j` as fiber partials of the spray, for cross-checking the closed
    /// form. One order lower than the frame.
    pub fn connection_from_spray(&self) -> Mat4<Jet> {
        mat_of(|i, j| self.spray[i].partial(ys(j)))
    }

    /// `G^i_jk = ∂²G^i/∂y^j∂y^k`.
    pub fn berwald_coeffs(&self) -> Result<Arr3<f64>> {
        self.require_order(2, "Berwald coefficients")?;
        Ok(arr3_of(|i, j, k| self.spray[i].d2(ys(j), ys(k))))
    }

    /// `B^i_j`, `B^i_jk`, `B^i_jkl` by differentiating `B^i` in the fiber.
    pub fn fiber_derivs_b(&self) -> Result<FiberDerivatives> {
        self.require_order(3, "third fiber derivatives of B")?;
        let b = &self.spray_b;
        let third = arr4_of(|i, j, k, l| {
            let mut e = [0u8; NVARS];
            e[ys(j)] += 1;
            e[ys(k)] += 1;
            e[ys(l)] += 1;
            b[i].derivative(&e).expect("order checked")
        });
        Ok(FiberDerivatives {
            first: std::array::from_fn(|i| std::array::from_fn(|j| b[i].d1(ys(j)))),
            second: arr3_of(|i, j, k| b[i].d2(ys(j), ys(k))),
            third,
        })
    }

    /// Closed forms `B^i_j = -(α/2)(F^i l_j + ‖y‖ F^i_j)` and
    /// `B^i_jk = -(α/2)(l_{·jk} F^i + l_j F^i_k + l_k F^i_j)` with
    /// `l_{·jk} = (g_jk - l_j l_k)/‖y‖`.
    pub fn fiber_derivs_b_closed(&self) -> (Mat4<f64>, Arr3<f64>) {
        let h = -0.5 * self.alpha;
        let norm = self.norm.value();
        let l = tensor::values_vec(&self.l_lower);
        let fy = tensor::values_vec(&self.f_y);
        let fm = tensor::values_mat(&self.f_mixed);
        let g = tensor::values_mat(&self.g);
        let first = std::array::from_fn(|i| std::array::from_fn(|j| h * (fy[i] * l[j] + norm * fm[i][j])));
        let second = arr3_of(|i, j, k| {
            let ljk = (g[j][k] - l[j] * l[k]) / norm;
            h * (ljk * fy[i] + l[j] * fm[i][k] + l[k] * fm[i][j])
        });
        (first, second)
    }

    /// `δ_k f = ∂f/∂x^k - N^m_k ∂f/∂y^m` using connection `n`.
    fn adapted_with(n: &Mat4<Jet>, f: &Jet, k: usize) -> Jet {
        let mut acc = f.partial(k);
        for m in 0..DIM {
            acc -= &n[m][k] * &f.partial(ys(m));
        }
        acc
    }

    /// Adapted derivative along `δ_k` of the full connection.
    pub fn adapted_derivative(&self, f: &Jet, k: usize) -> Jet {
        Self::adapted_with(&self.connection, f, k)
    }

    /// `N⁰^i_j = Γ^i_jk y^k`, the α = 0 connection.
    pub fn levi_civita_connection(&self) -> Mat4<Jet> {
        mat_of(|i, j| tensor::dot(&self.gamma[i][j], &self.yv))
    }

    /// Adapted derivative along `δ⁰_k`.
    pub fn adapted_derivative_lc(&self, f: &Jet, k: usize) -> Jet {
        Self::adapted_with(&self.levi_civita_connection(), f, k)
    }

    /// Curvature of `N`: `R^i_jk = δ_k N^i_j - δ_j N^i_k`, one order below
    /// the frame.
    pub fn n_curvature_jets(&self) -> Arr3<Jet> {
        let n = &self.connection;
        let d: Arr3<Jet> = arr3_of(|i, j, k| self.adapted_derivative(&n[i][j], k));
        arr3_of(|i, j, k| &d[i][j][k] - &d[i][k][j])
    }

    /// Tidal tensor `E^i_j = R^i_jk y^k`, one order below the frame.
    pub fn tidal_jets(&self) -> Mat4<Jet> {
        let r = self.n_curvature_jets();
        mat_of(|i, j| tensor::dot(&r[i][j], &self.yv))
    }

    pub fn n_curvature(&self) -> Arr3<f64> {
        tensor::values3(&self.n_curvature_jets())
    }

    pub fn tidal(&self) -> Mat4<f64> {
        tensor::values_mat(&self.tidal_jets())
    }

    /// `R_j^i_kl`, `R_jl` and `R` from fiber Hessians of the tidal tensor.
    pub fn d_curvature(&self) -> Result<DCurvature> {
        self.require_order(3, "D-curvature")?;
        let e = self.tidal_jets();
        let tensor = arr4_of(|j, i, k, l| 0.5 * e[i][k].d2(ys(j), ys(l)));
        let mut trace = e[0][0].clone();
        for i in 1..DIM {
            trace += &e[i][i];
        }
        let ricci: Mat4<f64> =
            std::array::from_fn(|j| std::array::from_fn(|l| -0.5 * trace.d2(ys(j), ys(l))));
        let gi = tensor::values_mat(&self.ginv);
        let scalar = (0..DIM)
            .flat_map(|j| (0..DIM).map(move |l| (j, l)))
            .map(|(j, l)| gi[j][l] * ricci[j][l])
            .sum();
        Ok(DCurvature {
            tensor,
            ricci,
            scalar,
        })
    }

    /// Fiber derivative of the N-curvature contracted on its upper and last
    /// lower index: `(R^i_ki)_{·j}`. At α = 0 this is the Levi-Civita Ricci
    /// tensor; reported alongside `R_jl` as a diagnostic.
    pub fn berwald_ricci(&self) -> Result<Mat4<f64>> {
        self.require_order(2, "Berwald Ricci contraction")?;
        let r = self.n_curvature_jets();
        Ok(std::array::from_fn(|j| {
            std::array::from_fn(|k| (0..DIM).map(|i| r[i][k][i].d1(ys(j))).sum())
        }))
    }

    /// `B^i_h B^h_i` as a jet two orders below the frame.
    fn b_contraction(&self) -> Jet {
        let bj: Mat4<Jet> = mat_of(|i, h| self.spray_b[i].partial(ys(h)));
        let mut acc = &bj[0][0] * &bj[0][0];
        for i in 0..DIM {
            for h in 0..DIM {
                if i + h > 0 {
                    acc += &bj[i][h] * &bj[h][i];
                }
            }
        }
        acc
    }

    /// Decomposition `R = r + div_term + quad_term` with
    /// `quad_term = -½ g^jk (B^i_h B^h_i)_{·jk}` and
    /// `div_term = (1/√-g) δ_i(√-g X^i)`, `X^i = g^jk B^i_jk`, where the
    /// horizontal frame is chosen by [`Conventions::divergence`].
    pub fn theorem1(&self) -> Result<Theorem1> {
        self.require_order(3, "Ricci scalar decomposition")?;
        let dc = self.d_curvature()?;
        let base_scalar = self.base.curvature()?.scalar.value();
        let gi = tensor::values_mat(&self.ginv);

        let bb = self.b_contraction();
        let mut quad_term = 0.0;
        for j in 0..DIM {
            for k in 0..DIM {
                quad_term -= 0.5 * gi[j][k] * bb.d2(ys(j), ys(k));
            }
        }

        // X^i = g^jk B^i_jk as order-1 jets.
        let x_field: Vec4<Jet> = std::array::from_fn(|i| {
            let d1: Vec4<Jet> = std::array::from_fn(|j| self.spray_b[i].partial(ys(j)));
            let mut acc: Option<Jet> = None;
            for j in 0..DIM {
                for k in 0..DIM {
                    let t = &self.ginv[j][k] * &d1[j].partial(ys(k));
                    acc = Some(match acc {
                        None => t,
                        Some(a) => a + t,
                    });
                }
            }
            acc.expect("non-empty sum")
        });
        let div_term = match self.conventions.divergence {
            DivergenceFrame::LeviCivita => {
                let n0 = self.levi_civita_connection();
                self.divergence_with(&n0, &x_field)
            }
            DivergenceFrame::Full => self.divergence_with(&self.connection, &x_field),
        };

        let f2 = self.base.f_squared().value();
        let quad_closed_form = 1.5 * self.alpha * self.alpha * f2;
        let bundle_scalar = dc.scalar;
        Ok(Theorem1 {
            bundle_scalar,
            base_scalar,
            div_term,
            quad_term,
            quad_closed_form,
            residual: bundle_scalar - base_scalar - div_term - quad_term,
        })
    }

    /// `(1/√-g) δ_i(√-g X^i) = δ_i X^i + Γ^j_ji X^i` with the horizontal
    /// frame of connection `n`.
    fn divergence_with(&self, n: &Mat4<Jet>, x: &Vec4<Jet>) -> f64 {
        let mut acc = 0.0;
        for i in 0..DIM {
            acc += Self::adapted_with(n, &x[i], i).value();
            for j in 0..DIM {
                acc += self.gamma[j][j][i].value() * x[i].value();
            }
        }
        acc
    }

    /// Divergence of a horizontal field `X = X^i δ_i` with the full
    /// connection. `x` must carry first derivatives in all 8 slots.
    pub fn horizontal_divergence(&self, x: &Vec4<Jet>) -> Result<f64> {
        if x[0].order() < 1 || x[0].nvars() != NVARS {
            return Err(Error::Config("horizontal field must be 8-variable jets of order >= 1".into()));
        }
        Ok(self.divergence_with(&self.connection, x))
    }

    /// `𝓑 = (3/2) B^l B_l / ‖y‖² + ½ B^i_h B^h_i` and its fiber Hessian.
    pub fn b_scalar_and_hessian(&self) -> Result<(f64, Mat4<f64>)> {
        self.require_order(3, "Hessian of the B scalar")?;
        let b = &self.spray_b;
        let mut bl = Jet::zero(self.order, NVARS);
        for l in 0..DIM {
            for m in 0..DIM {
                bl += &(&self.g[l][m] * &b[l]) * &b[m];
            }
        }
        let norm2 = &self.norm * &self.norm;
        let scal = (bl.try_div(&norm2)? * 1.5) + self.b_contraction().with_order(self.order) * 0.5;
        let scal = scal.truncate(2);
        let hess = std::array::from_fn(|i| std::array::from_fn(|j| scal.d2(ys(i), ys(j))));
        Ok((scal.value(), hess))
    }

    /// Bundle-side assembly `sym(R_jl) - ½ R̃ g_jl + 𝓑_{·jl}` with
    /// `R̃ = r + (3α²/2) F_ij F^ij`.
    pub fn literal_einstein(&self) -> Result<Mat4<f64>> {
        let dc = self.d_curvature()?;
        let (_, hess) = self.b_scalar_and_hessian()?;
        let r_tilde = self.base.curvature()?.scalar.value()
            + 1.5 * self.alpha * self.alpha * self.base.f_squared().value();
        let g = tensor::values_mat(&self.g);
        Ok(std::array::from_fn(|j| {
            std::array::from_fn(|l| {
                0.5 * (dc.ricci[j][l] + dc.ricci[l][j]) - 0.5 * r_tilde * g[j][l] + hess[j][l]
            })
        }))
    }

    /// Right-hand side of the worldline equation,
    /// `dy^i/dt = -Γ^i_jk y^j y^k + α ‖y‖ F^i_j y^j = -2 G^i`.
    pub fn worldline_acceleration(&self) -> Vec4<f64> {
        self.spray_values().map(|g| -2.0 * g)
    }
}

/// Tidal tensor expected at α = 0 from the base Riemann tensor:
/// `E^i_k = R^i_jlk y^j y^l`.
pub fn levi_civita_tidal(base: &BaseGeometry, y: &[f64; DIM]) -> Result<Mat4<f64>> {
    let r = &base.curvature()?.riemann;
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|k| {
            let mut acc = 0.0;
            for j in 0..DIM {
                for l in 0..DIM {
                    acc += r[i][j][l][k].value() * y[j] * y[l];
                }
            }
            acc
        })
    }))
}

/// Field-equation tensor: the variational form `G_ij - 12πα² T_ij` and the
/// literal bundle assembly, with their largest componentwise difference.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GeneralizedEinstein {
    pub variational: Mat4<f64>,
    pub classical: Mat4<f64>,
    pub literal: Mat4<f64>,
    pub literal_difference: f64,
}

pub fn generalized_einstein(frame: &BundleFrame) -> Result<GeneralizedEinstein> {
    let variational = tensor::values_mat(&frame.base.variational_einstein(frame.alpha)?);
    let classical = tensor::values_mat(&frame.base.classical_einstein_maxwell()?);
    let literal = frame.literal_einstein()?;
    let literal_difference =
        tensor::max_abs_diff(&tensor::flat_mat(&variational), &tensor::flat_mat(&literal));
    Ok(GeneralizedEinstein {
        variational,
        classical,
        literal,
        literal_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::catalog;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    fn model(name: &str, kv: &[(&str, f64)]) -> SpacetimeModel {
        let p: BTreeMap<String, f64> = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        catalog(name, &p).unwrap()
    }

    #[test]
    fn supporting_element_examples() {
        let m = model("minkowski", &[]);
        let f = BundleFrame::new(&m, BundlePoint::new([0.0; 4], [2.0, 0.0, 0.0, 0.0]), 0.0, 1).unwrap();
        let s = f.supporting_element();
        assert_eq!(s.norm, 2.0);
        assert_eq!(s.l_upper, [1.0, 0.0, 0.0, 0.0]);
        let null = BundleFrame::new(&m, BundlePoint::new([0.0; 4], [1.0, 1.0, 0.0, 0.0]), 0.0, 1);
        assert!(matches!(null, Err(Error::Singular(_))));
    }

    #[test]
    fn uniform_field_spray() {
        let m = model("uniform_field", &[("E0", 0.1)]);
        let f = BundleFrame::new(&m, BundlePoint::new([0.0; 4], [2.0, 0.0, 0.0, 0.0]), 1.0, 3).unwrap();
        let b = f.spray_b_values();
        // B^1 = -2 F^1_0 = -0.2
        assert_relative_eq!(b[1], -0.2, epsilon = 1e-15);
        let t = f.theorem1().unwrap();
        assert_relative_eq!(t.quad_term, -0.03, epsilon = 1e-14);
        assert!(t.residual.abs() < 1e-12, "{t:?}");
    }

    #[test]
    fn schwarzschild_static_tidal() {
        let m = model("schwarzschild", &[("M", 1.0)]);
        let r: f64 = 10.0;
        let f0: f64 = 1.0 - 2.0 / r;
        let y = [1.0 / f0.sqrt(), 0.0, 0.0, 0.0];
        let fr = BundleFrame::new(&m, BundlePoint::new([0.0, r, 1.2, 0.0], y), 0.0, 1).unwrap();
        let e = fr.tidal();
        assert_relative_eq!(e[1][1], 2.0 / r.powi(3), max_relative = 1e-12);
        assert_relative_eq!(e[2][2], -1.0 / r.powi(3), max_relative = 1e-12);
        assert_relative_eq!(e[3][3], -1.0 / r.powi(3), max_relative = 1e-12);
        assert!(e[0][0].abs() < 1e-15);
    }
}
