//! Levi-Civita geometry and electromagnetism on the base spacetime.
//!
//! Everything is computed from 4-variable jets of the metric and potential
//! at one point. A [`BaseGeometry`] built with metric order `n` carries
//! Christoffel symbols and the Faraday tensor to order `n - 1` and curvature
//! to order `n - 2`, so quantities that need one more derivative (Bianchi,
//! conservation) use `n = 3`.

use std::f64::consts::PI;

use crate::conventions::{Conventions, StressEnergySign};
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::spacetime::SpacetimeModel;
use crate::tensor::{self, Arr3, Arr4, Mat4, Vec4, DIM};

/// Curvature jets, present when the metric order is at least 2.
#[derive(Debug, Clone)]
pub struct Curvature {
    /// `riemann[i][j][k][l] = R^i_jkl`.
    pub riemann: Arr4<Jet>,
    pub ricci: Mat4<Jet>,
    pub scalar: Jet,
    /// `G_ij = R_ij - ½ R g_ij`.
    pub einstein: Mat4<Jet>,
}

#[derive(Debug, Clone)]
pub struct BaseGeometry {
    pub x: [f64; DIM],
    pub order: usize,
    pub conventions: Conventions,
    pub c: f64,
    pub k: f64,
    pub g: Mat4<Jet>,
    pub ginv: Mat4<Jet>,
    /// `gamma[i][j][k] = Γ^i_jk`.
    pub gamma: Arr3<Jet>,
    pub potential: Vec4<Jet>,
    /// `F_ij`.
    pub f_lower: Mat4<Jet>,
    /// `F^i_j = g^ih F_hj`.
    pub f_mixed: Mat4<Jet>,
    /// `F^ij`.
    pub f_upper: Mat4<Jet>,
    pub curvature: Option<Curvature>,
}

fn zeros<const N: usize>(like: &Jet) -> [Jet; N] {
    std::array::from_fn(|_| like.clone())
}

fn mat_zero(like: &Jet) -> Mat4<Jet> {
    std::array::from_fn(|_| zeros(like))
}

/// `a^{i h} b_{h j}` style contraction over the middle index.
fn matmul(a: &Mat4<Jet>, b: &Mat4<Jet>) -> Mat4<Jet> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut acc = &a[i][0] * &b[0][j];
            for h in 1..DIM {
                acc += &a[i][h] * &b[h][j];
            }
            acc
        })
    })
}

impl BaseGeometry {
    pub fn new(model: &SpacetimeModel, x: &[f64; DIM], order: usize) -> Result<Self> {
        Self::with_conventions(model, x, order, Conventions::default())
    }

    pub fn with_conventions(
        model: &SpacetimeModel,
        x: &[f64; DIM],
        order: usize,
        conventions: Conventions,
    ) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::Config(format!("base geometry needs metric order 1..=3, got {order}")));
        }
        let g = model.metric_jet(x, order)?;
        let ginv = tensor::invert(&g)?;
        let low = order - 1;
        // dg[h][j][k] = ∂_k g_hj
        let dg: Arr3<Jet> =
            std::array::from_fn(|h| std::array::from_fn(|j| std::array::from_fn(|k| g[h][j].partial(k))));
        let like = Jet::zero(low, DIM);
        let mut gamma: Arr3<Jet> = std::array::from_fn(|_| mat_zero(&like));
        for j in 0..DIM {
            for kk in j..DIM {
                let lowered: Vec<Jet> = (0..DIM)
                    .map(|h| (&dg[h][j][kk] + &dg[h][kk][j] - &dg[j][kk][h]) * 0.5)
                    .collect();
                for i in 0..DIM {
                    let mut acc = &ginv[i][0] * &lowered[0];
                    for h in 1..DIM {
                        acc += &ginv[i][h] * &lowered[h];
                    }
                    gamma[i][kk][j] = acc.clone();
                    gamma[i][j][kk] = acc;
                }
            }
        }

        let potential = model.potential_jet(x, order)?;
        let mut f_lower = mat_zero(&like);
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                let f = potential[j].partial(i) - potential[i].partial(j);
                f_lower[j][i] = -&f;
                f_lower[i][j] = f;
            }
        }
        let f_mixed = matmul(&ginv, &f_lower);
        let f_upper = matmul(&f_mixed, &ginv);

        let mut geo = BaseGeometry {
            x: *x,
            order,
            conventions,
            c: model.c,
            k: model.k,
            g,
            ginv,
            gamma,
            potential,
            f_lower,
            f_mixed,
            f_upper,
            curvature: None,
        };
        if order >= 2 {
            geo.curvature = Some(geo.compute_curvature());
        }
        Ok(geo)
    }

    fn compute_curvature(&self) -> Curvature {
        let gm = &self.gamma;
        let like = Jet::zero(self.order - 2, DIM);
        let mut riemann: Arr4<Jet> = std::array::from_fn(|_| std::array::from_fn(|_| mat_zero(&like)));
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in (k + 1)..DIM {
                        let mut acc = gm[i][j][l].partial(k) - gm[i][j][k].partial(l);
                        for m in 0..DIM {
                            acc += &gm[i][k][m] * &gm[m][j][l];
                            acc -= &gm[i][l][m] * &gm[m][j][k];
                        }
                        riemann[i][j][l][k] = -&acc;
                        riemann[i][j][k][l] = acc;
                    }
                }
            }
        }
        let ricci: Mat4<Jet> = std::array::from_fn(|j| {
            std::array::from_fn(|l| {
                let mut acc = riemann[0][j][0][l].clone();
                for i in 1..DIM {
                    acc += &riemann[i][j][i][l];
                }
                acc
            })
        });
        let mut scalar = like.clone();
        for j in 0..DIM {
            for l in 0..DIM {
                scalar += &self.ginv[j][l] * &ricci[j][l];
            }
        }
        let einstein = std::array::from_fn(|i| {
            std::array::from_fn(|j| &ricci[i][j] - &(&scalar * &self.g[i][j]) * 0.5)
        });
        Curvature {
            riemann,
            ricci,
            scalar,
            einstein,
        }
    }

    pub fn curvature(&self) -> Result<&Curvature> {
        self.curvature
            .as_ref()
            .ok_or_else(|| Error::Config("curvature needs metric order >= 2".into()))
    }

    /// `F_lm F^lm`.
    pub fn f_squared(&self) -> Jet {
        let mut acc = &self.f_lower[0][0] * &self.f_upper[0][0];
        for l in 0..DIM {
            for m in 0..DIM {
                if l + m > 0 {
                    acc += &self.f_lower[l][m] * &self.f_upper[l][m];
                }
            }
        }
        acc
    }

    /// Electromagnetic stress-energy `T_ij` (order `n - 1`).
    pub fn em_stress_energy(&self) -> Mat4<Jet> {
        let sign = self.conventions.stress_energy.factor();
        let f2 = self.f_squared();
        // F_j^l = F_jm g^ml
        let f_down_up = matmul(&self.f_lower, &self.ginv);
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut acc = &(&self.g[i][j] * &f2) * 0.25;
                for l in 0..DIM {
                    acc -= &self.f_lower[i][l] * &f_down_up[j][l];
                }
                acc * (sign / (4.0 * PI))
            })
        })
    }

    /// `G_ij - κ T_ij` with coupling `κ`.
    fn einstein_minus(&self, coupling: f64) -> Result<Mat4<Jet>> {
        let curv = self.curvature()?;
        let t = self.em_stress_energy();
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| &curv.einstein[i][j] - &(&t[i][j] * coupling))
        }))
    }

    /// Classical Einstein-Maxwell combination `G_ij - (8πk/c⁴) T_ij`.
    pub fn classical_einstein_maxwell(&self) -> Result<Mat4<Jet>> {
        self.einstein_minus(8.0 * PI * self.k / self.c.powi(4))
    }

    /// Field-equation tensor obtained by varying the metric in
    /// `∫ (r + (3α²/2) F_ij F^ij) √-g d⁴x`: `G_ij - 12πα² T_ij`. At
    /// `α = α*` it coincides with [`Self::classical_einstein_maxwell`].
    pub fn variational_einstein(&self, alpha: f64) -> Result<Mat4<Jet>> {
        self.einstein_minus(12.0 * PI * alpha * alpha)
    }

    /// Raises both indices of a covariant 2-tensor.
    pub fn raise2(&self, t: &Mat4<Jet>) -> Mat4<Jet> {
        matmul(&matmul(&self.ginv, t), &self.ginv)
    }

    /// `∇_j S^ij = ∂_j S^ij + Γ^i_mj S^mj + Γ^j_mj S^im` at the point. `s`
    /// must carry at least first derivatives.
    pub fn covariant_divergence(&self, s: &Mat4<Jet>) -> Result<Vec4<f64>> {
        if s[0][0].order() < 1 {
            return Err(Error::Config(
                "covariant divergence needs a field with first derivatives".into(),
            ));
        }
        let gv = tensor::values3(&self.gamma);
        let sv = tensor::values_mat(s);
        Ok(std::array::from_fn(|i| {
            let mut acc = 0.0;
            for j in 0..DIM {
                acc += s[i][j].d1(j);
                for m in 0..DIM {
                    acc += gv[i][m][j] * sv[m][j] + gv[j][m][j] * sv[i][m];
                }
            }
            acc
        }))
    }

    /// Cyclic sum `∇_i F_jk + ∇_k F_ij + ∇_j F_ki` (needs order >= 2).
    pub fn maxwell_homogeneous(&self) -> Result<Arr3<f64>> {
        if self.order < 2 {
            return Err(Error::Config("Maxwell residuals need metric order >= 2".into()));
        }
        let gv = tensor::values3(&self.gamma);
        let fv = tensor::values_mat(&self.f_lower);
        let cov = |i: usize, j: usize, k: usize| -> f64 {
            let mut acc = self.f_lower[j][k].d1(i);
            for m in 0..DIM {
                acc -= gv[m][i][j] * fv[m][k] + gv[m][i][k] * fv[j][m];
            }
            acc
        };
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| cov(i, j, k) + cov(k, i, j) + cov(j, k, i)))
        }))
    }

    /// Current `J^i = -(c/4π) ∇_j F^ij`, with the divergence taken in the
    /// densitized form `(1/√-g) ∂_j(√-g F^ij)`.
    pub fn maxwell_current(&self) -> Result<Vec4<f64>> {
        if self.order < 2 {
            return Err(Error::Config("Maxwell residuals need metric order >= 2".into()));
        }
        let sqrt_g = (-tensor::det(&self.g)).sqrt()?;
        let sq = sqrt_g.value();
        Ok(std::array::from_fn(|i| {
            let mut div = 0.0;
            for j in 0..DIM {
                div += (&sqrt_g * &self.f_upper[i][j]).d1(j);
            }
            -self.c / (4.0 * PI) * div / sq
        }))
    }

    /// Acceleration of a test charge with `q/(mc²) = q_over_m` and
    /// unit-speed velocity `y`: `-Γ^i_jk y^j y^k + (q/mc²) F^i_j y^j`.
    pub fn classical_lorentz_rhs(&self, y: &[f64; DIM], q_over_m: f64) -> Vec4<f64> {
        let gv = tensor::values3(&self.gamma);
        let fm = tensor::values_mat(&self.f_mixed);
        std::array::from_fn(|i| {
            let mut a = 0.0;
            for j in 0..DIM {
                a += q_over_m * fm[i][j] * y[j];
                for k in 0..DIM {
                    a -= gv[i][j][k] * y[j] * y[k];
                }
            }
            a
        })
    }

    pub fn metric_values(&self) -> Mat4<f64> {
        tensor::values_mat(&self.g)
    }

    /// `R_ijkl = g_im R^m_jkl` values.
    pub fn riemann_lower(&self) -> Result<Arr4<f64>> {
        let r = &self.curvature()?.riemann;
        let g = self.metric_values();
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| {
                    std::array::from_fn(|l| (0..DIM).map(|m| g[i][m] * r[m][j][k][l].value()).sum())
                })
            })
        }))
    }
}

/// Largest violation of the pair symmetries of `R_ijkl` and of the first
/// Bianchi identity, in that order.
pub fn riemann_symmetry_residuals(r: &Arr4<f64>) -> (f64, f64) {
    let mut sym: f64 = 0.0;
    let mut bianchi: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let v = r[i][j][k][l];
                    sym = sym
                        .max((v + r[j][i][k][l]).abs())
                        .max((v + r[i][j][l][k]).abs())
                        .max((v - r[k][l][i][j]).abs());
                    bianchi = bianchi.max((v + r[i][k][l][j] + r[i][l][j][k]).abs());
                }
            }
        }
    }
    (sym, bianchi)
}

impl StressEnergySign {
    pub fn describe(self) -> &'static str {
        match self {
            StressEnergySign::Landau => "T_ij = (1/4pi)(-F_il F_j^l + g_ij F^2/4)",
            StressEnergySign::Flipped => "T_ij = -(1/4pi)(-F_il F_j^l + g_ij F^2/4)",
        }
    }
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
    fn schwarzschild_christoffel() {
        let m = model("schwarzschild", &[("M", 1.0)]);
        let b = BaseGeometry::new(&m, &[0.0, 10.0, std::f64::consts::FRAC_PI_2, 0.0], 2).unwrap();
        assert_relative_eq!(b.gamma[1][0][0].value(), 0.008, epsilon = 1e-15);
        let c = b.curvature().unwrap();
        for j in 0..4 {
            for l in 0..4 {
                assert!(c.ricci[j][l].value().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn uniform_field_faraday() {
        let m = model("uniform_field", &[("E0", 0.1)]);
        let b = BaseGeometry::new(&m, &[0.0, 0.3, 0.0, 0.0], 1).unwrap();
        assert_relative_eq!(b.f_lower[0][1].value(), 0.1, epsilon = 1e-15);
        assert_relative_eq!(b.f_lower[1][0].value(), -0.1, epsilon = 1e-15);
        assert_relative_eq!(b.f_mixed[1][0].value(), 0.1, epsilon = 1e-15);
        assert_relative_eq!(b.f_squared().value(), -0.02, epsilon = 1e-15);
        let a = b.classical_lorentz_rhs(&[1.0, 0.0, 0.0, 0.0], 1.0);
        assert_relative_eq!(a[1], 0.1, epsilon = 1e-15);
    }

    #[test]
    fn rn_stress_energy_and_field_equations() {
        let m = model("reissner_nordstrom", &[("M", 1.0), ("Q", 0.3)]);
        let b = BaseGeometry::new(&m, &[0.0, 5.0, std::f64::consts::FRAC_PI_2, 0.0], 2).unwrap();
        let t = b.em_stress_energy();
        assert_relative_eq!(t[0][0].value(), 3.45837325140965e-6, max_relative = 1e-12);
        assert_relative_eq!(b.f_lower[0][1].value(), 0.012, epsilon = 1e-15);
        let cem = b.classical_einstein_maxwell().unwrap();
        for row in &cem {
            for v in row {
                assert!(v.value().abs() < 1e-14);
            }
        }
    }
}
