//! Residual checks of the geometric identities at seeded sample points.
//!
//! Every check maps a sample point to a non-negative residual. Residuals of
//! quantities that can be large are scaled by `max(1, |reference|)`, so a
//! tolerance acts as an absolute bound near unit scale and a relative bound
//! beyond it.

use std::cell::OnceCell;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base_geom::{riemann_symmetry_residuals, BaseGeometry};
use crate::bundle_geom::{generalized_einstein, levi_civita_tidal, ys, BundleFrame, BundlePoint};
use crate::conventions::{Conventions, DivergenceFrame};
use crate::dynamics::worldline_rhs;
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::spacetime::{SampleBox, SpacetimeModel};
use crate::tensor::{self, Mat4, Vec4, DIM};
use crate::tm_metric::{self, FiberQuadrature};

/// Tolerances by the highest derivative order a check uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tier1: f64,
    pub tier2: f64,
    pub tier3: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tier1: 1e-10,
            tier2: 1e-9,
            tier3: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tier {
    One,
    Two,
    Three,
    /// Tolerance fixed by the identity itself.
    Fixed(f64),
    /// Reported without a pass/fail bound.
    Info,
}

impl Tier {
    fn tolerance(self, t: &Tolerances) -> Option<f64> {
        match self {
            Tier::One => Some(t.tier1),
            Tier::Two => Some(t.tier2),
            Tier::Three => Some(t.tier3),
            Tier::Fixed(v) => Some(v),
            Tier::Info => None,
        }
    }
}

/// Whether the field-equation checks run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldEquations {
    /// Only for models known to solve the source-free Einstein-Maxwell
    /// system.
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    pub x: [f64; DIM],
    pub y: [f64; DIM],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub check: String,
    pub description: String,
    pub model: String,
    pub seed: u64,
    pub alpha: f64,
    /// `None` for informational checks.
    pub tolerance: Option<f64>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub pass: bool,
    pub conventions: Conventions,
    pub points: Vec<PointResidual>,
}

impl ResidualReport {
    fn from_points(
        spec: &CheckSpec,
        ctx: &SuiteConfig,
        model: &SpacetimeModel,
        points: Vec<PointResidual>,
    ) -> ResidualReport {
        let values: Vec<f64> = points.iter().filter_map(|p| p.residual).collect();
        let max_residual = values.iter().fold(0.0f64, |m, v| m.max(*v));
        let mean_residual = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        let tolerance = spec.tier.tolerance(&ctx.tolerances);
        let clean = points.iter().all(|p| p.error.is_none() && p.residual.is_some_and(f64::is_finite));
        let pass = match tolerance {
            Some(t) => clean && max_residual <= t,
            None => true,
        };
        ResidualReport {
            check: spec.name.to_string(),
            description: spec.description.to_string(),
            model: model.name.clone(),
            seed: ctx.seed,
            alpha: model.alpha,
            tolerance,
            max_residual,
            mean_residual,
            pass,
            conventions: ctx.conventions,
            points,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub field_equations: FieldEquations,
    pub conventions: Conventions,
    /// Check names to run; all when `None`.
    pub selection: Option<Vec<String>>,
    /// Overrides the model's sampling box.
    pub sample_box: Option<SampleBox>,
    pub fiber_quadrature: FiberQuadrature,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            samples: 10,
            tolerances: Tolerances::default(),
            field_equations: FieldEquations::Auto,
            conventions: Conventions::default(),
            selection: None,
            sample_box: None,
            fiber_quadrature: FiberQuadrature::default(),
        }
    }
}

/// Seeded bundle points: `x` uniform in the box, `y` a random boost of the
/// static unit observer with rapidity at most 2.
pub fn sample_points(model: &SpacetimeModel, bx: &SampleBox, n: usize, seed: u64) -> Vec<Result<BundlePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: [f64; DIM] = std::array::from_fn(|i| {
                let [lo, hi] = bx[i];
                if hi > lo {
                    rng.gen_range(lo..hi)
                } else {
                    lo
                }
            });
            let rapidity: f64 = rng.gen_range(0.0..2.0);
            let cos_t: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let sin_t = (1.0 - cos_t * cos_t).sqrt();
            let n = [sin_t * phi.cos(), sin_t * phi.sin(), cos_t];
            let frame = orthonormal_frame(model, &x)?;
            let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
            let y = std::array::from_fn(|i| {
                ch * frame[0][i] + sh * (n[0] * frame[1][i] + n[1] * frame[2][i] + n[2] * frame[3][i])
            });
            Ok(BundlePoint::new(x, y))
        })
        .collect()
}

/// Gram-Schmidt frame from the coordinate basis; `frame[0]` is the static
/// observer `∂_0 / √g_00`.
pub fn orthonormal_frame(model: &SpacetimeModel, x: &[f64; DIM]) -> Result<Mat4<f64>> {
    let g = model.metric_values(x)?;
    let ip = |a: &[f64; DIM], b: &[f64; DIM]| -> f64 {
        (0..DIM).flat_map(|i| (0..DIM).map(move |j| (i, j))).map(|(i, j)| g[i][j] * a[i] * b[j]).sum()
    };
    let mut frame = [[0.0; DIM]; DIM];
    for k in 0..DIM {
        let mut v = [0.0; DIM];
        v[k] = 1.0;
        for a in 0..k {
            let sign = if a == 0 { 1.0 } else { -1.0 };
            let c = sign * ip(&v, &frame[a]);
            for i in 0..DIM {
                v[i] -= c * frame[a][i];
            }
        }
        let n2 = ip(&v, &v);
        let ok = if k == 0 { n2 > 0.0 } else { n2 < 0.0 };
        if !ok {
            return Err(Error::Singular(format!(
                "cannot build an orthonormal frame at {x:?}: coordinate direction {k} has g = {n2:e}"
            )));
        }
        let s = n2.abs().sqrt();
        frame[k] = v.map(|c| c / s);
    }
    Ok(frame)
}

/// Lazily built geometry shared by the checks at one sample point.
struct PointCache<'a> {
    model: &'a SpacetimeModel,
    conventions: Conventions,
    quad: FiberQuadrature,
    point: BundlePoint,
    point_index: u64,
    seed: u64,
    base: OnceCell<Result<BaseGeometry>>,
    frame: OnceCell<Result<BundleFrame>>,
}

impl PointCache<'_> {
    fn alpha(&self) -> f64 {
        self.model.alpha
    }

    fn base(&self) -> Result<&BaseGeometry> {
        self.base
            .get_or_init(|| BaseGeometry::with_conventions(self.model, &self.point.x, 3, self.conventions))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn frame(&self) -> Result<&BundleFrame> {
        self.frame
            .get_or_init(|| {
                BundleFrame::with_conventions(self.model, self.point, self.alpha(), 3, self.conventions)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn frame_at(&self, y: [f64; DIM], alpha: f64) -> Result<BundleFrame> {
        BundleFrame::with_conventions(self.model, BundlePoint::new(self.point.x, y), alpha, 3, self.conventions)
    }
}

fn scaled(diff: f64, reference: f64) -> f64 {
    diff / reference.abs().max(1.0)
}

fn diff_scaled(a: &[f64], b: &[f64]) -> f64 {
    scaled(tensor::max_abs_diff(a, b), tensor::max_abs(a).max(tensor::max_abs(b)))
}

pub struct CheckSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub tier: Tier,
    /// Runs only when field-equation checks are enabled.
    pub field_equation: bool,
    eval: fn(&PointCache) -> Result<f64>,
}

/// All checks in suite order.
pub fn registry() -> &'static [CheckSpec] {
    &REGISTRY
}

static REGISTRY: [CheckSpec; 33] = [
    CheckSpec {
        name: "metric_symmetry",
        description: "g_ij = g_ji",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let g = c.base()?.metric_values();
            let t: Vec<f64> = (0..DIM).flat_map(|i| (0..DIM).map(move |j| (i, j))).map(|(i, j)| g[i][j] - g[j][i]).collect();
            Ok(tensor::max_abs(&t))
        },
    },
    CheckSpec {
        name: "christoffel_symmetry",
        description: "Γ^i_jk = Γ^i_kj",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let gm = tensor::values3(&c.base()?.gamma);
            let mut worst: f64 = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        worst = worst.max((gm[i][j][k] - gm[i][k][j]).abs());
                    }
                }
            }
            Ok(worst)
        },
    },
    CheckSpec {
        name: "riemann_symmetries",
        description: "R_ijkl = -R_jikl = -R_ijlk = R_klij",
        tier: Tier::Two,
        field_equation: false,
        eval: |c| {
            let r = c.base()?.riemann_lower()?;
            let (sym, _) = riemann_symmetry_residuals(&r);
            Ok(scaled(sym, tensor::max_abs(&tensor::flat4(&r))))
        },
    },
    CheckSpec {
        name: "first_bianchi",
        description: "R_ijkl + R_iklj + R_iljk = 0",
        tier: Tier::Two,
        field_equation: false,
        eval: |c| {
            let r = c.base()?.riemann_lower()?;
            let (_, b) = riemann_symmetry_residuals(&r);
            Ok(scaled(b, tensor::max_abs(&tensor::flat4(&r))))
        },
    },
    CheckSpec {
        name: "contracted_bianchi",
        description: "∇_j G^ij = 0",
        tier: Tier::Three,
        field_equation: false,
        eval: |c| {
            let b = c.base()?;
            let g_up = b.raise2(&b.curvature()?.einstein);
            Ok(tensor::max_abs(&b.covariant_divergence(&g_up)?))
        },
    },
    CheckSpec {
        name: "maxwell_homogeneous",
        description: "∇_i F_jk + ∇_k F_ij + ∇_j F_ki = 0",
        tier: Tier::Two,
        field_equation: false,
        eval: |c| Ok(tensor::max_abs(&tensor::flat3(&c.base()?.maxwell_homogeneous()?))),
    },
    CheckSpec {
        name: "maxwell_current",
        description: "source-free field: J^i = -(c/4π) ∇_j F^ij = 0",
        tier: Tier::Two,
        field_equation: true,
        eval: |c| Ok(tensor::max_abs(&c.base()?.maxwell_current()?)),
    },
    CheckSpec {
        name: "em_trace_free",
        description: "g^ij T_ij = 0",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let b = c.base()?;
            let t = tensor::values_mat(&b.em_stress_energy());
            let gi = tensor::values_mat(&b.ginv);
            let mut tr = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    tr += gi[i][j] * t[i][j];
                }
            }
            Ok(tr.abs())
        },
    },
    CheckSpec {
        name: "spray_consistency",
        description: "worldline acceleration equals -2 G^i",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let f = c.frame()?;
            let direct = worldline_rhs(c.model, &c.point.x, &c.point.y, c.alpha())?;
            Ok(diff_scaled(&direct, &f.worldline_acceleration()))
        },
    },
    CheckSpec {
        name: "lorentz_orthogonality",
        description: "g_ij B^i y^j = 0",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let f = c.frame()?;
            let b = f.spray_b_values();
            let g = tensor::values_mat(&f.g);
            let mut acc = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    acc += g[i][j] * b[i] * c.point.y[j];
                }
            }
            Ok(acc.abs())
        },
    },
    CheckSpec {
        name: "connection_from_spray",
        description: "closed-form N^i_j equals ∂G^i/∂y^j",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let f = c.frame()?;
            let from_spray = f.connection_from_spray();
            let mut worst: f64 = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    worst = worst.max(crate::bundle_geom::max_diff_exact_part(&f.connection[i][j], &from_spray[i][j]));
                }
            }
            Ok(scaled(worst, tensor::max_abs(&tensor::flat_mat(&f.connection_values()))))
        },
    },
    CheckSpec {
        name: "homogeneity_ladder",
        description: "y -> 2y scaling of G^i (2), N^i_j (1), G^i_jk (0), E^i_j (2), R_jl (0), B scalar (2) and its Hessian (0)",
        tier: Tier::Two,
        field_equation: false,
        eval: |c| homogeneity_residual(c, HomogeneityDegrees::CORRECT),
    },
    CheckSpec {
        name: "fiber_derivatives_closed_form",
        description: "fiber jets of B^i match the closed forms of B^i_j and B^i_jk",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let f = c.frame()?;
            let d = f.fiber_derivs_b()?;
            let (first, second) = f.fiber_derivs_b_closed();
            Ok(diff_scaled(&tensor::flat_mat(&d.first), &tensor::flat_mat(&first))
                .max(diff_scaled(&tensor::flat3(&d.second), &tensor::flat3(&second))))
        },
    },
    CheckSpec {
        name: "fiber_euler_identities",
        description: "B^i_j y^j = 2B^i, B^i_jk y^k = B^i_j, B^i_jkl y^l = 0",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let f = c.frame()?;
            let d = f.fiber_derivs_b()?;
            let b = f.spray_b_values();
            let y = c.point.y;
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for i in 0..DIM {
                let s: f64 = (0..DIM).map(|j| d.first[i][j] * y[j]).sum();
                worst = worst.max((s - 2.0 * b[i]).abs());
                scale = scale.max(b[i].abs());
                for j in 0..DIM {
                    let s: f64 = (0..DIM).map(|k| d.second[i][j][k] * y[k]).sum();
                    worst = worst.max((s - d.first[i][j]).abs());
                    scale = scale.max(d.first[i][j].abs());
                    for k in 0..DIM {
                        let s: f64 = (0..DIM).map(|l| d.third[i][j][k][l] * y[l]).sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
            Ok(scaled(worst, scale))
        },
    },
    CheckSpec {
        name: "b_trace",
        description: "B^j_ij = 0, hence N^j_{i·j} = Γ^j_ij",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let d = c.frame()?.fiber_derivs_b()?;
            let t: Vec<f64> = (0..DIM).map(|i| (0..DIM).map(|j| d.second[j][i][j]).sum()).collect();
            Ok(tensor::max_abs(&t))
        },
    },
    CheckSpec {
        name: "berwald_coefficients",
        description: "G^i_jk symmetric and G^i_jk y^k = N^i_j",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let f = c.frame()?;
            let gb = f.berwald_coeffs()?;
            let n = f.connection_values();
            let mut worst: f64 = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    let s: f64 = (0..DIM).map(|k| gb[i][j][k] * c.point.y[k]).sum();
                    worst = worst.max((s - n[i][j]).abs());
                    for k in 0..DIM {
                        worst = worst.max((gb[i][j][k] - gb[i][k][j]).abs());
                    }
                }
            }
            Ok(scaled(worst, tensor::max_abs(&tensor::flat_mat(&n))))
        },
    },
    CheckSpec {
        name: "adapted_log_volume",
        description: "δ_i ln √-g = Γ^j_ij",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let f = c.frame()?;
            let ln_vol = (-tensor::det(&f.g)).sqrt()?.ln()?;
            let mut worst: f64 = 0.0;
            for i in 0..DIM {
                let lhs = f.adapted_derivative(&ln_vol, i).value();
                let rhs: f64 = (0..DIM).map(|j| f.gamma[j][i][j].value()).sum();
                worst = worst.max(scaled((lhs - rhs).abs(), rhs));
            }
            Ok(worst)
        },
    },
    CheckSpec {
        name: "tidal_reconstruction",
        description: "E^i_k = R_j^i_kl y^j y^l and E^i_i = -R_jl y^j y^l",
        tier: Tier::Two,
        field_equation: false,
        eval: |c| {
            let f = c.frame()?;
            let e = f.tidal();
            let dc = f.d_curvature()?;
            let y = c.point.y;
            let mut rebuilt = [[0.0; DIM]; DIM];
            for i in 0..DIM {
                for k in 0..DIM {
                    for j in 0..DIM {
                        for l in 0..DIM {
                            rebuilt[i][k] += dc.tensor[j][i][k][l] * y[j] * y[l];
                        }
                    }
                }
            }
            let trace: f64 = (0..DIM).map(|i| e[i][i]).sum();
            let mut contracted = 0.0;
            for j in 0..DIM {
                for l in 0..DIM {
                    contracted -= dc.ricci[j][l] * y[j] * y[l];
                }
            }
            Ok(diff_scaled(&tensor::flat_mat(&e), &tensor::flat_mat(&rebuilt))
                .max(scaled((trace - contracted).abs(), trace)))
        },
    },
    CheckSpec {
        name: "alpha_zero_collapse",
        description: "at α = 0, N, G^i_jk, E, R_jl and R reduce to Levi-Civita quantities",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let f = c.frame_at(c.point.y, 0.0)?;
            let b = &f.base;
            let y = c.point.y;
            let gamma = tensor::values3(&b.gamma);
            let n0: Mat4<f64> = std::array::from_fn(|i| {
                std::array::from_fn(|j| (0..DIM).map(|k| gamma[i][j][k] * y[k]).sum())
            });
            let curv = b.curvature()?;
            let dc = f.d_curvature()?;
            let r_n = diff_scaled(&tensor::flat_mat(&f.connection_values()), &tensor::flat_mat(&n0));
            let r_g = diff_scaled(&tensor::flat3(&f.berwald_coeffs()?), &tensor::flat3(&gamma));
            let r_e = diff_scaled(&tensor::flat_mat(&f.tidal()), &tensor::flat_mat(&levi_civita_tidal(b, &y)?));
            let r_ric = diff_scaled(&tensor::flat_mat(&dc.ricci), &tensor::flat_mat(&tensor::values_mat(&curv.ricci)));
            let r_s = scaled((dc.scalar - curv.scalar.value()).abs(), curv.scalar.value());
            Ok(r_n.max(r_g).max(r_e).max(r_ric).max(r_s))
        },
    },
    CheckSpec {
        name: "theorem1_quad_y_independence",
        description: "-½ g^jk (B^i_h B^h_i)_{·jk} agrees at three timelike y",
        tier: Tier::Two,
        field_equation: false,
        eval: |c| {
            let static_y = orthonormal_frame(c.model, &c.point.x)?[0];
            let mixed = std::array::from_fn(|i| 2.0 * c.point.y[i] + static_y[i]);
            let q0 = c.frame()?.theorem1()?.quad_term;
            let q1 = c.frame_at(static_y, c.alpha())?.theorem1()?.quad_term;
            let q2 = c.frame_at(mixed, c.alpha())?.theorem1()?.quad_term;
            let spread = q0.max(q1).max(q2) - q0.min(q1).min(q2);
            Ok(scaled(spread, q0))
        },
    },
    CheckSpec {
        name: "theorem1_quad_closed_form",
        description: "-½ g^jk (B^i_h B^h_i)_{·jk} = (3α²/2) F_ij F^ij",
        tier: Tier::Two,
        field_equation: false,
        eval: |c| {
            let t = c.frame()?.theorem1()?;
            Ok(scaled((t.quad_term - t.quad_closed_form).abs(), t.quad_closed_form))
        },
    },
    CheckSpec {
        name: "theorem1_residual",
        description: "R - r - div_term - quad_term = 0",
        tier: Tier::Two,
        field_equation: false,
        eval: |c| {
            let t = c.frame()?.theorem1()?;
            Ok(scaled(t.residual.abs(), t.bundle_scalar))
        },
    },
    CheckSpec {
        name: "theorem1_residual_alternate_frame",
        description: "decomposition residual with the divergence taken along the full-connection frame",
        tier: Tier::Info,
        field_equation: false,
        eval: |c| {
            let conv = Conventions {
                divergence: match c.conventions.divergence {
                    DivergenceFrame::LeviCivita => DivergenceFrame::Full,
                    DivergenceFrame::Full => DivergenceFrame::LeviCivita,
                },
                ..c.conventions
            };
            let f = BundleFrame::with_conventions(c.model, c.point, c.alpha(), 3, conv)?;
            let t = f.theorem1()?;
            Ok(scaled(t.residual.abs(), t.bundle_scalar))
        },
    },
    CheckSpec {
        name: "d_ricci_index_contraction",
        description: "difference between R_jl and the contraction R_j^i_li",
        tier: Tier::Info,
        field_equation: false,
        eval: |c| {
            let dc = c.frame()?.d_curvature()?;
            let contracted: Mat4<f64> = std::array::from_fn(|j| {
                std::array::from_fn(|l| (0..DIM).map(|i| dc.tensor[j][i][l][i]).sum())
            });
            Ok(diff_scaled(&tensor::flat_mat(&dc.ricci), &tensor::flat_mat(&contracted)))
        },
    },
    CheckSpec {
        name: "d_ricci_berwald_contraction",
        description: "difference between R_jl and (R^i_li)_{·j} from the N-curvature",
        tier: Tier::Info,
        field_equation: false,
        eval: |c| {
            let f = c.frame()?;
            let dc = f.d_curvature()?;
            Ok(diff_scaled(&tensor::flat_mat(&dc.ricci), &tensor::flat_mat(&f.berwald_ricci()?)))
        },
    },
    CheckSpec {
        name: "generalized_einstein",
        description: "G_ij - 12πα² T_ij = 0",
        tier: Tier::Two,
        field_equation: true,
        eval: |c| {
            let v = tensor::values_mat(&c.base()?.variational_einstein(c.alpha())?);
            Ok(tensor::max_abs(&tensor::flat_mat(&v)))
        },
    },
    CheckSpec {
        name: "einstein_vs_classical",
        description: "difference between G_ij - 12πα² T_ij and G_ij - (8πk/c⁴) T_ij",
        tier: Tier::Info,
        field_equation: false,
        eval: |c| {
            let b = c.base()?;
            let v = tensor::values_mat(&b.variational_einstein(c.alpha())?);
            let k = tensor::values_mat(&b.classical_einstein_maxwell()?);
            Ok(tensor::max_abs_diff(&tensor::flat_mat(&v), &tensor::flat_mat(&k)))
        },
    },
    CheckSpec {
        name: "einstein_literal_assembly",
        description: "difference between the variational field tensor and sym(R_jl) - ½ R̃ g_jl + B_{·jl}",
        tier: Tier::Info,
        field_equation: false,
        eval: |c| Ok(generalized_einstein(c.frame()?)?.literal_difference),
    },
    CheckSpec {
        name: "fiber_metric_determinant",
        description: "det v = -det g",
        tier: Tier::Fixed(1e-12),
        field_equation: false,
        eval: |c| {
            let fm = tm_metric::fiber_metric(c.model, &c.point.x, None)?;
            Ok((fm.det_v + fm.det_g).abs() / fm.det_g.abs())
        },
    },
    CheckSpec {
        name: "fiber_ball_volume",
        description: "quadrature volume of the fiber ball is 1",
        tier: Tier::Fixed(1e-10),
        field_equation: false,
        eval: |c| {
            let ball = tm_metric::fiber_ball(c.model, &c.point.x)?;
            let vol = tm_metric::fiber_integral(&ball, c.quad, |_| Ok(1.0))?;
            Ok((vol.value - 1.0).abs())
        },
    },
    CheckSpec {
        name: "fiber_odd_integral",
        description: "integral of an odd function of y over the fiber ball vanishes",
        tier: Tier::One,
        field_equation: false,
        eval: |c| {
            let ball = tm_metric::fiber_ball(c.model, &c.point.x)?;
            let v = tm_metric::fiber_integral(&ball, c.quad, |y| Ok(y[0] + y[1] * y[2] * y[3]))?;
            Ok(v.value.abs())
        },
    },
    CheckSpec {
        name: "divergence_lift",
        description: "divergence of a horizontal lift equals the base divergence",
        tier: Tier::Two,
        field_equation: false,
        eval: |c| {
            let coeffs = polynomial_field_coefficients(c.seed, c.point_index);
            let (h, b) = tm_metric::lift_divergence(c.model, c.point, c.alpha(), |x| {
                Ok(polynomial_field(&coeffs, x))
            })?;
            Ok(scaled((h - b).abs(), b))
        },
    },
    CheckSpec {
        name: "conservation",
        description: "∇_j (G^ij - 12πα² T^ij) = 0",
        tier: Tier::Three,
        field_equation: true,
        eval: |c| Ok(tensor::max_abs(&conservation_residual_with(c.base()?, c.alpha())?)),
    },
];

/// Names of every registered check, in suite order.
pub fn check_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|c| c.name).collect()
}

/// Degrees asserted by the homogeneity ladder, in the order
/// `G^i, N^i_j, G^i_jk, E^i_j, R_jl, 𝓑, 𝓑_{·ij}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneityDegrees(pub [i32; 7]);

impl HomogeneityDegrees {
    /// Degrees that follow from `B^i` being of degree 2.
    pub const CORRECT: HomogeneityDegrees = HomogeneityDegrees([2, 1, 0, 2, 0, 2, 0]);
}

/// Largest scaled violation of `f(x, 2y) = 2^d f(x, y)` over the ladder.
fn homogeneity_residual(c: &PointCache, degrees: HomogeneityDegrees) -> Result<f64> {
    let f1 = c.frame()?;
    let f2 = c.frame_at(c.point.scaled(2.0).y, c.alpha())?;
    homogeneity_between(f1, &f2, degrees)
}

/// Homogeneity residuals between frames at `y` and `2y`, one per entry of
/// the ladder.
pub fn homogeneity_components(f1: &BundleFrame, f2: &BundleFrame, degrees: HomogeneityDegrees) -> Result<[f64; 7]> {
    let d = degrees.0;
    let check = |a: Vec<f64>, b: Vec<f64>, deg: i32| -> f64 {
        let s = 2f64.powi(deg);
        let a: Vec<f64> = a.iter().map(|v| v * s).collect();
        diff_scaled(&a, &b)
    };
    let (b1, h1) = f1.b_scalar_and_hessian()?;
    let (b2, h2) = f2.b_scalar_and_hessian()?;
    Ok([
        check(f1.spray_values().to_vec(), f2.spray_values().to_vec(), d[0]),
        check(tensor::flat_mat(&f1.connection_values()), tensor::flat_mat(&f2.connection_values()), d[1]),
        check(tensor::flat3(&f1.berwald_coeffs()?), tensor::flat3(&f2.berwald_coeffs()?), d[2]),
        check(tensor::flat_mat(&f1.tidal()), tensor::flat_mat(&f2.tidal()), d[3]),
        check(tensor::flat_mat(&f1.d_curvature()?.ricci), tensor::flat_mat(&f2.d_curvature()?.ricci), d[4]),
        check(vec![b1], vec![b2], d[5]),
        check(tensor::flat_mat(&h1), tensor::flat_mat(&h2), d[6]),
    ])
}

fn homogeneity_between(f1: &BundleFrame, f2: &BundleFrame, degrees: HomogeneityDegrees) -> Result<f64> {
    Ok(homogeneity_components(f1, f2, degrees)?.iter().fold(0.0, |m, v| m.max(*v)))
}

/// Coefficients of a random quadratic vector field, derived from the suite
/// seed and the point index.
fn polynomial_field_coefficients(seed: u64, index: u64) -> [[f64; 15]; DIM] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15 ^ index.wrapping_mul(0x2545_f491_4f6c_dd1d));
    std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

/// `Y^i = a_i + b_i·x + Σ c_i,jk x^j x^k` (upper-triangular quadratic part).
pub fn polynomial_field(coeffs: &[[f64; 15]; DIM], x: &Vec4<Jet>) -> Vec4<Jet> {
    std::array::from_fn(|i| {
        let c = &coeffs[i];
        let mut acc = Jet::constant(c[0], x[0].order(), x[0].nvars());
        let mut idx = 1;
        for j in 0..DIM {
            acc += &x[j] * c[idx];
            idx += 1;
        }
        for j in 0..DIM {
            for k in j..DIM {
                if idx < 15 {
                    acc += &(&x[j] * &x[k]) * c[idx];
                    idx += 1;
                }
            }
        }
        acc
    })
}

fn conservation_residual_with(base: &BaseGeometry, alpha: f64) -> Result<Vec4<f64>> {
    let up = base.raise2(&base.variational_einstein(alpha)?);
    base.covariant_divergence(&up)
}

/// `∇_j 𝒢^ij` with `𝒢_ij = G_ij - 12πα² T_ij`, using third metric
/// derivatives.
pub fn conservation_residual(model: &SpacetimeModel, x: &[f64; DIM], alpha: f64) -> Result<Vec4<f64>> {
    conservation_residual_with(&BaseGeometry::new(model, x, 3)?, alpha)
}

fn selected<'a>(config: &SuiteConfig, model: &SpacetimeModel) -> Result<Vec<&'a CheckSpec>> {
    if let Some(sel) = &config.selection {
        if let Some(bad) = sel.iter().find(|s| !REGISTRY.iter().any(|c| c.name == s.as_str())) {
            return Err(Error::Config(format!("unknown check `{bad}`")));
        }
    }
    let field_eq = match config.field_equations {
        FieldEquations::Auto => model.electrovacuum,
        FieldEquations::On => true,
        FieldEquations::Off => false,
    };
    Ok(REGISTRY
        .iter()
        .filter(|c| config.selection.as_ref().is_none_or(|s| s.iter().any(|n| n == c.name)))
        .filter(|c| !c.field_equation || field_eq)
        .collect())
}

/// Runs the selected checks at `config.samples` seeded points. Evaluation
/// failures are recorded per point and fail the affected check.
pub fn run_suite(model: &SpacetimeModel, config: &SuiteConfig) -> Result<Vec<ResidualReport>> {
    let checks = selected(config, model)?;
    let bx = config
        .sample_box
        .or(model.sample_box)
        .unwrap_or([[-1.0, 1.0]; DIM]);
    let points = sample_points(model, &bx, config.samples, config.seed);
    let per_point: Vec<Vec<PointResidual>> = points
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let p = match p {
                Ok(p) => *p,
                Err(e) => {
                    return checks
                        .iter()
                        .map(|_| PointResidual {
                            x: [f64::NAN; DIM],
                            y: [f64::NAN; DIM],
                            residual: None,
                            error: Some(e.to_string()),
                        })
                        .collect();
                }
            };
            let cache = PointCache {
                model,
                conventions: config.conventions,
                quad: config.fiber_quadrature,
                point: p,
                point_index: idx as u64,
                seed: config.seed,
                base: OnceCell::new(),
                frame: OnceCell::new(),
            };
            checks
                .iter()
                .map(|spec| match (spec.eval)(&cache) {
                    Ok(r) => PointResidual { x: p.x, y: p.y, residual: Some(r), error: None },
                    Err(e) => PointResidual { x: p.x, y: p.y, residual: None, error: Some(e.to_string()) },
                })
                .collect()
        })
        .collect();
    Ok(checks
        .iter()
        .enumerate()
        .map(|(ci, spec)| {
            let pts = per_point.iter().map(|row| row[ci].clone()).collect();
            ResidualReport::from_points(spec, config, model, pts)
        })
        .collect())
}

pub fn reports_to_json(reports: &[ResidualReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

pub fn reports_from_json(s: &str) -> Result<Vec<ResidualReport>> {
    serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
}

/// One row per report: summary columns without the per-point data.
pub fn reports_to_csv(reports: &[ResidualReport]) -> String {
    let mut out = String::from("check,model,seed,alpha,tolerance,max_residual,mean_residual,pass,points,errors\n");
    for r in reports {
        let errors = r.points.iter().filter(|p| p.error.is_some()).count();
        let tol = r.tolerance.map(crate::dynamics::format_sig17).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.check,
            r.model,
            r.seed,
            crate::dynamics::format_sig17(r.alpha),
            tol,
            crate::dynamics::format_sig17(r.max_residual),
            crate::dynamics::format_sig17(r.mean_residual),
            r.pass,
            r.points.len(),
            errors
        );
    }
    out
}

/// Fiber derivative helper shared with tests: `∂f/∂y^m` value.
pub fn fiber_partial(f: &Jet, m: usize) -> f64 {
    f.d1(ys(m))
}
