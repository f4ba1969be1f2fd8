//! Charged-particle worldlines as geodesics of the spray, worldline
//! deviation, and brute-force checks against neighbouring worldlines.
//!
//! Worldlines solve `dx/dt = y`, `dy^i/dt = -Γ^i_jk y^j y^k + α ‖y‖ F^i_j y^j`
//! with `α = q/(mc²)`. Deviations are carried in covariant first-order form
//! with `W = Dw/dt = dw/dt + N w`:
//!
//! ```text
//! dw^i/dt = W^i - N^i_j w^j
//! dW^i/dt = E^i_k w^k - N^i_k W^k
//! ```
//!
//! which is the exact linearization of the worldline flow.

use std::fmt::Write as _;

use serde::Serialize;

use crate::base_geom::BaseGeometry;
use crate::bundle_geom::{BundleFrame, BundlePoint};
use crate::error::{Error, Result};
use crate::ode::{self, StepControl};
use crate::spacetime::SpacetimeModel;
use crate::tensor::DIM;

/// Smallest `g(y, y)` tolerated along a worldline.
pub const NULL_CONE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorldlineState {
    pub t: f64,
    pub x: [f64; DIM],
    pub y: [f64; DIM],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationState {
    pub w: [f64; DIM],
    /// Covariant rate `Dw/dt`.
    pub big_w: [f64; DIM],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: [f64; DIM],
    pub y: [f64; DIM],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<DeviationState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories are never empty")
    }

    /// CSV with header `t,x0..x3,y0..y3[,w0..w3,W0..W3]`, 17 significant
    /// digits.
    pub fn to_csv(&self) -> String {
        let with_dev = self.samples.iter().any(|s| s.deviation.is_some());
        let mut out = String::from("t,x0,x1,x2,x3,y0,y1,y2,y3");
        if with_dev {
            out.push_str(",w0,w1,w2,w3,W0,W1,W2,W3");
        }
        out.push('\n');
        for s in &self.samples {
            let mut fields = vec![s.t];
            fields.extend(s.x);
            fields.extend(s.y);
            if let Some(d) = &s.deviation {
                fields.extend(d.w);
                fields.extend(d.big_w);
            }
            let line: Vec<String> = fields.iter().map(|v| format_sig17(*v)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

fn metric_norm2(g: &[[f64; DIM]; DIM], y: &[f64; DIM]) -> f64 {
    let mut acc = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            acc += g[i][j] * y[i] * y[j];
        }
    }
    acc
}

/// `L = √(g_ij y^i y^j) + α A_i y^i`.
pub fn randers_lagrangian(model: &SpacetimeModel, x: &[f64; DIM], y: &[f64; DIM], alpha: f64) -> Result<f64> {
    let g = model.metric_values(x)?;
    let n2 = metric_norm2(&g, y);
    if !(n2 > 0.0) {
        return Err(Error::Singular(format!("fiber vector is not timelike: g(y,y) = {n2:e}")));
    }
    let a = model.potential_values(x)?;
    Ok(n2.sqrt() + alpha * (0..DIM).map(|i| a[i] * y[i]).sum::<f64>())
}

/// `dy^i/dt = -Γ^i_jk y^j y^k + α ‖y‖ F^i_j y^j`.
pub fn worldline_rhs(model: &SpacetimeModel, x: &[f64; DIM], y: &[f64; DIM], alpha: f64) -> Result<[f64; DIM]> {
    let base = BaseGeometry::new(model, x, 1)?;
    let n2 = metric_norm2(&base.metric_values(), y);
    if !(n2 > NULL_CONE_GUARD) {
        return Err(Error::Singular(format!(
            "worldline approached the null cone: g(y,y) = {n2:e}"
        )));
    }
    Ok(base.classical_lorentz_rhs(y, alpha * n2.sqrt()))
}

fn split<const N: usize>(s: &[f64; N], at: usize) -> [f64; DIM] {
    std::array::from_fn(|i| s[at + i])
}

fn to_sample<const N: usize>(t: f64, s: &[f64; N], deviation_at: Option<usize>) -> Sample {
    Sample {
        t,
        x: split(s, 0),
        y: split(s, DIM),
        deviation: deviation_at.map(|o| DeviationState {
            w: split(s, o),
            big_w: split(s, o + DIM),
        }),
    }
}

/// Validates `init` and rescales its velocity to unit speed, which fixes
/// the affine parameter to proper time.
fn unit_init(model: &SpacetimeModel, init: &WorldlineState) -> Result<WorldlineState> {
    Ok(WorldlineState {
        y: normalize_velocity(model, &init.x, &init.y)?,
        ..*init
    })
}

/// Rescales `y` to unit norm `g(y, y) = 1`.
pub fn normalize_velocity(model: &SpacetimeModel, x: &[f64; DIM], y: &[f64; DIM]) -> Result<[f64; DIM]> {
    let n2 = metric_norm2(&model.metric_values(x)?, y);
    if !(n2 > 0.0) {
        return Err(Error::Config(format!("initial velocity must be timelike, g(y,y) = {n2:e}")));
    }
    Ok(y.map(|v| v / n2.sqrt()))
}

fn outputs(init: &WorldlineState, t_end: f64, samples: usize) -> Result<Vec<f64>> {
    if !(t_end.is_finite() && t_end > init.t) {
        return Err(Error::Config(format!("t_end must exceed the initial time {}", init.t)));
    }
    Ok(ode::linspace(init.t, t_end, samples))
}

/// Integrates the worldline from `init`, with the initial velocity rescaled
/// to unit speed, reporting `samples + 1` evenly spaced states up to `t_end`.
pub fn integrate_worldline(
    model: &SpacetimeModel,
    init: &WorldlineState,
    alpha: f64,
    t_end: f64,
    samples: usize,
    control: &StepControl,
) -> Result<Trajectory> {
    let init = &unit_init(model, init)?;
    let times = outputs(init, t_end, samples)?;
    let mut s0 = [0.0; 2 * DIM];
    s0[..DIM].copy_from_slice(&init.x);
    s0[DIM..].copy_from_slice(&init.y);
    let sol = ode::integrate(
        |_, s: &[f64; 2 * DIM]| {
            let (x, y) = (split(s, 0), split(s, DIM));
            let a = worldline_rhs(model, &x, &y, alpha)?;
            let mut d = [0.0; 2 * DIM];
            d[..DIM].copy_from_slice(&y);
            d[DIM..].copy_from_slice(&a);
            Ok(d)
        },
        init.t,
        s0,
        &times,
        control,
    )?;
    Ok(Trajectory {
        samples: sol.times.iter().zip(&sol.states).map(|(t, s)| to_sample(*t, s, None)).collect(),
    })
}

/// Integrates the classical Lorentz equation `a^i = -Γ y y + α F^i_j y^j`
/// and the worldline equation from the same unit-speed initial data;
/// returns the largest coordinate difference over the sample times.
pub fn compare_classical(
    model: &SpacetimeModel,
    init: &WorldlineState,
    alpha: f64,
    t_end: f64,
    samples: usize,
    control: &StepControl,
) -> Result<f64> {
    let unit = unit_init(model, init)?;
    let bundle = integrate_worldline(model, &unit, alpha, t_end, samples, control)?;
    let times = outputs(&unit, t_end, samples)?;
    let mut s0 = [0.0; 2 * DIM];
    s0[..DIM].copy_from_slice(&unit.x);
    s0[DIM..].copy_from_slice(&unit.y);
    let classical = ode::integrate(
        |_, s: &[f64; 2 * DIM]| {
            let (x, y) = (split(s, 0), split(s, DIM));
            let a = BaseGeometry::new(model, &x, 1)?.classical_lorentz_rhs(&y, alpha);
            let mut d = [0.0; 2 * DIM];
            d[..DIM].copy_from_slice(&y);
            d[DIM..].copy_from_slice(&a);
            Ok(d)
        },
        unit.t,
        s0,
        &times,
        control,
    )?;
    let mut worst: f64 = 0.0;
    for (b, c) in bundle.samples.iter().zip(&classical.states) {
        for i in 0..DIM {
            worst = worst.max((b.x[i] - c[i]).abs());
        }
    }
    Ok(worst)
}

/// Worldline and deviation right-hand sides for the state
/// `(x, y, w, W)` laid out at offsets `0, 4, dev, dev + 4`.
fn deviation_rhs<const N: usize>(
    model: &SpacetimeModel,
    alpha: f64,
    s: &[f64; N],
    d: &mut [f64; N],
    dev: usize,
) -> Result<()> {
    let (x, y) = (split(s, 0), split(s, DIM));
    let frame = BundleFrame::new(model, BundlePoint::new(x, y), alpha, 1)?;
    if !(frame.norm.value().powi(2) > NULL_CONE_GUARD) {
        return Err(Error::Singular("worldline approached the null cone".into()));
    }
    let acc = frame.worldline_acceleration();
    let n = frame.connection_values();
    let e = frame.tidal();
    let (w, big_w) = (split(s, dev), split(s, dev + DIM));
    for i in 0..DIM {
        d[i] = y[i];
        d[DIM + i] = acc[i];
        let mut dw = big_w[i];
        let mut d_big = 0.0;
        for j in 0..DIM {
            dw -= n[i][j] * w[j];
            d_big += e[i][j] * w[j] - n[i][j] * big_w[j];
        }
        d[dev + i] = dw;
        d[dev + DIM + i] = d_big;
    }
    Ok(())
}

/// Integrates a worldline together with a deviation vector `w` with
/// covariant rate `W = Dw/dt`, both given at `init.t`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_deviation(
    model: &SpacetimeModel,
    init: &WorldlineState,
    alpha: f64,
    dev0: &DeviationState,
    t_end: f64,
    samples: usize,
    control: &StepControl,
) -> Result<Trajectory> {
    let init = &unit_init(model, init)?;
    let times = outputs(init, t_end, samples)?;
    let mut s0 = [0.0; 4 * DIM];
    s0[..DIM].copy_from_slice(&init.x);
    s0[DIM..2 * DIM].copy_from_slice(&init.y);
    s0[2 * DIM..3 * DIM].copy_from_slice(&dev0.w);
    s0[3 * DIM..].copy_from_slice(&dev0.big_w);
    let sol = ode::integrate(
        |_, s: &[f64; 4 * DIM]| {
            let mut d = [0.0; 4 * DIM];
            deviation_rhs(model, alpha, s, &mut d, 2 * DIM)?;
            Ok(d)
        },
        init.t,
        s0,
        &times,
        control,
    )?;
    Ok(Trajectory {
        samples: sol
            .times
            .iter()
            .zip(&sol.states)
            .map(|(t, s)| to_sample(*t, s, Some(2 * DIM)))
            .collect(),
    })
}

/// Converts the covariant rate `W` into the coordinate rate
/// `dw/dt = W - N w` at `(x, y)`.
pub fn coordinate_rate(
    model: &SpacetimeModel,
    init: &WorldlineState,
    alpha: f64,
    dev: &DeviationState,
) -> Result<[f64; DIM]> {
    let n = BundleFrame::new(model, BundlePoint::new(init.x, init.y), alpha, 1)?.connection_values();
    Ok(std::array::from_fn(|i| {
        dev.big_w[i] - (0..DIM).map(|j| n[i][j] * dev.w[j]).sum::<f64>()
    }))
}

/// Integrates the reference worldline, a neighbour started at
/// `x + ε w0` with `y + ε (dw/dt)(0)`, and the deviation equation, and
/// returns `max_t ‖(x_ε - x)/ε - w‖∞` over the sample times.
#[allow(clippy::too_many_arguments)]
pub fn neighbor_oracle(
    model: &SpacetimeModel,
    init: &WorldlineState,
    alpha: f64,
    dev0: &DeviationState,
    eps: f64,
    t_end: f64,
    samples: usize,
    control: &StepControl,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Config("eps must be positive".into()));
    }
    let init = &unit_init(model, init)?;
    let times = outputs(init, t_end, samples)?;
    let rate = coordinate_rate(model, init, alpha, dev0)?;
    let mut s0 = [0.0; 6 * DIM];
    for i in 0..DIM {
        s0[i] = init.x[i];
        s0[DIM + i] = init.y[i];
        s0[2 * DIM + i] = init.x[i] + eps * dev0.w[i];
        s0[3 * DIM + i] = init.y[i] + eps * rate[i];
        s0[4 * DIM + i] = dev0.w[i];
        s0[5 * DIM + i] = dev0.big_w[i];
    }
    let sol = ode::integrate(
        |_, s: &[f64; 6 * DIM]| {
            let mut d = [0.0; 6 * DIM];
            deviation_rhs(model, alpha, s, &mut d, 4 * DIM)?;
            let (xn, yn) = (split(s, 2 * DIM), split(s, 3 * DIM));
            let an = worldline_rhs(model, &xn, &yn, alpha)?;
            for i in 0..DIM {
                d[2 * DIM + i] = yn[i];
                d[3 * DIM + i] = an[i];
            }
            Ok(d)
        },
        init.t,
        s0,
        &times,
        control,
    )?;
    let mut worst: f64 = 0.0;
    for s in &sol.states {
        for i in 0..DIM {
            let fd = (s[2 * DIM + i] - s[i]) / eps;
            worst = worst.max((fd - s[4 * DIM + i]).abs());
        }
    }
    Ok(worst)
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
    fn lagrangian_examples() {
        let m = model("minkowski", &[]);
        assert_eq!(randers_lagrangian(&m, &[0.0; 4], &[1.0, 0.0, 0.0, 0.0], 0.0).unwrap(), 1.0);
        let rn = model("reissner_nordstrom", &[("M", 1.0), ("Q", 0.3)]);
        let l = randers_lagrangian(&rn, &[0.0, 5.0, 1.0, 0.0], &[1.0, 0.0, 0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(l, 0.8369169839822013, epsilon = 1e-15);
    }

    #[test]
    fn uniform_field_rhs() {
        let m = model("uniform_field", &[("E0", 0.1)]);
        let a = worldline_rhs(&m, &[0.0; 4], &[1.0, 0.0, 0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(a[1], 0.1, epsilon = 1e-15);
    }

    #[test]
    fn straight_line_in_flat_space() {
        let m = model("minkowski", &[]);
        let init = WorldlineState { t: 0.0, x: [0.0; 4], y: [1.25, 0.75, 0.0, 0.0] };
        let tr = integrate_worldline(&m, &init, 0.0, 10.0, 5, &StepControl::default()).unwrap();
        let last = tr.last();
        assert_relative_eq!(last.x[0], 12.5, max_relative = 1e-12);
        assert_relative_eq!(last.x[1], 7.5, max_relative = 1e-12);
    }

    #[test]
    fn csv_header_and_precision() {
        let tr = Trajectory {
            samples: vec![Sample { t: 0.1, x: [0.0; 4], y: [1.0, 0.0, 0.0, 0.0], deviation: None }],
        };
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,x0,x1,x2,x3,y0,y1,y2,y3");
        let first = lines.next().unwrap().split(',').next().unwrap().to_string();
        assert_eq!(first, "1.0000000000000001e-1");
        assert_eq!(first.parse::<f64>().unwrap(), 0.1);
    }
}
