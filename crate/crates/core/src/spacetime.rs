//! Spacetime models: built-in catalog, JSON documents and jet evaluation of
//! the covariant metric `g_ij(x)` and potential `A_i(x)`.
//!
//! Signature is (+,-,-,-); timelike vectors have `g(y, y) > 0`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exprlang::{self, Expr, BUILTIN_CONSTANTS};
use crate::jets::Jet;
use crate::tensor::{Mat4, Vec4, DIM};

/// Names accepted by [`catalog`].
pub const CATALOG_NAMES: [&str; 5] = [
    "minkowski",
    "uniform_field",
    "schwarzschild",
    "reissner_nordstrom",
    "weak_field",
];

/// Coupling at which the bundle field equations reproduce Einstein-Maxwell:
/// `3 alpha^2 / 2 = k / c^4`.
pub fn alpha_star(c: f64, k: f64) -> f64 {
    (2.0 * k / (3.0 * c.powi(4))).sqrt()
}

/// Per-coordinate sampling interval `[lo, hi]`.
pub type SampleBox = [[f64; 2]; DIM];

#[derive(Debug, Clone)]
pub struct SpacetimeModel {
    pub name: String,
    pub coords: [String; DIM],
    pub params: BTreeMap<String, f64>,
    pub metric: Mat4<Expr>,
    pub potential: Vec4<Expr>,
    pub alpha: f64,
    pub c: f64,
    pub k: f64,
    pub chart_guard: Option<Expr>,
    /// Known to solve the source-free Einstein-Maxwell system at `alpha*`,
    /// which enables the field-equation checks.
    pub electrovacuum: bool,
    /// Region used by the point sampler; `None` for user documents without
    /// a declared box.
    pub sample_box: Option<SampleBox>,
}

impl SpacetimeModel {
    pub fn alpha_star(&self) -> f64 {
        alpha_star(self.c, self.k)
    }

    /// Einstein coupling `8 pi k / c^4`.
    pub fn einstein_coupling(&self) -> f64 {
        8.0 * std::f64::consts::PI * self.k / self.c.powi(4)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn has_potential(&self) -> bool {
        self.potential.iter().any(|e| !e.is_zero())
    }

    fn f64_env(&self, x: &[f64; DIM]) -> HashMap<String, f64> {
        let mut env: HashMap<String, f64> = self.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for (name, v) in self.coords.iter().zip(x) {
            env.insert(name.clone(), *v);
        }
        env.entry("pi".into()).or_insert(std::f64::consts::PI);
        env
    }

    /// Fails with a chart violation when the guard is not positive at `x`.
    pub fn check_chart(&self, x: &[f64; DIM]) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::ChartViolation {
                point: *x,
                guard: f64::NAN,
            });
        }
        if let Some(guard) = &self.chart_guard {
            let v = guard.eval_f64(&self.f64_env(x))?;
            if !(v > 0.0) {
                return Err(Error::ChartViolation { point: *x, guard: v });
            }
        }
        Ok(())
    }

    /// Coordinate jets of order `order` seeded in slots `0..4` of `nvars`.
    fn jet_env(&self, x: &[f64; DIM], order: usize, nvars: usize) -> Result<(HashMap<String, Jet>, Jet)> {
        let mut env = HashMap::new();
        for (i, name) in self.coords.iter().enumerate() {
            env.insert(name.clone(), Jet::variable(i, x[i], order, nvars)?);
        }
        for (k, v) in &self.params {
            env.insert(k.clone(), Jet::constant(*v, order, nvars));
        }
        Ok((env, Jet::zero(order, nvars)))
    }

    /// `g_ij` as 4-variable jets of the given order, symmetric by
    /// construction.
    pub fn metric_jet(&self, x: &[f64; DIM], order: usize) -> Result<Mat4<Jet>> {
        self.check_chart(x)?;
        let (env, like) = self.jet_env(x, order, DIM)?;
        let mut out: Mat4<Jet> = std::array::from_fn(|_| std::array::from_fn(|_| like.clone()));
        for i in 0..DIM {
            for j in i..DIM {
                let v = self.metric[i][j].evaluate(&env, &like)?;
                out[j][i] = v.clone();
                out[i][j] = v;
            }
        }
        Ok(out)
    }

    /// `A_i` as 4-variable jets of the given order.
    pub fn potential_jet(&self, x: &[f64; DIM], order: usize) -> Result<Vec4<Jet>> {
        self.check_chart(x)?;
        let (env, like) = self.jet_env(x, order, DIM)?;
        let mut out: Vec4<Jet> = std::array::from_fn(|_| like.clone());
        for i in 0..DIM {
            if !self.potential[i].is_zero() {
                out[i] = self.potential[i].evaluate(&env, &like)?;
            }
        }
        Ok(out)
    }

    pub fn metric_values(&self, x: &[f64; DIM]) -> Result<Mat4<f64>> {
        Ok(crate::tensor::values_mat(&self.metric_jet(x, 0)?))
    }

    pub fn potential_values(&self, x: &[f64; DIM]) -> Result<Vec4<f64>> {
        Ok(crate::tensor::values_vec(&self.potential_jet(x, 0)?))
    }

    /// Counts of (positive, negative) metric eigenvalues at `x`.
    pub fn signature(&self, x: &[f64; DIM]) -> Result<(usize, usize)> {
        let g = self.metric_values(x)?;
        let m = nalgebra::Matrix4::from_fn(|i, j| g[i][j]);
        let eig = m.symmetric_eigenvalues();
        let scale = eig.iter().fold(0.0f64, |s, e| s.max(e.abs()));
        if eig.iter().any(|e| e.abs() <= 1e-14 * scale) {
            return Err(Error::Singular(format!("degenerate metric at {x:?}")));
        }
        let pos = eig.iter().filter(|e| **e > 0.0).count();
        Ok((pos, DIM - pos))
    }

    /// Chart guard, non-degeneracy and (+,-,-,-) signature at `x`.
    pub fn validate_point(&self, x: &[f64; DIM]) -> Result<()> {
        match self.signature(x)? {
            (1, 3) => Ok(()),
            (p, n) => Err(Error::Singular(format!(
                "metric signature at {x:?} has {p} positive and {n} negative directions"
            ))),
        }
    }
}

fn expr(src: &str) -> Expr {
    exprlang::parse(src).expect("catalog expressions are well formed")
}

fn param(params: &BTreeMap<String, f64>, model: &str, name: &str) -> Result<f64> {
    let v = *params
        .get(name)
        .ok_or_else(|| Error::Config(format!("{model} requires parameter {name}")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("parameter {name} must be finite")));
    }
    Ok(v)
}

fn diag(entries: [&str; 4]) -> Mat4<Expr> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { expr(entries[i]) } else { Expr::Const(0.0) })
    })
}

fn coords(names: [&str; 4]) -> [String; DIM] {
    names.map(str::to_string)
}

/// Built-in spacetime by name. `params` must contain exactly the parameters
/// the model declares.
pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<SpacetimeModel> {
    let allowed: &[&str] = match name {
        "minkowski" => &[],
        "uniform_field" => &["E0"],
        "schwarzschild" | "weak_field" => &["M"],
        "reissner_nordstrom" => &["M", "Q"],
        other => {
            return Err(Error::Config(format!(
                "unknown catalog model `{other}` (known: {})",
                CATALOG_NAMES.join(", ")
            )))
        }
    };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Config(format!("{name} has no parameter {extra}")));
    }
    let zero_a = || std::array::from_fn(|_| Expr::Const(0.0));
    let cartesian = coords(["t", "x", "y", "z"]);
    let spherical = coords(["t", "r", "theta", "phi"]);
    let mut p = BTreeMap::new();
    let positive_mass = |p: &mut BTreeMap<String, f64>| -> Result<f64> {
        let m = param(params, name, "M")?;
        if m <= 0.0 {
            return Err(Error::Config(format!("{name} requires M > 0, got {m}")));
        }
        p.insert("M".to_string(), m);
        Ok(m)
    };
    let model = match name {
        "minkowski" => SpacetimeModel {
            name: name.into(),
            coords: cartesian,
            params: p,
            metric: diag(["1", "-1", "-1", "-1"]),
            potential: zero_a(),
            alpha: 0.0,
            c: 1.0,
            k: 1.0,
            chart_guard: None,
            electrovacuum: true,
            sample_box: Some([[-1.0, 1.0]; 4]),
        },
        "uniform_field" => {
            p.insert("E0".into(), param(params, name, "E0")?);
            let mut a = zero_a();
            a[0] = expr("-E0*x");
            SpacetimeModel {
                name: name.into(),
                coords: cartesian,
                params: p,
                metric: diag(["1", "-1", "-1", "-1"]),
                potential: a,
                alpha: 0.0,
                c: 1.0,
                k: 1.0,
                chart_guard: None,
                electrovacuum: false,
                sample_box: Some([[-1.0, 1.0]; 4]),
            }
        }
        "schwarzschild" => {
            positive_mass(&mut p)?;
            SpacetimeModel {
                name: name.into(),
                coords: spherical,
                params: p,
                metric: diag(["1 - 2*M/r", "-1/(1 - 2*M/r)", "-r^2", "-r^2*sin(theta)^2"]),
                potential: zero_a(),
                alpha: 0.0,
                c: 1.0,
                k: 1.0,
                chart_guard: Some(expr("(r - 2*M)*sin(theta)")),
                electrovacuum: true,
                sample_box: None,
            }
        }
        "reissner_nordstrom" => {
            let m = positive_mass(&mut p)?;
            let q = param(params, name, "Q")?;
            if q * q > m * m {
                return Err(Error::Config(format!(
                    "reissner_nordstrom requires Q^2 <= M^2, got M={m}, Q={q}"
                )));
            }
            p.insert("Q".into(), q);
            let f = "1 - 2*M/r + Q^2/r^2";
            let mut a = zero_a();
            a[0] = expr("Q/r");
            SpacetimeModel {
                name: name.into(),
                coords: spherical,
                params: p,
                metric: diag([f, &format!("-1/({f})"), "-r^2", "-r^2*sin(theta)^2"]),
                potential: a,
                alpha: 0.0,
                c: 1.0,
                k: 1.0,
                chart_guard: Some(expr("(r - M - sqrt(M^2 - Q^2))*sin(theta)")),
                electrovacuum: true,
                sample_box: None,
            }
        }
        "weak_field" => {
            positive_mass(&mut p)?;
            let phi = "(-M/sqrt(x^2 + y^2 + z^2))";
            SpacetimeModel {
                name: name.into(),
                coords: cartesian,
                params: p,
                metric: diag([
                    &format!("1 + 2*{phi}"),
                    &format!("-(1 - 2*{phi})"),
                    &format!("-(1 - 2*{phi})"),
                    &format!("-(1 - 2*{phi})"),
                ]),
                potential: zero_a(),
                alpha: 0.0,
                c: 1.0,
                k: 1.0,
                chart_guard: Some(expr("sqrt(x^2 + y^2 + z^2) - 2*M")),
                electrovacuum: false,
                sample_box: None,
            }
        }
        _ => unreachable!(),
    };
    let mut model = model;
    model.alpha = model.alpha_star();
    if model.sample_box.is_none() {
        model.sample_box = Some(default_box(&model));
    }
    Ok(model)
}

/// Sampling region scaled by the mass parameter for the curved models.
fn default_box(model: &SpacetimeModel) -> SampleBox {
    let m = model.params.get("M").copied().unwrap_or(1.0);
    match model.name.as_str() {
        "schwarzschild" | "reissner_nordstrom" => [
            [-1.0, 1.0],
            [4.0 * m, 20.0 * m],
            [0.3, std::f64::consts::PI - 0.3],
            [0.0, 2.0 * std::f64::consts::PI],
        ],
        "weak_field" => [[-1.0, 1.0], [2.5 * m, 6.0 * m], [2.5 * m, 6.0 * m], [2.5 * m, 6.0 * m]],
        _ => [[-1.0, 1.0]; 4],
    }
}

/// Value of the `alpha` field in a model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    Named(String),
}

impl AlphaSpec {
    pub fn resolve(&self, c: f64, k: f64) -> Result<f64> {
        match self {
            AlphaSpec::Value(v) if v.is_finite() => Ok(*v),
            AlphaSpec::Value(v) => Err(Error::Schema(format!("alpha must be finite, got {v}"))),
            AlphaSpec::Named(s) if s == "star" => Ok(alpha_star(c, k)),
            AlphaSpec::Named(s) => Err(Error::Schema(format!(
                "alpha must be a number or \"star\", got \"{s}\""
            ))),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// On-disk model document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub name: String,
    pub coords: Vec<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub metric: Vec<Vec<String>>,
    #[serde(default)]
    pub potential: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaSpec>,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_guard: Option<String>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses and validates a JSON model document.
pub fn load_model(document: &str) -> Result<SpacetimeModel> {
    let doc: ModelDocument =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    model_from_document(doc)
}

pub fn model_from_document(doc: ModelDocument) -> Result<SpacetimeModel> {
    if doc.coords.len() != DIM {
        return Err(Error::Schema(format!("coords must list 4 names, got {}", doc.coords.len())));
    }
    let mut bound: Vec<&str> = Vec::new();
    for name in doc.coords.iter().chain(doc.params.keys()) {
        if !is_identifier(name) {
            return Err(Error::Schema(format!("`{name}` is not a valid identifier")));
        }
        if bound.contains(&name.as_str()) || BUILTIN_CONSTANTS.contains(&name.as_str()) {
            return Err(Error::Schema(format!("name `{name}` is declared more than once")));
        }
        bound.push(name);
    }
    if let Some((k, v)) = doc.params.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Schema(format!("parameter {k} must be finite, got {v}")));
    }
    if !(doc.c > 0.0 && doc.c.is_finite() && doc.k > 0.0 && doc.k.is_finite()) {
        return Err(Error::Schema("c and k must be positive".into()));
    }
    let parse_field = |context: String, src: &str| -> Result<Expr> {
        let e = exprlang::parse(src).map_err(|source| Error::Parse {
            context: context.clone(),
            source,
        })?;
        if let Some(name) = e
            .free_symbols()
            .into_iter()
            .find(|s| !bound.contains(&s.as_str()) && !BUILTIN_CONSTANTS.contains(&s.as_str()))
        {
            return Err(Error::Unbound { context, name });
        }
        Ok(e)
    };

    if doc.metric.len() != DIM || doc.metric.iter().any(|r| r.len() != DIM) {
        return Err(Error::Schema("metric must be a 4x4 array of strings".into()));
    }
    let mut metric: Mat4<Expr> = std::array::from_fn(|_| std::array::from_fn(|_| Expr::Const(0.0)));
    for i in 0..DIM {
        for j in i..DIM {
            metric[i][j] = parse_field(format!("metric[{i}][{j}]"), &doc.metric[i][j])?;
        }
    }
    for i in 0..DIM {
        for j in 0..i {
            let src = doc.metric[i][j].trim();
            if !src.is_empty() {
                let lower = parse_field(format!("metric[{i}][{j}]"), src)?;
                if lower != metric[j][i] {
                    return Err(Error::Schema(format!(
                        "metric[{i}][{j}] = `{lower}` differs from metric[{j}][{i}] = `{}`",
                        metric[j][i]
                    )));
                }
            }
            metric[i][j] = metric[j][i].clone();
        }
    }

    let potential: Vec4<Expr> = match doc.potential.len() {
        0 => std::array::from_fn(|_| Expr::Const(0.0)),
        DIM => {
            let mut out: Vec4<Expr> = std::array::from_fn(|_| Expr::Const(0.0));
            for (i, src) in doc.potential.iter().enumerate() {
                out[i] = parse_field(format!("potential[{i}]"), src)?;
            }
            out
        }
        n => return Err(Error::Schema(format!("potential must list 0 or 4 expressions, got {n}"))),
    };
    let chart_guard = doc
        .chart_guard
        .as_deref()
        .map(|s| parse_field("chart_guard".into(), s))
        .transpose()?;
    let alpha = doc
        .alpha
        .unwrap_or(AlphaSpec::Named("star".into()))
        .resolve(doc.c, doc.k)?;
    let mut coords: [String; DIM] = Default::default();
    coords.clone_from_slice(&doc.coords);
    Ok(SpacetimeModel {
        name: doc.name,
        coords,
        params: doc.params,
        metric,
        potential,
        alpha,
        c: doc.c,
        k: doc.k,
        chart_guard,
        electrovacuum: false,
        sample_box: None,
    })
}

pub fn to_document(model: &SpacetimeModel) -> ModelDocument {
    ModelDocument {
        name: model.name.clone(),
        coords: model.coords.to_vec(),
        params: model.params.clone(),
        metric: model
            .metric
            .iter()
            .map(|row| row.iter().map(|e| e.to_string()).collect())
            .collect(),
        potential: model.potential.iter().map(|e| e.to_string()).collect(),
        alpha: Some(AlphaSpec::Value(model.alpha)),
        c: model.c,
        k: model.k,
        chart_guard: model.chart_guard.as_ref().map(|e| e.to_string()),
    }
}

/// Pretty JSON document that [`load_model`] reads back to the same model.
pub fn print_model(model: &SpacetimeModel) -> String {
    serde_json::to_string_pretty(&to_document(model)).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn schwarzschild_lapse() {
        let m = catalog("schwarzschild", &params(&[("M", 1.0)])).unwrap();
        let g = m.metric_jet(&[0.0, 10.0, std::f64::consts::FRAC_PI_2, 0.0], 1).unwrap();
        assert_relative_eq!(g[0][0].value(), 0.8, epsilon = 1e-15);
        assert_relative_eq!(g[0][0].d1(1), 0.02, epsilon = 1e-15);
    }

    #[test]
    fn rn_potential() {
        let m = catalog("reissner_nordstrom", &params(&[("M", 1.0), ("Q", 0.3)])).unwrap();
        let a = m.potential_jet(&[0.0, 5.0, 1.0, 0.0], 1).unwrap();
        assert_relative_eq!(a[0].value(), 0.06, epsilon = 1e-15);
        assert_relative_eq!(a[0].d1(1), -0.012, epsilon = 1e-15);
    }

    #[test]
    fn catalog_parameter_errors() {
        assert!(matches!(catalog("schwarzschild", &params(&[("M", -1.0)])), Err(Error::Config(_))));
        assert!(matches!(catalog("schwarzschild", &params(&[])), Err(Error::Config(_))));
        assert!(matches!(catalog("kerr", &params(&[])), Err(Error::Config(_))));
        assert!(matches!(
            catalog("reissner_nordstrom", &params(&[("M", 1.0), ("Q", 2.0)])),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            catalog("minkowski", &params(&[("M", 1.0)])),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn chart_guard_rejects_horizon_interior() {
        let m = catalog("schwarzschild", &params(&[("M", 1.0)])).unwrap();
        assert!(matches!(
            m.metric_jet(&[0.0, 1.5, 1.0, 0.0], 0),
            Err(Error::ChartViolation { .. })
        ));
    }

    #[test]
    fn default_alpha_is_star() {
        let m = catalog("minkowski", &params(&[])).unwrap();
        assert_relative_eq!(m.alpha, (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn signature_of_catalog_models() {
        for (name, p, x) in [
            ("minkowski", params(&[]), [0.0, 0.1, 0.2, 0.3]),
            ("schwarzschild", params(&[("M", 1.0)]), [0.0, 7.0, 1.0, 0.5]),
            ("weak_field", params(&[("M", 1.0)]), [0.0, 3.0, 2.0, 1.0]),
        ] {
            let m = catalog(name, &p).unwrap();
            assert_eq!(m.signature(&x).unwrap(), (1, 3), "{name}");
        }
    }
}
