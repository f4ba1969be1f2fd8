//! `tmgeom` command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or input error,
//! 3 singular evaluation (chart violation, degenerate metric, failed
//! integration).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tmgeom::base_geom::BaseGeometry;
use tmgeom::bundle_geom::{generalized_einstein, BundleFrame, BundlePoint};
use tmgeom::dynamics::{format_sig17, integrate_deviation, integrate_worldline, DeviationState, Trajectory, WorldlineState};
use tmgeom::ode::StepControl;
use tmgeom::spacetime::{catalog, load_model, to_document, SpacetimeModel};
use tmgeom::tensor::{flat3, flat4, flat_mat, values3, values_mat, values_vec, TensorValue, Variance, DIM};
use tmgeom::tm_metric::{fiber_ball, fiber_integral, FiberQuadrature};
use tmgeom::verify::{self, orthonormal_frame, FieldEquations, SuiteConfig, Tolerances};
use tmgeom::Error;

#[derive(Parser)]
#[command(name = "tmgeom", version, about = "Tangent-bundle geometry of charged-particle spacetimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the model document and, at a point, its tensors.
    Inspect {
        #[command(flatten)]
        model: ModelArgs,
        /// Base point.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        x: Option<[f64; DIM]>,
        /// Fiber vector; adds the bundle tensors at (x, y).
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true, requires = "x")]
        y: Option<[f64; DIM]>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run the residual-check suite at seeded sample points.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sample points.
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Tolerance for checks using at most first derivatives.
        #[arg(long)]
        tol_tier1: Option<f64>,
        /// Tolerance for checks using second derivatives.
        #[arg(long)]
        tol_tier2: Option<f64>,
        /// Tolerance for checks using third derivatives.
        #[arg(long)]
        tol_tier3: Option<f64>,
        /// Field-equation checks: `auto` runs them for electrovacuum models.
        #[arg(long, value_enum, default_value_t = FieldEquationsArg::Auto)]
        field_equations: FieldEquationsArg,
        /// Run only the named check (repeatable).
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Integrate a charged-particle worldline.
    Geodesic {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        x0: [f64; DIM],
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        y0: [f64; DIM],
        #[command(flatten)]
        run: RunArgs,
    },
    /// Integrate a worldline together with a deviation vector.
    Deviation {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        x0: [f64; DIM],
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        y0: [f64; DIM],
        /// Initial deviation vector.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        w0: [f64; DIM],
        /// Initial covariant rate Dw/dt = dw/dt + N w.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        dw0: [f64; DIM],
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decompose the bundle scalar curvature at (x, y).
    Theorem1 {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        x: [f64; DIM],
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        y: [f64; DIM],
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Field-equation tensors at x.
    Efe {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        x: [f64; DIM],
        /// Fiber vector for the bundle-side assembly; defaults to the static
        /// unit observer.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        y: Option<[f64; DIM]>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Fiber-ball volume and determinant checks at x.
    IntegrateVolume {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        x: [f64; DIM],
        /// Quadrature nodes: radial, two polar angles, azimuth.
        #[arg(long, value_parser = parse_nodes, default_value = "16,16,16,32")]
        nodes: FiberQuadrature,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["catalog", "model"])))]
struct ModelArgs {
    /// Catalog model name.
    #[arg(long)]
    catalog: Option<String>,
    /// JSON model document.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Catalog parameter (repeatable).
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param, conflicts_with = "model")]
    params: Vec<(String, f64)>,
    /// Coupling: a number or `star`.
    #[arg(long, value_name = "NUM|star", value_parser = parse_alpha, allow_hyphen_values = true)]
    alpha: Option<Alpha>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    t_end: f64,
    /// Number of output intervals.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Relative and absolute step tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldEquationsArg {
    Auto,
    On,
    Off,
}

#[derive(Clone, Copy)]
enum Alpha {
    Value(f64),
    Star,
}

fn parse_vec4(s: &str) -> Result<[f64; DIM], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != DIM {
        return Err(format!("expected 4 comma-separated numbers, got {}", parts.len()));
    }
    let mut out = [0.0f64; DIM];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| format!("`{p}` is not a number"))?;
        if !o.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    if s == "star" {
        return Ok(Alpha::Star);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Alpha::Value(v)),
        _ => Err(format!("expected a number or `star`, got `{s}`")),
    }
}

fn parse_nodes(s: &str) -> Result<FiberQuadrature, String> {
    let n: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("`{p}` is not a node count")))
        .collect::<Result<_, _>>()?;
    match n[..] {
        [radial, polar1, polar2, azimuth] if n.iter().all(|v| *v > 0) => {
            Ok(FiberQuadrature { radial, polar1, polar2, azimuth })
        }
        _ => Err("expected 4 positive node counts".into()),
    }
}

impl ModelArgs {
    fn load(&self) -> Result<SpacetimeModel, Error> {
        let model = match (&self.catalog, &self.model) {
            (Some(name), _) => {
                let params: BTreeMap<String, f64> = self.params.iter().cloned().collect();
                catalog(name, &params)?
            }
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                load_model(&text)?
            }
            (None, None) => unreachable!("clap requires a model source"),
        };
        Ok(match self.alpha {
            Some(Alpha::Value(a)) => model.with_alpha(a),
            Some(Alpha::Star) => {
                let a = model.alpha_star();
                model.with_alpha(a)
            }
            None => model,
        })
    }
}

/// Outcome of a successful command: payload and whether every check passed.
struct Output {
    text: String,
    pass: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, pass: true }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("payload serializes")
}

fn tensors_csv(tensors: &[TensorValue]) -> String {
    let mut out = String::from("name,index,value\n");
    for t in tensors {
        for (flat, v) in t.components.iter().enumerate() {
            let idx: Vec<String> = (0..t.variance.len())
                .rev()
                .map(|k| ((flat / DIM.pow(k as u32)) % DIM).to_string())
                .collect();
            let _ = writeln!(out, "{},{},{}", t.name, idx.join(" "), format_sig17(*v));
        }
    }
    out
}

fn key_value_csv(rows: &[(&str, f64)]) -> String {
    let header: Vec<&str> = rows.iter().map(|r| r.0).collect();
    let values: Vec<String> = rows.iter().map(|r| format_sig17(r.1)).collect();
    format!("{}\n{}\n", header.join(","), values.join(","))
}

fn inspect(model: &SpacetimeModel, x: Option<[f64; DIM]>, y: Option<[f64; DIM]>, format: Format) -> Result<Output, Error> {
    use Variance::{Lower as L, Upper as U};
    let mut tensors = Vec::new();
    if let Some(x) = x {
        let b = BaseGeometry::new(model, &x, 2)?;
        let c = b.curvature()?;
        let t = |name: &str, v: Vec<Variance>, comps: Vec<f64>| TensorValue::new(name, v, x, None, comps);
        tensors.push(t("metric", vec![L, L], flat_mat(&b.metric_values())));
        tensors.push(t("inverse_metric", vec![U, U], flat_mat(&values_mat(&b.ginv))));
        tensors.push(t("christoffel", vec![U, L, L], flat3(&values3(&b.gamma))));
        let riemann = std::array::from_fn(|i| values3(&c.riemann[i]));
        tensors.push(t("riemann", vec![U, L, L, L], flat4(&riemann)));
        tensors.push(t("ricci", vec![L, L], flat_mat(&values_mat(&c.ricci))));
        tensors.push(TensorValue::scalar("ricci_scalar", x, None, c.scalar.value()));
        tensors.push(t("einstein", vec![L, L], flat_mat(&values_mat(&c.einstein))));
        tensors.push(t("potential", vec![L], values_vec(&b.potential).to_vec()));
        tensors.push(t("faraday", vec![L, L], flat_mat(&values_mat(&b.f_lower))));
        tensors.push(t("stress_energy", vec![L, L], flat_mat(&values_mat(&b.em_stress_energy()))));
        if let Some(y) = y {
            let f = BundleFrame::new(model, BundlePoint::new(x, y), model.alpha, 3)?;
            let d = f.d_curvature()?;
            let (bs, bh) = f.b_scalar_and_hessian()?;
            let tb = |name: &str, v: Vec<Variance>, comps: Vec<f64>| TensorValue::new(name, v, x, Some(y), comps);
            tensors.push(tb("spray", vec![U], f.spray_values().to_vec()));
            tensors.push(tb("lorentz_term", vec![U], f.spray_b_values().to_vec()));
            tensors.push(tb("nonlinear_connection", vec![U, L], flat_mat(&f.connection_values())));
            tensors.push(tb("berwald", vec![U, L, L], flat3(&f.berwald_coeffs()?)));
            tensors.push(tb("tidal", vec![U, L], flat_mat(&f.tidal())));
            tensors.push(tb("d_curvature", vec![L, U, L, L], flat4(&d.tensor)));
            tensors.push(tb("d_ricci", vec![L, L], flat_mat(&d.ricci)));
            tensors.push(TensorValue::scalar("d_scalar", x, Some(y), d.scalar));
            tensors.push(TensorValue::scalar("b_scalar", x, Some(y), bs));
            tensors.push(tb("b_hessian", vec![L, L], flat_mat(&bh)));
        }
    }
    Ok(Output::ok(match format {
        Format::Json => to_json(&json!({ "model": to_document(model), "alpha": model.alpha, "tensors": tensors })),
        Format::Csv => tensors_csv(&tensors),
    }))
}

#[allow(clippy::too_many_arguments)]
fn run_verify(
    model: &SpacetimeModel,
    seed: u64,
    samples: usize,
    tiers: [Option<f64>; 3],
    field_equations: FieldEquationsArg,
    checks: Vec<String>,
    format: Format,
) -> Result<Output, Error> {
    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        tier1: tiers[0].unwrap_or(defaults.tier1),
        tier2: tiers[1].unwrap_or(defaults.tier2),
        tier3: tiers[2].unwrap_or(defaults.tier3),
    };
    if ![tolerances.tier1, tolerances.tier2, tolerances.tier3].iter().all(|t| t.is_finite() && *t > 0.0) {
        return Err(Error::Config("tolerances must be positive".into()));
    }
    let config = SuiteConfig {
        seed,
        samples,
        tolerances,
        field_equations: match field_equations {
            FieldEquationsArg::Auto => FieldEquations::Auto,
            FieldEquationsArg::On => FieldEquations::On,
            FieldEquationsArg::Off => FieldEquations::Off,
        },
        selection: (!checks.is_empty()).then_some(checks),
        ..Default::default()
    };
    let reports = verify::run_suite(model, &config)?;
    for r in reports.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {}: max residual {:e}, tolerance {:?}", r.check, r.max_residual, r.tolerance);
    }
    Ok(Output {
        pass: reports.iter().all(|r| r.pass),
        text: match format {
            Format::Json => verify::reports_to_json(&reports),
            Format::Csv => verify::reports_to_csv(&reports),
        },
    })
}

fn trajectory_output(tr: &Trajectory, format: Format) -> Output {
    Output::ok(match format {
        Format::Json => to_json(tr),
        Format::Csv => tr.to_csv(),
    })
}

fn run(cli: Cli) -> Result<Output, Error> {
    match cli.command {
        Command::Inspect { model, x, y, format } => inspect(&model.load()?, x, y, format.unwrap_or(Format::Json)),
        Command::Verify { model, seed, samples, tol_tier1, tol_tier2, tol_tier3, field_equations, checks, format } => run_verify(
            &model.load()?,
            seed,
            samples,
            [tol_tier1, tol_tier2, tol_tier3],
            field_equations,
            checks,
            format.unwrap_or(Format::Json),
        ),
        Command::Geodesic { model, x0, y0, run } => {
            let m = model.load()?;
            let init = WorldlineState { t: 0.0, x: x0, y: y0 };
            let tr = integrate_worldline(&m, &init, m.alpha, run.t_end, run.samples, &StepControl::with_tolerance(run.tol))?;
            Ok(trajectory_output(&tr, run.format.unwrap_or(Format::Csv)))
        }
        Command::Deviation { model, x0, y0, w0, dw0, run } => {
            let m = model.load()?;
            let init = WorldlineState { t: 0.0, x: x0, y: y0 };
            let dev = DeviationState { w: w0, big_w: dw0 };
            let tr = integrate_deviation(&m, &init, m.alpha, &dev, run.t_end, run.samples, &StepControl::with_tolerance(run.tol))?;
            Ok(trajectory_output(&tr, run.format.unwrap_or(Format::Csv)))
        }
        Command::Theorem1 { model, x, y, format } => {
            let m = model.load()?;
            let t = BundleFrame::new(&m, BundlePoint::new(x, y), m.alpha, 3)?.theorem1()?;
            Ok(Output::ok(match format.unwrap_or(Format::Json) {
                Format::Json => to_json(&t),
                Format::Csv => key_value_csv(&[
                    ("R", t.bundle_scalar),
                    ("r", t.base_scalar),
                    ("div_term", t.div_term),
                    ("quad_term", t.quad_term),
                    ("quad_closed_form", t.quad_closed_form),
                    ("residual", t.residual),
                ]),
            }))
        }
        Command::Efe { model, x, y, format } => {
            let m = model.load()?;
            let y = match y {
                Some(y) => y,
                None => orthonormal_frame(&m, &x)?[0],
            };
            let ge = generalized_einstein(&BundleFrame::new(&m, BundlePoint::new(x, y), m.alpha, 3)?)?;
            Ok(Output::ok(match format.unwrap_or(Format::Json) {
                Format::Json => to_json(&json!({ "x": x, "y": y, "alpha": m.alpha, "field_equations": ge })),
                Format::Csv => {
                    use Variance::Lower as L;
                    let t = |name: &str, v: &[[f64; DIM]; DIM]| TensorValue::new(name, vec![L, L], x, Some(y), flat_mat(v));
                    tensors_csv(&[t("variational", &ge.variational), t("classical", &ge.classical), t("literal", &ge.literal)])
                }
            }))
        }
        Command::IntegrateVolume { model, x, nodes, format } => {
            let m = model.load()?;
            let ball = fiber_ball(&m, &x)?;
            let vol = fiber_integral(&ball, nodes, |_| Ok(1.0))?;
            let moment = fiber_integral(&ball, nodes, |y| Ok(ball.metric.fiber_norm2(y)))?;
            let rows = [
                ("det_g", ball.metric.det_g),
                ("det_v", ball.metric.det_v),
                ("bound", ball.bound),
                ("volume", vol.value),
                ("second_moment", moment.value),
                ("perturbed_nodes", vol.perturbed_nodes as f64),
            ];
            Ok(Output::ok(match format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut obj = serde_json::Map::new();
                    obj.insert("x".into(), json!(x));
                    for (k, v) in rows {
                        obj.insert(k.into(), json!(v));
                    }
                    obj.insert("perturbed_nodes".into(), json!(vol.perturbed_nodes));
                    to_json(&obj)
                }
                Format::Csv => key_value_csv(&rows),
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            if !out.text.ends_with('\n') {
                println!();
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_singular() { 3 } else { 2 })
        }
    }
}
