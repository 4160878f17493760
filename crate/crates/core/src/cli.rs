//! Command-line front end. `run` returns the process exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebraic::{format_rational, parse_rational};
use crate::complex::{bundled, bundled_names, Complex, ComplexError, Triangulation2, Triangulation3};
use crate::embed::{enumerate_ball, minimal_embed, EmbedError};
use crate::floation2::{
    detect_closed_leaf, ClosedLeafCaps, ClosedLeafOutcome, Crossing, EdgeParam, Floation2Error, FunctionalSource,
    Label, LevelSource, SurfaceLift, TableSource, Tracer,
};
use crate::floation3::{
    bi_invariant_experiment, decide_regularity, enumerate_directions, order_induced_direction, parse_direction,
    signed_lex_orders, AuditReport, EnumerationSummary, Floation3Error,
};
use crate::hyperbolic::{HyperbolicModel, ModelError};
use crate::orders::{is_archimedean, kernel_generator, OrderBackend, OrderError, OrderOracle, OrderSpec};
use crate::render::{render_disk, DiskScene, RenderError};
use crate::straighten::{
    compare_laminations, perturb_and_compare, sample_starts, straighten_lamination, trace_samples, Developer, Geodesic,
    GeodesicLamination, StraightenError,
};

#[derive(Parser, Debug)]
#[command(name = "floiation", version, about = "Foliations from left orders on one-vertex triangulations")]
pub struct Cli {
    /// Bits of interval refinement used for algebraic sign decisions.
    #[arg(long, global = true, default_value_t = 128)]
    pub precision_bits: u32,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a complex and print its invariants.
    Validate {
        /// Complex file, or a bundled name (TOR2, OCT8, T3CUBE).
        complex: String,
        /// Also check edge essentiality against this order.
        #[arg(long)]
        order: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Order utilities.
    Orders {
        #[command(subcommand)]
        command: OrdersCommand,
    },
    /// Leaf tracing on surfaces.
    Floation {
        #[command(subcommand)]
        command: FloationCommand,
    },
    /// Orders on Z^2 and the torus.
    Torus {
        #[command(subcommand)]
        command: TorusCommand,
    },
    /// Straighten sampled leaves to a geodesic lamination.
    Straighten {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        sampling: Sampling,
        /// Also write a Poincaré-disk picture.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Draw developed leaf polylines in the SVG.
        #[arg(long)]
        leaves: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Perturb the leading functional and compare laminations.
    Perturb {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        sampling: Sampling,
        /// Comma-separated perturbation sizes.
        #[arg(long, default_value = "0,1/10,1/100,1/1000")]
        sizes: String,
        /// Also write one row per size.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Audit edge directions on a 3-dimensional complex.
    Audit3 {
        #[arg(long)]
        complex: String,
        /// Direction induced by this order.
        #[arg(long, conflicts_with_all = ["direction", "enumerate"])]
        order: Option<PathBuf>,
        /// Comma-separated +1/-1 per edge class.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "enumerate")]
        direction: Option<String>,
        /// Try every direction.
        #[arg(long)]
        enumerate: bool,
        /// Keep only directions passing the per-tetrahedron check.
        #[arg(long, requires = "enumerate")]
        valid_only: bool,
        /// Also write one row per direction.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Hausdorff distance between two lamination files.
    CompareLaminations {
        /// Lamination JSON written by `straighten`.
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
pub enum OrdersCommand {
    /// Print a summary of an order.
    Describe {
        /// Order JSON file.
        order: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
pub enum FloationCommand {
    /// Trace one leaf from a level inside a base triangle.
    Trace {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value_t = 0)]
        triangle: usize,
        /// Level as a fraction of the way from the lowest to the highest corner.
        #[arg(long, default_value = "1/7")]
        level: String,
        #[arg(long, default_value_t = 200)]
        max_crossings: usize,
        /// Use the minimal embedding of a word ball instead of the leading
        /// functional.
        #[arg(long)]
        table: bool,
        #[arg(long, default_value_t = 4)]
        radius: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
pub enum TorusCommand {
    /// Archimedean test and closed-leaf search.
    Classify {
        #[arg(long)]
        order: PathBuf,
        #[arg(long, default_value = "TOR2")]
        complex: String,
        #[arg(long, default_value_t = 12)]
        radius: usize,
        #[arg(long, default_value_t = 2000)]
        max_crossings: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
pub struct SurfaceArgs {
    /// Complex file or bundled name.
    #[arg(long, default_value = "OCT8")]
    pub complex: String,
    /// Order JSON file.
    #[arg(long)]
    pub order: PathBuf,
}

#[derive(Args, Debug)]
pub struct Sampling {
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 200)]
    pub max_crossings: usize,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Write JSON here instead of standard output.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Floation2(#[from] Floation2Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Straighten(#[from] StraightenError),
    #[error(transparent)]
    Floation3(#[from] Floation3Error),
    #[error(transparent)]
    Render(#[from] RenderError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 3,
            CliError::Input(_) => 4,
            CliError::Complex(_) => 5,
            CliError::Order(_) => 6,
            CliError::Embed(_) => 7,
            CliError::Floation2(_) => 8,
            CliError::Model(_) => 9,
            CliError::Straighten(_) => 10,
            CliError::Floation3(_) => 11,
            CliError::Render(_) => 12,
        }
    }
}

/// Exit code for command-line usage errors.
pub const USAGE: i32 = 2;

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { USAGE } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: &Output, v: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    match &out.json {
        Some(p) => write(p, &text),
        None => {
            use std::io::Write as _;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

/// A file path, or a bundled example name with or without `.json`.
pub fn load_complex(spec: &str) -> Result<Complex, CliError> {
    let p = Path::new(spec);
    if p.exists() {
        return Ok(Complex::load(p)?);
    }
    let name = spec.trim_end_matches(".json");
    let name = Path::new(name).file_name().and_then(|s| s.to_str()).unwrap_or(name);
    if bundled_names().contains(&name) {
        return Ok(bundled(name)?);
    }
    Err(CliError::Io(format!("{spec}: no such file or bundled complex")))
}

fn load_order(path: &Path, bits: u32) -> Result<OrderOracle, CliError> {
    Ok(OrderSpec::from_json(&read(path)?, bits)?)
}

fn surface(spec: &str) -> Result<Triangulation2, CliError> {
    match load_complex(spec)? {
        Complex::Surface(t) => Ok(t),
        Complex::Solid(_) => Err(CliError::Input(format!("{spec} is not a surface"))),
    }
}

fn solid(spec: &str) -> Result<Triangulation3, CliError> {
    match load_complex(spec)? {
        Complex::Solid(t) => Ok(t),
        Complex::Surface(_) => Err(CliError::Input(format!("{spec} is not a 3-dimensional complex"))),
    }
}

fn rational(s: &str) -> Result<BigRational, CliError> {
    parse_rational(s.trim()).map_err(|e| CliError::Input(format!("`{s}`: {e}")))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let bits = cli.precision_bits;
    match &cli.command {
        Command::Validate { complex, order, out } => {
            let c = load_complex(complex)?;
            let mut r = c.report();
            if let Some(path) = order {
                let o = load_order(path, bits)?;
                r["essential"] = json!(c.check_essential(Some(&o)));
            }
            emit(out, &r)
        }
        Command::Orders { command: OrdersCommand::Describe { order, out } } => {
            emit(out, &load_order(order, bits)?.describe())
        }
        Command::Floation { command: FloationCommand::Trace { surface: s, triangle, level, max_crossings, table, radius, out } } => {
            let t = surface(&s.complex)?;
            let o = Arc::new(load_order(&s.order, bits)?);
            let u = rational(level)?;
            if *table {
                let tab = Arc::new(minimal_embed(o.clone(), &enumerate_ball(&o, *radius))?);
                let lift = SurfaceLift::new(&t, &o)?;
                let src = TableSource::new(tab);
                let tracer = Tracer::new(&lift, &src);
                let v = trace_json(&tracer, &t, *triangle, &u, *max_crossings)?;
                emit(out, &v)
            } else {
                let lift = SurfaceLift::new(&t, &o)?;
                let src = FunctionalSource::from_oracle(&o)
                .ok_or_else(|| CliError::Input("order has no leading functional".into()))?;
                let tracer = Tracer::new(&lift, &src);
                let v = trace_json(&tracer, &t, *triangle, &u, *max_crossings)?;
                emit(out, &v)
            }
        }
        Command::Torus { command: TorusCommand::Classify { order, complex, radius, max_crossings, out } } => {
            let t = surface(complex)?;
            let o = Arc::new(load_order(order, bits)?);
            let caps = ClosedLeafCaps { radius: *radius, max_crossings: *max_crossings };
            emit(out, &classify_torus(&t, o, caps)?)
        }
        Command::Straighten { surface: s, sampling, svg, leaves, out } => {
            let t = surface(&s.complex)?;
            let o = load_order(&s.order, bits)?;
            let name = s.order.display().to_string();
            let st = straighten_surface(&t, &o, sampling, &name, *leaves && svg.is_some())?;
            let lam = st.lamination;
            if let Some(path) = svg {
                let scene = DiskScene { polygon: st.polygon, polylines: st.leaves, geodesics: lam.geodesics.clone() };
                write(path, &render_disk(&scene)?)?;
            }
            let mut v = serde_json::to_value(&lam).map_err(|e| CliError::Io(e.to_string()))?;
            v["is_lamination"] = json!(lam.is_lamination());
            emit(out, &v)
        }
        Command::Perturb { surface: s, sampling, sizes, csv, out } => {
            let t = surface(&s.complex)?;
            let o = load_order(&s.order, bits)?;
            let lift = SurfaceLift::new(&t, &o)?;
            let dev = Developer::new(HyperbolicModel::build(&t)?, &lift);
            let src = FunctionalSource::from_oracle(&o)
                .ok_or_else(|| CliError::Input("order has no leading functional".into()))?;
            let sizes: Vec<BigRational> = sizes.split(',').map(rational).collect::<Result<_, _>>()?;
            let starts = sample_starts(t.num_triangles(), sampling.samples, sampling.seed);
            let (_, rows) =
                perturb_and_compare(&dev, &lift, src.functional(), &sizes, &starts, sampling.eps, sampling.max_crossings)?;
            if let Some(path) = csv {
                let mut text = String::from("size,distance,geodesics,not_converged\n");
                for (r, s) in rows.iter().zip(&sizes) {
                    let _ = writeln!(text, "{},{:.9},{},{}", format_rational(s), r.distance, r.geodesics, r.not_converged);
                }
                write(path, &text)?;
            }
            let rows: Vec<Value> = rows
                .iter()
                .zip(&sizes)
                .map(|(r, s)| {
                    json!({"size": format_rational(s), "distance": r.distance, "geodesics": r.geodesics,
                           "not_converged": r.not_converged})
                })
                .collect();
            emit(out, &json!({"eps": sampling.eps, "samples": sampling.samples, "rows": rows}))
        }
        Command::Audit3 { complex, order, direction, enumerate, valid_only, csv, out } => {
            let t = solid(complex)?;
            if *enumerate {
                let (s, v) = enumeration_report(&t, *valid_only, bits)?;
                if let Some(path) = csv {
                    write(path, &audit_csv(&s.reports))?;
                }
                return emit(out, &v);
            }
            let d = match (order, direction) {
                (Some(p), _) => order_induced_direction(&t, &load_order(p, bits)?)?,
                (None, Some(spec)) => parse_direction(spec, t.num_edges())?,
                (None, None) => return Err(CliError::Input("audit3 needs --order, --direction or --enumerate".into())),
            };
            let r = decide_regularity(&t, &d)?;
            if let Some(path) = csv {
                write(path, &audit_csv(std::slice::from_ref(&r)))?;
            }
            emit(out, &json!(r))
        }
        Command::CompareLaminations { a, b, out } => {
            let (la, lb) = (lamination_file(a)?, lamination_file(b)?);
            let d = compare_laminations(&la, &lb)?;
            emit(out, &json!({"hausdorff": d, "sizes": [la.len(), lb.len()]}))
        }
    }
}

/// Archimedean test, kernel generator and closed-leaf search on a torus.
pub fn classify_torus(t: &Triangulation2, o: Arc<OrderOracle>, caps: ClosedLeafCaps) -> Result<Value, CliError> {
    let OrderBackend::Zn(chain) = o.backend() else {
        return Err(CliError::Input("torus classification needs a zn order".into()));
    };
    let archimedean = is_archimedean(chain)?;
    let kernel = kernel_generator(chain);
    let outcome = detect_closed_leaf(t, o.clone(), caps)?;
    let class = match &outcome {
        ClosedLeafOutcome::Certificate(c) => json!(c.period_class),
        ClosedLeafOutcome::NoneFound { .. } => Value::Null,
    };
    Ok(json!({
        "archimedean": archimedean,
        "kernel_generator": kernel,
        "closed_leaf_class": class,
        "outcome": outcome,
    }))
}

pub struct Straightened {
    pub lamination: GeodesicLamination,
    pub polygon: Vec<(f64, f64)>,
    /// Developed leaf polylines, when requested.
    pub leaves: Vec<Vec<(f64, f64)>>,
}

/// Samples leaves of the order's leading functional and straightens them.
pub fn straighten_surface(
    t: &Triangulation2,
    o: &OrderOracle,
    sampling: &Sampling,
    name: &str,
    leaves: bool,
) -> Result<Straightened, CliError> {
    let lift = SurfaceLift::new(t, o)?;
    let dev = Developer::new(HyperbolicModel::build(t)?, &lift);
    let src =
        FunctionalSource::from_oracle(o).ok_or_else(|| CliError::Input("order has no leading functional".into()))?;
    let tracer = Tracer::new(&lift, &src);
    let starts = sample_starts(t.num_triangles(), sampling.samples, sampling.seed);
    let lamination = straighten_lamination(&dev, &tracer, &starts, sampling.eps, sampling.max_crossings, name)?;
    let leaves = if leaves {
        trace_samples(&dev, &tracer, &starts, sampling.eps, sampling.max_crossings)?
            .into_iter()
            .filter_map(|r| r.leaf.map(|l| l.points))
            .collect()
    } else {
        Vec::new()
    };
    Ok(Straightened { lamination, polygon: dev.model().vertices().iter().map(|z| (z.re, z.im)).collect(), leaves })
}

/// Exhaustive direction audit plus the signed lexicographic order experiment
/// (for rank at most 4).
pub fn enumeration_report(
    t: &Triangulation3,
    valid_only: bool,
    bits: u32,
) -> Result<(EnumerationSummary, Value), CliError> {
    let s = enumerate_directions(t, valid_only)?;
    let rank = t.presentation().rank();
    let experiment = if rank <= 4 {
        let orders = signed_lex_orders(rank)
            .into_iter()
            .map(|(label, rows)| Ok((label, lex_oracle(&rows, bits)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        json!(bi_invariant_experiment(t, &orders)?)
    } else {
        Value::Null
    };
    let mut v = serde_json::to_value(&s).map_err(|e| CliError::Io(e.to_string()))?;
    v["bi_invariant_orders"] = experiment;
    Ok((s, v))
}

fn lex_oracle(rows: &[Vec<i64>], bits: u32) -> Result<OrderOracle, CliError> {
    let text = json!({"backend": "zn", "field": "Q", "functionals": rows}).to_string();
    Ok(OrderSpec::from_json(&text, bits)?)
}

fn lamination_file(path: &Path) -> Result<Vec<Geodesic>, CliError> {
    let v: Value = serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let gs = v.get("geodesics").cloned().unwrap_or(v);
    serde_json::from_value(gs).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn audit_csv(rows: &[AuditReport]) -> String {
    let mut s = String::from(
        "direction,all_tets_total,o_connected,i_connected,red_components,complement_components,is_local_orientation,is_regular,abelian_feasible\n",
    );
    for r in rows {
        let d: Vec<String> = r.direction.iter().map(|x| format!("{x:+}")).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            d.join(" "),
            r.all_tets_total,
            r.o_connected,
            r.i_connected,
            r.red_components,
            r.complement_components,
            r.is_local_orientation,
            r.is_regular,
            r.abelian_feasible
        );
    }
    s
}

fn param_json(p: &EdgeParam) -> Value {
    match p {
        EdgeParam::Exact(r) => json!(format_rational(r)),
        EdgeParam::Linear(..) => Value::Null,
    }
}

fn crossing_json(t: &Triangulation2, c: &Crossing) -> Value {
    let g = &t.presentation().generators;
    json!({
        "edge": c.edge,
        "tail": g.format(&c.tail.word),
        "param": param_json(&c.param),
        "param_f64": c.param_f64,
        "into_triangle": c.into.0,
    })
}

fn trace_json<S: LevelSource>(
    tracer: &Tracer<'_, S>,
    t: &Triangulation2,
    triangle: usize,
    u: &BigRational,
    cap: usize,
) -> Result<Value, CliError> {
    if triangle >= t.num_triangles() {
        return Err(CliError::Input(format!("triangle {triangle} out of range")));
    }
    let id = Label::identity(tracer.lift().rank());
    let y = tracer.level_in(triangle, &id, u)?;
    let tr = tracer.trace(triangle, &id, &y, cap)?;
    Ok(json!({
        "triangle": triangle,
        "level": tracer.source().describe(&y),
        "forward_status": tr.forward_status,
        "backward_status": tr.backward_status,
        "crossings": tr.num_crossings(),
        "forward": tr.forward.iter().map(|c| crossing_json(t, c)).collect::<Vec<_>>(),
        "backward": tr.backward.iter().map(|c| crossing_json(t, c)).collect::<Vec<_>>(),
    }))
}
