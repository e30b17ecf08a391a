//! hyperball: barycenters of point sets and regions in hyperbolic balls.
//!
//! One job per invocation. The payload is a single JSON object read from
//! stdin or --input; flags override payload fields. Outputs are
//! deterministic: identical invocations produce byte-identical bytes.

mod payload;

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperball::ball::{poincare_distance, RealPoint};
use hyperball::bergman::{bergman_distance, ComplexPoint};
use hyperball::measure::DensityKind;
use hyperball::model::HyperbolicPoint;
use hyperball::potential::{potential, WeightedMeasure};
use hyperball::solver::{
    barycenter, barycenter_region, verify_invariance, verify_invariance_region, BarycenterResult,
    SolverConfig,
};
use payload::{
    field, integer, num, parse_complex_map, parse_complex_point, parse_payload, parse_real_map,
    parse_real_point, parse_region, CliError,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "hyperball",
    version,
    about = "Barycenters of point sets and regions in hyperbolic balls",
    long_about = "Computes the unique point c at which the measure-weighted sum of the \
ball involutions vanishes, in the real (poincare) or complex (bergman) model. \
Solver defaults: residual_tol 1e-10 (scaled by total mass), max_iters 500, \
initial_damping 1.0, damping_backoff 0.5, fallback_max_iters 2000, armijo_c 1e-4. \
Exit codes: 0 converged, 2 validation error, 3 solver non-convergence, 4 sampling degeneracy."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Barycenter of a weighted point set (payload: points, weights?)
    Points(JobArgs),
    /// Barycenter of a sampled region (payload: region)
    Region(JobArgs),
    /// Compare map(barycenter(data)) with barycenter(map(data))
    /// (payload: points or region, plus map)
    Invariance(JobArgs),
    /// Distance between two points (payload: x, y)
    Distance(JobArgs),
    /// Potential values on a planar grid, as CSV (payload: points or region)
    Grid(JobArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    /// Real hyperbolic ball in R^n
    Poincare,
    /// Complex Bergman ball in C^m
    Bergman,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DensityArg {
    Lebesgue,
    Hyperbolic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct JobArgs {
    /// Ball model; may also come from the payload "model" field
    #[arg(long, value_enum)]
    model: Option<ModelArg>,

    /// Model dimension: n for poincare, m for bergman
    #[arg(long)]
    dim: Option<usize>,

    /// Residual tolerance, scaled by total mass [default: 1e-10]
    #[arg(long)]
    tol: Option<f64>,

    /// Fixed-point iteration cap [default: 500]
    #[arg(long)]
    max_iters: Option<usize>,

    /// Sampling seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,

    /// Sample count for region jobs [default: 65536]
    #[arg(long)]
    samples: Option<usize>,

    /// Density for region jobs [default: hyperbolic]
    #[arg(long, value_enum)]
    density: Option<DensityArg>,

    /// Output format (grid always emits CSV)
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Grid bounds x0,x1,y0,y1 [default: -0.9,0.9,-0.9,0.9]
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,

    /// Grid points per axis [default: 101]
    #[arg(long)]
    resolution: Option<usize>,

    /// Read the JSON payload from this file instead of stdin
    #[arg(long)]
    input: Option<PathBuf>,

    /// Write the result here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

type CommandFn = fn(&JobArgs, &Job) -> Result<String, CliError>;

fn main() {
    let cli = Cli::parse();
    let (args, run): (&JobArgs, CommandFn) =
        match &cli.command {
            Command::Points(a) => (a, cmd_points),
            Command::Region(a) => (a, cmd_region),
            Command::Invariance(a) => (a, cmd_invariance),
            Command::Distance(a) => (a, cmd_distance),
            Command::Grid(a) => (a, cmd_grid),
        };
    let outcome = Job::prepare(args).and_then(|job| run(args, &job));
    match outcome {
        Ok(text) => {
            if let Some(path) = &args.output {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    std::process::exit(2);
                }
            } else {
                print!("{text}");
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}

/// Everything resolved from flags plus payload.
struct Job {
    payload: Value,
    model: ModelArg,
    dim: Option<usize>,
    config: SolverConfig,
    seed: u64,
    samples: usize,
    density: DensityKind,
}

impl Job {
    fn prepare(args: &JobArgs) -> Result<Self, CliError> {
        let text = match &args.input {
            Some(path) => std::fs::read_to_string(path).map_err(|e| {
                CliError::validation(format!("cannot read {}: {e}", path.display()))
            })?,
            None => {
                let mut buf = String::new();
                std::io::stdin().read_to_string(&mut buf).map_err(|e| {
                    CliError::validation(format!("cannot read stdin: {e}"))
                })?;
                buf
            }
        };
        let payload = parse_payload(&text)?;

        let model = match args.model {
            Some(m) => m,
            None => match field(&payload, "model").and_then(|v| v.as_str()) {
                Some("poincare") | Some("poincare_n") => ModelArg::Poincare,
                Some("bergman") | Some("bergman_m") => ModelArg::Bergman,
                Some(other) => {
                    return Err(CliError::validation(format!(
                        "model: unknown model {other:?} (expected poincare or bergman)"
                    )))
                }
                None => {
                    return Err(CliError::validation(
                        "model: give --model or a \"model\" field",
                    ))
                }
            },
        };
        let dim = match args.dim {
            Some(d) => Some(d),
            None => match field(&payload, "dim") {
                Some(v) => Some(integer(v, "dim")? as usize),
                None => None,
            },
        };

        let mut config = SolverConfig::default();
        if let Some(cfg) = field(&payload, "config") {
            if let Some(v) = field(cfg, "residual_tol") {
                config.residual_tol = num(v, "config.residual_tol")?;
            }
            if let Some(v) = field(cfg, "max_iters") {
                config.max_iters = integer(v, "config.max_iters")? as usize;
            }
            if let Some(v) = field(cfg, "initial_damping") {
                config.initial_damping = num(v, "config.initial_damping")?;
            }
            if let Some(v) = field(cfg, "damping_backoff") {
                config.damping_backoff = num(v, "config.damping_backoff")?;
            }
            if let Some(v) = field(cfg, "fallback_max_iters") {
                config.fallback_max_iters = integer(v, "config.fallback_max_iters")? as usize;
            }
            if let Some(v) = field(cfg, "armijo_c") {
                config.armijo_c = num(v, "config.armijo_c")?;
            }
        }
        if let Some(tol) = args.tol {
            config.residual_tol = tol;
        }
        if let Some(iters) = args.max_iters {
            config.max_iters = iters;
        }
        config.validate().map_err(CliError::from)?;

        let seed = match args.seed {
            Some(s) => s,
            None => match field(&payload, "seed") {
                Some(v) => integer(v, "seed")?,
                None => 0,
            },
        };
        let samples = match args.samples {
            Some(s) => s,
            None => match field(&payload, "samples") {
                Some(v) => integer(v, "samples")? as usize,
                None => 1 << 16,
            },
        };
        let density = match args.density {
            Some(DensityArg::Lebesgue) => DensityKind::Lebesgue,
            Some(DensityArg::Hyperbolic) => DensityKind::Hyperbolic,
            None => match field(&payload, "density").and_then(|v| v.as_str()) {
                Some("lebesgue") => DensityKind::Lebesgue,
                Some("hyperbolic") | None => DensityKind::Hyperbolic,
                Some(other) => {
                    return Err(CliError::validation(format!(
                        "density: unknown density {other:?}"
                    )))
                }
            },
        };

        Ok(Self {
            payload,
            model,
            dim,
            config,
            seed,
            samples,
            density,
        })
    }

    fn model_name(&self) -> &'static str {
        match self.model {
            ModelArg::Poincare => "poincare",
            ModelArg::Bergman => "bergman",
        }
    }

    fn require_dim(&self) -> Result<usize, CliError> {
        self.dim
            .ok_or_else(|| CliError::validation("dim: give --dim or a \"dim\" field"))
    }

    fn config_json(&self) -> Value {
        json!({
            "residual_tol": self.config.residual_tol,
            "max_iters": self.config.max_iters,
            "initial_damping": self.config.initial_damping,
            "damping_backoff": self.config.damping_backoff,
            "fallback_max_iters": self.config.fallback_max_iters,
            "armijo_c": self.config.armijo_c,
        })
    }
}

fn encode_ambient(model: ModelArg, ambient: &[f64]) -> Value {
    match model {
        ModelArg::Poincare => Value::from(ambient.to_vec()),
        ModelArg::Bergman => Value::from(
            ambient
                .chunks(2)
                .map(|c| Value::from(vec![c[0], c[1]]))
                .collect::<Vec<_>>(),
        ),
    }
}

/// 17 significant digits, locale-independent.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn render(format: FormatArg, value: &Value) -> String {
    match format {
        FormatArg::Json => {
            let mut text = serde_json::to_string_pretty(value).expect("serializable");
            text.push('\n');
            text
        }
        FormatArg::Csv => {
            let mut rows = String::from("field,value\n");
            if let Value::Object(map) = value {
                for (key, val) in map {
                    let rendered = match val {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    rows.push_str(&format!("{key},{}\n", rendered.replace(',', ";")));
                }
            }
            rows
        }
    }
}

/// Parse the measure for point-set jobs: "points" plus optional "weights".
fn parse_measure<P, F>(job: &Job, parse_point: F) -> Result<WeightedMeasure<P>, CliError>
where
    P: HyperbolicPoint,
    F: Fn(&Value, Option<usize>, &str) -> Result<P, CliError>,
{
    let raw = field(&job.payload, "points")
        .and_then(|v| v.as_array())
        .ok_or_else(|| CliError::validation("points: expected an array of points"))?;
    if raw.is_empty() {
        return Err(CliError::validation("points: at least one point required"));
    }
    let mut points = Vec::with_capacity(raw.len());
    let mut dim = job.dim;
    for (i, v) in raw.iter().enumerate() {
        let p = parse_point(v, dim, &format!("points[{i}]"))?;
        dim = Some(p.dim());
        points.push(p);
    }
    let weights = match field(&job.payload, "weights") {
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or_else(|| CliError::validation("weights: expected an array"))?;
            arr.iter()
                .enumerate()
                .map(|(i, w)| num(w, &format!("weights[{i}]")))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => vec![1.0; points.len()],
    };
    WeightedMeasure::new(points, weights).map_err(CliError::from)
}

fn barycenter_json<P: HyperbolicPoint>(
    job: &Job,
    result: &BarycenterResult<P>,
) -> Value {
    let ambient = result.point.to_ambient();
    let mut out = json!({
        "command": "points",
        "model": job.model_name(),
        "dim": result.point.dim(),
        "config": job.config_json(),
        "barycenter": encode_ambient(job.model, ambient.as_slice()),
        "residual_norm": result.residual_norm,
        "potential": result.potential,
        "iterations": result.iterations,
        "converged": result.converged,
    });
    if let Some(s) = &result.sampling {
        let obj = out.as_object_mut().expect("object");
        obj.insert("command".into(), "region".into());
        obj.insert("mass_estimate".into(), s.total_mass_estimate.into());
        obj.insert("mass_standard_error".into(), s.mass_standard_error.into());
        obj.insert(
            "barycenter_standard_error".into(),
            s.barycenter_standard_error.into(),
        );
        obj.insert("samples".into(), s.sample_count.into());
        obj.insert("seed".into(), s.seed.into());
    }
    out
}

fn cmd_points(args: &JobArgs, job: &Job) -> Result<String, CliError> {
    let value = match job.model {
        ModelArg::Poincare => {
            let mu = parse_measure(job, parse_real_point)?;
            barycenter_json(job, &barycenter(&mu, &job.config)?)
        }
        ModelArg::Bergman => {
            let mu = parse_measure(job, parse_complex_point)?;
            barycenter_json(job, &barycenter(&mu, &job.config)?)
        }
    };
    Ok(render(args.format, &value))
}

fn cmd_region(args: &JobArgs, job: &Job) -> Result<String, CliError> {
    let region_value = field(&job.payload, "region")
        .ok_or_else(|| CliError::validation("region: field required for region jobs"))?;
    let dim = job.require_dim()?;
    let value = match job.model {
        ModelArg::Poincare => {
            let region = parse_region(
                region_value,
                dim,
                "region",
                &parse_real_point,
                &parse_real_map,
            )?;
            let result =
                barycenter_region(&region, job.density, &job.config, job.samples, job.seed)?;
            barycenter_json(job, &result)
        }
        ModelArg::Bergman => {
            let region = parse_region(
                region_value,
                dim,
                "region",
                &parse_complex_point,
                &parse_complex_map,
            )?;
            let result =
                barycenter_region(&region, job.density, &job.config, job.samples, job.seed)?;
            barycenter_json(job, &result)
        }
    };
    Ok(render(args.format, &value))
}

fn cmd_invariance(args: &JobArgs, job: &Job) -> Result<String, CliError> {
    let map_value = field(&job.payload, "map")
        .ok_or_else(|| CliError::validation("map: field required for invariance jobs"))?;
    let has_points = field(&job.payload, "points").is_some();
    let has_region = field(&job.payload, "region").is_some();
    if has_points == has_region {
        return Err(CliError::validation(
            "invariance jobs need exactly one of \"points\" or \"region\"",
        ));
    }

    let report = match job.model {
        ModelArg::Poincare => {
            if has_points {
                let mu = parse_measure(job, parse_real_point)?;
                let map = parse_real_map(map_value, mu.dim(), "map")?;
                verify_invariance(&mu, &map, &job.config)?
            } else {
                let dim = job.require_dim()?;
                let region = parse_region(
                    field(&job.payload, "region").unwrap(),
                    dim,
                    "region",
                    &parse_real_point,
                    &parse_real_map,
                )?;
                let map = parse_real_map(map_value, dim, "map")?;
                verify_invariance_region(
                    &region, job.density, &map, &job.config, job.samples, job.seed,
                )?
            }
        }
        ModelArg::Bergman => {
            if has_points {
                let mu = parse_measure(job, parse_complex_point)?;
                let map = parse_complex_map(map_value, mu.dim(), "map")?;
                verify_invariance(&mu, &map, &job.config)?
            } else {
                let dim = job.require_dim()?;
                let region = parse_region(
                    field(&job.payload, "region").unwrap(),
                    dim,
                    "region",
                    &parse_complex_point,
                    &parse_complex_map,
                )?;
                let map = parse_complex_map(map_value, dim, "map")?;
                verify_invariance_region(
                    &region, job.density, &map, &job.config, job.samples, job.seed,
                )?
            }
        }
    };

    let value = json!({
        "command": "invariance",
        "model": job.model_name(),
        "config": job.config_json(),
        "defect": report.defect,
        "threshold": report.threshold,
        "passed": report.passed,
        "barycenter": encode_ambient(job.model, &report.barycenter),
        "barycenter_mapped_data": encode_ambient(job.model, &report.barycenter_mapped_data),
        "mapped_barycenter": encode_ambient(job.model, &report.mapped_barycenter),
    });
    Ok(render(args.format, &value))
}

fn cmd_distance(args: &JobArgs, job: &Job) -> Result<String, CliError> {
    let x = field(&job.payload, "x")
        .ok_or_else(|| CliError::validation("x: field required for distance jobs"))?;
    let y = field(&job.payload, "y")
        .ok_or_else(|| CliError::validation("y: field required for distance jobs"))?;
    let (distance, dim) = match job.model {
        ModelArg::Poincare => {
            let px = parse_real_point(x, job.dim, "x")?;
            let py = parse_real_point(y, Some(px.dim()), "y")?;
            (poincare_distance(&px, &py), px.dim())
        }
        ModelArg::Bergman => {
            let px = parse_complex_point(x, job.dim, "x")?;
            let py = parse_complex_point(y, Some(px.dim()), "y")?;
            (bergman_distance(&px, &py), px.dim())
        }
    };
    let value = json!({
        "command": "distance",
        "model": job.model_name(),
        "dim": dim,
        "distance": distance,
    });
    Ok(render(args.format, &value))
}

fn parse_bounds(args: &JobArgs) -> Result<(f64, f64, f64, f64), CliError> {
    let text = args.bounds.as_deref().unwrap_or("-0.9,0.9,-0.9,0.9");
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::validation(format!("bounds: cannot parse {text:?}")))?;
    if parts.len() != 4 || parts[0] >= parts[1] || parts[2] >= parts[3] {
        return Err(CliError::validation(
            "bounds: expected x0,x1,y0,y1 with x0 < x1 and y0 < y1",
        ));
    }
    Ok((parts[0], parts[1], parts[2], parts[3]))
}

/// Potential of the payload's measure on a planar grid. Supports the two
/// planar models only (poincare n = 2, bergman m = 1); always CSV.
fn cmd_grid(args: &JobArgs, job: &Job) -> Result<String, CliError> {
    let (x0, x1, y0, y1) = parse_bounds(args)?;
    let resolution = args.resolution.unwrap_or(101);
    if resolution < 2 {
        return Err(CliError::validation("resolution: must be at least 2"));
    }

    enum PlanarMeasure {
        Real(WeightedMeasure<RealPoint>),
        Complex(WeightedMeasure<ComplexPoint>),
    }

    let measure = match job.model {
        ModelArg::Poincare => {
            if job.dim.unwrap_or(2) != 2 {
                return Err(CliError::validation(
                    "grid: the poincare grid needs dim 2",
                ));
            }
            if field(&job.payload, "points").is_some() {
                PlanarMeasure::Real(parse_measure(job, parse_real_point)?)
            } else if let Some(region_value) = field(&job.payload, "region") {
                let region = parse_region(
                    region_value,
                    2,
                    "region",
                    &parse_real_point,
                    &parse_real_map,
                )?;
                let batch =
                    hyperball::measure::sample_region(&region, job.density, job.samples, job.seed)?;
                PlanarMeasure::Real(batch.atoms)
            } else {
                return Err(CliError::validation(
                    "grid jobs need \"points\" or \"region\"",
                ));
            }
        }
        ModelArg::Bergman => {
            if job.dim.unwrap_or(1) != 1 {
                return Err(CliError::validation("grid: the bergman grid needs dim 1"));
            }
            if field(&job.payload, "points").is_some() {
                PlanarMeasure::Complex(parse_measure(job, parse_complex_point)?)
            } else if let Some(region_value) = field(&job.payload, "region") {
                let region = parse_region(
                    region_value,
                    1,
                    "region",
                    &parse_complex_point,
                    &parse_complex_map,
                )?;
                let batch =
                    hyperball::measure::sample_region(&region, job.density, job.samples, job.seed)?;
                PlanarMeasure::Complex(batch.atoms)
            } else {
                return Err(CliError::validation(
                    "grid jobs need \"points\" or \"region\"",
                ));
            }
        }
    };

    let mut out = String::from("x,y,potential\n");
    for iy in 0..resolution {
        let y = y0 + (y1 - y0) * iy as f64 / (resolution - 1) as f64;
        for ix in 0..resolution {
            let x = x0 + (x1 - x0) * ix as f64 / (resolution - 1) as f64;
            if (x * x + y * y).sqrt() >= 1.0 - 1e-6 {
                continue;
            }
            let value = match &measure {
                PlanarMeasure::Real(mu) => {
                    potential(&RealPoint::new(vec![x, y]).expect("interior"), mu)
                }
                PlanarMeasure::Complex(mu) => potential(
                    &ComplexPoint::from_scalar(num_complex::Complex64::new(x, y))
                        .expect("interior"),
                    mu,
                ),
            };
            out.push_str(&format!("{},{},{}\n", fmt17(x), fmt17(y), fmt17(value)));
        }
    }
    Ok(out)
}
