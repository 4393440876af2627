//! Command-line front end. Every subcommand writes one report (JSON by
//! default, CSV for tabular output) and exits with 0 on success, 1 when an
//! asserted invariant fails and 2 on usage errors.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::index;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytics::{claims, lambda, tilt};
use crate::chains::{self, ChainSampler};
use crate::containers::{self, VertexOrder};
use crate::counting::{self, CountLimits};
use crate::error::{Error, Result};
use crate::exact;
use crate::flows::{self, AveragedFlow, AveragingMode, CoverEdge, Snmf};
use crate::grid::{self, Exponent, GridShape, Point, VertexSet};
use crate::rng;
use crate::saturation;

#[derive(Debug, Parser)]
#[command(name = "hypergrid", version, about = "Antichain toolkit for the hypergrid [t]^n")]
pub struct Cli {
    /// Output format; tabular commands default to csv where noted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub n: usize,
}

impl ShapeArgs {
    fn shape(&self) -> Result<GridShape> {
        GridShape::new(self.t, self.n)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GuardArgs {
    /// Largest number of cover edges for exhaustive flow work.
    #[arg(long, env = "HYPERGRID_EDGE_GUARD", default_value_t = flows::DEFAULT_EDGE_GUARD)]
    pub edge_guard: u128,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Level sizes N(0..top).
    Levels {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Also check the level tail bound for every t < |r| <= (t-1)n/2.
        #[arg(long)]
        tail_check: bool,
    },
    /// Width (size of the middle level).
    Width {
        #[command(flatten)]
        shape: ShapeArgs,
    },
    /// Edge weights of the matching flow and its symmetrized average.
    #[command(subcommand)]
    Flow(FlowCommand),
    /// Random maximal chains and pair probabilities.
    #[command(subcommand)]
    Chains(ChainsCommand),
    /// Comparability-degree checks on a point set.
    Saturate(SaturateArgs),
    /// Graph container algorithm on the good levels.
    #[command(subcommand)]
    Containers(ContainersCommand),
    /// Exact antichain counts and the bound table.
    #[command(subcommand)]
    Count(CountCommand),
    /// Tilted local limit model and its numeric checks.
    #[command(subcommand)]
    Analytics(AnalyticsCommand),
}

#[derive(Debug, Subcommand)]
pub enum FlowCommand {
    /// Exhaustive conservation check of the scaled normalized matching flow.
    Verify {
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        guards: GuardArgs,
        /// Check the symmetrized flow instead.
        #[arg(long)]
        averaged: bool,
    },
    /// Exact weight of one cover edge.
    Weight {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Edge as "x1,...,xn:m" with 1-based moving coordinate m.
        #[arg(long)]
        edge: String,
    },
    /// Symmetrized weight of an edge, or the maximum over good edges.
    Avg {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        edge: Option<String>,
        /// Monte Carlo permutations (forces sampling mode).
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChainsCommand {
    /// Sample random full chains from the regular cover.
    Sample {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report per-level marginal z-scores instead of the chains.
        #[arg(long)]
        marginals: bool,
    },
    /// P(x, y ∈ C) for one pair, or the pair bound over all good pairs.
    Pair {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, requires = "y")]
        x: Option<String>,
        #[arg(long, requires = "x")]
        y: Option<String>,
        /// Check the pair bound for rank distance at least k.
        #[arg(long, conflicts_with = "x")]
        k: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SaturationCheck {
    /// Degree, plus the weak and rectangle checks where they apply.
    Auto,
    Weak,
    Strong,
    Rectangle,
    /// Chain and rectangle partitions of the grid.
    Partition,
}

#[derive(Debug, Args)]
pub struct SaturateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Points as "x1,..,xn;y1,..,yn;...".
    #[arg(long)]
    pub points: Option<String>,
    /// Draw this many distinct random points instead.
    #[arg(long, conflicts_with = "points")]
    pub random_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SaturationCheck::Auto)]
    pub check: SaturationCheck,
    /// LYM excess level for the strong check.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Slack (a rational "p/q") for the strong check.
    #[arg(long, default_value = "1/2")]
    pub slack: String,
    /// Size of the first coordinate block in the rectangle partition.
    #[arg(long)]
    pub half_split: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ContainersCommand {
    /// One run of the container algorithm.
    Run {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Input independent set; a random good antichain when omitted.
        #[arg(long)]
        points: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rational stop factor; default 1 + 1/n.
        #[arg(long)]
        stop_factor: Option<String>,
        #[arg(long, default_value = "lex")]
        order: String,
        /// Write the step trace as JSON lines to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Property check over random antichains.
    Verify {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "lex")]
        order: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    /// Largest grid for downset enumeration.
    #[arg(long, default_value_t = counting::DEFAULT_ENUMERATION_LIMIT)]
    pub enum_limit: u128,
    /// Largest state space for the transfer matrix.
    #[arg(long, default_value_t = counting::DEFAULT_STATE_LIMIT)]
    pub state_limit: u128,
}

impl LimitArgs {
    fn limits(&self) -> CountLimits {
        CountLimits {
            enumeration: self.enum_limit,
            states: self.state_limit,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum CountCommand {
    /// Exact number of antichains.
    Exact {
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Antichains of size at most k.
    Upto {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = counting::DEFAULT_ENUMERATION_LIMIT)]
        enum_limit: u128,
    },
    /// Width, count, upper/lower bounds and the Ramsey value (csv by default).
    Bounds {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Constant in the main upper bound.
        #[arg(long, default_value = "1")]
        c: String,
        #[command(flatten)]
        limits: LimitArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Own,
    Factor,
}

#[derive(Debug, Subcommand)]
pub enum AnalyticsCommand {
    /// Solve for the tilt at level k, or sweep |1-p| t^2 n / |q| (csv).
    Tilt {
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Density f (or a derivative) of the tilted sum at x, with its lattice check.
    Density {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 0)]
        order: u8,
    },
    /// Exact Λ/N_min² ratio at level k (central by default).
    Lambda {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<i64>,
        #[arg(long, value_enum, default_value_t = ProfileArg::Own)]
        profile: ProfileArg,
    },
    /// Grid checks of the characteristic-function inequalities.
    Claims {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        k: Option<usize>,
        /// Grid step as a multiple of π.
        #[arg(long, default_value_t = claims::DEFAULT_GRID_STEP)]
        grid_step: f64,
        /// Assert only for n at or above this.
        #[arg(long, default_value_t = claims::DEFAULT_N_THRESHOLD)]
        n_threshold: usize,
        /// Instead of one check, scan these n and report per-claim thresholds (csv).
        #[arg(long, value_delimiter = ',')]
        scan_n: Vec<usize>,
        /// Level offset below the centre for the scan, in units of t n^(2/3).
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
    },
    /// Sup norms of f' and f'' over t and n lists (csv).
    Derivs {
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
    },
}

/// What a command produced.
enum Report {
    Json { value: Value, pass: bool },
    Table { csv: String, json: Value, pass: bool, csv_default: bool },
}

impl Report {
    fn json<T: Serialize>(x: &T, pass: bool) -> Result<Report> {
        Ok(Report::Json { value: to_value(x)?, pass })
    }

    fn table<T: Serialize>(rows: &[T], pass: bool, csv_default: bool) -> Result<Report> {
        Ok(Report::Table {
            csv: to_csv(rows)?,
            json: to_value(&rows)?,
            pass,
            csv_default,
        })
    }

    fn pass(&self) -> bool {
        match self {
            Report::Json { pass, .. } | Report::Table { pass, .. } => *pass,
        }
    }

    fn render(&self, format: Option<Format>) -> Result<String> {
        match (self, format) {
            (Report::Json { .. }, Some(Format::Csv)) => {
                Err(Error::Invalid("this command has no csv output; use --format json".into()))
            }
            (Report::Json { value, .. }, _) => Ok(pretty(value)),
            (Report::Table { csv, .. }, Some(Format::Csv)) => Ok(csv.clone()),
            (Report::Table { csv, csv_default: true, .. }, None) => Ok(csv.clone()),
            (Report::Table { json, .. }, _) => Ok(pretty(json)),
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn to_value<T: Serialize + ?Sized>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Invalid(format!("serialization failed: {e}")))
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn parse_ratio(s: &str) -> Result<BigRational> {
    exact::parse_ratio(s).ok_or_else(|| Error::Invalid(format!("bad rational {s:?} (expected p/q)")))
}

fn parse_order(s: &str) -> Result<VertexOrder> {
    s.parse()
}

fn parse_points(shape: GridShape, s: &str) -> Result<VertexSet> {
    let points = s
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(Point::parse)
        .collect::<Result<Vec<_>>>()?;
    VertexSet::from_points(shape, points)
}

fn random_set(shape: GridShape, size: usize, seed: u64) -> Result<VertexSet> {
    let volume = shape.enumerable(saturation::DEFAULT_PARTITION_GUARD)?;
    if size > volume {
        return Err(Error::Precondition(format!("cannot draw {size} points from {volume}")));
    }
    let mut r = rng::stream(seed, 0);
    Ok(VertexSet::from_indices(shape, index::sample(&mut r, volume, size)))
}

/// Big integers print as JSON numbers when they fit in 64 bits.
fn big_json(x: &BigUint) -> Value {
    match x.to_u64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn exact_w(shape: &GridShape) -> Result<BigRational> {
    flows::max_good_weight(shape, AveragingMode::Exact, Exponent::default())?
        .exact
        .ok_or_else(|| Error::Precondition("exact W unavailable".into()))
}

fn model_for(shape: &GridShape, k: Option<usize>) -> Result<tilt::TiltedModel> {
    match k {
        Some(k) => tilt::solve_tilt(shape, k),
        None => Ok(tilt::TiltedModel::central(shape)),
    }
}

fn run_levels(shape: &ShapeArgs, tail_check: bool) -> Result<Report> {
    let shape = shape.shape()?;
    let profile = grid::level_sizes(&shape);
    let sizes: Vec<Value> = profile.sizes().iter().map(big_json).collect();
    if !tail_check {
        return Ok(Report::Json {
            value: Value::Array(sizes),
            pass: true,
        });
    }
    let t = shape.t() as i64;
    let mut checks = Vec::new();
    let reach = shape.top() as i64 / 2;
    for r in (t + 1)..=reach {
        checks.extend(grid::level_tail_check(&shape, &profile, r)?);
    }
    let pass = checks.iter().all(|c| c.holds);
    Ok(Report::Json {
        value: json!({
            "sizes": sizes,
            "log_concave": grid::is_log_concave(&profile),
            "symmetric": profile.is_symmetric(),
            "tail_checks": to_value(&checks)?,
            "pass": pass,
        }),
        pass,
    })
}

fn run_flow(cmd: &FlowCommand) -> Result<Report> {
    match cmd {
        FlowCommand::Verify { shape, guards, averaged } => {
            let shape = shape.shape()?;
            let report = if *averaged {
                flows::verify_flow(&AveragedFlow::new(shape)?, guards.edge_guard)?
            } else {
                flows::verify_conservation(&shape, guards.edge_guard)?
            };
            Report::json(&report, report.pass)
        }
        FlowCommand::Weight { shape, edge } => {
            let shape = shape.shape()?;
            let e = CoverEdge::parse(edge)?;
            let w = Snmf::new(shape).edge_weight(&e)?;
            Report::json(
                &json!({ "edge": to_value(&e)?, "weight": exact::ratio_string(&w), "approx": exact::ratio_to_f64(&w) }),
                true,
            )
        }
        FlowCommand::Avg { shape, edge, samples, seed } => {
            let shape = shape.shape()?;
            let mode = match samples {
                Some(samples) => AveragingMode::MonteCarlo { samples: *samples, seed: *seed },
                None if shape.n() <= flows::EXACT_AVERAGING_MAX_N => AveragingMode::Exact,
                None => AveragingMode::MonteCarlo { samples: 10_000, seed: *seed },
            };
            match edge {
                Some(edge) => {
                    let e = CoverEdge::parse(edge)?;
                    let value = match flows::averaged_edge_weight(&shape, &e, mode)? {
                        flows::Averaged::Exact(r) => json!({ "exact": exact::ratio_string(&r), "approx": exact::ratio_to_f64(&r) }),
                        flows::Averaged::Estimate(est) => to_value(&est)?,
                    };
                    Report::json(&json!({ "edge": to_value(&e)?, "weight": value }), true)
                }
                None => {
                    let w = flows::max_good_weight(&shape, mode, Exponent::default())?;
                    Report::json(&w, true)
                }
            }
        }
    }
}

fn run_chains(cmd: &ChainsCommand) -> Result<Report> {
    match cmd {
        ChainsCommand::Sample { shape, samples, seed, marginals } => {
            let shape = shape.shape()?;
            let snmf = Snmf::new(shape);
            if *marginals {
                let rows = chains::marginal_check(&snmf, *samples, *seed, chains::DEFAULT_BOX_GUARD)?;
                let pass = rows.iter().all(|r| r.max_z <= 5.0);
                return Report::table(&rows, pass, false);
            }
            let sampler = ChainSampler::new(&snmf);
            let mut r = rng::stream(*seed, 0);
            let chains: Vec<Vec<Point>> = (0..*samples).map(|_| sampler.sample(&mut r).points().to_vec()).collect();
            Report::json(&chains, true)
        }
        ChainsCommand::Pair { shape, x, y, k } => {
            let shape = shape.shape()?;
            let snmf = Snmf::new(shape);
            match (x, y, k) {
                (Some(x), Some(y), _) => {
                    let (x, y) = (Point::parse(x)?, Point::parse(y)?);
                    shape.check(&x)?;
                    shape.check(&y)?;
                    let p = chains::pair_probability(&snmf, &x, &y)?;
                    Report::json(
                        &json!({
                            "x": to_value(&x)?, "y": to_value(&y)?,
                            "probability": exact::ratio_string(&p),
                            "approx": exact::ratio_to_f64(&p),
                        }),
                        true,
                    )
                }
                (_, _, Some(k)) => {
                    let w = exact_w(&shape)?;
                    let flow = AveragedFlow::new(shape)?;
                    let report = chains::pair_bound_check(&flow, *k, &w, Exponent::default(), chains::DEFAULT_BOX_GUARD)?;
                    Report::json(&report, report.pass)
                }
                _ => Err(Error::Invalid("give --x and --y, or --k".into())),
            }
        }
    }
}

fn run_saturate(args: &SaturateArgs) -> Result<Report> {
    let shape = args.shape.shape()?;
    if args.check == SaturationCheck::Partition {
        let chains = saturation::uniform_chain_partition(&shape, saturation::DEFAULT_PARTITION_GUARD)?;
        let rects = saturation::rectangle_partition(&shape, args.half_split, saturation::DEFAULT_PARTITION_GUARD)?;
        let pass = chains.meets_bound && rects.disjoint_cover && rects.all_grids && rects.piece_sizes_ok;
        return Report::json(
            &json!({ "chain_partition": to_value(&chains)?, "rectangle_partition": to_value(&rects)?, "pass": pass }),
            pass,
        );
    }
    let set = match (&args.points, args.random_size) {
        (Some(p), _) => parse_points(shape, p)?,
        (None, Some(size)) => random_set(shape, size, args.seed)?,
        (None, None) => return Err(Error::Invalid("give --points or --random-size".into())),
    };
    let delta = saturation::comp_max_degree(&set);
    let mut out = serde_json::Map::new();
    out.insert("size".into(), json!(set.len()));
    out.insert("delta".into(), json!(delta));
    out.insert("antichain".into(), json!(set.is_antichain()));
    let mut pass = true;
    let width = grid::width(&shape);
    let weak = matches!(args.check, SaturationCheck::Weak)
        || (args.check == SaturationCheck::Auto && BigUint::from(set.len()) > width);
    if weak {
        let r = saturation::check_weak_saturation(&set)?;
        pass &= r.holds;
        out.insert("weak".into(), to_value(&r)?);
    }
    let rect = matches!(args.check, SaturationCheck::Rectangle) || (args.check == SaturationCheck::Auto && shape.n() == 2);
    if rect {
        let r = saturation::check_rectangle_saturation(shape.t(), &set)?;
        pass &= r.holds;
        out.insert("rectangle".into(), to_value(&r)?);
    }
    if args.check == SaturationCheck::Strong {
        let w = exact_w(&shape)?;
        let slack = parse_ratio(&args.slack)?;
        let r = saturation::check_strong_saturation(&set, args.k, &slack, &w, Exponent::default())?;
        pass &= r.holds;
        out.insert("strong".into(), to_value(&r)?);
    }
    out.insert("pass".into(), json!(pass));
    Ok(Report::Json {
        value: Value::Object(out),
        pass,
    })
}

fn run_containers(cmd: &ContainersCommand) -> Result<Report> {
    match cmd {
        ContainersCommand::Run { shape, points, seed, stop_factor, order, trace } => {
            let shape = shape.shape()?;
            let order = parse_order(order)?;
            let stop = match stop_factor {
                Some(s) => parse_ratio(s)?,
                None => containers::default_stop_factor(shape.n()),
            };
            let input = match points {
                Some(p) => parse_points(shape, p)?,
                None => containers::random_good_antichain(&shape, &mut rng::stream(*seed, 0)),
            };
            let result = containers::run_container(&shape, &input, &stop, order)?;
            if let Some(path) = trace {
                write_file(path, &result.trace_jsonl())?;
            }
            let contained = result.fingerprint.is_subset(&input) && input.is_subset(&result.body.union(&result.fingerprint));
            let phases = containers::phase_trace(&result, &shape);
            Report::json(
                &json!({
                    "input_size": input.len(),
                    "fingerprint": to_value(&result.fingerprint)?,
                    "body": to_value(&result.body)?,
                    "fingerprint_size": result.fingerprint.len(),
                    "body_size": result.body.len(),
                    "steps": result.trace.len(),
                    "phases": to_value(&phases)?,
                    "contained": contained,
                }),
                contained,
            )
        }
        ContainersCommand::Verify { shape, samples, seed, order } => {
            let shape = shape.shape()?;
            let report = containers::verify_container_properties(&shape, *samples, *seed, parse_order(order)?)?;
            Report::json(&report, report.pass)
        }
    }
}

fn run_count(cmd: &CountCommand) -> Result<Report> {
    match cmd {
        CountCommand::Exact { shape, limits } => {
            let shape = shape.shape()?;
            let (count, engine) = counting::count_antichains_exact(&shape, limits.limits())?;
            Report::json(
                &json!({ "t": shape.t(), "n": shape.n(), "count": count.to_string(), "engine": to_value(&engine)? }),
                true,
            )
        }
        CountCommand::Upto { shape, k, enum_limit } => {
            let shape = shape.shape()?;
            let count = counting::count_antichains_upto(&shape, *k, *enum_limit)?;
            Report::json(&json!({ "t": shape.t(), "n": shape.n(), "k": k, "count": count.to_string() }), true)
        }
        CountCommand::Bounds { shape, c, limits } => {
            let shape = shape.shape()?;
            let row = counting::bound_report(&shape, &parse_ratio(c)?, limits.limits())?;
            let pass = row.trivial_bound_holds != Some(false) && row.construction_holds != Some(false);
            let mut buf = Vec::new();
            counting::bound_rows_csv(std::slice::from_ref(&row), &mut buf)?;
            Ok(Report::Table {
                csv: String::from_utf8(buf).expect("csv output is utf-8"),
                json: to_value(&row)?,
                pass,
                csv_default: true,
            })
        }
    }
}

fn run_analytics(cmd: &AnalyticsCommand) -> Result<Report> {
    match cmd {
        AnalyticsCommand::Tilt { t, n, k } => match k {
            Some(k) => {
                if t.len() != 1 || n.len() != 1 {
                    return Err(Error::Invalid("--k needs a single --t and --n".into()));
                }
                let model = tilt::solve_tilt(&GridShape::new(t[0], n[0])?, *k)?;
                Report::json(&model, true)
            }
            None => Report::table(&claims::tilt_sweep(t, n)?, true, true),
        },
        AnalyticsCommand::Density { shape, k, x, order } => {
            let shape = shape.shape()?;
            if *order > 2 {
                return Err(Error::Invalid("order must be 0, 1 or 2".into()));
            }
            let model = model_for(&shape, *k)?;
            let eval = tilt::density(&model, *x, *order)?;
            let mut value = json!({ "model": to_value(&model)?, "density": to_value(&eval)? });
            let s = *x + model.k;
            if *order == 0 && s.fract() == 0.0 && s >= 0.0 && s as usize <= shape.top() {
                let s = s as usize;
                let profile = grid::level_sizes(&shape);
                let exact = tilt::lattice_mass(&model, profile.size(s), s);
                value["lattice_mass"] = json!(exact);
                value["relative_error"] = json!((eval.value - exact).abs() / exact);
            }
            Ok(Report::Json { value, pass: true })
        }
        AnalyticsCommand::Lambda { shape, k, profile } => {
            let k = k.unwrap_or((shape.t - 1) as i64 * shape.n as i64 / 2);
            let profile = match profile {
                ProfileArg::Own => lambda::LambdaProfile::Own,
                ProfileArg::Factor => lambda::LambdaProfile::Factor,
            };
            Report::json(&lambda::lambda_ratio(shape.t, shape.n, k, profile)?, true)
        }
        AnalyticsCommand::Claims { shape, k, grid_step, n_threshold, scan_n, offset } => {
            if !scan_n.is_empty() {
                return Report::table(&claims::claim_thresholds(&[shape.t], scan_n, *offset, *grid_step)?, true, true);
            }
            let shape = shape.shape()?;
            let model = model_for(&shape, *k)?;
            let report = claims::appendix_inequality_checks(&model, *grid_step, *n_threshold);
            let pass = !report.asserted || report.pass;
            Report::json(&report, pass)
        }
        AnalyticsCommand::Derivs { t, n } => Report::table(&claims::derivative_norm_sweep(t, n)?, true, true),
    }
}

fn dispatch(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Levels { shape, tail_check } => run_levels(shape, *tail_check),
        Command::Width { shape } => {
            let s = shape.shape()?;
            Report::json(
                &json!({ "t": s.t(), "n": s.n(), "middle": s.middle(), "width": big_json(&grid::width(&s)) }),
                true,
            )
        }
        Command::Flow(cmd) => run_flow(cmd),
        Command::Chains(cmd) => run_chains(cmd),
        Command::Saturate(args) => run_saturate(args),
        Command::Containers(cmd) => run_containers(cmd),
        Command::Count(cmd) => run_count(cmd),
        Command::Analytics(cmd) => run_analytics(cmd),
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Precondition(_) | Error::Guard { .. } | Error::Invalid(_) | Error::Unattainable(_) => 2,
        Error::NegativeFlow { .. } | Error::Quadrature(_) => 1,
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = dispatch(&cli).and_then(|report| {
        let text = report.render(cli.format)?;
        match &cli.output {
            Some(path) => write_file(path, &text)?,
            None => {
                let _ = io::stdout().write_all(text.as_bytes());
            }
        }
        Ok(report.pass())
    });
    match outcome {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("invariant check failed; see report");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
