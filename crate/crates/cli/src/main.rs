use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use cbs_complexity::bounds::{
    compare, curve_point, display_exponent, Backend, BoundInputs, BoundReport, EdgeMode, Objective, PlotMode,
};
use cbs_complexity::cbs::{
    empirical_bound_check, mdd_sizes, solve, BoundCheckReport, SolveConfig, SolveStats, Splitting,
};
use cbs_complexity::genfunc::{approx_linear, contributions, expand_series, solve_critical_points, PointKind};
use cbs_complexity::mdd::{analytic_size_bound, build_mdd, layer_bound};
use cbs_complexity::model::{parse_map, parse_scen, Cell, GridMap, Path};
use cbs_complexity::recurrence::{eval_exact_with_ceiling, eval_log, DEFAULT_EXACT_CEILING};

const SCHEMA: u32 = 1;

/// Conflict-tree size bounds for Conflict-Based Search.
#[derive(Parser, Debug)]
#[command(name = "cbs-complexity", version, arg_required_else_help = true)]
struct Cli {
    /// Largest `r * s` evaluated with exact big integers.
    #[arg(long, global = true, default_value_t = DEFAULT_EXACT_CEILING)]
    exact_ceiling: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-layer MDD sizes as CSV `t,exact,eq1_bound`.
    Mdd(MddArgs),
    /// Evaluate the CT-size recurrence T(r, s).
    Recurrence(RecurrenceArgs),
    /// Critical-point contributions, the linear-ratio estimate or series coefficients.
    Genfunc(GenfuncArgs),
    /// All bounds for one (n, k, C) configuration.
    Bounds(BoundsArgs),
    /// Bounds for every `name,n,k,C` row of a CSV file.
    Table(TableArgs),
    /// Bound curves against the recurrence as CSV.
    Plot(PlotArgs),
    /// Solve a benchmark instance with CBS and check it against the bounds.
    Solve(SolveArgs),
}

#[derive(Args, Debug)]
struct MddArgs {
    /// Map file in the `.map` format.
    #[arg(long, conflicts_with = "open", required_unless_present = "open")]
    map: Option<PathBuf>,
    /// Use an obstacle-free square grid of this side instead of a map file.
    #[arg(long)]
    open: Option<usize>,
    /// Start cell as `x,y`.
    #[arg(long, value_parser = parse_cell)]
    start: Cell,
    /// Goal cell as `x,y`.
    #[arg(long, value_parser = parse_cell)]
    goal: Cell,
    #[arg(long)]
    cost: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Exact,
    Log,
}

#[derive(Args, Debug)]
struct RecurrenceArgs {
    #[arg(long)]
    r: u64,
    #[arg(long)]
    s: u64,
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["r", "linear", "series"])))]
struct GenfuncArgs {
    /// Contributions of every critical point in direction (r, s).
    #[arg(long, requires = "s")]
    r: Option<u64>,
    #[arg(long)]
    s: Option<u64>,
    /// Estimate T(N s, s) for the ratio N.
    #[arg(long, requires = "s")]
    linear: Option<u64>,
    /// Coefficient table up to x^R y^S as CSV.
    #[arg(long, num_args = 2, value_names = ["R", "S"])]
    series: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EdgesArg {
    Grid,
    General,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Makespan,
    Soc,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
    /// Makespan, or the sum-of-costs budget with `--objective soc`.
    #[arg(long)]
    c: u64,
    /// Per-agent MDD size (defaults to n C).
    #[arg(long)]
    m: Option<u64>,
    #[arg(long, value_enum)]
    edges: Option<EdgesArg>,
    #[arg(long, value_enum, default_value = "makespan")]
    objective: ObjectiveArg,
    /// Graph radius, enabling the radius-based MDD bound.
    #[arg(long)]
    radius: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// CSV with columns `name,n,k,C`; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Log,
    Sqrt,
    Linear,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, value_parser = clap::value_parser!(u64).range(4..))]
    n_min: u64,
    #[arg(long)]
    n_max: u64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scen: PathBuf,
    #[arg(long)]
    agents: usize,
    /// Disjoint splitting with positive constraints.
    #[arg(long)]
    disjoint: bool,
    /// Give up after this many CT nodes.
    #[arg(long)]
    node_limit: Option<usize>,
    #[arg(long)]
    json: bool,
}

fn parse_cell(text: &str) -> Result<Cell, String> {
    let (x, y) = text.split_once(',').ok_or("expected `x,y`")?;
    let coord = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok(Cell::new(coord(x)?, coord(y)?))
}

type Outcome = Result<(), String>;

fn read_text(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_out(text: &str) -> Outcome {
    io::stdout().lock().write_all(text.as_bytes()).map_err(|e| e.to_string())
}

fn log6(v: f64) -> String {
    format!("{v:.6}")
}

fn run_mdd(args: &MddArgs) -> Outcome {
    let map = match (&args.map, args.open) {
        (Some(path), _) => parse_map(&read_text(path)?).map_err(|e| e.to_string())?,
        (None, Some(side)) if side > 0 => GridMap::open(side, side),
        _ => return Err("--open needs a positive side".into()),
    };
    let mdd = build_mdd(&map, args.start, args.goal, args.cost).map_err(|e| e.to_string())?;
    let mut out = String::from("t,exact,eq1_bound\n");
    for (t, layer) in mdd.layers().iter().enumerate() {
        let bound = layer_bound(t.min(args.cost - t) as u64);
        out.push_str(&format!("{t},{},{bound}\n", layer.len()));
    }
    let size = mdd.size();
    eprintln!(
        "M = {}, E = {}, analytic bound = {}",
        size.nodes,
        size.edges,
        analytic_size_bound(args.cost as u64).value
    );
    write_out(&out)
}

fn run_recurrence(args: &RecurrenceArgs, ceiling: u64) -> Outcome {
    let line = match args.backend {
        BackendArg::Exact => eval_exact_with_ceiling(args.r, args.s, ceiling)
            .map_err(|e| e.to_string())?
            .to_string(),
        BackendArg::Log => log6(eval_log(args.r, args.s).log2()),
    };
    write_out(&format!("{line}\n"))
}

fn run_genfunc(args: &GenfuncArgs) -> Outcome {
    if let Some(rs) = &args.series {
        let series = expand_series(rs[0], rs[1]);
        let mut out = String::from("r,s,coefficient\n");
        for r in 0..=rs[0] {
            for s in 0..=rs[1] {
                out.push_str(&format!("{r},{s},{}\n", series.coeff(r, s)));
            }
        }
        return write_out(&out);
    }
    let s = args.s.expect("clap enforces --s");
    if let Some(n) = args.linear {
        let v = approx_linear(n, s).map_err(|e| e.to_string())?;
        return write_out(&format!("{}\n", log6(v.log2())));
    }
    let r = args.r.expect("clap enforces one mode");
    if let Some(warning) = solve_critical_points(r, s).map_err(|e| e.to_string())?.warning {
        eprintln!("warning: {warning}");
    }
    let mut out = String::from("point,kind,x,y,log2_contribution\n");
    for c in contributions(r, s).map_err(|e| e.to_string())? {
        let kind = match c.point.kind {
            PointKind::Multiple => "multiple",
            PointKind::Single => "single",
        };
        out.push_str(&format!(
            "{:?},{kind},{:.9},{:.9},{}\n",
            c.point.label,
            c.point.x,
            c.point.y,
            log6(c.log2_value.log2())
        ));
    }
    write_out(&out.to_lowercase())
}

#[derive(Serialize)]
struct BoundsJson<'a> {
    schema: u32,
    report: &'a BoundReport,
    display_exponents: [i32; 3],
}

fn bound_text(report: &BoundReport) -> String {
    let i = &report.inputs;
    let mut rows: Vec<(&str, String)> = vec![
        ("n", i.n.to_string()),
        ("k", i.k.to_string()),
        ("C", i.c.to_string()),
        ("org_log2", log6(report.org.log2())),
        ("rec_ind_log2", log6(report.rec_ind.log2())),
        ("rec_gf_log2", log6(report.rec_gf.log2())),
        ("mdd_cube_log2", log6(report.mdd_cube.log2())),
    ];
    if let Some(r) = report.radius_bound {
        rows.push(("mdd_radius_log2", log6(r.log2())));
    }
    let [org, ind, gf] = report.display_exponents();
    rows.extend([
        ("ratio_log2", log6(report.ratio_org_over_gf.log2())),
        ("org_exp10", org.to_string()),
        ("rec_ind_exp10", ind.to_string()),
        ("rec_gf_exp10", gf.to_string()),
        ("rec_ind_constant", report.rec_ind_constant.to_string()),
        ("note", report.low_level_note.clone()),
    ]);
    rows.iter().map(|(k, v)| format!("{k:<18}{v}\n")).collect()
}

fn run_bounds(args: &BoundsArgs) -> Outcome {
    let inputs = BoundInputs {
        m: args.m,
        edge_mode: match args.edges {
            None => EdgeMode::None,
            Some(EdgesArg::Grid) => EdgeMode::Grid,
            Some(EdgesArg::General) => EdgeMode::General,
        },
        objective: match args.objective {
            ObjectiveArg::Makespan => Objective::Makespan,
            ObjectiveArg::Soc => Objective::Soc,
        },
        radius: args.radius,
        ..BoundInputs::new(args.n, args.k, args.c)
    };
    let report = compare(&inputs).map_err(|e| e.to_string())?;
    if args.json {
        let doc = BoundsJson {
            schema: SCHEMA,
            report: &report,
            display_exponents: report.display_exponents(),
        };
        write_out(&format!("{}\n", serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?))
    } else {
        write_out(&bound_text(&report))
    }
}

fn run_table(args: &TableArgs) -> Outcome {
    let text = match &args.input {
        Some(path) => read_text(path)?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| e.to_string())?;
            s
        }
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() != 4 {
            return Err(format!("row {}: expected 4 fields `name,n,k,C`", i + 1));
        }
        let nums: Result<Vec<u64>, _> = (1..4).map(|j| record[j].parse::<u64>()).collect();
        match nums {
            Ok(v) => rows.push((record[0].to_string(), v[0], v[1], v[2])),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(format!("row {}: {e}", i + 1)),
        }
    }
    let reports: Vec<Result<BoundReport, String>> = rows
        .par_iter()
        .map(|&(ref name, n, k, c)| compare(&BoundInputs::new(n, k, c)).map_err(|e| format!("{name}: {e}")))
        .collect();

    let mut writer = csv::Writer::from_writer(Vec::new());
    let header = [
        "name", "n", "k", "C", "org_log2", "rec_ind_log2", "rec_gf_log2", "ratio_log2", "org_exp10",
        "rec_ind_exp10", "rec_gf_exp10",
    ];
    writer.write_record(header).map_err(|e| e.to_string())?;
    for ((name, n, k, c), report) in rows.iter().zip(reports) {
        let r = report?;
        writer
            .write_record([
                name.clone(),
                n.to_string(),
                k.to_string(),
                c.to_string(),
                log6(r.org.log2()),
                log6(r.rec_ind.log2()),
                log6(r.rec_gf.log2()),
                log6(r.ratio_org_over_gf.log2()),
                display_exponent(r.org).to_string(),
                display_exponent(r.rec_ind).to_string(),
                display_exponent(r.rec_gf).to_string(),
            ])
            .map_err(|e| e.to_string())?;
    }
    let bytes = writer.into_inner().map_err(|e| e.to_string())?;
    write_out(&String::from_utf8(bytes).map_err(|e| e.to_string())?)
}

fn run_plot(args: &PlotArgs, ceiling: u64) -> Outcome {
    if args.n_max < args.n_min {
        return Err("--n-max must be at least --n-min".into());
    }
    let mode = match args.mode {
        ModeArg::Log => PlotMode::Log,
        ModeArg::Sqrt => PlotMode::Sqrt,
        ModeArg::Linear => PlotMode::Linear,
    };
    let points: Vec<_> = (args.n_min..=args.n_max)
        .into_par_iter()
        .map(|n| curve_point(mode, n, ceiling))
        .collect();
    let mut out = String::from("n,s,org_log2,rec_ind_log2,rec_gf_log2,recurrence_log2,backend\n");
    for p in points {
        let p = p.map_err(|e| e.to_string())?;
        let backend = match p.backend {
            Backend::Exact => "exact",
            Backend::Log => "log",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{backend}\n",
            p.n,
            p.s,
            log6(p.org.log2()),
            log6(p.rec_ind.log2()),
            log6(p.rec_gf.log2()),
            log6(p.recurrence.log2())
        ));
    }
    write_out(&out)
}

#[derive(Serialize)]
struct SolveJson<'a> {
    schema: u32,
    cost: usize,
    splitting: Splitting,
    paths: &'a [Path],
    stats: &'a SolveStats,
    bound_check: &'a BoundCheckReport,
}

fn run_solve(args: &SolveArgs) -> Outcome {
    let map = parse_map(&read_text(&args.map)?).map_err(|e| e.to_string())?;
    let instance = parse_scen(&read_text(&args.scen)?, args.agents, &map).map_err(|e| e.to_string())?;
    let splitting = if args.disjoint {
        Splitting::Disjoint
    } else {
        Splitting::Classic
    };
    let config = SolveConfig {
        node_limit: args.node_limit,
        ..SolveConfig::new(splitting)
    };
    let sol = solve(&instance, config).map_err(|e| e.to_string())?;
    let check = empirical_bound_check(&instance, &sol.stats, &mdd_sizes(&instance, sol.cost))
        .map_err(|e| e.to_string())?;
    if args.json {
        let doc = SolveJson {
            schema: SCHEMA,
            cost: sol.cost,
            splitting,
            paths: &sol.paths,
            stats: &sol.stats,
            bound_check: &check,
        };
        return write_out(&format!("{}\n", serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?));
    }
    let s = &sol.stats;
    let mut out = format!(
        "cost {}\ngenerated {}\nexpanded {}\npruned {}\nmax_depth {}\nnegative_applied {}\npositive_applied {}\n",
        sol.cost, s.generated, s.expanded, s.pruned, s.max_depth, s.negative_applied, s.positive_applied
    );
    for (i, p) in sol.paths.iter().enumerate() {
        let cells: Vec<String> = p.waypoints.iter().map(Cell::to_string).collect();
        out.push_str(&format!("agent {i}: {}\n", cells.join(" ")));
    }
    for c in &check.checks {
        out.push_str(&format!(
            "bound {:<18} measured_log2 {} bound_log2 {} margin_log2 {}\n",
            c.name,
            log6(c.measured_log2),
            log6(c.bound_log2),
            log6(c.margin_log2)
        ));
    }
    for note in &check.notes {
        eprintln!("note: {note}");
    }
    write_out(&out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Mdd(a) => run_mdd(a),
        Command::Recurrence(a) => run_recurrence(a, cli.exact_ceiling),
        Command::Genfunc(a) => run_genfunc(a),
        Command::Bounds(a) => run_bounds(a),
        Command::Table(a) => run_table(a),
        Command::Plot(a) => run_plot(a, cli.exact_ceiling),
        Command::Solve(a) => run_solve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
