//! `actree`: command-line front end. A successful command prints one JSON
//! document on stdout. Bad input exits 1 with diagnostics on stderr; a tripped
//! resource guard exits 2.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use actree::bounds::{
    invert_height_bound, main_lower, proj_lower, projection_inequality_check, total_betti_upper, yao_lower,
    BoundParams, Bracket,
};
use actree::extract::{leaf_dnf_with, ExtractLimits};
use actree::families::{
    closure_delta, closure_delta_eps, eval_formula, t_m_formula, validate_schedule, ScheduleIssue,
};
use actree::poly::{format_rational, parse_rational, parse_rational_list};
use actree::problems::{
    circle_fiber_example, crossing_number_example, distinctness_tree, parity_problem, sample_point,
    segment_crossing_example, ProblemBundle,
};
use actree::topology::{
    betti_numbers, build_complex_with, complement_component_count, component_count, occupancy_grid_with,
    OccupancyGrid, OccupancyMode, DEFAULT_CELL_LIMIT,
};
use actree::transforms::{eps_delta_tree, fiber_product_tree, intersect_tree, t_ell_tree, union_tree};
use actree::{dnf_stats, evaluate, AmbientMode, Dnf, EpsDelta, Error, FiberSpec, GridBox, Rational, Schedule, Tree};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "actree", version, about = "Algebraic computation trees and the topology of the sets they decide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a tree file for structural problems and report its metrics.
    Validate { tree: PathBuf },
    /// Run a tree, or test a formula, at one exact point.
    Eval {
        /// Tree or formula file.
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Yes-leaf sets of a tree as a formula file.
    Extract {
        tree: PathBuf,
        #[arg(long)]
        term_limit: Option<usize>,
        /// Compare tree and formula on this many random points.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Polynomial counts and degrees of a formula, or of a tree's leaf sets.
    Stats {
        file: PathBuf,
        #[arg(long)]
        term_limit: Option<usize>,
    },
    #[command(subcommand)]
    Transform(TransformCmd),
    #[command(subcommand)]
    Families(FamiliesCmd),
    /// Betti numbers of a closed formula sampled on a grid.
    Betti {
        dnf: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        max_dim: Option<usize>,
    },
    /// Connected components of a sampled set and of its complement.
    Components {
        dnf: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    #[command(subcommand)]
    Bound(BoundCmd),
    #[command(subcommand)]
    Example(ExampleCmd),
}

#[derive(Args)]
struct GridArgs {
    /// `lo:hi,lo:hi,...` with exact rational endpoints.
    #[arg(long = "box", allow_hyphen_values = true)]
    bbox: String,
    /// Cells per axis.
    #[arg(long)]
    grid: usize,
    /// Include a cell if any corner satisfies the formula.
    #[arg(long)]
    corner: bool,
    #[arg(long, default_value_t = DEFAULT_CELL_LIMIT)]
    cell_limit: usize,
}

#[derive(Args)]
struct AmbientArgs {
    /// Treat the set as bounded inside the ball of this squared radius; by
    /// default every level is intersected with `|x|² ≤ 1/δ`.
    #[arg(long)]
    ball: Option<String>,
}

#[derive(Subcommand)]
enum TransformCmd {
    Union {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Intersect {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    EpsDelta {
        tree: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    TEll {
        tree: PathBuf,
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// `(p+1)`-fold fibered product over the first `r` coordinates.
    Fiber {
        tree: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FamiliesCmd {
    Delta {
        dnf: PathBuf,
        #[arg(long)]
        delta: String,
        #[command(flatten)]
        ambient: AmbientArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    DeltaEps {
        dnf: PathBuf,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        eps: String,
        #[command(flatten)]
        ambient: AmbientArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(name = "t-m")]
    TM {
        dnf: PathBuf,
        #[arg(long)]
        schedule: String,
        #[command(flatten)]
        ambient: AmbientArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interleaving is required; ratio shortfalls are reported as warnings.
    ScheduleCheck {
        #[arg(long)]
        schedule: String,
        #[arg(long, default_value = "1")]
        ratio: String,
    },
}

#[derive(Args)]
struct Constants {
    #[arg(long, default_value = "1")]
    c1: String,
    #[arg(long, default_value = "1")]
    c2: String,
}

#[derive(Subcommand)]
enum BoundCmd {
    Yao {
        #[arg(long)]
        b: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        constants: Constants,
    },
    Main {
        #[arg(long)]
        b: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        constants: Constants,
    },
    Proj {
        #[arg(long)]
        b: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        constants: Constants,
    },
    Upper {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "C", default_value = "1")]
        c: String,
    },
    Invert {
        #[arg(long)]
        b: String,
        #[arg(long)]
        n: usize,
        #[arg(long = "C", default_value = "1")]
        c: String,
    },
    /// `b_m(Y) ≤ Σ_{p+q=m} b_q(W_p)` for a table of fiber Betti numbers.
    Projcheck {
        /// Rows `W_0;W_1;...`, each `b_0,b_1,...`.
        #[arg(long)]
        betti: String,
        #[arg(long)]
        target: usize,
        #[arg(long)]
        m: usize,
        /// Rows are complete Betti vectors.
        #[arg(long)]
        complete: bool,
    },
}

#[derive(Subcommand)]
enum ExampleCmd {
    Parity {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Distinctness {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    CircleFiber {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Crossing {
        /// The straight segment instead of the trefoil arc.
        #[arg(long)]
        segment: bool,
        #[arg(long)]
        grid: Option<usize>,
    },
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::Limit { .. }) => 2,
            _ => 1,
        }
    }

    fn report(&self) {
        match self {
            Failure::Core(Error::InvalidTree(diags)) => {
                eprintln!("error: invalid tree ({} problems)", diags.len());
                for d in diags {
                    eprintln!("  {}", d.message);
                }
            }
            Failure::Core(e) => eprintln!("error: {e}"),
            Failure::Io(p, e) => eprintln!("error: {}: {e}", p.display()),
            Failure::Input(msg) => eprintln!("error: {msg}"),
        }
    }
}

type Outcome<T = Value> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, format!("{text}\n")).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_tree(path: &Path) -> Outcome<Tree> {
    Ok(Tree::from_json(&read(path)?)?)
}

fn load_dnf(path: &Path) -> Outcome<Dnf> {
    Ok(Dnf::from_json(&read(path)?)?)
}

enum Loaded {
    Tree(Tree),
    Dnf(Dnf),
}

/// Formula files carry a `union` key, tree files a `vertices` key.
fn load_any(path: &Path) -> Outcome<Loaded> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(Error::from)?;
    if value.get("union").is_some() {
        Ok(Loaded::Dnf(Dnf::from_json(&text)?))
    } else {
        Ok(Loaded::Tree(Tree::from_json(&text)?))
    }
}

fn rational(s: &str) -> Outcome<Rational> {
    Ok(parse_rational(s)?)
}

fn count(s: &str) -> Outcome<BigUint> {
    s.trim()
        .parse()
        .map_err(|_| Failure::Input(format!("`{s}` is not a nonnegative integer")))
}

fn ambient(a: &AmbientArgs) -> Outcome<AmbientMode> {
    match &a.ball {
        Some(r2) => Ok(AmbientMode::bounded(rational(r2)?)?),
        None => Ok(AmbientMode::Unbounded),
    }
}

fn limits(term_limit: Option<usize>) -> ExtractLimits {
    let mut l = ExtractLimits::default();
    if let Some(t) = term_limit {
        l.max_terms = t;
    }
    l
}

/// Writes an artifact to `out` and returns `summary`, or returns the
/// artifact itself when no path is given.
fn artifact(text: String, out: Option<&Path>, summary: Value) -> Outcome {
    match out {
        Some(path) => {
            write(path, &text)?;
            let mut s = summary;
            s["out"] = json!(path.display().to_string());
            Ok(s)
        }
        None => Ok(serde_json::from_str(&text).map_err(Error::from)?),
    }
}

fn tree_artifact(t: &Tree, out: Option<&Path>) -> Outcome {
    let metrics = t.metrics()?;
    artifact(t.to_json(), out, json!({ "inputs": t.arity(), "vertices": t.len(), "metrics": metrics }))
}

fn dnf_artifact(f: &Dnf, out: Option<&Path>) -> Outcome {
    artifact(f.to_json(), out, json!({ "inputs": f.arity, "stats": dnf_stats(f) }))
}

fn bracket(b: &Bracket) -> Value {
    json!(b)
}

fn sampled_grid(f: &Dnf, g: &GridArgs) -> Outcome<OccupancyGrid> {
    let grid = GridBox::parse(&g.bbox, g.grid)?;
    let mode = if g.corner { OccupancyMode::Corner } else { OccupancyMode::Center };
    Ok(occupancy_grid_with(f, &grid, mode, g.cell_limit)?)
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate { tree } => {
            let t = load_tree(&tree)?;
            let diags = t.validate();
            if !diags.is_empty() {
                return Err(Error::InvalidTree(diags).into());
            }
            Ok(json!({ "valid": true, "inputs": t.arity(), "vertices": t.len(), "metrics": t.metrics()? }))
        }
        Command::Eval { file, point } => {
            let x = parse_rational_list(&point)?;
            match load_any(&file)? {
                Loaded::Tree(t) => Ok(json!(evaluate(&t, &x)?)),
                Loaded::Dnf(f) => Ok(json!({ "accepted": eval_formula(&f, &x)? })),
            }
        }
        Command::Extract { tree, term_limit, samples, seed, out } => {
            let t = load_tree(&tree)?;
            let f = leaf_dnf_with(&t, limits(term_limit))?.dnf;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let x = sample_point(&mut rng, t.arity());
                if evaluate(&t, &x)?.accepted != eval_formula(&f, &x)? {
                    let shown: Vec<String> = x.iter().map(format_rational).collect();
                    return Err(Failure::Input(format!("tree and formula disagree at ({})", shown.join(","))));
                }
            }
            let mut report = dnf_artifact(&f, out.as_deref())?;
            if samples > 0 && out.is_some() {
                report["samples_checked"] = json!(samples);
            }
            Ok(report)
        }
        Command::Stats { file, term_limit } => match load_any(&file)? {
            Loaded::Tree(t) => {
                let f = leaf_dnf_with(&t, limits(term_limit))?.dnf;
                Ok(json!({ "metrics": t.metrics()?, "stats": dnf_stats(&f) }))
            }
            Loaded::Dnf(f) => Ok(json!({ "stats": dnf_stats(&f) })),
        },
        Command::Transform(t) => transform(t),
        Command::Families(f) => families(f),
        Command::Betti { dnf, grid, max_dim } => {
            let f = load_dnf(&dnf)?;
            let g = sampled_grid(&f, &grid)?;
            let c = build_complex_with(&g, grid.cell_limit)?;
            let b = betti_numbers(&c, max_dim.unwrap_or(c.dim()))?;
            Ok(json!({
                "betti": b,
                "cells": c.cell_counts(),
                "occupied": g.occupied_count(),
                "resolution": g.resolution(),
            }))
        }
        Command::Components { dnf, grid } => {
            let f = load_dnf(&dnf)?;
            let g = sampled_grid(&f, &grid)?;
            Ok(json!({
                "components": component_count(&g),
                "complement_components": complement_component_count(&g),
                "occupied": g.occupied_count(),
                "resolution": g.resolution(),
            }))
        }
        Command::Bound(b) => bound(b),
        Command::Example(e) => example(e),
    }
}

fn transform(cmd: TransformCmd) -> Outcome {
    match cmd {
        TransformCmd::Union { first, second, out } => {
            tree_artifact(&union_tree(&load_tree(&first)?, &load_tree(&second)?)?, out.as_deref())
        }
        TransformCmd::Intersect { first, second, out } => {
            tree_artifact(&intersect_tree(&load_tree(&first)?, &load_tree(&second)?)?, out.as_deref())
        }
        TransformCmd::EpsDelta { tree, eps, delta, out } => {
            let ed = EpsDelta::new(rational(&eps)?, rational(&delta)?)?;
            tree_artifact(&eps_delta_tree(&load_tree(&tree)?, &ed)?, out.as_deref())
        }
        TransformCmd::TEll { tree, schedule, out } => {
            let sched = Schedule::parse(&schedule)?;
            tree_artifact(&t_ell_tree(&load_tree(&tree)?, &sched)?, out.as_deref())
        }
        TransformCmd::Fiber { tree, r, p, out } => {
            let t = load_tree(&tree)?;
            let spec = FiberSpec::new(t.arity(), r, p)?;
            tree_artifact(&fiber_product_tree(&t, &spec)?, out.as_deref())
        }
    }
}

fn families(cmd: FamiliesCmd) -> Outcome {
    match cmd {
        FamiliesCmd::Delta { dnf, delta, ambient: a, out } => {
            let f = closure_delta(&load_dnf(&dnf)?, &rational(&delta)?, &ambient(&a)?)?;
            dnf_artifact(&f, out.as_deref())
        }
        FamiliesCmd::DeltaEps { dnf, delta, eps, ambient: a, out } => {
            let f = closure_delta_eps(&load_dnf(&dnf)?, &rational(&delta)?, &rational(&eps)?, &ambient(&a)?)?;
            dnf_artifact(&f, out.as_deref())
        }
        FamiliesCmd::TM { dnf, schedule, ambient: a, out } => {
            let sched = Schedule::parse(&schedule)?;
            sched.ensure_interleaved()?;
            let f = t_m_formula(&load_dnf(&dnf)?, &sched, &ambient(&a)?)?;
            dnf_artifact(&f, out.as_deref())
        }
        FamiliesCmd::ScheduleCheck { schedule, ratio } => {
            let sched = Schedule::parse(&schedule)?;
            let diags = validate_schedule(&sched, &rational(&ratio)?);
            let fatal: Vec<&str> = diags
                .iter()
                .filter(|d| d.kind != ScheduleIssue::Ratio)
                .map(|d| d.message.as_str())
                .collect();
            if !fatal.is_empty() {
                return Err(Failure::Input(fatal.join("; ")));
            }
            let separated: Vec<bool> = sched.levels.iter().map(EpsDelta::separated).collect();
            Ok(json!({
                "levels": sched.levels.len(),
                "interleaved": true,
                "ratio_ok": diags.is_empty(),
                "warnings": diags,
                "separated": separated,
            }))
        }
    }
}

fn bound(cmd: BoundCmd) -> Outcome {
    let params = |c: &Constants| -> Outcome<BoundParams> { Ok(BoundParams::new(rational(&c.c1)?, rational(&c.c2)?)?) };
    match cmd {
        BoundCmd::Yao { b, n, constants } => {
            let k = yao_lower(&count(&b)?, n, &params(&constants)?)?;
            Ok(json!({ "bound": "yao", "parametric": true, "height_lower": bracket(&k) }))
        }
        BoundCmd::Main { b, m, n, constants } => {
            let k = main_lower(&count(&b)?, m, n, &params(&constants)?)?;
            Ok(json!({ "bound": "main", "parametric": true, "height_lower": bracket(&k) }))
        }
        BoundCmd::Proj { b, m, n, constants } => {
            let k = proj_lower(&count(&b)?, m, n, &params(&constants)?)?;
            Ok(json!({ "bound": "proj", "parametric": true, "height_lower": bracket(&k) }))
        }
        BoundCmd::Upper { s, d, n, m, c } => {
            let (first, second) = total_betti_upper(s, d, n, m, &rational(&c)?)?;
            Ok(json!({
                "bound": "upper",
                "parametric": true,
                "total_betti_upper": format_rational(&first),
                "index_betti_upper": format_rational(&second),
            }))
        }
        BoundCmd::Invert { b, n, c } => Ok(json!({ "k": invert_height_bound(&count(&b)?, n, &rational(&c)?)? })),
        BoundCmd::Projcheck { betti, target, m, complete } => {
            let table = betti
                .split(';')
                .map(|row| {
                    row.split(',')
                        .map(|v| v.trim().parse::<usize>().map_err(|_| Failure::Input(format!("bad Betti entry `{v}`"))))
                        .collect::<Outcome<Vec<usize>>>()
                })
                .collect::<Outcome<Vec<_>>>()?;
            Ok(json!(projection_inequality_check(&table, target, m, complete)?))
        }
    }
}

fn manifest(b: &ProblemBundle) -> Value {
    let bx = &b.suggested_box;
    let axes: Vec<String> = bx
        .lo()
        .iter()
        .zip(bx.hi())
        .map(|(l, h)| format!("{}:{}", format_rational(l), format_rational(h)))
        .collect();
    let flat: Vec<String> = b.suggested_schedule.flat().iter().map(format_rational).collect();
    let mode = match &b.mode {
        AmbientMode::Bounded { ball_radius_sq } => json!({ "bounded": format_rational(ball_radius_sq) }),
        AmbientMode::Unbounded => json!("unbounded"),
    };
    json!({
        "name": b.name,
        "inputs": b.tree.arity(),
        "declared_height": b.declared_height,
        "schedule": flat.join(","),
        "box": axes.join(","),
        "grid": bx.resolution(),
        "mode": mode,
        "notes": b.notes,
    })
}

fn write_bundle(b: &ProblemBundle, out: Option<&Path>) -> Outcome {
    let mut m = manifest(b);
    m["height"] = json!(b.tree.height()?);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.to_path_buf(), e))?;
        write(&dir.join("tree.json"), &b.tree.to_json())?;
        write(&dir.join("strict.json"), &b.strict_dnf.to_json())?;
        write(&dir.join("closure.json"), &b.closure()?.to_json())?;
        m["files"] = json!(["tree.json", "strict.json", "closure.json"]);
        write(&dir.join("manifest.json"), &serde_json::to_string_pretty(&m).map_err(Error::from)?)?;
    }
    Ok(m)
}

fn example(cmd: ExampleCmd) -> Outcome {
    match cmd {
        ExampleCmd::Parity { n, m, out } => write_bundle(&parity_problem(n, m)?, out.as_deref()),
        ExampleCmd::Distinctness { n, out } => write_bundle(&distinctness_tree(n)?, out.as_deref()),
        ExampleCmd::CircleFiber { out } => {
            let c = circle_fiber_example();
            let flat: Vec<String> = c.schedule.flat().iter().map(format_rational).collect();
            let r = format_rational(&c.radius);
            let mut m = json!({
                "name": "circle-fiber",
                "schedule": flat.join(","),
                "box": format!("-{r}:{r}"),
                "grid": c.resolution,
                "mode": { "bounded": "4" },
                "height": c.sigma_tree.height()?,
            });
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|e| Failure::Io(dir.clone(), e))?;
                write(&dir.join("tree.json"), &c.sigma_tree.to_json())?;
                write(&dir.join("strict.json"), &c.sigma_dnf.to_json())?;
                write(&dir.join("image.json"), &c.image_dnf.to_json())?;
                let mut files = vec!["tree.json".to_string(), "strict.json".into(), "image.json".into()];
                for p in 0..=1 {
                    let name = format!("w{p}.json");
                    write(&dir.join(&name), &c.w_formula(p)?.to_json())?;
                    files.push(name);
                }
                m["files"] = json!(files);
                write(&dir.join("manifest.json"), &serde_json::to_string_pretty(&m).map_err(Error::from)?)?;
            }
            Ok(m)
        }
        ExampleCmd::Crossing { segment, grid } => {
            let mut inst = if segment { segment_crossing_example() } else { crossing_number_example() };
            if let Some(n) = grid {
                inst.plane_box = inst.plane_box.with_resolution(n)?;
            }
            let mut report = json!(inst.report()?);
            report["double_points"] = json!(inst.double_points().len());
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(v) => {
            let text = serde_json::to_string(&v).expect("reports serialize");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            f.report();
            ExitCode::from(f.exit_code())
        }
    }
}
