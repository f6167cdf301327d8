use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rectpack::benchmarks::{self, Family};
use rectpack::report::{self, Source};
use rectpack::{
    anytime_search, contain, enumerate_all_optimal, BoundingBox, ContainConfig, EnumConfig, EnumerationResult,
    Instance, Precision, SearchStats, Solution,
};

/// Default directory for artifacts when `--output` is not given.
const OUTPUT_DIR_VAR: &str = "RECTPACK_OUTPUT_DIR";

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_TIME_LIMIT: u8 = 3;
const EXIT_PRECISION: u8 = 4;

#[derive(Parser)]
#[command(name = "rectpack", version, about = "Exact minimum-area rectangle packing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find minimum-area bounding boxes, or test a single box.
    Solve(SolveArgs),
    /// Print a benchmark instance in the plain-text instance format.
    Generate {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Benchmark family, e.g. consecutive-squares or double-perimeter.
    #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
    family: Option<Family>,
    /// Plain-text instance file: `o` or `u` on the first line, then `W H` per line.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, requires = "family")]
    n: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::AllOptimal)]
    mode: Mode,
    /// Box for contain mode, as WxH.
    #[arg(long = "box", value_parser = parse_box)]
    bbox: Option<BoundingBox>,
    /// Interval size factor for the x-stage.
    #[arg(long = "c")]
    c_param: Option<f64>,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Auto)]
    precision: PrecisionArg,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Test equal-area boxes on separate threads.
    #[arg(long)]
    parallel: bool,
    /// Keep every packing found for each optimal box, not just one.
    #[arg(long)]
    all_packings: bool,
    /// Include wall time in JSON output.
    #[arg(long)]
    timings: bool,
    /// Check the result against the known optimum for this family and n.
    #[arg(long, requires = "family")]
    compare: bool,
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    AllOptimal,
    FirstOptimal,
    Anytime,
    Contain,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Auto,
    Low,
    High,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Svg,
    Text,
}

impl Emit {
    fn extension(self) -> &'static str {
        match self {
            Emit::Json => "json",
            Emit::Svg => "svg",
            Emit::Text => "txt",
        }
    }
}

fn parse_box(s: &str) -> Result<BoundingBox, String> {
    let (w, h) = s
        .split_once(['x', 'X', '×'])
        .ok_or_else(|| format!("expected WxH, found '{s}'"))?;
    let side = |v: &str| -> Result<u64, String> {
        match v.trim().parse::<u64>() {
            Ok(0) => Err("box sides must be positive".into()),
            Ok(n) => Ok(n),
            Err(e) => Err(format!("bad box side '{v}': {e}")),
        }
    };
    Ok(BoundingBox::new(side(w)?, side(h)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<rectpack::Error>() {
        Some(rectpack::Error::TimeLimit) => EXIT_TIME_LIMIT,
        Some(rectpack::Error::PrecisionExceeded(_)) => EXIT_PRECISION,
        _ => EXIT_CONFIG,
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate { family, n } => {
            let inst = benchmarks::generate(family, n)?;
            print!("{}", benchmarks::to_text(&inst));
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => solve(args),
    }
}

fn load_instance(args: &SolveArgs) -> anyhow::Result<(Instance, Source)> {
    match (&args.family, &args.instance) {
        (Some(family), None) => {
            let n = args.n.context("--family needs --n")?;
            let inst = benchmarks::generate(*family, n)?;
            Ok((
                inst,
                Source {
                    family: Some(*family),
                    n: Some(n),
                },
            ))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let label = path.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
            let inst = benchmarks::parse_custom(&text)
                .with_context(|| format!("parsing {}", path.display()))?
                .with_label(label);
            Ok((inst, Source::default()))
        }
        _ => bail!("give exactly one of --family or --instance"),
    }
}

fn solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    if args.mode == Mode::Contain && args.bbox.is_none() {
        bail!("contain mode needs --box WxH");
    }
    if args.mode != Mode::Contain && args.bbox.is_some() {
        bail!("--box only applies to contain mode");
    }
    if let Some(c) = args.c_param {
        if !(c.is_finite() && c > 0.0 && c <= 1.0) {
            bail!("--c must lie in (0, 1]");
        }
    }
    let deadline = match args.time_limit {
        Some(t) if t.is_finite() && t >= 0.0 => Some(Instant::now() + Duration::from_secs_f64(t)),
        Some(_) => bail!("--time-limit must be a non-negative number of seconds"),
        None => None,
    };
    let (instance, source) = load_instance(&args)?;
    let precision = match args.precision {
        PrecisionArg::Auto => Precision::Auto,
        PrecisionArg::Low => Precision::Low,
        PrecisionArg::High => Precision::High,
    };
    let cfg = EnumConfig {
        precision,
        c_param: args.c_param,
        deadline,
        first_only: args.mode == Mode::FirstOptimal,
        parallel: args.parallel,
        solutions_per_box: if args.all_packings { 0 } else { 1 },
    };
    if args.verbose > 0 {
        eprintln!(
            "{}: {} rects, scale {}, {} precision",
            instance.label,
            instance.len(),
            instance.scale,
            if precision.is_high(&instance) { "high" } else { "low" }
        );
    }

    let started = Instant::now();
    let mut exit = ExitCode::SUCCESS;
    let result = match args.mode {
        Mode::AllOptimal | Mode::FirstOptimal => enumerate_all_optimal(&instance, &cfg)?,
        Mode::Anytime => {
            let quiet = args.quiet;
            let scale = instance.scale;
            let best = anytime_search(&instance, &cfg, &mut |s: &Solution| {
                if !quiet {
                    let area = s.bbox.width as u128 * s.bbox.height as u128;
                    eprintln!(
                        "improved: {} area {area} at {:.3}s",
                        report::format_box(s.bbox, scale),
                        started.elapsed().as_secs_f64()
                    );
                }
            })?;
            single(best)?
        }
        Mode::Contain => {
            let bbox = args.bbox.expect("checked above");
            let ccfg = ContainConfig {
                c_param: args.c_param,
                high_precision: precision.is_high(&instance),
                deadline,
                max_solutions: if args.all_packings { 0 } else { 1 },
            };
            let out = contain(&instance, bbox, &ccfg)?;
            if !out.feasible() {
                if out.timed_out {
                    return Err(rectpack::Error::TimeLimit.into());
                }
                exit = ExitCode::from(EXIT_INFEASIBLE);
            }
            EnumerationResult {
                optimal_area: if out.feasible() { bbox.area()? } else { 0 },
                optimal_boxes: if out.feasible() { vec![bbox] } else { Vec::new() },
                solutions: out.solutions,
                stats: out.stats,
            }
        }
    };
    let mut result = result;
    result.stats.cpu_time = started.elapsed();

    for s in &result.solutions {
        let v = rectpack::verify::verify(&instance, s);
        if !v.valid {
            bail!("solver produced an invalid packing: {:?}", v.violations);
        }
    }
    if args.verbose > 0 {
        eprintln!(
            "boxes tested {}, x-solutions {}, nodes {}/{}, {:.3}s",
            result.stats.boxes_tested,
            result.stats.x_solutions,
            result.stats.nodes_x,
            result.stats.nodes_y,
            result.stats.cpu_time.as_secs_f64()
        );
    }

    write_artifacts(&args, &instance, source, &result)?;

    if args.compare {
        let family = args.family.expect("clap requires --family");
        let n = args.n.expect("checked in load_instance");
        let cmp = report::compare_reference(&result, &instance, family, n)?;
        let fmt = |v: &[BoundingBox]| {
            v.iter()
                .map(|&b| report::format_box(b, instance.scale))
                .collect::<Vec<_>>()
                .join(", ")
        };
        eprintln!(
            "reference {}: boxes [{}] vs [{}], empty {} vs {:.2}%, boxes tested {} vs {}",
            if cmp.passed() { "PASS" } else { "FAIL" },
            fmt(&cmp.expected_boxes),
            fmt(&cmp.found_boxes),
            cmp.expected_empty_pct.map_or("-".into(), report::format_pct),
            cmp.found_empty_pct,
            cmp.expected_boxes_tested.map_or("-".into(), |t| t.to_string()),
            cmp.found_boxes_tested
        );
        if !cmp.passed() {
            exit = ExitCode::from(EXIT_INFEASIBLE);
        }
    }
    Ok(exit)
}

fn single(best: Solution) -> rectpack::Result<EnumerationResult> {
    let stats: SearchStats = best.stats;
    Ok(EnumerationResult {
        optimal_area: best.bbox.area()?,
        optimal_boxes: vec![best.bbox],
        solutions: vec![best],
        stats,
    })
}

fn write_artifacts(
    args: &SolveArgs,
    instance: &Instance,
    source: Source,
    result: &EnumerationResult,
) -> anyhow::Result<()> {
    let docs: Vec<String> = match args.emit {
        Emit::Json => vec![report::emit_json(result, instance, source, args.timings)?],
        Emit::Text => vec![report::emit_text(result, instance, source)],
        Emit::Svg => result
            .solutions
            .iter()
            .map(|s| report::emit_svg(instance, s))
            .collect(),
    };
    let target = args.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_VAR).map(|dir| {
            let stem = match (source.family, source.n) {
                (Some(f), Some(n)) => format!("{f}-{n}"),
                _ => instance.label.clone(),
            };
            Path::new(&dir).join(format!("{stem}.{}", args.emit.extension()))
        })
    });
    match target {
        None => {
            let mut out = std::io::stdout().lock();
            for d in &docs {
                out.write_all(d.as_bytes())?;
            }
            out.flush()?;
        }
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            for (i, d) in docs.iter().enumerate() {
                let p = if i == 0 { path.clone() } else { numbered(&path, i + 1) };
                std::fs::write(&p, d).with_context(|| format!("writing {}", p.display()))?;
            }
        }
    }
    Ok(())
}

/// `out.svg` -> `out-2.svg`.
fn numbered(path: &Path, k: usize) -> PathBuf {
    let stem = path.file_stem().map_or("out".into(), |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{k}"),
    };
    path.with_file_name(name)
}
