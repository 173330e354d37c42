use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use longcycle::analytics::analytics_row;
use longcycle::digraph::{read_edge_list, sample_colored, write_edge_list, ColoredDigraph, ModelParams};
use longcycle::exact::OracleLimits;
use longcycle::farm;
use longcycle::hamiltonian::N0Mode;
use longcycle::harness::{
    aggregate, analyze, compare, construct, exact_in_k1, read_records_jsonl, sweep, write_aggregates_csv,
    write_compare_csv, write_records_jsonl, ExperimentConfig,
};
use longcycle::packing::{phi_dp, EligibilityMode, OrientedTree};
use longcycle::peel::{check_fixpoint, peel, write_trace_jsonl};
use longcycle::rng::Seed;

/// Longest cycles in sparse random digraphs.
#[derive(Parser)]
#[command(name = "longcycle", version)]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Use only D5 edges in reassembly and one global conditioning set.
    #[arg(long, global = true)]
    strict_paper_edges: bool,
    #[arg(long, global = true, value_enum, default_value = "desk")]
    n0_mode: ModeArg,
    /// Full restarts of the construction.
    #[arg(long, global = true, default_value_t = 5)]
    restarts: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Paper,
    Desk,
}

impl From<ModeArg> for N0Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => N0Mode::Paper,
            ModeArg::Desk => N0Mode::Desk,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EligArg {
    Upper,
    Lower,
}

impl From<EligArg> for EligibilityMode {
    fn from(m: EligArg) -> Self {
        match m {
            EligArg::Upper => EligibilityMode::Upper,
            EligArg::Lower => EligibilityMode::Lower,
        }
    }
}

/// A digraph read from an edge list, or sampled from `--n` and `--c`.
#[derive(Args)]
struct Source {
    /// Edge-list file (`-` for stdin).
    #[arg(long, short, conflicts_with_all = ["n", "c"])]
    input: Option<PathBuf>,
    #[arg(long, requires = "c")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    c: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a two-colour random digraph and print its edge list.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Peel the giant component; prints the step trace as JSON lines.
    Peel {
        #[command(flatten)]
        src: Source,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Minimum uncovered vertices over all tree components, or of one tree file.
    Phi {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum, default_value = "upper")]
        mode: EligArg,
        /// A single oriented tree in the `tree` text format.
        #[arg(long, conflicts_with_all = ["input", "n", "c"])]
        tree: Option<PathBuf>,
    },
    /// Build and verify the long cycle; prints its vertices on one line.
    Cycle {
        #[command(flatten)]
        src: Source,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Exact longest cycle inside the giant component (small inputs only).
    Exact {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 18)]
        limit: usize,
    },
    /// Closed-form table as CSV.
    Analytics {
        /// Values of c; defaults to 2..=12.
        #[arg(long, num_args = 1..)]
        c: Vec<f64>,
    },
    /// Run a sweep from a key=value config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Records as JSON lines (overrides the config).
        #[arg(long)]
        records: Option<PathBuf>,
        /// Aggregates as CSV (overrides the config; stdout when neither is set).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare sweep records with the closed forms.
    Compare {
        #[arg(long)]
        records: PathBuf,
        /// Config whose tol_* keys set the tolerances.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Exit nonzero when any check fails or lacks a prediction.
        #[arg(long)]
        enforce: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match farm::with_threads(cli.threads, || run(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => {
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn input(path: &Path) -> Result<Box<dyn BufRead>> {
    Ok(if path == Path::new("-") {
        Box::new(BufReader::new(io::stdin().lock()))
    } else {
        Box::new(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
    })
}

fn load(src: &Source, seed: u64) -> Result<ColoredDigraph> {
    match (&src.input, src.n, src.c) {
        (Some(p), _, _) => Ok(read_edge_list(input(p)?)?),
        (None, Some(n), Some(c)) => Ok(sample_colored(&ModelParams::new(n, c)?, Seed(seed))),
        _ => bail!("give --input FILE or both --n and --c"),
    }
}

fn config_from(cli: &Cli, text: &str) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = text.parse()?;
    cfg.seed = if cli.seed != 0 { cli.seed } else { cfg.seed };
    cfg.strict_paper_edges |= cli.strict_paper_edges;
    if matches!(cli.n0_mode, ModeArg::Paper) {
        cfg.n0_mode = N0Mode::Paper;
    }
    if cli.restarts != 5 {
        cfg.restarts = cli.restarts;
    }
    if cli.threads != 0 {
        cfg.threads = cli.threads;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Sample { n, c, out } => {
            let cd = sample_colored(&ModelParams::new(*n, *c)?, Seed(cli.seed));
            let mut w = output(out.as_deref())?;
            write_edge_list(&cd, &mut w)?;
            w.flush()?;
        }
        Cmd::Peel { src, out } => {
            let cd = load(src, cli.seed)?;
            let k1 = longcycle::digraph::giant_component(&cd.union_view());
            let pr = peel(&cd, &k1);
            check_fixpoint(&cd, &pr).map_err(anyhow::Error::msg)?;
            let mut w = output(out.as_deref())?;
            write_trace_jsonl(&pr.steps, &mut w)?;
            w.flush()?;
            eprintln!(
                "k1 {} s_l {} v1 {} tree_components {} nontree_vertices {}",
                pr.k1.len(),
                pr.s_l.len(),
                pr.v1.len(),
                pr.tree_components().count(),
                pr.nontree_vertex_count()
            );
        }
        Cmd::Phi { src, mode, tree } => {
            if let Some(path) = tree {
                let t = OrientedTree::read_from(input(path)?).map_err(anyhow::Error::msg)?;
                let r = phi_dp(&t);
                println!("{}", serde_json::to_string(&r)?);
                return Ok(ExitCode::SUCCESS);
            }
            let cd = load(src, cli.seed)?;
            let a = analyze(&cd)?;
            let mode = EligibilityMode::from(*mode);
            let list = if mode == EligibilityMode::Upper { &a.upper } else { &a.lower };
            let mut w = output(None)?;
            writeln!(w, "component,size,phi")?;
            for (i, (comp, r)) in a.peel.tree_components().zip(list).enumerate() {
                writeln!(w, "{i},{},{}", comp.vertices.len(), r.phi)?;
            }
            w.flush()?;
            eprintln!("mode {mode} k1 {} sum_phi {}", a.k1.len(), a.sum_phi(mode));
        }
        Cmd::Cycle { src, out } => {
            let cd = load(src, cli.seed)?;
            let a = analyze(&cd)?;
            let cfg = ExperimentConfig {
                n0_mode: cli.n0_mode.into(),
                strict_paper_edges: cli.strict_paper_edges,
                restarts: cli.restarts,
                ..ExperimentConfig::default()
            };
            let report = construct(&cd, &a, &cfg, Seed(cli.seed));
            eprintln!("{}", serde_json::to_string(&ReportSummary::from(&report, a.v_star()))?);
            if report.cycle.is_empty() {
                bail!("no cycle built: {}", report.last_error.as_deref().unwrap_or("V1 is empty"));
            }
            let mut w = output(out.as_deref())?;
            let line: Vec<String> = report.cycle.iter().map(u32::to_string).collect();
            writeln!(w, "{}", line.join(" "))?;
            w.flush()?;
        }
        Cmd::Exact { src, limit } => {
            let cd = load(src, cli.seed)?;
            let k1 = longcycle::digraph::giant_component(&cd.union_view());
            let len = exact_in_k1(&cd, &k1, OracleLimits::new(*limit)?)?;
            println!("{len}");
        }
        Cmd::Analytics { c } => {
            let cs: Vec<f64> = if c.is_empty() { (2..=12).map(f64::from).collect() } else { c.clone() };
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            for c in cs {
                w.serialize(analytics_row(c)?)?;
            }
            w.flush()?;
        }
        Cmd::Sweep { config, records, csv } => {
            let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = config_from(cli, &text)?;
            if records.is_some() {
                cfg.records = records.clone();
            }
            if csv.is_some() {
                cfg.csv = csv.clone();
            }
            let recs = farm::with_threads(cfg.threads, || sweep(&cfg));
            if let Some(p) = &cfg.records {
                let mut w = output(Some(p))?;
                write_records_jsonl(&recs, &mut w)?;
                w.flush()?;
            }
            write_aggregates_csv(&aggregate(&recs), output(cfg.csv.as_deref())?)?;
            let failed = recs.iter().filter(|r| r.check_invariants().is_err()).count();
            if failed > 0 {
                bail!("{failed} records violate their invariants");
            }
        }
        Cmd::Compare { records, config, enforce } => {
            let recs = read_records_jsonl(input(records)?)?;
            let cfg = match config {
                Some(p) => config_from(cli, &std::fs::read_to_string(p)?)?,
                None => ExperimentConfig::default(),
            };
            let rows = compare(&recs, &cfg.tolerances);
            write_compare_csv(&rows, io::stdout().lock())?;
            if *enforce && !rows.iter().all(|r| r.passed()) {
                eprintln!("comparison failed");
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct ReportSummary<'a> {
    v_star: usize,
    cycle_length: usize,
    restarts: usize,
    phase1_ok: bool,
    phase2_ok: bool,
    phase3_ok: bool,
    phase1_cycles: usize,
    small_cycles: usize,
    last_error: Option<&'a str>,
    seconds: [f64; 4],
}

impl<'a> ReportSummary<'a> {
    fn from(r: &'a longcycle::hamiltonian::PipelineReport, v_star: usize) -> Self {
        ReportSummary {
            v_star,
            cycle_length: r.cycle.len(),
            restarts: r.restarts,
            phase1_ok: r.phase1_ok,
            phase2_ok: r.phase2_ok,
            phase3_ok: r.phase3_ok,
            phase1_cycles: r.phase1_cycles,
            small_cycles: r.small_cycles,
            last_error: r.last_error.as_deref(),
            seconds: r.seconds,
        }
    }
}
