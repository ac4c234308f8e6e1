//! `hpf` command line: run scenarios, the two experimental protocols,
//! replay and re-score recorded traces, aggregate reports, and emit plots.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 I/O error.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hpf_core::error::Error;
use hpf_core::io::{config, plot, report, trace};
use hpf_core::metrics;
use hpf_core::sim::{self, Condition, Scenario};

#[derive(Parser)]
#[command(name = "hpf", version, about = "Haptic-field safety monitoring simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace.
    Simulate(SimulateArgs),
    /// Run the reaction-time measurement protocol.
    ReactTime(ReactTimeArgs),
    /// Run the collaborative-assembly experiment for one condition.
    Assembly(AssemblyArgs),
    /// Re-score a recorded trace through the monitor and verify it.
    Replay(ReplayArgs),
    /// Aggregate stats (and optionally ANOVA) over trace files.
    Report(ReportArgs),
    /// Emit SVG plots from a trace or a report file.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file or preset name (exp1, exp2, exp2-v, exp2-vh).
    scenario: String,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Trace output path (default: <label>.trace).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReactTimeArgs {
    /// Scenario file or preset name; needs a reactive, haptic-triggered hand.
    scenario: String,
    /// Trials per subject.
    #[arg(long)]
    trials: usize,
    /// Number of simulated subjects.
    #[arg(long)]
    subjects: usize,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the per-trial results as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AssemblyArgs {
    /// Feedback condition.
    #[arg(long)]
    condition: ConditionArg,
    /// Number of simulated subjects (one trace each).
    #[arg(long)]
    subjects: usize,
    /// Base seed; per-subject seeds are derived from it.
    #[arg(long, default_value_t = 2)]
    seed: u64,
    /// Directory for the trace files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    V,
    Vh,
}

impl From<ConditionArg> for Condition {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::V => Condition::Visual,
            ConditionArg::Vh => Condition::VisualHaptic,
        }
    }
}

#[derive(Args)]
struct ReplayArgs {
    /// Trace file to re-score.
    trace: PathBuf,
    /// Re-score with the safety parameters from this scenario file/preset
    /// instead of the ones recorded in the trace header.
    #[arg(long)]
    scenario: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Trace files, grouped by their header label.
    traces: Vec<PathBuf>,
    /// Include one-way ANOVA across conditions.
    #[arg(long)]
    anova: bool,
    /// Write the report as JSON (default: stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// A .trace file or a report .json file.
    input: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 1; --help/--version are not errors.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> hpf_core::Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::ReactTime(args) => react_time(args),
        Command::Assembly(args) => assembly(args),
        Command::Replay(args) => replay(args),
        Command::Report(args) => build_report(args),
        Command::Plot(args) => emit_plots(args),
    }
}

fn load_scenario(name: &str, seed: Option<u64>) -> hpf_core::Result<Scenario> {
    let mut sc = config::load_scenario(name)?;
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    Ok(sc)
}

fn simulate(args: SimulateArgs) -> hpf_core::Result<()> {
    let sc = load_scenario(&args.scenario, args.seed)?;
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.trace", sc.label)));
    let t = sim::run_scenario(&sc)?;
    trace::write_trace_file(&t, &out)?;
    let stats = metrics::trial_stats(&t)?;
    println!(
        "wrote {} ({} steps, fingerprint {})",
        out.display(),
        t.steps.len(),
        t.fingerprint
    );
    println!(
        "min distance {:.4} m, time in PDD {:.3} s, PSD violation samples {}",
        stats.min_distance, stats.time_in_pdd, stats.psd_violations
    );
    Ok(())
}

fn react_time(args: ReactTimeArgs) -> hpf_core::Result<()> {
    let sc = load_scenario(&args.scenario, args.seed)?;
    let mut all: Vec<f64> = Vec::new();
    let mut missing = 0usize;
    let mut per_subject: Vec<Vec<sim::ReactionTrial>> = Vec::new();
    for subject in 0..args.subjects {
        let mut subject_sc = sc.clone();
        subject_sc.seed = sim::derive_seed(sc.seed, subject as u64);
        let trials = sim::measure_reaction_time(&subject_sc, args.trials)?;
        let values: Vec<f64> = trials.iter().filter_map(|t| t.measured).collect();
        missing += trials.len() - values.len();
        if values.len() >= 2 {
            let (m, s) = metrics::summary(&values)?;
            println!("subject {:2}: mean {m:.4} s, std {s:.4} s ({} trials)", subject + 1, values.len());
        }
        all.extend(values);
        per_subject.push(trials);
    }
    if all.len() >= 2 {
        let (m, s) = metrics::summary(&all)?;
        println!(
            "overall: {m:.4} +/- {s:.4} s over {} measurements ({missing} missing)",
            all.len()
        );
    } else {
        println!("overall: insufficient measurements ({missing} missing)");
    }
    if let Some(out) = args.out {
        let json = serde_json::to_string_pretty(&per_subject)
            .map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(&out, json)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn assembly(args: AssemblyArgs) -> hpf_core::Result<()> {
    let condition: Condition = args.condition.into();
    let traces = sim::run_assembly_experiment(condition, args.subjects, args.seed)?;
    std::fs::create_dir_all(&args.out_dir)?;
    for (i, t) in traces.iter().enumerate() {
        let path = args
            .out_dir
            .join(format!("assembly_{}_s{:02}.trace", condition.label(), i + 1));
        trace::write_trace_file(t, &path)?;
        let stats = metrics::trial_stats(t)?;
        println!(
            "{}: min distance {:.4} m, time in PDD {:.3} s",
            path.display(),
            stats.min_distance,
            stats.time_in_pdd
        );
    }
    Ok(())
}

fn replay(args: ReplayArgs) -> hpf_core::Result<()> {
    let stored = trace::read_trace_file(&args.trace)?;
    let params = match &args.scenario {
        Some(name) => Some(config::load_scenario(name)?.params),
        None => None,
    };
    let override_used = params.is_some();
    let outcome = trace::replay(&stored, params)?;
    println!(
        "replayed {} records: min distance {:.4} m, time in PDD {:.3} s, PSD violation samples {}",
        stored.records.len(),
        outcome.stats.min_distance,
        outcome.stats.time_in_pdd,
        outcome.stats.psd_violations
    );
    if override_used {
        println!("re-scored with overridden safety parameters");
    } else if outcome.mismatches.is_empty() {
        println!("stored zones/events verified");
    } else {
        return Err(Error::Stream {
            index: outcome.mismatches[0],
            reason: format!(
                "{} records disagree with the stored zones/events",
                outcome.mismatches.len()
            ),
        });
    }
    Ok(())
}

fn build_report(args: ReportArgs) -> hpf_core::Result<()> {
    if args.traces.is_empty() {
        return Err(Error::invalid("report needs at least one trace file"));
    }
    let mut summaries = Vec::new();
    for path in &args.traces {
        let stored = trace::read_trace_file(path)?;
        let outcome = trace::replay(&stored, None)?;
        summaries.push(report::TraceSummary {
            label: stored.header.label.clone(),
            fingerprint: stored.header.fingerprint.clone(),
            stats: outcome.stats,
        });
    }
    let rep = report::build_report(summaries, args.anova)?;
    for c in &rep.conditions {
        println!(
            "{}: n={} min distance {:.4} m (std {}), time in PDD {:.3} s (std {}), violations in {} traces",
            c.label,
            c.n_traces,
            c.min_distance_mean,
            c.min_distance_std.map_or("-".into(), |s| format!("{s:.4}")),
            c.time_in_pdd_mean,
            c.time_in_pdd_std.map_or("-".into(), |s| format!("{s:.3}")),
            c.traces_with_psd_violation
        );
    }
    if let Some(a) = &rep.anova_min_distance {
        println!(
            "ANOVA min distance: F({},{}) = {:.4}, p = {:.4}",
            a.df_between, a.df_within, a.f_value, a.p_value
        );
    }
    if let Some(a) = &rep.anova_time_in_pdd {
        println!(
            "ANOVA time in PDD: F({},{}) = {:.4}, p = {:.4}",
            a.df_between, a.df_within, a.f_value, a.p_value
        );
    }
    if let Some(pct) = rep.min_distance_improvement_pct {
        println!("min distance improvement: {pct:+.2}%");
    }
    if let Some(pct) = rep.time_in_pdd_ratio_pct {
        println!("time-in-PDD ratio (baseline/improved): {pct:.1}%");
    }
    if let Some(out) = args.out {
        std::fs::write(&out, report::to_json(&rep)?)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn emit_plots(args: PlotArgs) -> hpf_core::Result<()> {
    std::fs::create_dir_all(&args.out_dir)?;
    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("plot");
    let svg = if is_report_json(&args.input) {
        let text = std::fs::read_to_string(&args.input)?;
        plot::report_svg(&report::from_json(&text)?)?
    } else {
        plot::trace_svg(&trace::read_trace_file(&args.input)?)?
    };
    let out = args.out_dir.join(format!("{stem}.svg"));
    let mut file = std::fs::File::create(&out)?;
    file.write_all(svg.as_bytes())?;
    println!("wrote {}", out.display());
    Ok(())
}

fn is_report_json(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()) == Some("json")
}
