//! `hexactl` — controllability analysis and fault-injection simulation for a
//! PNPNPN hexacopter.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hexactl::config::{
    self, builtin_scenario, read_json, to_canonical_json, AnalysisConfig, AnalysisReport,
    SweepConfig, ThresholdConfig, ThresholdEntry, ThresholdReport,
};
use hexactl::controllability::{
    check_degraded, check_full, degraded_lift_threshold, degraded_thrust_threshold,
    inclusion_test, SetKind, SystemPair,
};
use hexactl::model::{AirframeParams, EfficiencyVector, ROTOR_COUNT};
use hexactl::sim::{run_scenario, write_csv, Scenario};
use hexactl::{svg, verify, Error};

#[derive(Parser)]
#[command(name = "hexactl", version, about = "Hexacopter rotor-failure controllability toolbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetKindArg {
    U0,
    Ua,
}

impl From<SetKindArg> for SetKind {
    fn from(v: SetKindArg) -> Self {
        match v {
            SetKindArg::U0 => SetKind::ExactU0,
            SetKindArg::Ua => SetKind::AllocatedUa,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DcsArg {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Decide positive controllability for a configuration.
    ///
    /// Exit code 0 means controllable, 2 uncontrollable, 1 error.
    Analyze(AnalyzeArgs),
    /// Lift and thrust controllability thresholds per failed rotor.
    Threshold(ThresholdArgs),
    /// Run a scripted fault-injection scenario.
    Simulate(SimulateArgs),
    /// Degraded-controllability verdicts over a grid of lift limits.
    Sweep(SweepArgs),
    /// Run the built-in verification suite (all acceptance checks).
    VerifyPaper,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Analysis configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the full report here (JSON); stdout gets a summary either way.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured attainable-set representation.
    #[arg(long, value_enum)]
    set_kind: Option<SetKindArg>,
    /// Override the configured inclusion-test sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the configured sampling seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict to one failed rotor (1-6).
    #[arg(long)]
    rotor: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (JSON), or a builtin name: fig2, fig3, fig4, fig5.
    #[arg(long)]
    config: String,
    /// Write the trace as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write an SVG plot of h, phi, theta, psi.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Override the scenario's degraded-strategy switch.
    #[arg(long, value_enum)]
    dcs: Option<DcsArg>,
    /// Override the scenario's output decimation.
    #[arg(long)]
    decimation: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Write the sweep table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    rotor: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> hexactl::Result<ExitCode> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Threshold(args) => cmd_threshold(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::VerifyPaper => cmd_verify(),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> hexactl::Result<ExitCode> {
    let mut cfg: AnalysisConfig = read_json(&args.config)?;
    if let Some(k) = args.set_kind {
        cfg.set_kind = Some(k.into());
    }
    if let Some(s) = args.samples {
        cfg.samples = Some(s);
    }
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    cfg.params.validate()?;

    let report = match cfg.system {
        SystemPair::Full => {
            if cfg.set_kind == Some(SetKind::AllocatedUa) {
                return Err(Error::Config(
                    "the full-system test uses the exact attainable set; set_kind ua applies to \
                     the degraded system"
                        .into(),
                ));
            }
            check_full(&cfg.params, &cfg.eta)?
        }
        SystemPair::Degraded => {
            let kind = cfg.set_kind.unwrap_or(SetKind::AllocatedUa);
            check_degraded(&cfg.params, &cfg.eta, kind)?
        }
    };

    let inclusion_violations = match cfg.samples {
        Some(samples) => Some(inclusion_test(
            &cfg.params,
            &cfg.eta,
            cfg.system,
            samples,
            cfg.seed.unwrap_or(0),
        )?),
        None => None,
    };

    let controllable = report.controllable;
    let doc = AnalysisReport {
        tool_version: config::TOOL_VERSION.to_string(),
        input: cfg,
        report,
        inclusion_violations,
    };
    let text = to_canonical_json(&doc)?;
    if let Some(path) = &args.out {
        std::fs::write(path, &text)?;
    }
    println!(
        "{} (margin {:.6e}{})",
        if controllable { "controllable" } else { "uncontrollable" },
        doc.report.margin,
        match inclusion_violations {
            Some(v) => format!(", inclusion violations {v}"),
            None => String::new(),
        }
    );
    Ok(ExitCode::from(if controllable { 0 } else { 2 }))
}

fn rotor_list(requested: Option<usize>) -> hexactl::Result<Vec<usize>> {
    match requested {
        Some(r) if (1..=ROTOR_COUNT).contains(&r) => Ok(vec![r]),
        Some(r) => Err(Error::Config(format!("rotor {r} out of range 1..=6"))),
        None => Ok((1..=ROTOR_COUNT).collect()),
    }
}

fn cmd_threshold(args: ThresholdArgs) -> hexactl::Result<ExitCode> {
    let mut cfg: ThresholdConfig = read_json(&args.config)?;
    if args.rotor.is_some() {
        cfg.rotor = args.rotor;
    }
    cfg.params.validate()?;
    let lift_analytic = 5.0 / 18.0 * cfg.params.hover_thrust();
    let thrust_analytic = 18.0 / 5.0 * cfg.params.max_lift_n;

    let mut entries = Vec::new();
    for rotor in rotor_list(cfg.rotor)? {
        let entry = ThresholdEntry {
            rotor,
            lift_threshold_n: degraded_lift_threshold(&cfg.params, rotor)?,
            lift_threshold_analytic_n: lift_analytic,
            thrust_threshold_n: degraded_thrust_threshold(&cfg.params, rotor)?,
            thrust_threshold_analytic_n: thrust_analytic,
        };
        println!(
            "rotor {}: K* = {:.8} N (analytic {:.8}), T* = {:.8} N (analytic {:.8})",
            entry.rotor,
            entry.lift_threshold_n,
            entry.lift_threshold_analytic_n,
            entry.thrust_threshold_n,
            entry.thrust_threshold_analytic_n
        );
        entries.push(entry);
    }
    let doc = ThresholdReport {
        tool_version: config::TOOL_VERSION.to_string(),
        input: cfg,
        entries,
    };
    if let Some(path) = &args.out {
        std::fs::write(path, to_canonical_json(&doc)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> hexactl::Result<ExitCode> {
    let mut scenario: Scenario = if config::BUILTIN_SCENARIOS.contains(&args.config.as_str()) {
        builtin_scenario(&args.config)?
    } else {
        read_json(std::path::Path::new(&args.config))?
    };
    if let Some(dcs) = args.dcs {
        scenario.dcs_enabled = matches!(dcs, DcsArg::On);
    }
    if let Some(d) = args.decimation {
        scenario.output_decimation = d;
    }
    scenario.validate()?;

    let trace = run_scenario(&scenario)?;
    if let Some(path) = &args.csv {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_csv(&trace, &mut file, scenario.output_decimation)?;
    }
    if let Some(path) = &args.svg {
        std::fs::write(path, svg::render_trace(&trace, &scenario.setpoints))?;
    }
    println!(
        "{:?}: final errors h {:+.4} m, phi {:+.4} rad, theta {:+.4} rad, psi {:+.4} rad; \
         max |r| {:.3} rad/s{}",
        trace.classification,
        trace.metrics.final_errors[0],
        trace.metrics.final_errors[1],
        trace.metrics.final_errors[2],
        trace.metrics.final_errors[3],
        trace.metrics.max_yaw_rate_abs,
        match trace.metrics.settling_time_s {
            Some(t) => format!("; settled at {t:.2} s"),
            None => String::new(),
        }
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> hexactl::Result<ExitCode> {
    let mut cfg: SweepConfig = read_json(&args.config)?;
    if let Some(r) = args.rotor {
        cfg.rotor = r;
    }
    cfg.params.validate()?;
    if !(1..=ROTOR_COUNT).contains(&cfg.rotor) {
        return Err(Error::Config(format!("rotor {} out of range 1..=6", cfg.rotor)));
    }
    let grid_ok = cfg.k_min_n.is_finite()
        && cfg.k_max_n.is_finite()
        && cfg.k_min_n > 0.0
        && cfg.k_max_n > cfg.k_min_n;
    if cfg.steps < 2 || !grid_ok {
        return Err(Error::Config("sweep needs k_max_n > k_min_n > 0 and steps >= 2".into()));
    }
    let kind = cfg.set_kind.unwrap_or(SetKind::AllocatedUa);
    let eta = EfficiencyVector::single_failure(cfg.rotor);

    let mut lines = vec!["k_n,controllable,margin".to_string()];
    for i in 0..cfg.steps {
        let k = cfg.k_min_n + (cfg.k_max_n - cfg.k_min_n) * i as f64 / (cfg.steps - 1) as f64;
        let params = AirframeParams { max_lift_n: k, ..cfg.params.clone() };
        let report = check_degraded(&params, &eta, kind)?;
        lines.push(format!("{k},{},{}", u8::from(report.controllable), report.margin));
    }
    let table = lines.join("\n") + "\n";
    match &args.csv {
        Some(path) => std::fs::write(path, &table)?,
        None => print!("{table}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify() -> hexactl::Result<ExitCode> {
    let results = verify::run_all()?;
    let mut all_passed = true;
    for r in &results {
        println!("{} — {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        all_passed &= r.passed;
    }
    Ok(ExitCode::from(if all_passed { 0 } else { 2 }))
}
