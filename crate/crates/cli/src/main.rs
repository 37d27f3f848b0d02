mod args;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use levyglass::exact::log_partition;
use levyglass::experiments::{self as exp, ExperimentConfig, ExperimentReport, ReportRow};
use levyglass::model::parse_instance;

use args::{parse_config_file, resolve, Cli, Command, Format, Resolved, THREADS_ENV};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

enum Failure {
    Usage(String),
    Io(String),
}

impl From<levyglass::Error> for Failure {
    fn from(e: levyglass::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn exact_report(cfg: &ExperimentConfig, path: &std::path::Path) -> Result<ExperimentReport, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let inst = parse_instance(&text)?;
    let summary = log_partition(&inst)?;
    let inputs = ExperimentConfig { alpha: inst.alpha(), beta: inst.beta(), n: inst.n_sites(), ..cfg.clone() };
    let n = Some(inst.n_sites());
    let mut report = ExperimentReport::new("exact", &inputs);
    report.push(ReportRow::info(n, "log_z", summary.log_z, None));
    report.push(ReportRow::info(n, "free_energy", summary.log_z / inst.n_sites() as f64, None));
    let free = inst.n_sites() as f64 * std::f64::consts::LN_2;
    let spread = inst.beta() * summary.scaled_weight_sum;
    report.push(ReportRow::check(
        n,
        "sandwich",
        summary.log_z,
        None,
        free,
        if summary.sandwich_holds() { spread - (summary.log_z - free).abs() } else { -1.0 },
    ));
    Ok(report)
}

fn dispatch(command: &Command, cfg: &ExperimentConfig) -> Result<ExperimentReport, Failure> {
    let report = match command {
        Command::FreeEnergy { model, .. } => exp::quenched_free_energy(cfg, *model)?,
        Command::Reduce(_) => exp::reduction_chain(cfg)?,
        Command::Superadd(_) => exp::superadditivity_trial(cfg)?,
        Command::Interp(_) => exp::interpolation_sweep(cfg)?,
        Command::Concentrate(_) => exp::concentration_scaling(cfg)?,
        Command::Martingale(_) => exp::coupling_deviation_profile(cfg)?,
        Command::Multiedge(_) => exp::multiedge_loop_stats(cfg)?,
        Command::Chernoff(_) => exp::edge_count_concentration(cfg)?,
        Command::Jensen(_) => exp::jensen_sandwich_audit(cfg)?,
        Command::Bounded(_) => exp::boundedness_audit(cfg)?,
        Command::Exact { instance, .. } => exact_report(cfg, instance)?,
    };
    Ok(report)
}

fn emit(report: &ExperimentReport, settings: &Resolved) -> Result<(), Failure> {
    let body = match settings.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    match &settings.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Io(format!("cannot write to stdout: {e}"))),
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let flags = cli.command.common();
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            parse_config_file(&text).map_err(Failure::Usage)?
        }
        None => Default::default(),
    };
    let env_threads = std::env::var(THREADS_ENV).ok();
    let settings = resolve(flags, &file, env_threads.as_deref()).map_err(Failure::Usage)?;
    if !matches!(cli.command, Command::Exact { .. }) {
        settings.config.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.threads)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot build thread pool: {e}")))?;

    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "# {}", cli.command.name());
    for line in pool.install(|| settings.describe()) {
        let _ = writeln!(err, "# {line}");
    }
    drop(err);

    let report = pool.install(|| dispatch(&cli.command, &settings.config))?;
    emit(&report, &settings)?;
    for row in report.failures() {
        let n = row.n.map_or_else(String::new, |n| format!(" (n={n})"));
        eprintln!("# FAIL {}{n}: estimate {} margin {:?}", row.quantity, row.estimate, row.margin);
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
