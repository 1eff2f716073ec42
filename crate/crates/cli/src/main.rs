use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gaugeflow::boundary::Orientation;
use gaugeflow::cylinder::{exact_cylinder_spectrum, CylinderBc};
use gaugeflow::harness::config::parse_config_file;
use gaugeflow::harness::{run_experiment, sweep_base, write_summary, ExperimentConfig, ExperimentId, ExperimentReport};
use gaugeflow::Error;

const WORKERS_ENV: &str = "GAUGEFLOW_WORKERS";

#[derive(Parser)]
#[command(name = "gaugeflow", version, about = "Spectral flow experiments for gauge-conjugated Dirac operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (EXP1..EXP9) or `all`.
    Run {
        experiment: String,
        /// JSON file with one experiment object or an array of them.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run the base sweep of a configuration, one report per fiber.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print closed-form spectra and flows.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Circle operator σ(m + a − u·n_j) on fiber lines with windings n_j.
    Circle {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
        windings: Vec<i64>,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        shift: f64,
        #[arg(long, default_value_t = 4)]
        m_max: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        orientation: i64,
        #[arg(long, default_value_t = 0.0)]
        u: f64,
    },
    /// Cylinder spectrum for boundary eigenvalues λ_i.
    Cylinder {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, value_enum, default_value_t = Bc::MinusIdId)]
        bc: Bc,
        #[arg(long, default_value_t = 10.0)]
        window: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Bc {
    MinusIdId,
    IdId,
    IdMinusId,
    MinusIdMinusId,
}

impl From<Bc> for CylinderBc {
    fn from(b: Bc) -> Self {
        match b {
            Bc::MinusIdId => CylinderBc::MinusIdId,
            Bc::IdId => CylinderBc::IdId,
            Bc::IdMinusId => CylinderBc::IdMinusId,
            Bc::MinusIdMinusId => CylinderBc::MinusIdMinusId,
        }
    }
}

fn configure_workers() -> Result<(), Error> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn load_configs(path: Option<&Path>) -> Result<Vec<ExperimentConfig>, Error> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => parse_config_file(&fs::read_to_string(p)?),
    }
}

fn print_report(r: &ExperimentReport) {
    let status = if r.passed { "PASS" } else { "FAIL" };
    println!("{} {status} {} ({} assertions, {:.1} s)", r.experiment, r.title, r.assertions.len(), r.wall_time_s);
    for a in r.failed_assertions() {
        println!("  failed: {} (expected {}, computed {})", a.name, a.expected, a.computed);
    }
}

fn run(experiment: &str, config: Option<&Path>, out: &Path) -> Result<bool, Error> {
    let configs = load_configs(config)?;
    let ids: Vec<ExperimentId> = if experiment.eq_ignore_ascii_case("all") {
        ExperimentId::ALL.to_vec()
    } else {
        vec![experiment.parse()?]
    };
    // Resolve everything first so a bad config fails before any work starts.
    let mut plan = Vec::new();
    for id in ids {
        let cfg = configs.iter().find(|c| c.experiment == id).cloned().unwrap_or_else(|| ExperimentConfig::new(id));
        cfg.resolve()?;
        plan.push(cfg);
    }
    let mut reports = Vec::new();
    for cfg in plan {
        let report = run_experiment(&cfg)?;
        let dir = match &cfg.output {
            Some(o) => PathBuf::from(o),
            None => out.join(report.experiment.to_string()),
        };
        report.write_to(&dir)?;
        print_report(&report);
        reports.push(report);
    }
    write_summary(&reports, out)?;
    Ok(reports.iter().all(|r| r.passed))
}

fn sweep(config: &Path, out: Option<&Path>) -> Result<bool, Error> {
    let configs = load_configs(Some(config))?;
    let [cfg] = configs.as_slice() else {
        return Err(Error::Config("sweep expects exactly one experiment object".into()));
    };
    let result = sweep_base(cfg)?;
    for f in &result.fibers {
        print_report(f);
    }
    print_report(&result.summary);
    if let Some(out) = out {
        for (i, f) in result.fibers.iter().enumerate() {
            f.write_to(&out.join(format!("fiber{i:03}")))?;
        }
        result.summary.write_to(out)?;
    }
    Ok(result.passed())
}

fn oracle(which: Oracle) -> Result<bool, Error> {
    let value = match which {
        Oracle::Circle { windings, shift, m_max, orientation, u } => {
            let o = Orientation::from_sign(orientation)?;
            let sigma = o.sign();
            let mut spectrum: Vec<f64> = windings
                .iter()
                .flat_map(|&n| (-m_max..=m_max).map(move |m| sigma * (m as f64 + shift - u * n as f64)))
                .collect();
            spectrum.sort_by(f64::total_cmp);
            json!({
                "geometry": "circle",
                "u": u,
                "spectrum": spectrum,
                "flow": gaugeflow::boundary::exact_circle_flow(&windings, o),
            })
        }
        Oracle::Cylinder { lambdas, length, bc, window } => {
            if !(length > 0.0) || !(window > 0.0) {
                return Err(Error::Config("length and window must be positive".into()));
            }
            let s = exact_cylinder_spectrum(&lambdas, length, bc.into(), window);
            json!({ "geometry": "cylinder", "length": length, "spectrum": s.values() })
        }
    };
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{}", serde_json::to_string_pretty(&value)?) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_workers().and_then(|()| match cli.command {
        Command::Run { experiment, config, out } => run(&experiment, config.as_deref(), &out),
        Command::Sweep { config, out } => sweep(&config, out.as_deref()),
        Command::Oracle { which } => oracle(which),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
