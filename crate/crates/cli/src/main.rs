mod config;
mod failure;
mod oracle_suite;
mod report;
mod scan;

use clap::{Args, Parser, Subcommand};
use config::{Range, ScanConfig};
use failure::{Context, Failure};
use nhil::model::CRITICAL_TOL;
use nhil::ModelParams;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Ising chain in a complex transverse field: reports, scans and exact checks.
#[derive(Debug, Parser)]
#[command(name = "nhil", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(long, global = true, env = "NHIL_THREADS")]
    threads: Option<usize>,
    /// Fidelity threshold ε for the characteristic times.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Tolerance: critical-curve width for report and scan, comparison bound for oracle.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Energy scale J.
    #[arg(long = "J", global = true)]
    j: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// JSON report for a single parameter point.
    Report {
        /// Real transverse field, in units of J.
        #[arg(long)]
        h: Option<f64>,
        /// Dissipation strength, in units of J.
        #[arg(long)]
        gamma: Option<f64>,
        /// Even separations for C^zz.
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        x: Vec<u32>,
        /// Times for the spread fidelity, in units of 1/J.
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
        t: Vec<f64>,
    },
    /// CSV phase-diagram scan over an (h, gamma) grid.
    Scan {
        /// Field grid MIN:MAX:STEPS, in units of J.
        #[arg(long)]
        h: Option<Range>,
        /// Dissipation grid MIN:MAX:STEPS, in units of J.
        #[arg(long)]
        gamma: Option<Range>,
    },
    /// Exact-diagonalization comparison suite on an N-site ring.
    Oracle {
        /// Number of sites.
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Real transverse field, in units of J.
        #[arg(long)]
        h: Option<f64>,
        /// Dissipation strength, in units of J.
        #[arg(long)]
        gamma: Option<f64>,
    },
}

const DEFAULT_EPS: f64 = 1e-6;
const DEFAULT_ORACLE_TOL: f64 = 1e-9;

fn load_config(common: &Common) -> Result<ScanConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => ScanConfig::load(path)?,
        None => ScanConfig::default(),
    };
    if let Some(j) = common.j {
        cfg.j = j;
    }
    if let Some(e) = common.eps {
        cfg.eps = Some(e);
    }
    if let Some(t) = common.threads {
        cfg.threads = Some(t);
    }
    if let Some(out) = &common.out {
        cfg.output_path = Some(out.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn point(cfg: &ScanConfig, h: Option<f64>, gamma: Option<f64>) -> Result<ModelParams, Failure> {
    let h = h.or(cfg.h).ok_or_else(|| Failure::Usage("missing --h".into()))?;
    let gamma = gamma.or(cfg.gamma).ok_or_else(|| Failure::Usage("missing --gamma".into()))?;
    ModelParams::new(cfg.j, h * cfg.j, gamma * cfg.j).during("parameters")
}

fn emit(text: &str, path: Option<&str>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(Path::new(p), text).map_err(|e| Failure::Usage(format!("cannot write {p}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Report { h, gamma, x, t } => {
            let p = point(&cfg, h, gamma)?;
            let tol = cli.common.tol.unwrap_or(cfg.tolerance("critical", CRITICAL_TOL));
            let r = report::run_report(&p, &x, &t, cfg.eps.unwrap_or(DEFAULT_EPS), tol)?;
            let text = serde_json::to_string_pretty(&r).expect("report serializes") + "\n";
            emit(&text, cfg.output_path.as_deref())
        }
        Command::Scan { h, gamma } => {
            cfg.h_range = h.or(cfg.h_range);
            cfg.gamma_range = gamma.or(cfg.gamma_range);
            if let Some(tol) = cli.common.tol {
                cfg.tolerances.insert("critical".into(), tol);
            }
            cfg.validate()?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = cfg.threads {
                pool = pool.num_threads(n);
            }
            let pool = pool.build().map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
            let csv = pool.install(|| scan::run_scan(&cfg))?;
            emit(&csv, cfg.output_path.as_deref())
        }
        Command::Oracle { n, h, gamma } => {
            let p = point(&cfg, h, gamma)?;
            let tol = cli.common.tol.unwrap_or(cfg.tolerance("oracle", DEFAULT_ORACLE_TOL));
            let checks = oracle_suite::run_oracle(n, &p, tol)?;
            emit(&oracle_suite::render(n, &p, &checks), cfg.output_path.as_deref())?;
            let failed = checks.iter().filter(|c| !c.passed()).count();
            if failed > 0 {
                return Err(Failure::Numeric(format!("{failed} oracle checks failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nhil: {f}");
            f.code()
        }
    }
}
