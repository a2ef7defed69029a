//! `pion` command line. Exit codes: 0 ok, 1 experiment or check failure,
//! 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pion::diagnostics::{erank, kappa_g, q_nd, rho_g, snr_grpo, snr_ratio_full, snr_sft, RlvrSnrParams};
use pion::lpmuon::{fit, FitConfig};
use pion::DenseMatrix;
use serde_json::json;

use crate::config::{resolve_output, ExperimentConfig};
use crate::error::{HarnessError, HarnessResult};
use crate::experiments::{filter_profile, run_experiment};
use crate::suite::{render_report, run_suite};

#[derive(Debug, Parser)]
#[command(name = "pion", version, about = "Spectral-filter optimizer experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate filter responses on a 1001-point grid of [0, 1].
    InspectFilter {
        /// Restrict the Pion columns to these k_p values.
        #[arg(long = "kp", value_delimiter = ',')]
        k_p: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the 15 low-pass coefficients for one cutoff.
    FitLpmuon {
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect a matrix stored as JSON or CSV.
    Diagnose {
        #[arg(long)]
        input: PathBuf,
        /// Include the singular-value spectrum and effective rank.
        #[arg(long)]
        erank: bool,
    },
    /// Evaluate the analytic SFT vs. GRPO gradient SNR model.
    SnrModel(SnrArgs),
    /// Run the verification suite; exits 1 if any check fails.
    Verify {
        /// Criterion ids to run, e.g. `1,6a,9`; default all.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<String>,
    },
}

#[derive(Debug, Args)]
struct SnrArgs {
    #[arg(long)]
    g: u64,
    #[arg(long)]
    p: f64,
    #[arg(long = "T")]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_s_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    sbar_sq: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_sq: f64,
    #[arg(long, default_value_t = 0.0)]
    chi_sq: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "pion: {e}");
            e.exit_code()
        }
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> HarnessResult<Option<PathBuf>> {
    match out {
        Some(path) => {
            let path = resolve_output(path);
            write_file(&path, text)?;
            Ok(Some(path))
        }
        None => {
            stdout.write_all(text.as_bytes()).map_err(io_failure)?;
            Ok(None)
        }
    }
}

fn write_file(path: &Path, text: &str) -> HarnessResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_failure)?;
    }
    std::fs::write(path, text).map_err(|e| HarnessError::Failure(format!("cannot write {}: {e}", path.display())))
}

fn io_failure(e: std::io::Error) -> HarnessError {
    HarnessError::Failure(e.to_string())
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> HarnessResult<i32> {
    match command {
        Command::InspectFilter { k_p, out } => {
            if let Some(k) = k_p.iter().find(|k| **k > 5) {
                return Err(HarnessError::Usage(format!("--kp must be in 0..=5, got {k}")));
            }
            let table = filter_profile(&k_p)?;
            if let Some(path) = emit(&table.render(), out.as_deref(), stdout)? {
                let _ = writeln!(stderr, "wrote {} rows to {}", table.len(), path.display());
            }
        }
        Command::FitLpmuon { tau, seed, out } => {
            let result = fit(&FitConfig::new(tau, seed))?;
            let _ = writeln!(stderr, "tau {tau}: loss {:.6e}, best restart {}", result.loss, result.best_index);
            emit(&(result.to_json() + "\n"), out.as_deref(), stdout)?;
        }
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(out) = out {
                cfg.output = Some(out.to_string_lossy().into_owned());
            }
            let result = run_experiment(&cfg)?;
            let path = cfg.output_path();
            write_file(&path, &result.csv())?;
            let summary = json!({ "output": path.to_string_lossy(), "rows": result.table.len(), "summary": result.summary });
            stdout.write_all(pretty(&summary).as_bytes()).map_err(io_failure)?;
        }
        Command::Diagnose { input, erank: want_erank } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| HarnessError::Usage(format!("cannot read {}: {e}", input.display())))?;
            let is_csv = input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            let m = if is_csv { DenseMatrix::from_csv(&text)? } else { DenseMatrix::from_json(&text)? };
            let mut report = json!({
                "rows": m.rows(),
                "cols": m.cols(),
                "frobenius_norm": m.frobenius_norm(),
            });
            if want_erank {
                report["spectrum"] = serde_json::to_value(erank(&m)?).expect("report serializes");
            }
            stdout.write_all(pretty(&report).as_bytes()).map_err(io_failure)?;
        }
        Command::SnrModel(a) => {
            let params = RlvrSnrParams {
                g: a.g,
                p: a.p,
                t: a.t,
                sigma_s_sq: a.sigma_s_sq,
                sbar_sq: a.sbar_sq,
                delta_sq: a.delta_sq,
                chi_sq: a.chi_sq,
                alpha: a.alpha,
            };
            params.validate()?;
            let mut report = json!({
                "params": params,
                "q_nd": q_nd(a.g, a.p)?,
                "rho_g": rho_g(a.g, a.p)?,
                "kappa_g": kappa_g(a.g, a.p)?,
                "snr_sft": snr_sft(&params)?,
                "snr_grpo": snr_grpo(&params)?,
            });
            if let Ok(ratio) = snr_ratio_full(&params) {
                report["snr_ratio"] = json!(ratio);
            }
            stdout.write_all(pretty(&report).as_bytes()).map_err(io_failure)?;
        }
        Command::Verify { criteria } => {
            let outcomes = run_suite(&criteria);
            if outcomes.is_empty() {
                return Err(HarnessError::Usage(format!("no criteria match {criteria:?}")));
            }
            for o in &outcomes {
                let _ = writeln!(stderr, "{:<3} {:.2}s", o.id, o.elapsed.as_secs_f64());
            }
            stdout.write_all(render_report(&outcomes).as_bytes()).map_err(io_failure)?;
            return Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 });
        }
    }
    Ok(0)
}
