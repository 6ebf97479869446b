use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covbeam::config::RunConfig;
use covbeam::output::{csv_rows, emit_results};
use covbeam::run::{run_design, Design, DesignReport, Trial};
use covbeam::sweep::run_sweep;
use covbeam::{run_detector_mc, HarnessError, Result};
use covbeam_core::covert_metrics::{detector, kl_01, kl_10, total_variation, LikelihoodParams};
use covbeam_core::robust::KlDirection;
use serde::Serialize;
use serde_json::json;

/// Covert MISO beamforming designs, detector checks and sweeps.
///
/// Every flag can also be set in a TOML file passed with --config; keys in the
/// file take precedence over flags. Powers are in dBW.
#[derive(Parser, Debug)]
#[command(name = "covbeam", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML file whose keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo trials per sweep point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Ellipsoid samples for the worst-case check.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Detector Monte-Carlo draws per hypothesis.
    #[arg(long, global = true)]
    draws: Option<usize>,
    #[arg(long, global = true)]
    gap_tol: Option<f64>,
    #[arg(long, global = true)]
    feas_tol: Option<f64>,
    /// Bisection bracket width on Bob's SINR.
    #[arg(long, global = true)]
    zeta: Option<f64>,
    #[arg(long, global = true)]
    randomization_trials: Option<usize>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// JSON report file, or the result directory for `sweep`.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    p_total_dbw: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    p_c0_dbw: Option<f64>,
    #[arg(long, global = true)]
    power_ratio: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    v_w: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Perfect-WCSI covert design on one channel draw.
    DesignCovert,
    /// Zero-forcing design on one channel draw.
    DesignZf,
    /// Robust design under the CSI error ellipsoid.
    DesignRobust {
        #[arg(long, value_parser = ["kl01", "kl10"])]
        direction: Option<String>,
        /// Run the non-robust baseline at the estimate instead.
        #[arg(long)]
        baseline: bool,
    },
    /// Closed-form and Monte-Carlo detector error rates.
    Detect {
        #[arg(long)]
        lambda0: Option<f64>,
        #[arg(long)]
        lambda1: Option<f64>,
    },
    /// Monte-Carlo sweep over one parameter.
    Sweep {
        /// p_total (dBW), power_ratio, n, epsilon or v_w.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated ascending values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        grid: Option<Vec<f64>>,
        /// Comma-separated subset of covert, zf, robust_kl01, robust_kl10, nonrobust.
        #[arg(long, value_delimiter = ',')]
        designs: Option<Vec<String>>,
    },
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig> {
        let c = &self.common;
        let mut rc = RunConfig {
            seed: c.seed,
            trials: c.trials,
            samples: c.samples,
            draws: c.draws,
            gap_tol: c.gap_tol,
            feas_tol: c.feas_tol,
            zeta: c.zeta,
            randomization_trials: c.randomization_trials,
            max_iter: c.max_iter,
            output: c.output.clone(),
            n: c.n,
            p_total_dbw: c.p_total_dbw,
            p_c0_dbw: c.p_c0_dbw,
            power_ratio: c.power_ratio,
            epsilon: c.epsilon,
            v_w: c.v_w,
            ..RunConfig::default()
        };
        match &self.cmd {
            Cmd::DesignRobust { direction, .. } => rc.direction = direction.clone(),
            Cmd::Detect { lambda0, lambda1 } => {
                rc.lambda0 = *lambda0;
                rc.lambda1 = *lambda1;
            }
            Cmd::Sweep { param, grid, designs } => {
                rc.param = param.clone();
                rc.grid = grid.clone();
                rc.designs = designs.clone();
            }
            Cmd::DesignCovert | Cmd::DesignZf => {}
        }
        match &c.config {
            Some(path) => Ok(rc.overlay(&RunConfig::load(path)?)),
            None => Ok(rc),
        }
    }
}

fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| HarnessError::io(path, e))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn design(rc: &RunConfig, d: Design) -> Result<()> {
    let params = rc.scenario()?;
    let trial = Trial::draw(&params, rc.v_w(), rc.seed(), 0)?;
    let outcome = run_design(&trial, d, &rc.solver()?, rc.samples(), rc.seed())?;
    write_json(&DesignReport::new(&trial, &outcome), rc.output.as_deref())
}

fn detect(rc: &RunConfig) -> Result<()> {
    let (Some(l0), Some(l1)) = (rc.lambda0, rc.lambda1) else {
        return Err(HarnessError::Config("detect needs lambda0 and lambda1".into()));
    };
    let lp = LikelihoodParams::new(l0, l1)?;
    let exact = detector(&lp);
    let mc = run_detector_mc(&lp, rc.draws(), rc.seed())?;
    let report = json!({
        "lambda0": l0,
        "lambda1": l1,
        "closed_form": {
            "threshold": exact.threshold,
            "p_fa": exact.p_fa,
            "p_md": exact.p_md,
            "xi": exact.xi,
            "total_variation": total_variation(&lp),
            "kl01": kl_01(&lp),
            "kl10": kl_10(&lp),
        },
        "monte_carlo": mc,
    });
    write_json(&report, rc.output.as_deref())
}

fn sweep(rc: &RunConfig) -> Result<()> {
    let spec = rc.sweep_spec()?;
    let result = run_sweep(&spec)?;
    let rows = csv_rows(&result);
    match &rc.output {
        Some(dir) => {
            let (csv, manifest) = emit_results(&spec, &result, dir)?;
            let summary = json!({
                "results": csv,
                "manifest": manifest,
                "rows": rows.len(),
                "flagged": result.flagged(),
            });
            write_json(&summary, None)
        }
        None => write_json(&json!({ "flagged": result.flagged(), "rows": rows }), None),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let rc = cli.run_config()?;
    match &cli.cmd {
        Cmd::DesignCovert => design(&rc, Design::Covert),
        Cmd::DesignZf => design(&rc, Design::Zf),
        Cmd::DesignRobust { baseline, .. } => match (baseline, rc.direction()?) {
            (true, KlDirection::Kl01) => design(&rc, Design::Nonrobust),
            (true, KlDirection::Kl10) => Err(HarnessError::Config("the baseline is defined for kl01 only".into())),
            (false, KlDirection::Kl01) => design(&rc, Design::RobustKl01),
            (false, KlDirection::Kl10) => design(&rc, Design::RobustKl10),
        },
        Cmd::Detect { .. } => detect(&rc),
        Cmd::Sweep { .. } => sweep(&rc),
    }
}

fn fail(category: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": { "category": category, "message": message } }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail("usage", e.to_string().trim_end(), 2),
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.category(), &e.to_string(), e.exit_code() as u8),
    }
}
