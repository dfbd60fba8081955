//! Run configuration: a JSON file mirroring the flags, with flags taking
//! precedence. Everything is validated before any computation starts.

use clap::ValueEnum;
use opmean::special::SpaceParams;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Flag values that override the config file.
pub struct Overrides {
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub family: Option<String>,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    pub u_expr: Option<String>,
    pub phi_expr: Option<String>,
    pub c_schedule: Option<String>,
    pub tol: Option<f64>,
    pub jobs: Option<usize>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    p: Option<f64>,
    alpha: Option<f64>,
    family: Option<String>,
    lambda: Option<f64>,
    theta: Option<f64>,
    u_expr: Option<String>,
    phi_expr: Option<String>,
    c_schedule: Option<Vec<f64>>,
    tol: Option<f64>,
    jobs: Option<usize>,
    format: Option<OutputFormat>,
    out: Option<PathBuf>,
}

/// The validated run configuration echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub space: SpaceParams,
    pub family: String,
    pub lambda: f64,
    pub theta: f64,
    pub u_expr: Option<String>,
    pub phi_expr: Option<String>,
    pub c_schedule: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub jobs: Option<usize>,
    pub format: OutputFormat,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn assemble(path: Option<&Path>, flags: Overrides) -> Result<Self, String> {
        let file: FileConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                serde_json::from_str(&text)
                    .map_err(|e| format!("cannot parse config {}: {e}", p.display()))?
            }
            None => FileConfig::default(),
        };
        let p_val = flags.p.or(file.p).unwrap_or(5.0);
        let alpha = flags.alpha.or(file.alpha).unwrap_or(0.0);
        let space = SpaceParams::new(p_val, alpha).map_err(|e| e.to_string())?;
        let family = flags
            .family
            .or(file.family)
            .unwrap_or_else(|| "hilbert".to_string());
        let lambda = flags.lambda.or(file.lambda).unwrap_or(1.0);
        // NaN fails closed.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(lambda > 0.0) {
            return Err(format!("lambda must be > 0, got {lambda}"));
        }
        let theta = flags.theta.or(file.theta).unwrap_or(0.5);
        if !(0.0..=1.0).contains(&theta) {
            return Err(format!("theta must lie in [0,1], got {theta}"));
        }
        let c_schedule = match flags.c_schedule {
            Some(text) => Some(
                text.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| format!("bad c-schedule entry '{s}'"))
                    })
                    .collect::<Result<Vec<f64>, String>>()?,
            ),
            None => file.c_schedule,
        };
        if let Some(sched) = &c_schedule {
            let c_star = space.critical_exponent();
            if sched.is_empty()
                || sched.windows(2).any(|w| w[0] >= w[1])
                || sched.iter().any(|&c| c <= 0.0 || c >= c_star)
            {
                return Err(format!(
                    "c-schedule must be strictly increasing inside (0, c*) = (0, {c_star})"
                ));
            }
        }
        let tol = flags.tol.or(file.tol);
        if let Some(t) = tol {
            // NaN fails closed.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(t > 0.0 && t < 1.0) {
                return Err(format!("tol must lie in (0, 1), got {t}"));
            }
        }
        let known = [
            "hilbert",
            "volterra",
            "square",
            "cubic",
            "evaluation",
            "expression",
        ];
        if !known.contains(&family.as_str()) {
            return Err(format!(
                "unknown family '{family}' (expected one of {known:?})"
            ));
        }
        let u_expr = flags.u_expr.or(file.u_expr);
        let phi_expr = flags.phi_expr.or(file.phi_expr);
        if family == "expression" && (u_expr.is_none() || phi_expr.is_none()) {
            return Err("expression family needs --u-expr and --phi-expr".to_string());
        }
        Ok(RunConfig {
            space,
            family,
            lambda,
            theta,
            u_expr,
            phi_expr,
            c_schedule,
            tol,
            jobs: flags.jobs.or(file.jobs),
            format: flags.format.or(file.format).unwrap_or(OutputFormat::Json),
            out: flags.out.or(file.out),
        })
    }
}
