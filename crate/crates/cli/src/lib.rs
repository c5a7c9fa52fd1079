//! Experiment runner behind the `omcache` binary.

pub mod context;
pub mod experiments;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

pub use context::{Context, Family, Flags, Knob};
pub use experiments::Experiment;
pub use table::{Cell, Column, Output, Table};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Infeasible(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<omcache::Error> for CliError {
    fn from(e: omcache::Error) -> Self {
        use omcache::Error as E;
        match e {
            E::Infeasible(_) | E::NoCrossing { .. } | E::Unreachable { .. } => CliError::Infeasible(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub preset: String,
    pub out: PathBuf,
    pub seed: u64,
    pub sets: Vec<String>,
    pub flags: Flags,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub output: Output,
}

/// Resolves the configuration, runs the experiment and writes
/// `<name>.csv` and `<name>.meta.json` into `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let exp = cfg.experiment;
    if cfg.flags.eta_d.is_some() && !exp.uses_eta_d() {
        return Err(CliError::Validation(format!("--eta-d is not used by `{}`", exp.name())));
    }
    if cfg.flags.n.is_some() && !exp.uses_n() {
        return Err(CliError::Validation(format!("--N is not used by `{}`", exp.name())));
    }
    let ctx = Context::resolve(
        &cfg.preset,
        &cfg.sets,
        cfg.flags.clone(),
        cfg.seed,
        exp.knobs(),
        exp.n_th_is_system(),
    )?;
    let start = Instant::now();
    let output = exp.run(&ctx)?;
    let wall = start.elapsed().as_secs_f64();
    let mut settings = output.settings.clone();
    if let Some(map) = settings.as_object_mut() {
        for (k, v) in ctx.resolved_knobs() {
            map.insert(k.to_string(), json!(v));
        }
    }
    let meta = table::Meta {
        experiment: exp.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        wall_time_s: wall,
        preset: &ctx.preset,
        system: json!({
            "family": ctx.family.name(),
            "params": ctx.system,
            "kappa_over_2pi_hz": ctx.system.kappa() / std::f64::consts::TAU,
            "bath_temperature_k": ctx.system.bath_temperature(),
        }),
        settings: &settings,
        columns: &output.table.columns,
        summary: &output.summary,
    };
    let (csv, meta_path) = table::write_outputs(Path::new(&cfg.out), exp.name(), &output.table, &meta)?;
    Ok(RunReport {
        csv,
        meta: meta_path,
        output,
    })
}

/// Applies `OMCACHE_THREADS` to the global thread pool.
pub fn configure_threads(var: Option<&str>) -> Result<(), CliError> {
    let Some(v) = var else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Validation(format!("OMCACHE_THREADS must be a positive integer, got `{v}`")))?;
    // a pool built earlier in the process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes() {
        let e: CliError = omcache::Error::Infeasible("x".into()).into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = omcache::Error::InvalidParameter("x".into()).into();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn thread_variable() {
        assert!(configure_threads(None).is_ok());
        assert!(configure_threads(Some("0")).is_err());
        assert!(configure_threads(Some("many")).is_err());
    }
}
