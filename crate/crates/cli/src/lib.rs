//! Command-line front end: thresholds, phase portraits, spheres, the
//! embeddedness region and the verification suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a <= b)` is deliberate: NaN must fail

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::fmt;

use anyhow::Result;
use berger_cgc::sphere::SphereError;

use crate::config::{Command, Format, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NO_SPHERE: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

/// Failures that map to a dedicated exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Config(String),
    NoSphere(String),
    Numerical(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::NoSphere(m) => write!(f, "no sphere: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Config(_) => EXIT_CONFIG,
                Failure::NoSphere(_) => EXIT_NO_SPHERE,
                Failure::Numerical(_) => EXIT_NUMERICAL,
            };
        }
        if let Some(e) = cause.downcast_ref::<SphereError>() {
            return match e {
                SphereError::NoSphere { .. } => EXIT_NO_SPHERE,
                _ => EXIT_NUMERICAL,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_NUMERICAL
}

fn verify(cfg: &RunConfig) -> Result<()> {
    let opts = verify::VerifyOptions {
        tol: cfg.tol,
        ..Default::default()
    };
    let results = verify::run_suites(&opts);
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.name.to_string(),
                if r.passed { "pass" } else { "fail" }.to_string(),
                output::num(r.value),
                output::num(r.budget),
                r.detail.replace(',', ";"),
            ]
        })
        .collect();
    let table = output::csv(&["suite", "status", "value", "budget", "detail"], &rows);
    print!("{table}");
    if let Some(dir) = &cfg.out {
        if cfg.wants(Format::Csv) {
            output::write(&dir.join("verify.csv"), &table)?;
        }
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("suites failed: {}", failed.join(", "))).into())
    }
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    match cfg.command {
        Command::Thresholds => commands::thresholds(cfg),
        Command::Phase => commands::phase(cfg),
        Command::Sphere => commands::sphere(cfg),
        Command::EmbedRegion => commands::embed_region(cfg),
        Command::Verify => verify(cfg),
    }
}
