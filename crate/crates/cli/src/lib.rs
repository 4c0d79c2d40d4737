//! Configuration-driven front end: reads a TOML run description, runs one
//! subcommand and writes CSV traces plus a JSON report.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;
pub mod sink;

use anyhow::Result;

use config::RunConfig;
use report::{Provenance, RunReport};
use sink::Sink;

/// Validates the config, runs it and writes every output, the report last.
pub fn execute(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut sink = Sink::create(&cfg.output.dir)?;
    let outcome = commands::dispatch(cfg, &mut sink)?;
    let mut outputs = sink.written().to_vec();
    outputs.push(cfg.output.report.clone());
    let report = RunReport {
        tool: concat!("rmean ", env!("CARGO_PKG_VERSION")).into(),
        command: cfg.command,
        config: cfg.clone(),
        provenance: Provenance {
            constant_mode: cfg.constant_mode,
            data: outcome.data,
            seed: cfg.seed,
            notes: outcome.notes,
        },
        stages: outcome.stages,
        conclusion: outcome.conclusion,
        outputs,
    };
    sink.text(&cfg.output.report, &report.to_json())?;
    Ok(report)
}
