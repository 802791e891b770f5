use std::path::{Path, PathBuf};

use qfocus_core::Trajectory;

use crate::error::CliError;
use crate::run::RunOutput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `t,value` rows under a header.
pub fn trajectory_csv(traj: &Trajectory) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(["t", "value"]).map_err(fail)?;
    for (t, v) in traj.points() {
        w.serialize((t, v)).map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

pub fn record_json(out: &RunOutput) -> Result<String, CliError> {
    serde_json::to_string_pretty(&out.record).map_err(|e| CliError::Output(e.to_string()))
}

/// What goes to stdout for `format`.
pub fn render(out: &RunOutput, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => record_json(out),
        Format::Csv => match &out.trajectory {
            Some(t) => trajectory_csv(t),
            None => Err(CliError::Config {
                field: "--format".into(),
                message: format!(
                    "`{}` produces no trajectory; use json",
                    out.record.command.name()
                ),
            }),
        },
    }
}

/// Writes `<command>.json` and, when present, `<command>.csv` into `dir`.
pub fn write_files(dir: &Path, out: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Output(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let name = out.record.command.name();
    let json = dir.join(format!("{name}.json"));
    std::fs::write(&json, record_json(out)?).map_err(|e| io(&json, e))?;
    let mut written = vec![json];
    if let Some(t) = &out.trajectory {
        let csv = dir.join(format!("{name}.csv"));
        std::fs::write(&csv, trajectory_csv(t)?).map_err(|e| io(&csv, e))?;
        written.push(csv);
    }
    Ok(written)
}
