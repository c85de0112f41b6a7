mod args;
mod commands;
mod manifest;

use args::{Cli, Format};
use clap::Parser;
use commands::{CliError, Outcome};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(passed) => ExitCode::from(if passed { 0 } else { 1 }),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun `caloric --help` for usage.");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    let started = manifest::now();
    let outcome = match cli.global.workers {
        None => commands::run(cli)?,
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))?
            .install(|| commands::run(cli))?,
    };
    let stdout = render(&outcome, cli.global.format);
    std::io::stdout()
        .write_all(stdout.as_bytes())
        .map_err(|e| CliError::Failed(e.to_string()))?;
    if let Some(dir) = &cli.global.out_dir {
        let outputs = write_outputs(&outcome, dir)
            .map_err(|e| CliError::Failed(e.to_string()))?
            .into_iter()
            .map(|p| p.strip_prefix(dir).map(Path::to_path_buf).unwrap_or(p))
            .collect();
        manifest::RunManifest::new(&outcome, started, outputs)
            .write(dir)
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    if !outcome.passed {
        eprintln!("{}: one or more checks failed", outcome.command);
    }
    Ok(outcome.passed)
}

fn render(outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&outcome.summary).expect("serializable") + "\n",
        Format::Csv => {
            let mut buf = Vec::new();
            match (&outcome.table, &outcome.scenario) {
                (Some((_, table)), _) => table.write_csv(&mut buf).expect("in-memory write"),
                (None, Some(result)) => {
                    let mut wtr = csv::Writer::from_writer(&mut buf);
                    wtr.write_record(["name", "value", "standard_error"])
                        .expect("in-memory write");
                    for q in &result.quantities {
                        let se = q.standard_error.map(|v| v.to_string()).unwrap_or_default();
                        wtr.write_record([q.name.clone(), q.value.to_string(), se])
                            .expect("in-memory write");
                    }
                    wtr.flush().expect("in-memory write");
                }
                (None, None) => scalar_csv(&outcome.summary, &mut buf),
            }
            String::from_utf8(buf).expect("CSV is UTF-8")
        }
    }
}

/// Top-level numeric and boolean fields as a `name,value` table.
fn scalar_csv(summary: &serde_json::Value, buf: &mut Vec<u8>) {
    let mut wtr = csv::Writer::from_writer(buf);
    wtr.write_record(["name", "value"]).expect("in-memory write");
    if let Some(map) = summary.as_object() {
        for (k, v) in map {
            if v.is_number() || v.is_boolean() {
                wtr.write_record([k.as_str(), &v.to_string()]).expect("in-memory write");
            }
        }
    }
    wtr.flush().expect("in-memory write");
}

fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>, Box<dyn std::error::Error>> {
    if let Some(result) = &outcome.scenario {
        return Ok(result.write_dir(dir)?);
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join("result.json");
    std::fs::write(&path, serde_json::to_string_pretty(&outcome.summary)? + "\n")?;
    written.push(path);
    if let Some((name, table)) = &outcome.table {
        let path = dir.join(format!("{name}.csv"));
        table.write_csv(std::fs::File::create(&path)?)?;
        written.push(path);
    }
    Ok(written)
}
