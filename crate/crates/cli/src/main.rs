mod args;
mod run;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::Cli;

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_BOUND: u8 = 3;

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("ABELINT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("ABELINT_THREADS={v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let doc = json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{doc}");
    ExitCode::from(code)
}

/// Writes next to the target and renames, so readers never see a partial file.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        return fail("input", &msg, EXIT_INPUT);
    }
    let name = cli.command.name();
    let outcome = match run::execute(&cli.command, &cli.common) {
        Ok(o) => o,
        Err(e) if e.is_input_error() => return fail("input", &e.to_string(), EXIT_INPUT),
        Err(e) => return fail("numerical", &e.to_string(), EXIT_NUMERICAL),
    };
    let text = match run::render(name, &outcome, cli.common.format) {
        Ok(t) => t,
        Err(e) => return fail("input", &e.to_string(), EXIT_INPUT),
    };
    match &cli.common.output {
        Some(path) => {
            if let Err(e) = write_atomic(path, &text) {
                return fail("io", &format!("{}: {e}", path.display()), EXIT_INPUT);
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(EXIT_INPUT);
            }
        }
    }
    if outcome.violation {
        let _ = fail("bound", "an asserted bound on the number of zeros is violated", EXIT_BOUND);
        return ExitCode::from(EXIT_BOUND);
    }
    ExitCode::SUCCESS
}
