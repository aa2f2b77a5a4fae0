//! `adshiggs`: certify the algebraic identities and run the numerical
//! pipeline from a JSON config.
//!
//! Exit codes: 0 ok, 1 I/O or internal failure, 2 certification failure,
//! 3 solver non-convergence, 4 config or usage error.

mod config;
mod pipeline;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use adshiggs::symbolic::certify::{certify_all, Certificate, Identity, OrderingDictionary};
use adshiggs::symbolic::ordering_dictionary;
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Debug)]
pub enum Failure {
    Runtime(String),
    Certification(String),
    NonConvergence(String),
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Certification(_) => 2,
            Failure::NonConvergence(_) => 3,
            Failure::Config(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Runtime(m) => format!("error: {m}"),
            Failure::Certification(m) => format!("certification failed: {m}"),
            Failure::NonConvergence(m) => format!("solver failed: {m}"),
            Failure::Config(m) => format!("config error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "adshiggs", version, about = "Higgs bundles and anti-de Sitter 3-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify every algebraic identity exactly and print the certificates.
    Identities {
        /// Plant a deliberate fault in the named identity.
        #[arg(long, value_name = "NAME")]
        inject_fault: Option<String>,
        /// Also write the certificates to this file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline and print a JSON report.
    Report {
        /// Config file, or the name of a bundled config.
        config: String,
        /// Directory for report.json and the CSV field dumps.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Dump per-node fields as CSV.
    Fields {
        config: String,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Solve for the harmonic metric on a torus chart.
    Solve {
        config: String,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct IdentitiesOutput {
    schema: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    injected_fault: Option<&'static str>,
    all_certified: bool,
    ordering: OrderingDictionary,
    certificates: Vec<Certificate>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| Failure::Runtime(format!("stdout: {e}")))
}

fn identities(inject_fault: Option<String>, out: Option<PathBuf>) -> Result<(), Failure> {
    let fault = match inject_fault.as_deref() {
        None => None,
        Some(name) => Some(Identity::from_name(name).ok_or_else(|| {
            let names: Vec<&str> = Identity::ALL.iter().map(|i| i.name()).collect();
            Failure::Config(format!("--inject-fault: unknown identity \"{name}\" (known: {})", names.join(", ")))
        })?),
    };
    let certificates = certify_all(fault).map_err(|e| Failure::Runtime(e.to_string()))?;
    let failed: Vec<&'static str> = certificates
        .iter()
        .filter(|c| !c.certified)
        .map(|c| c.identity.name())
        .collect();
    let output = IdentitiesOutput {
        schema: config::SCHEMA,
        injected_fault: fault.map(Identity::name),
        all_certified: failed.is_empty(),
        ordering: ordering_dictionary(),
        certificates,
    };
    let text = to_json(&output)?;
    if let Some(path) = out {
        std::fs::write(&path, format!("{text}\n")).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    }
    emit(&text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Certification(failed.join(", ")))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Identities { inject_fault, out } => identities(inject_fault, out),
        Command::Report { config, out } => {
            let loaded = config::load(&config)?;
            let out = out.or_else(|| loaded.config.params.output.as_ref().map(PathBuf::from));
            let report = pipeline::report(&loaded, out.as_deref())?;
            let text = to_json(&report)?;
            if let Some(dir) = &out {
                let path = dir.join("report.json");
                std::fs::write(&path, format!("{text}\n"))
                    .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            }
            emit(&text)
        }
        Command::Fields { config, out } => {
            let loaded = config::load(&config)?;
            emit(&to_json(&pipeline::fields(&loaded, &out)?)?)
        }
        Command::Solve { config, out } => {
            let loaded = config::load(&config)?;
            emit(&to_json(&pipeline::solve(&loaded, out.as_deref())?)?)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("ADSHIGGS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(format!("ADSHIGGS_THREADS: expected a positive integer, got \"{value}\"")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            // usage errors share the config-error code; 2 is reserved
            return ExitCode::from(if usage { 4 } else { 0 });
        }
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("adshiggs: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
