//! `ermakov`: runs scenario packs and writes reproducible artifacts.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
//! 3 numerical failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Overrides;
use ermakov::scenarios::{self, ScenarioConfig, ScenarioName, ScenarioRun};
use ermakov::Error;

#[derive(Parser)]
#[command(name = "ermakov", version, about = "Ermakov-system scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write series.csv, report.json and plot.gp.
    Run {
        #[command(flatten)]
        params: Params,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario's property checks and print the verdicts.
    Check {
        #[command(flatten)]
        params: Params,
    },
    /// List scenarios, their parameters and defaults.
    List,
}

#[derive(Args, Default)]
struct Params {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<i32>,
    /// Factor-ordering parameter.
    #[arg(long = "Q", allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long = "n-index", allow_negative_numbers = true)]
    n_index: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
}

impl Params {
    fn overrides(&self, out: Option<PathBuf>) -> Result<Overrides, Error> {
        let file = match &self.config {
            Some(p) => Overrides::from_file(p)?,
            None => Overrides::default(),
        };
        let flags = Overrides {
            scenario: self.scenario.as_deref().map(str::parse).transpose()?,
            kappa: self.kappa,
            q: self.q,
            h: self.h,
            m: self.m,
            b: self.b,
            lambda: self.lambda,
            n_index: self.n_index,
            t0: self.t0,
            t1: self.t1,
            tol: self.tol,
            out,
        };
        Ok(file.under(flags))
    }
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            let at = match e {
                Error::Located { .. } => String::new(),
                _ => e.time().map(|t| format!(" at t = {t}")).unwrap_or_default(),
            };
            Failure::Numerical(format!("{e}{at}"))
        }
    }
}

fn execute(config: &ScenarioConfig) -> Result<ScenarioRun, Failure> {
    Ok(scenarios::run(config)?)
}

fn verdict_table(run: &ScenarioRun) -> String {
    let mut s = format!("{:<28} {:>12} {:<16} verdict\n", "check", "value", "bound");
    for c in &run.checks {
        s.push_str(&format!(
            "{:<28} {:>12.4e} {:<16} {}\n",
            c.name,
            c.value,
            output::bound_text(c.bound),
            if c.passed { "PASS" } else { "FAIL" }
        ));
    }
    s
}

fn list_text() -> String {
    let mut s = String::new();
    for name in ScenarioName::ALL {
        let d = ScenarioConfig::defaults(name);
        s.push_str(&format!("{} → {}\n", name.key(), name.figures()));
        s.push_str(&format!("    parameters: {}\n", name.parameters().join(", ")));
        let mut defaults = Vec::new();
        for p in name.parameters() {
            let v = match *p {
                "kappa" => d.kappa.to_string(),
                "Q" => d.q.to_string(),
                "h" => d.h.to_string(),
                "m" => d.m.to_string(),
                "b" => d.b.to_string(),
                "lambda" => d.lambda.to_string(),
                "n-index" => d.n_index.to_string(),
                "t0" => d.window.0.to_string(),
                "t1" => d.window.1.to_string(),
                "tol" => format!("{:e}", d.tol),
                _ => continue,
            };
            defaults.push(format!("{p}={v}"));
        }
        s.push_str(&format!("    defaults: {}\n", defaults.join(" ")));
    }
    s
}

fn main_inner(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::List => {
            print!("{}", list_text());
            Ok(true)
        }
        Command::Check { params } => {
            let config = params.overrides(None)?.resolve()?;
            let run = execute(&config)?;
            print!("{}", verdict_table(&run));
            Ok(run.passed())
        }
        Command::Run { params, out } => {
            let o = params.overrides(out)?;
            let config = o.resolve()?;
            let dir = o.out.clone().unwrap_or_else(|| PathBuf::from("out").join(config.name.key()));
            let run = execute(&config)?;
            output::write_all(&dir, &run)
                .map_err(|e| Failure::Config(format!("invalid `out`: cannot write {}: {e}", dir.display())))?;
            print!("{}", verdict_table(&run));
            println!("wrote {}", dir.display());
            Ok(run.passed())
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_is_sorted_and_names_figures() {
        let text = list_text();
        assert!(text.contains("efrw_q0 → fig 1-4"));
        assert!(text.contains("lewis_n"));
        let heads: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).collect();
        let mut sorted = heads.clone();
        sorted.sort();
        assert_eq!(heads, sorted);
    }
}
