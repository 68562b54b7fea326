//! Run artifacts: `series.csv`, `report.json` and `plot.gp`.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use ermakov::scenarios::{Bound, ScenarioName, ScenarioRun};

/// Shortest representation that reads back to the same f64: positional for
/// 1e-5 <= |x| < 1e16 (and zero), exponent form otherwise.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if !x.is_finite() {
        if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_csv(path: &Path, run: &ScenarioRun) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(run.columns.iter().map(|c| c.name.as_str()))?;
    let rows = run.columns.first().map_or(0, |c| c.values.len());
    for i in 0..rows {
        w.write_record(run.columns.iter().map(|c| format_float(c.values[i])))?;
    }
    w.flush()
}

#[derive(Serialize)]
struct ConfigEcho {
    scenario: String,
    kappa: i32,
    #[serde(rename = "Q")]
    q: f64,
    h: f64,
    m: f64,
    b: f64,
    lambda: f64,
    n_index: i32,
    t0: f64,
    t1: f64,
    tol: f64,
}

#[derive(Serialize)]
struct ColumnJson<'a> {
    name: &'a str,
    values: &'a [f64],
}

#[derive(Serialize)]
struct DriftJson {
    abs: f64,
    rel: Option<f64>,
}

#[derive(Serialize)]
struct CheckJson<'a> {
    name: &'a str,
    value: Option<f64>,
    bound: String,
    passed: bool,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    scenario: ConfigEcho,
    series: Vec<ColumnJson<'a>>,
    drift: Option<DriftJson>,
    checks: Vec<CheckJson<'a>>,
    passed: bool,
}

pub fn bound_text(b: Bound) -> String {
    b.to_string()
}

pub fn report_json(run: &ScenarioRun) -> serde_json::Result<String> {
    let c = &run.config;
    let report = ReportJson {
        scenario: ConfigEcho {
            scenario: c.name.key().into(),
            kappa: c.kappa,
            q: c.q,
            h: c.h,
            m: c.m,
            b: c.b,
            lambda: c.lambda,
            n_index: c.n_index,
            t0: c.window.0,
            t1: c.window.1,
            tol: c.tol,
        },
        series: run.columns.iter().map(|col| ColumnJson { name: &col.name, values: &col.values }).collect(),
        drift: run.drift.map(|d| DriftJson { abs: d.abs, rel: d.rel }),
        checks: run
            .checks
            .iter()
            .map(|k| CheckJson {
                name: &k.name,
                value: k.value.is_finite().then_some(k.value),
                bound: bound_text(k.bound),
                passed: k.passed,
            })
            .collect(),
        passed: run.passed(),
    };
    serde_json::to_string_pretty(&report)
}

/// A gnuplot script over `series.csv`, one panel per quantity.
pub fn plot_script(run: &ScenarioRun) -> String {
    let col = |name: &str| run.columns.iter().position(|c| c.name == name).map(|i| i + 1);
    let x = &run.columns[0].name;
    let mut s = String::new();
    s.push_str(&format!("# {} : plots over series.csv\n", run.config.name.key()));
    s.push_str("set datafile separator ','\nset key autotitle columnhead\n");
    s.push_str(&format!("set xlabel '{x}'\n"));
    let panels: Vec<(&str, Vec<&str>)> = if run.config.name == ScenarioName::Xyz {
        s.push_str("set logscale x\n");
        vec![
            ("Berry phase", vec!["berry_adiabatic", "berry_exact", "berry_lewis_route"]),
            ("exact - adiabatic", vec!["gap"]),
            ("Hannay angle", vec!["hannay", "hannay_exact"]),
        ]
    } else {
        vec![
            ("invariant", vec!["I"]),
            ("angles", vec!["dtheta_d", "dtheta_g", "dtheta_t"]),
            ("amplitude", vec!["rho", "rho_dot"]),
            ("field", vec!["q"]),
        ]
    };
    for (title, names) in panels {
        let parts: Vec<String> = names
            .iter()
            .filter_map(|n| col(n).map(|i| format!("'series.csv' using 1:{i} with lines title '{n}'")))
            .collect();
        if parts.is_empty() {
            continue;
        }
        s.push_str(&format!("set title '{title}'\nplot {}\n", parts.join(", \\\n     ")));
        s.push_str("pause -1\n");
    }
    s
}

/// Writes all three artifacts into `dir`, creating it if needed.
pub fn write_all(dir: &Path, run: &ScenarioRun) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("series.csv"), run)?;
    let json = report_json(run).map_err(io::Error::other)?;
    fs::write(dir.join("report.json"), json + "\n")?;
    fs::write(dir.join("plot.gp"), plot_script(run))
}
