//! Command-line driver: parse a system specification, run the minimal
//! control time pipeline, report in text and JSON, optionally bracket the
//! controllability transition numerically.
//!
//! Exit codes: 0 exact value, 1 bounds only, 2 invalid specification,
//! 3 internal or I/O error.

mod report;
mod specfile;

use std::fs;
use std::process::ExitCode;

use mintime_core::canonical::analyze;
use mintime_core::model::{Scalar, SystemSpec, Validated};
use mintime_core::oracle::{bracket_transition, residual_scan, sample_initial_data};
use mintime_core::transport::transport_times;

use report::ReportDoc;
use specfile::{Mode, Options, SpecFile};

struct Args {
    file: String,
    json_path: Option<String>,
    oracle: bool,
    trace: bool,
    max_order: Option<usize>,
}

const USAGE: &str =
    "usage: mintime [compute] <spec.json> [--json <path>] [--oracle] [--trace] [--max-order <K>]";

fn parse_args() -> Result<Args, String> {
    let mut args = std::env::args().skip(1);
    let mut file = None;
    let mut json_path = None;
    let mut oracle = false;
    let mut trace = false;
    let mut max_order = None;
    let mut saw_compute = false;
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "compute" if !saw_compute && file.is_none() => saw_compute = true,
            "--json" => {
                json_path = Some(args.next().ok_or("--json needs a path")?);
            }
            "--oracle" => oracle = true,
            "--trace" => trace = true,
            "--max-order" => {
                let v = args.next().ok_or("--max-order needs a value")?;
                max_order = Some(
                    v.parse::<usize>()
                        .map_err(|_| "--max-order needs an integer")?,
                );
            }
            "--help" | "-h" => {
                return Err(USAGE.to_string());
            }
            other if other.starts_with('-') => {
                return Err(format!("unknown flag {other}\n{USAGE}"));
            }
            other => {
                if file.is_some() {
                    return Err(format!("unexpected argument {other}\n{USAGE}"));
                }
                file = Some(other.to_string());
            }
        }
    }
    Ok(Args {
        file: file.ok_or_else(|| format!("missing input file\n{USAGE}"))?,
        json_path,
        oracle,
        trace,
        max_order,
    })
}

fn run_oracle(vs: &Validated<f64>, options: &Options, doc: &mut ReportDoc) -> Result<(), String> {
    let (nt, nx) = options.oracle_grid;
    let y0 = sample_initial_data(vs, nx, options.seed);
    let times = transport_times(vs).map_err(|e| e.to_string())?;
    let russell = times.time(vs.m) + times.time(vs.m - 1);
    let range = options.scan_range.unwrap_or((0.3 * russell, 1.05 * russell));
    if let Some(path) = &options.scan_csv {
        let count = 9;
        let ladder: Vec<f64> = (0..count)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / (count - 1) as f64)
            .collect();
        let scan = residual_scan(vs, &ladder, nt, nx, &y0).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        scan.write_csv(&mut buf).map_err(|e| e.to_string())?;
        fs::write(path, buf).map_err(|e| format!("writing {path}: {e}"))?;
    }
    match bracket_transition(vs, range, nt, nx, options.bracket_delta, &y0) {
        Ok(bracket) => {
            doc.oracle_bracket = Some(bracket);
            Ok(())
        }
        Err(mintime_core::Error::NoTransition) => {
            doc.diagnostics
                .push("oracle: no controllability transition found in the scan range".into());
            Ok(())
        }
        Err(e) => Err(e.to_string()),
    }
}

fn pipeline<T: Scalar>(
    spec: SystemSpec<T>,
    tol: T,
    mode_name: &str,
) -> Result<(ReportDoc, Validated<f64>), (u8, String)> {
    let m = spec.m;
    let p = spec.p;
    let regularity = spec.regularity;
    let vs = spec
        .validate_with_tol(tol)
        .map_err(|e| (2u8, e.to_string()))?;
    let report = analyze(&vs).map_err(|e| (3u8, e.to_string()))?;
    let doc = ReportDoc::from_report(&report, mode_name, m, p, regularity);
    Ok((doc, vs.to_f64()))
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    let text = match fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.file);
            return ExitCode::from(3);
        }
    };
    let parsed: SpecFile = match specfile::parse_spec_file(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("invalid specification: {e}");
            return ExitCode::from(2);
        }
    };
    let mut spec = parsed.exact;
    if let Some(cap) = args.max_order {
        spec.regularity = spec.regularity.min(cap);
    }
    let options = parsed.options;

    let outcome = match parsed.mode {
        Mode::Exact => pipeline(spec, mintime_core::Rational::zero(), "exact"),
        Mode::Float => pipeline(spec.to_f64(), options.tolerance, "float"),
    };
    let (mut doc, vs_f64) = match outcome {
        Ok(v) => v,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(code);
        }
    };

    if args.oracle {
        if let Err(msg) = run_oracle(&vs_f64, &options, &mut doc) {
            eprintln!("oracle error: {msg}");
            return ExitCode::from(3);
        }
    }

    print!("{}", doc.render_text(args.trace));
    if let Some(path) = &args.json_path {
        let json = doc.to_json();
        // the machine-readable output must round-trip byte-identically
        match ReportDoc::from_json(&json) {
            Ok(parsed) if parsed.to_json() == json => {}
            _ => {
                eprintln!("internal error: report JSON does not round-trip");
                return ExitCode::from(3);
            }
        }
        if let Err(e) = fs::write(path, json) {
            eprintln!("cannot write {path}: {e}");
            return ExitCode::from(3);
        }
    }
    if doc.status == "exact" {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
