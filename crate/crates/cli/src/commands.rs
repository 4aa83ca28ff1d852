use std::fmt::Display;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use num_complex::Complex;
use serde::Serialize;
use serde_json::{json, Value};

use selberg_signs::coefficients::parse_spec;
use selberg_signs::dirichlet_poly::{
    build_m, k_range, k_subconvexity_profile, kernel_bound_check, mvt_ratio, perron_window,
    ProfileOptions,
};
use selberg_signs::exponents::ExponentInputs;
use selberg_signs::identities::verify_congruence_suite;
use selberg_signs::statistics::{
    count_sign_changes, kappa_empirical, short_interval_lower_bound, sign_change_windows,
    theorem_consistency, window_sums, Verdict, WindowMode,
};
use selberg_signs::{sieve, Error, ExponentReport, LFunctionSpec, Table};

use crate::report::{canonical_json, emit, envelope};
use crate::{Command, Format, Output, Source, Verify};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn io(context: impl Display, err: impl Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{context}: {err}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(err) => Self::io("i/o", err),
            other => Self::usage(other),
        }
    }
}

type Outcome = Result<u8, Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Sieve { source, x, out } => run_sieve(&source, x, &out),
        Command::Signs {
            source,
            x,
            positions,
            out,
        } => run_signs(&source, x, positions, &out),
        Command::Window {
            source,
            x,
            h,
            m,
            sweep,
            out,
        } => run_window(&source, x, h, m, sweep, &out),
        Command::Exponents {
            theta,
            kappa,
            epsilon,
            degree,
            out,
        } => run_exponents(theta, kappa, epsilon, degree, &out),
        Command::Moment {
            source,
            m,
            t,
            step,
            out,
        } => run_moment(&source, m, t, step, &out),
        Command::Profile {
            source,
            x,
            m,
            t,
            theta,
            step,
            out,
        } => run_profile(&source, x, m, t, theta, step, &out),
        Command::Perron {
            source,
            x,
            h,
            m,
            t_cut,
            step,
            out,
        } => run_perron(&source, x, h, m, t_cut, step, &out),
        Command::Verify { what } => match what {
            Verify::Identities {
                source,
                dmax,
                s,
                trunc,
                out,
            } => run_identities(&source, dmax, s, trunc, &out),
            Verify::Kernel { u, out } => run_kernel(u, &out),
        },
        Command::TheoremCheck {
            source,
            x,
            h,
            m,
            theta,
            kappa,
            epsilon,
            out,
        } => run_theorem_check(&source, x, h, m, theta, kappa, epsilon, &out),
    }
}

fn load_spec(path: &Path) -> Result<LFunctionSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("reading {}", path.display()), e))?;
    Ok(parse_spec(&text)?)
}

/// Number of leading coefficients compared against a fresh sieve before a cache is trusted.
const CACHE_PROBE: u64 = 256;

fn load_table(source: &Source, upto: u64) -> Result<(LFunctionSpec, Table), Failure> {
    let spec = load_spec(&source.spec)?;
    let Some(cache) = &source.cache else {
        return Ok((spec.clone(), sieve(&spec, upto)?));
    };
    if cache.exists() {
        let file = File::open(cache)
            .map_err(|e| Failure::io(format!("opening {}", cache.display()), e))?;
        match Table::read_binary(spec.name(), BufReader::new(file)) {
            Ok(table) if table.x_max() >= upto => {
                let probe: Table = sieve(&spec, CACHE_PROBE.min(table.x_max()))?;
                if table.as_slice()[..probe.as_slice().len()] == *probe.as_slice() {
                    return Ok((spec, table));
                }
            }
            Ok(_) | Err(Error::Format(_)) => {}
            Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::UnexpectedEof => {}
            Err(e) => return Err(e.into()),
        }
    }
    let table: Table = sieve(&spec, upto)?;
    let mut bytes = Vec::new();
    table.write_binary(&mut bytes)?;
    write_bytes(cache, &bytes)?;
    Ok((spec, table))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let context = || format!("writing {}", path.display());
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::io(context(), e))?;
    tmp.write_all(bytes)
        .map_err(|e| Failure::io(context(), e))?;
    tmp.persist(path)
        .map_err(|e| Failure::io(context(), e.error))?;
    Ok(())
}

fn finish(out: &Output, contents: &str) -> Result<(), Failure> {
    emit(out.output.as_deref(), contents).map_err(|e| match &out.output {
        Some(p) => Failure::io(format!("writing {}", p.display()), e),
        None => Failure::io("writing stdout", e),
    })
}

fn emit_json<S: Serialize>(command: &str, body: &S, out: &Output) -> Result<(), Failure> {
    let value = envelope(command, body).map_err(Failure::usage)?;
    finish(out, &canonical_json(&value))
}

/// Emits `body` as JSON, or as CSV built from `rows` under `header`.
fn emit_report<S: Serialize>(
    command: &str,
    body: &S,
    header: &[&str],
    rows: impl FnOnce() -> Vec<Vec<String>>,
    out: &Output,
) -> Result<(), Failure> {
    match out.format {
        Format::Json => emit_json(command, body, out),
        Format::Csv => finish(out, &csv(header, rows())),
    }
}

fn csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Flattens a report into sorted `key,value` rows with dotted keys.
fn key_value_rows<S: Serialize>(body: &S) -> Vec<Vec<String>> {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
        match v {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                for k in keys {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, &map[k], rows);
                }
            }
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), item, rows);
                }
            }
            Value::String(s) => rows.push(vec![prefix.to_string(), s.clone()]),
            Value::Null => rows.push(vec![prefix.to_string(), String::new()]),
            other => rows.push(vec![prefix.to_string(), other.to_string()]),
        }
    }
    let mut rows = Vec::new();
    if let Ok(v) = serde_json::to_value(body) {
        walk("", &v, &mut rows);
    }
    rows
}

fn require_window(x: u64, h: u64, m: u64) -> Result<(), Failure> {
    if h == 0 || h >= x {
        return Err(Failure::usage(format!(
            "need 1 <= H < X, got H = {h}, X = {x}"
        )));
    }
    if m == 0 || m >= x {
        return Err(Failure::usage(format!(
            "need 1 <= M < X, got M = {m}, X = {x}"
        )));
    }
    Ok(())
}

fn run_sieve(source: &Source, x: u64, out: &Output) -> Outcome {
    if x == 0 {
        return Err(Failure::usage("need X >= 1"));
    }
    let (spec, table) = load_table(source, x)?;
    let values = &table.as_slice()[..x as usize];
    match out.format {
        Format::Csv => {
            let mut buf = Vec::new();
            let head: Table = Table::from_values(spec.name(), values.to_vec())?;
            head.write_csv(BufWriter::new(&mut buf))?;
            finish(out, &String::from_utf8_lossy(&buf))?;
        }
        Format::Json => {
            let body = json!({
                "spec": spec.name(),
                "x": x,
                "values": values,
                "diagnostics": table.diagnostics(),
            });
            emit_json("sieve", &body, out)?;
        }
    }
    Ok(EXIT_OK)
}

fn run_signs(source: &Source, x: u64, positions: bool, out: &Output) -> Outcome {
    if x == 0 {
        return Err(Failure::usage("need X >= 1"));
    }
    let (spec, table) = load_table(source, x)?;
    let summary = count_sign_changes(&table, x, positions)?;
    let body = json!({ "spec": spec.name(), "summary": summary });
    if positions && out.format == Format::Csv {
        let rows = summary
            .change_positions
            .iter()
            .flatten()
            .map(|(a, b)| vec![a.to_string(), b.to_string()])
            .collect();
        finish(out, &csv(&["m", "next_m"], rows))?;
    } else {
        emit_report(
            "signs",
            &body,
            &["key", "value"],
            || key_value_rows(&body),
            out,
        )?;
    }
    Ok(EXIT_OK)
}

const WINDOW_HEADER: [&str; 7] = ["x", "H", "M", "S1", "S2", "detected", "pairs"];

fn run_window(source: &Source, x: u64, h: u64, m: u64, sweep: bool, out: &Output) -> Outcome {
    require_window(x, h, m)?;
    let upto = if sweep { 2 * x + h } else { x + h };
    let (spec, table) = load_table(source, upto)?;
    let row = |r: &selberg_signs::Window| {
        vec![
            r.x.to_string(),
            r.h.to_string(),
            r.m.to_string(),
            r.s1.to_string(),
            r.s2.to_string(),
            r.detected.to_string(),
            r.pairs.to_string(),
        ]
    };
    if sweep {
        let s = sign_change_windows(&table, x, h, m, WindowMode::Disjoint)?;
        let body = json!({ "spec": spec.name(), "sweep": s });
        emit_report(
            "window",
            &body,
            &WINDOW_HEADER,
            || s.reports.iter().map(row).collect(),
            out,
        )?;
    } else {
        let r = window_sums(&table, x, h, m)?;
        let body = json!({ "spec": spec.name(), "window": r });
        emit_report("window", &body, &WINDOW_HEADER, || vec![row(&r)], out)?;
    }
    Ok(EXIT_OK)
}

fn run_exponents(
    theta: Option<f64>,
    kappa: f64,
    epsilon: f64,
    degree: Option<u32>,
    out: &Output,
) -> Outcome {
    let inputs = match (theta, degree) {
        (Some(theta), d) => {
            let mut inputs = ExponentInputs::new(theta, kappa, epsilon)?;
            inputs.degree = d;
            inputs
        }
        (None, Some(d)) => ExponentInputs::from_degree(d, kappa, epsilon)?,
        (None, None) => return Err(Failure::usage("exponents needs --theta or --degree")),
    };
    let report: ExponentReport<f64> = ExponentReport::compute(inputs)?;
    emit_report(
        "exponents",
        &report,
        &["key", "value"],
        || key_value_rows(&report),
        out,
    )?;
    Ok(EXIT_OK)
}

fn run_moment(source: &Source, m: u64, t: f64, step: Option<f64>, out: &Output) -> Outcome {
    if m == 0 {
        return Err(Failure::usage("need M >= 1"));
    }
    let (spec, table) = load_table(source, 2 * m)?;
    let block = build_m(&table, m)?;
    let r = mvt_ratio(&block, t, step)?;
    let body = json!({ "spec": spec.name(), "M": m, "report": r });
    emit_report(
        "moment",
        &body,
        &["key", "value"],
        || key_value_rows(&body),
        out,
    )?;
    Ok(EXIT_OK)
}

fn run_profile(
    source: &Source,
    x: u64,
    m: u64,
    t: f64,
    theta: Option<f64>,
    step: Option<f64>,
    out: &Output,
) -> Outcome {
    let (_, k_hi) = k_range(x, m)?;
    let (spec, table) = load_table(source, k_hi)?;
    let theta = theta.unwrap_or(spec.theta());
    let options = ProfileOptions {
        step,
        keep_samples: out.format == Format::Csv,
        ..ProfileOptions::default()
    };
    let r = k_subconvexity_profile(&table, x, m, t, theta, &options)?;
    let body = json!({ "spec": spec.name(), "profile": r });
    emit_report(
        "profile",
        &body,
        &["t", "abs_K"],
        || {
            r.samples
                .iter()
                .flatten()
                .map(|(t, v)| vec![t.to_string(), v.to_string()])
                .collect()
        },
        out,
    )?;
    Ok(EXIT_OK)
}

fn run_perron(
    source: &Source,
    x: u64,
    h: u64,
    m: u64,
    t_cut: f64,
    step: Option<f64>,
    out: &Output,
) -> Outcome {
    require_window(x, h, m)?;
    let (_, k_hi) = k_range(x, m)?;
    let (spec, table) = load_table(source, (2 * m * k_hi).max(x + h))?;
    let r = perron_window(&table, x, h, m, t_cut, step)?;
    let body = json!({ "spec": spec.name(), "perron": r });
    emit_report(
        "perron",
        &body,
        &["key", "value"],
        || key_value_rows(&body),
        out,
    )?;
    Ok(EXIT_OK)
}

fn run_identities(source: &Source, dmax: u64, s: f64, trunc: u64, out: &Output) -> Outcome {
    if dmax == 0 || trunc == 0 {
        return Err(Failure::usage("need --dmax >= 1 and --trunc >= 1"));
    }
    let (spec, table) = load_table(source, trunc)?;
    let checks = verify_congruence_suite(&table, &spec, dmax, Complex::new(s, 0.0), trunc)?;
    let passed = checks.iter().filter(|c| c.pass).count();
    let body = json!({
        "spec": spec.name(),
        "s": s,
        "n_trunc": trunc,
        "d_max": dmax,
        "passed": passed,
        "total": checks.len(),
        "checks": checks,
    });
    emit_report(
        "verify-identities",
        &body,
        &[
            "d", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_diff", "budget", "pass",
        ],
        || {
            checks
                .iter()
                .map(|c| {
                    vec![
                        c.d.to_string(),
                        c.lhs_re.to_string(),
                        c.lhs_im.to_string(),
                        c.rhs_re.to_string(),
                        c.rhs_im.to_string(),
                        c.abs_diff.to_string(),
                        c.budget.to_string(),
                        c.pass.to_string(),
                    ]
                })
                .collect()
        },
        out,
    )?;
    Ok(if passed == checks.len() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

fn run_kernel(u: f64, out: &Output) -> Outcome {
    let mut samples = Vec::new();
    for i in 0..=30 {
        for j in -400..=400 {
            samples.push(Complex::new(0.5 + 0.05 * f64::from(i), 0.25 * f64::from(j)));
        }
    }
    let r = kernel_bound_check(u, &samples)?;
    let body = json!({ "samples": samples.len(), "check": r });
    emit_report(
        "verify-kernel",
        &body,
        &["key", "value"],
        || key_value_rows(&body),
        out,
    )?;
    Ok(if r.pass { EXIT_OK } else { EXIT_VERIFY })
}

#[allow(clippy::too_many_arguments)]
fn run_theorem_check(
    source: &Source,
    x: u64,
    h: Option<u64>,
    m: u64,
    theta: Option<f64>,
    kappa: Option<f64>,
    epsilon: f64,
    out: &Output,
) -> Outcome {
    let h = h.unwrap_or_else(|| (x as f64).sqrt().ceil() as u64);
    require_window(x, h, m)?;
    let (spec, table) = load_table(source, 2 * x + h)?;
    let theta = theta.unwrap_or(spec.theta());
    let (kappa, kappa_source) = match kappa {
        Some(k) => (k, "given"),
        None => (kappa_empirical(&table, x)?.min(1.0), "empirical"),
    };
    let inputs = ExponentInputs::new(theta, kappa, epsilon)?;
    let consistency = theorem_consistency(&table, inputs, x, h, m)?;
    let short = short_interval_lower_bound(&table, x, h, m, kappa, epsilon)?;
    let body = json!({
        "spec": spec.name(),
        "kappa_source": kappa_source,
        "consistency": consistency,
        "short_interval": short,
    });
    emit_report(
        "theorem-check",
        &body,
        &["key", "value"],
        || key_value_rows(&body),
        out,
    )?;
    Ok(if consistency.verdict == Verdict::Fail {
        EXIT_VERIFY
    } else {
        EXIT_OK
    })
}
