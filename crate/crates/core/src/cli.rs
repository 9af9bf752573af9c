//! The `pi-remainder` command line.
//!
//! Every subcommand prints an envelope `{command, params, result, warnings}`
//! in JSON mode, or a plain listing in text mode. Exit codes: 0 success,
//! 1 verification failure, 2 usage error, 3 computational error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analysis::{
    accelerate, conjectural_warning, envelope_check_series, is_minus_minus_plus_plus, order_sweep, sign_pattern,
    AccelerationReport, EnvelopeSweep, TruncationMode, ENVELOPE_SERIES,
};
use crate::catalog::{export_json, get_series, load_catalog, SeriesParams};
use crate::error::Error;
use crate::expansion::{alpha_series, c_table};
use crate::hp::{alpha_direct, remainder_report, HpReal, RemainderReport};
use crate::rational::{parse_rational, to_fraction_string};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "pi-remainder", version, about = "Remainder expansions of hypergeometric series for 1/pi")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 256)]
    prec: u32,

    /// Worker threads for grid sweeps (default: available processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect the series table.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Exact expansion coefficients c_0..c_{J-1}.
    Coeffs {
        #[arg(long)]
        series: i64,
        #[arg(long = "J")]
        j: usize,
    },
    /// Exact coefficients f_1..f_{J-1} of the log-prefactor expansion.
    AlphaCoeffs {
        #[arg(long)]
        q: String,
        #[arg(long = "J")]
        j: usize,
    },
    /// R_n, F_n and the expansion error at one n.
    Remainder {
        #[arg(long)]
        series: i64,
        #[arg(long)]
        n: u64,
        #[arg(long = "J", default_value_t = 4)]
        j: usize,
    },
    /// The log-prefactor alpha_n evaluated directly.
    Alpha {
        #[arg(long)]
        q: String,
        #[arg(long)]
        n: u64,
    },
    /// Check the enveloping inequalities over an (L, n) grid.
    Envelope {
        #[arg(long = "L-max")]
        l_max: usize,
        #[arg(long = "n-max")]
        n_max: u64,
        /// Run on another row; such output makes no claim.
        #[arg(long)]
        series: Option<i64>,
    },
    /// Tail-corrected estimate of p/pi after n + 1 terms.
    Accelerate {
        #[arg(long)]
        series: i64,
        #[arg(long)]
        n: u64,
        /// Number of coefficients, or `auto` for the smallest-term rule.
        #[arg(long = "J", default_value = "auto")]
        j: String,
    },
    /// Scaled expansion errors over a list of n.
    OrderSweep {
        #[arg(long)]
        series: i64,
        /// Comma-separated, strictly ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long = "J")]
        j: usize,
    },
    /// Signs of the nonzero coefficients.
    Signs {
        #[arg(long)]
        series: i64,
        #[arg(long = "J")]
        j: usize,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    List,
    /// Emit the table as a JSON array.
    Export,
}

/// Parses `argv` (including the program name), runs the command and writes
/// to the given streams. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        pool = pool.num_threads(jobs.max(1));
    }
    let outcome = match pool.build() {
        Ok(pool) => pool.install(|| dispatch(&cli)),
        Err(e) => Err(Error::Resource(e.to_string())),
    };

    match outcome {
        Ok(output) => {
            if cli.format == Format::Text {
                for w in &output.warnings {
                    let _ = writeln!(err, "warning: {w}");
                }
            }
            let _ = out.write_all(output.render(cli.format).as_bytes());
            if output.verified {
                EXIT_OK
            } else {
                EXIT_VERIFICATION_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_COMPUTATION
            }
        }
    }
}

struct Output {
    command: &'static str,
    params: BTreeMap<String, String>,
    result: Value,
    warnings: Vec<String>,
    text: String,
    /// Raw JSON that replaces the envelope (catalog export).
    bare_json: Option<String>,
    verified: bool,
}

impl Output {
    fn new(command: &'static str, params: &[(&str, String)]) -> Self {
        Output {
            command,
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            result: Value::Null,
            warnings: vec![],
            text: String::new(),
            bare_json: None,
            verified: true,
        }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => match &self.bare_json {
                Some(raw) => format!("{raw}\n"),
                None => {
                    let envelope = json!({
                        "command": self.command,
                        "params": self.params,
                        "result": self.result,
                        "warnings": self.warnings,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&envelope).expect("json values serialize"))
                }
            },
        }
    }
}

fn hp_json(x: &HpReal) -> Value {
    json!({ "value": x.to_decimal_string(), "bits": x.precision_bits() })
}

fn frac(x: &rug::Rational) -> String {
    to_fraction_string(x)
}

fn dispatch(cli: &Cli) -> crate::Result<Output> {
    let prec = cli.prec;
    match &cli.command {
        Command::Catalog { action: CatalogAction::List } => {
            let mut o = Output::new("catalog list", &[]);
            o.result = Value::Array(
                load_catalog()
                    .iter()
                    .map(|s| serde_json::to_value(crate::catalog::SeriesRecord::from(s)).expect("record serializes"))
                    .collect(),
            );
            for s in load_catalog() {
                o.text += &format!(
                    "{:>2}  q={}  r={}  s={}  t={}  p={}\n",
                    s.id,
                    frac(&s.q),
                    s.r,
                    s.s,
                    frac(&s.t),
                    s.p
                );
            }
            Ok(o)
        }
        Command::Catalog { action: CatalogAction::Export } => {
            let mut o = Output::new("catalog export", &[]);
            let raw = export_json();
            o.text = format!("{raw}\n");
            o.bare_json = Some(raw);
            Ok(o)
        }
        Command::Coeffs { series, j } => {
            let params = get_series(*series)?;
            let table = c_table(params, *j)?;
            let c: Vec<String> = table.coeffs.iter().map(frac).collect();
            let mut o = Output::new("coeffs", &[("series", series.to_string()), ("J", j.to_string())]);
            o.result = json!({ "series": params.id, "J": j, "c": c });
            o.text = c.iter().map(|s| format!("{s}\n")).collect();
            o.warnings.extend(conjectural_warning(params));
            Ok(o)
        }
        Command::AlphaCoeffs { q, j } => {
            let qv = parse_rational(q)?;
            let f = alpha_series(&qv, *j)?;
            let coeffs: Vec<String> = f.coeffs().iter().skip(1).map(frac).collect();
            let mut o = Output::new("alpha-coeffs", &[("q", frac(&qv)), ("J", j.to_string())]);
            o.result = json!({ "q": frac(&qv), "J": j, "f": coeffs });
            o.text = coeffs.iter().enumerate().map(|(i, s)| format!("f_{} = {s}\n", i + 1)).collect();
            Ok(o)
        }
        Command::Remainder { series, n, j } => {
            let params = get_series(*series)?;
            let rep = remainder_report(params, *n, *j, prec)?;
            let mut o = Output::new(
                "remainder",
                &[("series", series.to_string()), ("n", n.to_string()), ("J", j.to_string()), ("prec", prec.to_string())],
            );
            o.result = report_json(&rep);
            o.text = report_text(&rep);
            o.warnings.extend(conjectural_warning(params));
            Ok(o)
        }
        Command::Alpha { q, n } => {
            let qv = parse_rational(q)?;
            let a = alpha_direct(&qv, *n, prec)?;
            let mut o = Output::new("alpha", &[("q", frac(&qv)), ("n", n.to_string()), ("prec", prec.to_string())]);
            o.result = json!({ "alpha": hp_json(&a) });
            o.text = format!("{a}\n");
            Ok(o)
        }
        Command::Envelope { l_max, n_max, series } => {
            let params = get_series(series.unwrap_or(ENVELOPE_SERIES as i64))?;
            let sweep = envelope_check_series(params, *n_max, *l_max, prec)?;
            let mut o = Output::new(
                "envelope",
                &[
                    ("L_max", l_max.to_string()),
                    ("n_max", n_max.to_string()),
                    ("series", params.id.to_string()),
                    ("prec", prec.to_string()),
                ],
            );
            if sweep.exploratory {
                o.warnings.push(format!("series {}: exploratory, nothing is conjectured for this row", params.id));
            }
            o.result = envelope_json(&sweep);
            o.text = envelope_text(&sweep);
            o.verified = sweep.all_hold();
            Ok(o)
        }
        Command::Accelerate { series, n, j } => {
            let params = get_series(*series)?;
            let mode = match j.as_str() {
                "auto" => TruncationMode::Auto,
                other => TruncationMode::Explicit(
                    other.parse().map_err(|_| Error::Parse(format!("--J expects an integer or auto, got {other:?}")))?,
                ),
            };
            let rep = accelerate(params, *n, mode, prec)?;
            let mut o = Output::new(
                "accelerate",
                &[("series", series.to_string()), ("n", n.to_string()), ("J", j.clone()), ("prec", prec.to_string())],
            );
            o.result = acceleration_json(&rep);
            o.text = acceleration_text(&rep);
            o.warnings.extend(rep.warnings.iter().cloned());
            Ok(o)
        }
        Command::OrderSweep { series, n, j } => {
            let params = get_series(*series)?;
            let reports = order_sweep(params, n, *j, prec)?;
            let n_list: Vec<String> = n.iter().map(u64::to_string).collect();
            let mut o = Output::new(
                "order-sweep",
                &[("series", series.to_string()), ("n", n_list.join(",")), ("J", j.to_string()), ("prec", prec.to_string())],
            );
            o.result = json!({
                "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
                "scaled_error_spread": crate::analysis::scaled_error_spread(&reports),
            });
            o.text = "n\tratio\tabs_error\tscaled_error\n".to_string();
            for r in &reports {
                o.text += &format!(
                    "{}\t{}\t{}\t{}\n",
                    r.n,
                    short(&r.ratio),
                    short(&r.abs_error),
                    short(&r.scaled_error)
                );
            }
            o.warnings.extend(conjectural_warning(params));
            Ok(o)
        }
        Command::Signs { series, j } => {
            let params = get_series(*series)?;
            let signs = sign_pattern(&c_table(params, *j)?);
            let s: Vec<String> = signs.iter().map(|x| x.to_string()).collect();
            let mut o = Output::new("signs", &[("series", series.to_string()), ("J", j.to_string())]);
            o.result = json!({ "signs": s, "minus_minus_plus_plus": is_minus_minus_plus_plus(&signs) });
            o.text = format!("{}\n", s.join(" "));
            o.warnings.extend(conjectural_warning(params));
            Ok(o)
        }
    }
}

/// Leading digits only, for tables.
fn short(x: &HpReal) -> String {
    x.as_float().to_string_radix(10, Some(12))
}

fn report_json(r: &RemainderReport) -> Value {
    json!({
        "series": r.series_id,
        "n": r.n,
        "J": r.big_j,
        "R_n": hp_json(&r.remainder),
        "F_n": frac(&r.f_n_exact),
        "ratio": hp_json(&r.ratio),
        "expansion_value": hp_json(&r.expansion_value),
        "abs_error": hp_json(&r.abs_error),
        "scaled_error": hp_json(&r.scaled_error),
    })
}

fn report_text(r: &RemainderReport) -> String {
    format!(
        "series        {}\nn             {}\nJ             {}\nR_n           {}\nF_n           {}\nratio         {}\nexpansion     {}\nabs_error     {}\nscaled_error  {}\n",
        r.series_id,
        r.n,
        r.big_j,
        r.remainder,
        r.f_n,
        r.ratio,
        r.expansion_value,
        short(&r.abs_error),
        short(&r.scaled_error)
    )
}

fn acceleration_json(r: &AccelerationReport) -> Value {
    json!({
        "series": r.series_id,
        "n": r.n,
        "J_used": r.j_used,
        "raw_estimate": hp_json(&r.raw_estimate),
        "corrected_estimate": hp_json(&r.corrected_estimate),
        "reference": hp_json(&r.reference),
        "raw_error": hp_json(&r.raw_error),
        "corrected_error": hp_json(&r.corrected_error),
        "digits_gained": format!("{:.3}", r.digits_gained),
        "measured_bits": r.measured_bits,
    })
}

fn acceleration_text(r: &AccelerationReport) -> String {
    format!(
        "series           {}\nn                {}\nJ used           {}\nraw error        {}\ncorrected error  {}\ndigits gained    {:.3}\nmeasured at      {} bits\n",
        r.series_id,
        r.n,
        r.j_used,
        short(&r.raw_error),
        short(&r.corrected_error),
        r.digits_gained,
        r.measured_bits
    )
}

fn envelope_json(s: &EnvelopeSweep) -> Value {
    use crate::analysis::CellStatus;
    json!({
        "series": s.series_id,
        "exploratory": s.exploratory,
        "all_hold": s.all_hold(),
        "holds": s.count(CellStatus::Holds),
        "violated": s.count(CellStatus::Violated),
        "indeterminate": s.count(CellStatus::Indeterminate),
        "cells": s.cells.iter().map(|c| json!({
            "L": c.big_l,
            "n": c.n,
            "lower": hp_json(&c.lower),
            "ratio": hp_json(&c.ratio),
            "upper": hp_json(&c.upper),
            "margin": hp_json(&c.margin),
            "threshold": hp_json(&c.threshold),
            "status": c.status.to_string(),
            "holds": c.holds,
        })).collect::<Vec<_>>(),
    })
}

fn envelope_text(s: &EnvelopeSweep) -> String {
    use crate::analysis::CellStatus;
    let mut text = String::from("L\tn\tstatus\tmargin\n");
    for c in &s.cells {
        text += &format!("{}\t{}\t{}\t{}\n", c.big_l, c.n, c.status, short(&c.margin));
    }
    text += &format!(
        "cells: {}  holds: {}  violated: {}  indeterminate: {}\nverdict: {}\n",
        s.cells.len(),
        s.count(CellStatus::Holds),
        s.count(CellStatus::Violated),
        s.count(CellStatus::Indeterminate),
        if s.all_hold() { "all hold" } else { "NOT all hold" }
    );
    text
}

/// Parses `catalog export` output back into rows.
pub fn parse_export(text: &str) -> crate::Result<Vec<SeriesParams>> {
    crate::catalog::import_json(text)
}
