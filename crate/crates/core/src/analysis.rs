//! Uses of the expansion: optimal truncation, tail-correction acceleration,
//! order-of-error sweeps, the enveloping check for the `t = -1` row and the
//! sign-pattern scan.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::catalog::{get_series, SeriesParams};
use crate::error::{Error, Result};
use crate::expansion::{c_table, CoeffTable};
use crate::hp::{f_n, partial_sum, reference_value, remainder, remainder_report_with, HpReal, RemainderReport};

/// The row whose expansion is conjectured to envelop `R_n / F_n`.
pub const ENVELOPE_SERIES: u32 = 33;

/// `Σ_{j<len} c_j / n^j` over a coefficient slice, exactly.
pub fn partial_expansion(coeffs: &[Rational], n: u64) -> Result<Rational> {
    if n == 0 {
        return Err(Error::Domain("the expansion is in powers of 1/n, n >= 1".into()));
    }
    let x = Rational::from((1, n));
    let mut acc = Rational::new();
    for c in coeffs.iter().rev() {
        acc *= &x;
        acc += c;
    }
    Ok(acc)
}

/// `Σ_{j<J} c_j / n^j` for the whole table.
pub fn expansion_value(table: &CoeffTable, n: u64) -> Result<Rational> {
    partial_expansion(&table.coeffs, n)
}

/// Smallest `j ≥ 1` whose term `|c_j / n^j|` is not smaller than the
/// previous nonzero term, or `J` if the terms keep shrinking.
///
/// Zero coefficients count as still decreasing and are skipped, so the
/// `c_1 = c_2 = 0` stretch of row 33 does not stop the scan. Comparing
/// against the last nonzero term keeps the zeros from resetting the
/// reference magnitude.
pub fn optimal_truncation(table: &CoeffTable, n: u64) -> Result<usize> {
    if table.len() < 2 {
        return Err(Error::Domain("optimal truncation needs J >= 2".into()));
    }
    if n == 0 {
        return Err(Error::Domain("optimal truncation needs n >= 1".into()));
    }
    let n = rug::Integer::from(n);
    let mut last: Option<(usize, Rational)> = None;
    for (j, c) in table.coeffs.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let mag = Rational::from(c.abs_ref());
        if let Some((i, prev)) = &last {
            // |c_j|/n^j >= |c_i|/n^i  <=>  |c_j| >= |c_i| n^(j-i)
            let scaled = Rational::from(prev * rug::Integer::from((&n).pow((j - i) as u32)));
            if mag >= scaled {
                return Ok(j);
            }
        }
        last = Some((j, mag));
    }
    Ok(table.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationMode {
    Explicit(usize),
    /// Smallest-term rule on a table grown until the rule fires.
    Auto,
}

/// Largest table the automatic mode will build.
pub const AUTO_J_LIMIT: usize = 512;

#[derive(Debug, Clone)]
pub struct AccelerationReport {
    pub series_id: u32,
    pub n: u64,
    pub j_used: usize,
    /// `Σ_{k≤n} u_k`, an estimate of `p/π`.
    pub raw_exact: Rational,
    /// `F_n · Σ_{j<J} c_j / n^j`.
    pub correction: Rational,
    pub raw_estimate: HpReal,
    pub corrected_estimate: HpReal,
    pub reference: HpReal,
    pub raw_error: HpReal,
    pub corrected_error: HpReal,
    /// `log10(raw_error / corrected_error)`.
    pub digits_gained: f64,
    /// Precision the errors were measured at.
    pub measured_bits: u32,
    pub warnings: Vec<String>,
}

impl AccelerationReport {
    pub fn corrected_exact(&self) -> Rational {
        Rational::from(&self.raw_exact + &self.correction)
    }
}

pub fn conjectural_warning(params: &SeriesParams) -> Option<String> {
    params.conjectural.then(|| {
        format!(
            "series {} is conjectural: |t| = 1, the remainder expansion is unproved there",
            params.id
        )
    })
}

fn abs_diff(prec: u32, reference: &Float, estimate: &Rational) -> Float {
    Float::with_val(prec, reference - estimate).abs()
}

fn auto_table(params: &SeriesParams, n: u64) -> Result<(CoeffTable, usize)> {
    let mut len = 32;
    loop {
        let table = c_table(params, len)?;
        let j = optimal_truncation(&table, n)?;
        if j < table.len() || len >= AUTO_J_LIMIT {
            return Ok((table, j));
        }
        len = (len * 2).min(AUTO_J_LIMIT);
    }
}

/// Estimates `p/π` from the first `n + 1` terms plus the tail correction
/// `F_n Σ_{j<J} c_j / n^j`, and measures both errors against the
/// reference value.
///
/// Errors are measured at `prec` bits, or at three times the corrected
/// estimate's apparent accuracy (plus 64) when that is larger.
pub fn accelerate(params: &SeriesParams, n: u64, mode: TruncationMode, prec: u32) -> Result<AccelerationReport> {
    if n == 0 {
        return Err(Error::Domain("acceleration needs n >= 1".into()));
    }
    let (table, j_used) = match mode {
        TruncationMode::Explicit(0) => (CoeffTable { series_id: params.id, coeffs: vec![] }, 0),
        TruncationMode::Explicit(j) => (c_table(params, j)?, j),
        TruncationMode::Auto => auto_table(params, n)?,
    };
    let raw = partial_sum(params, n);
    let correction = f_n(params, n)? * partial_expansion(&table.coeffs[..j_used], n)?;
    let corrected = Rational::from(&raw + &correction);

    let mut measured = prec;
    let (reference, raw_err, corr_err) = loop {
        let reference = reference_value(params, measured)?;
        let work = measured + 64;
        let raw_err = abs_diff(work, reference.as_float(), &raw);
        let corr_err = abs_diff(work, reference.as_float(), &corrected);
        let ref_log2 = reference.log2_abs();
        let corr_log2 = HpReal::from_float(corr_err.clone()).log2_abs();
        if corr_log2 <= ref_log2 - measured as f64 + 8.0 {
            return Err(Error::InsufficientPrecision(format!(
                "corrected estimate matches p/pi to all {measured} bits"
            )));
        }
        let apparent = ref_log2 - corr_log2;
        let wanted = (3.0 * apparent).ceil() as u32 + 64;
        if measured >= wanted {
            break (reference, raw_err, corr_err);
        }
        measured = wanted;
    };

    let raw_error = HpReal::from_float(Float::with_val(measured, raw_err));
    let corrected_error = HpReal::from_float(Float::with_val(measured, corr_err));
    let digits_gained = (raw_error.log2_abs() - corrected_error.log2_abs()) * std::f64::consts::LOG10_2;
    Ok(AccelerationReport {
        series_id: params.id,
        n,
        j_used,
        raw_estimate: HpReal::from_rational(&raw, measured),
        corrected_estimate: HpReal::from_rational(&corrected, measured),
        raw_exact: raw,
        correction,
        reference,
        raw_error,
        corrected_error,
        digits_gained,
        measured_bits: measured,
        warnings: conjectural_warning(params).into_iter().collect(),
    })
}

/// One [`RemainderReport`] per `n`; the `scaled_error` column should stay
/// bounded if the error really is `O(n^-J)`.
pub fn order_sweep(params: &SeriesParams, n_list: &[u64], big_j: usize, prec: u32) -> Result<Vec<RemainderReport>> {
    if n_list.is_empty() {
        return Err(Error::Domain("order sweep needs at least one n".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("order sweep n values must be strictly ascending".into()));
    }
    let table = c_table(params, big_j)?;
    n_list
        .par_iter()
        .map(|&n| remainder_report_with(params, &table, n, prec))
        .collect()
}

/// `max / min` of the scaled errors of a sweep.
pub fn scaled_error_spread(reports: &[RemainderReport]) -> f64 {
    let logs: Vec<f64> = reports.iter().map(|r| r.scaled_error.log2_abs()).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    (max - min).exp2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Holds,
    Violated,
    /// Too close to a bound to decide at this precision.
    Indeterminate,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Holds => "holds",
            CellStatus::Violated => "violated",
            CellStatus::Indeterminate => "indeterminate",
        })
    }
}

/// One `(L, n)` cell of `Σ_{j≤4L-1} c_j/n^j < R_n/F_n < Σ_{j≤4L+1} c_j/n^j`.
#[derive(Debug, Clone)]
pub struct EnvelopeReport {
    pub n: u64,
    pub big_l: usize,
    pub lower_exact: Rational,
    pub upper_exact: Rational,
    pub lower: HpReal,
    pub ratio: HpReal,
    pub upper: HpReal,
    /// `min(ratio - lower, upper - ratio)`; negative when a bound is crossed.
    pub margin: HpReal,
    /// The margin a cell must clear to count as decided.
    pub threshold: HpReal,
    pub status: CellStatus,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct EnvelopeSweep {
    pub series_id: u32,
    /// Set for any row other than 33, where nothing is conjectured.
    pub exploratory: bool,
    pub precision: u32,
    /// Cells in `(L, n)` order.
    pub cells: Vec<EnvelopeReport>,
}

impl EnvelopeSweep {
    pub fn all_hold(&self) -> bool {
        self.cells.iter().all(|c| c.holds)
    }

    pub fn count(&self, status: CellStatus) -> usize {
        self.cells.iter().filter(|c| c.status == status).count()
    }
}

/// Checks the enveloping property for row 33 over `1 ≤ L ≤ l_max`,
/// `1 ≤ n ≤ n_max` at `prec` bits.
pub fn envelope_check(n_max: u64, l_max: usize, prec: u32) -> Result<EnvelopeSweep> {
    let params = get_series(ENVELOPE_SERIES as i64)?;
    envelope_check_series(params, n_max, l_max, prec)
}

/// [`envelope_check`] for an arbitrary row, flagged exploratory unless it
/// is row 33.
///
/// `R_n/F_n` carries `prec` correct bits and the bounds are exact, so a
/// cell is decided once its margin exceeds both `2^(-prec/2)` times the
/// bracket width `upper - lower` and `2^(16-prec) max(1, |ratio|)`, the
/// rounding floor. Anything closer is reported indeterminate.
pub fn envelope_check_series(params: &SeriesParams, n_max: u64, l_max: usize, prec: u32) -> Result<EnvelopeSweep> {
    if n_max == 0 || l_max == 0 {
        return Err(Error::Domain("envelope sweep needs n_max >= 1 and L_max >= 1".into()));
    }
    let table = c_table(params, 4 * l_max + 2)?;
    let per_n: Vec<Vec<EnvelopeReport>> = (1..=n_max)
        .into_par_iter()
        .map(|n| envelope_row(params, &table, n, l_max, prec))
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(per_n.len() * l_max);
    for l_idx in 0..l_max {
        for row in &per_n {
            cells.push(row[l_idx].clone());
        }
    }
    Ok(EnvelopeSweep {
        series_id: params.id,
        exploratory: params.id != ENVELOPE_SERIES,
        precision: prec,
        cells,
    })
}

struct Verdict {
    margin: Float,
    threshold: Float,
    status: CellStatus,
}

/// Decides one cell from a `prec`-bit ratio and exact bounds.
fn classify(ratio: &Float, lower: &Rational, upper: &Rational, prec: u32) -> Verdict {
    let work = prec + 64;
    let below = Float::with_val(work, ratio - lower);
    let above = -Float::with_val(work, ratio - upper);
    let margin = if below < above { below } else { above };

    let width = Float::with_val(work, &Rational::from(upper - lower)).abs();
    let width_thr = width * Float::with_val(work, Float::i_exp(1, -(prec as i32 / 2)));
    let floor = Float::with_val(work, ratio.abs_ref()).max(&Float::with_val(work, 1))
        * Float::with_val(work, Float::i_exp(1, 16 - prec as i32));
    let threshold = if width_thr > floor { width_thr } else { floor };

    let status = if margin > threshold {
        CellStatus::Holds
    } else if margin < -Float::with_val(work, &threshold) {
        CellStatus::Violated
    } else {
        CellStatus::Indeterminate
    };
    Verdict { margin, threshold, status }
}

fn envelope_row(params: &SeriesParams, table: &CoeffTable, n: u64, l_max: usize, prec: u32) -> Result<Vec<EnvelopeReport>> {
    let rem = remainder(params, n, prec)?;
    let ratio = Float::with_val(prec, rem.as_float() / &f_n(params, n)?);

    // prefix sums Σ_{j≤m} c_j/n^j for every m up to 4 l_max + 1
    let x = Rational::from((1, n));
    let mut prefix = Vec::with_capacity(table.len());
    let mut acc = Rational::new();
    let mut x_pow = Rational::from(1);
    for c in &table.coeffs {
        acc += Rational::from(c * &x_pow);
        prefix.push(acc.clone());
        x_pow *= &x;
    }

    let mut out = Vec::with_capacity(l_max);
    for big_l in 1..=l_max {
        let lower = &prefix[4 * big_l - 1];
        let upper = &prefix[4 * big_l + 1];
        let verdict = classify(&ratio, lower, upper, prec);
        out.push(EnvelopeReport {
            n,
            big_l,
            lower_exact: lower.clone(),
            upper_exact: upper.clone(),
            lower: HpReal::from_rational(lower, prec),
            ratio: HpReal::from_float(ratio.clone()),
            upper: HpReal::from_rational(upper, prec),
            margin: HpReal::from_float(Float::with_val(prec, verdict.margin)),
            threshold: HpReal::from_float(Float::with_val(prec, verdict.threshold)),
            status: verdict.status,
            holds: verdict.status == CellStatus::Holds,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Signs of the nonzero coefficients, in order.
pub fn sign_pattern(table: &CoeffTable) -> Vec<Sign> {
    table
        .coeffs
        .iter()
        .filter_map(|c| match c.cmp0() {
            Ordering::Greater => Some(Sign::Plus),
            Ordering::Less => Some(Sign::Minus),
            Ordering::Equal => None,
        })
        .collect()
}

/// True when the signs repeat `- - + +` from the first one on.
pub fn is_minus_minus_plus_plus(signs: &[Sign]) -> bool {
    const CYCLE: [Sign; 4] = [Sign::Minus, Sign::Minus, Sign::Plus, Sign::Plus];
    signs.iter().enumerate().all(|(i, s)| *s == CYCLE[i % 4])
}
