//! Exact rational machinery behind the remainder expansion
//!
//! ```text
//! R_n = F_n · (c_0 + c_1/n + … + c_{J-1}/n^{J-1} + O(n^-J)),
//! F_n = (1/2)_n (q)_n (1-q)_n / n!³ · n · t^n
//! ```
//!
//! The `c_j` come from a linear recursion driven by the expansion
//! `F_n/F_{n-1} = Σ d_l / n^l`. Alongside it live the pieces of the
//! Stirling-based expansion `α_n = Σ f_j / n^j` of the log of the Pochhammer
//! prefactor: Bernoulli numbers, the `A_{q,l}` coefficients and the Θ series.

use std::sync::{Mutex, OnceLock};

use rug::Rational;

use crate::catalog::SeriesParams;
use crate::error::{Error, Result};
use crate::rational::{binomial, pow};
use crate::series::FormalSeries;

/// Exact Bernoulli number `B_k` (with `B_1 = -1/2`).
///
/// Uses `Σ_{i≤k} C(k+1, i) B_i = 0` and keeps a process-wide table, so
/// repeated calls only pay for indices not seen before.
pub fn bernoulli(k: u32) -> Rational {
    if k > 1 && k % 2 == 1 {
        return Rational::new();
    }
    static TABLE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    let mut table = TABLE
        .get_or_init(|| Mutex::new(vec![Rational::from(1)]))
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    while table.len() <= k as usize {
        let m = table.len() as u32;
        if m > 1 && m % 2 == 1 {
            table.push(Rational::new());
            continue;
        }
        let mut acc = Rational::new();
        for (i, b) in table.iter().enumerate() {
            if *b != 0 {
                acc += Rational::from(b * binomial(m + 1, i as u32));
            }
        }
        table.push(-acc / (m + 1));
    }
    table[k as usize].clone()
}

/// `A_{q,l} = -(l + 1 - 2q) q^l / (2 l (l+1))`, the coefficients of
/// `(n + 1/2 - q) ln(1 - q/n) + q` in powers of `1/n`.
pub fn a_coeff(q: &Rational, l: u32) -> Rational {
    assert!(l >= 1, "A_(q,l) is defined for l >= 1");
    let num = Rational::from(l + 1) - Rational::from(q * 2u32);
    -(num * pow(q, l)) / (2 * l * (l + 1))
}

/// The Stirling series `Θ(x) ≈ Σ_{l=1..L} B_{2l} / (2l(2l-1) x^{2l-1})` as
/// a series in `1/x` of order `2L`.
pub fn theta_series(big_l: u32) -> FormalSeries {
    assert!(big_l >= 1, "theta_series needs L >= 1");
    let mut out = FormalSeries::zero(2 * big_l as usize);
    for l in 1..=big_l {
        *out.coeff_mut(2 * l as usize - 1) = bernoulli(2 * l) / (2 * l * (2 * l - 1));
    }
    out
}

/// Coefficients `f_0 = 0, f_1, …, f_{J-1}` of
/// `α_n = ln((1/2)_n (q)_n (1-q)_n / n!³ · (πn)^{3/2} / sin(πq))`.
///
/// Built from the `A_{q,l}` sums for `q`, `1-q`, `1/2`, the Θ series shifted
/// to `n - q`, `n - (1-q)`, `n - 1/2` by binomial re-expansion, and `-3 Θ(n)`.
/// The Stirling part is cut at `L = ⌈J/2⌉`, so its error is
/// `O(n^-(2L+1)) ⊆ O(n^-J)`.
pub fn alpha_series(q: &Rational, big_j: usize) -> Result<FormalSeries> {
    if *q <= 0 || *q >= 1 {
        return Err(Error::Domain("alpha_series needs 0 < q < 1".into()));
    }
    if big_j < 2 {
        return Err(Error::Domain("alpha_series needs J >= 2".into()));
    }
    let big_l = big_j.div_ceil(2) as u32;
    let p = Rational::from(1 - q);
    let half = Rational::from((1, 2));
    let mut out = FormalSeries::zero(big_j);

    for l in 1..big_j as u32 {
        *out.coeff_mut(l as usize) += a_coeff(q, l) + a_coeff(&p, l) + a_coeff(&half, l);
    }

    for l in 1..=big_l {
        let base = bernoulli(2 * l) / (2 * l * (2 * l - 1));
        for m in 0..=(2 * big_l + 1 - 2 * l) {
            let at = (m + 2 * l - 1) as usize;
            if at >= big_j {
                break;
            }
            let shifts = pow(q, m) + pow(&p, m) + pow(&half, m);
            *out.coeff_mut(at) += Rational::from(&base * binomial(2 * l - 2 + m, m)) * shifts;
        }
    }

    let theta = theta_series(big_l).truncate(big_j.min(2 * big_l as usize));
    for (j, c) in theta.coeffs().iter().enumerate() {
        *out.coeff_mut(j) -= Rational::from(c * 3u32);
    }
    Ok(out)
}

/// `d_0 … d_L` from `F_n/F_{n-1} = Σ_l d_l / n^l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DCoeffs {
    pub q: Rational,
    pub t: Rational,
    pub values: Vec<Rational>,
}

impl DCoeffs {
    pub fn as_series(&self, order: usize) -> FormalSeries {
        FormalSeries::from_coeffs(order, self.values.iter().cloned())
    }
}

/// `d_0 = t`, `d_1 = -t/2`, `d_2 = q(1-q)t`, `d_l = q(1-q)t/2` for `l ≥ 3`.
pub fn d_coeffs(q: &Rational, t: &Rational, big_l: usize) -> Result<DCoeffs> {
    if *q <= 0 || *q >= 1 {
        return Err(Error::Domain("d_coeffs needs 0 < q < 1".into()));
    }
    let qq = q * Rational::from(1 - q);
    let values = (0..=big_l)
        .map(|l| match l {
            0 => t.clone(),
            1 => Rational::from(-t) / 2,
            2 => Rational::from(&qq * t),
            _ => Rational::from(&qq * t) / 2,
        })
        .collect();
    Ok(DCoeffs { q: q.clone(), t: t.clone(), values })
}

/// Exact `c_0 … c_{J-1}` for one series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffTable {
    pub series_id: u32,
    pub coeffs: Vec<Rational>,
}

impl CoeffTable {
    /// Number of coefficients, `J`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_series(&self) -> FormalSeries {
        FormalSeries::from_coeffs(self.coeffs.len(), self.coeffs.iter().cloned())
    }
}

/// Runs the recursion
///
/// ```text
/// c_0 = d_0 s / (1 - d_0)
/// c_N = (d_N (s + c_0) + d_{N-1} r + Σ_{k=1}^{N-1} c_k (d_{N-k} - C(N-1, k-1))) / (1 - d_0)
/// ```
///
/// for `N = 1 … J-1` (the `N = 1` case has an empty sum). Only `t ≠ 1` is
/// required, so `|t| = 1` rows are accepted.
pub fn recurrence_coeffs(q: &Rational, r: i64, s: i64, t: &Rational, big_j: usize) -> Result<Vec<Rational>> {
    if *t == 1 {
        return Err(Error::SingularRecursion);
    }
    if big_j == 0 {
        return Ok(vec![]);
    }
    let d = d_coeffs(q, t, big_j)?.values;
    let denom = Rational::from(1 - &d[0]);
    let (r, s) = (Rational::from(r), Rational::from(s));

    let mut c: Vec<Rational> = Vec::with_capacity(big_j);
    c.push(Rational::from(&d[0] * &s) / &denom);
    let s_plus_c0 = Rational::from(&s + &c[0]);
    for n in 1..big_j {
        let mut acc = Rational::from(&d[n] * &s_plus_c0) + Rational::from(&d[n - 1] * &r);
        for (k, ck) in c.iter().enumerate().skip(1) {
            let factor = Rational::from(&d[n - k] - binomial(n as u32 - 1, k as u32 - 1));
            acc += Rational::from(ck * &factor);
        }
        c.push(acc / &denom);
    }
    Ok(c)
}

pub fn c_table(params: &SeriesParams, big_j: usize) -> Result<CoeffTable> {
    if big_j == 0 {
        return Err(Error::Domain("c_table needs J >= 1".into()));
    }
    let coeffs = recurrence_coeffs(&params.q, params.r, params.s, &params.t, big_j)?;
    Ok(CoeffTable { series_id: params.id, coeffs })
}

/// Both sides of the formal identity the recursion solves,
///
/// ```text
/// Σ c_j/(n-1)^j  ≡  (Σ d_l/n^l) · (s + r/n + Σ c_j/n^j)
/// ```
///
/// truncated at the table's order. They agree coefficient by coefficient
/// exactly when the table is correct.
pub fn fixed_point_sides(params: &SeriesParams, table: &CoeffTable) -> Result<(FormalSeries, FormalSeries)> {
    let order = table.len();
    let g = table.as_series();
    let lhs = g.shift_by_one();
    let d = d_coeffs(&params.q, &params.t, order)?.as_series(order);
    let u_over_f = FormalSeries::from_coeffs(order, [Rational::from(params.s), Rational::from(params.r)]);
    let rhs = &d * &(&u_over_f + &g);
    Ok((lhs, rhs))
}
