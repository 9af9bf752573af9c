//! Arbitrary-precision evaluation: series terms, partial sums, the
//! normalizing prefactor `F_n`, reference values `p/π`, remainders `R_n` and
//! the log-prefactor `α_n`.
//!
//! Everything up to `partial_sum` is exact rational arithmetic. Rounding only
//! enters in [`reference_value`], [`remainder`] and [`alpha_direct`], and each
//! of those budgets its own guard bits. There is no ambient precision: every
//! floating value is created with an explicit bit count.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use rug::{Float, Rational};

use crate::catalog::{get_series, SeriesParams};
use crate::error::{Error, Result};
use crate::expansion::{c_table, CoeffTable};
use crate::rational::{log2_abs, pow};

/// Default cap on the number of terms any tail summation may use.
pub const DEFAULT_TERM_CAP: u64 = 1_000_000;

/// Smallest precision accepted by the floating entry points.
pub const MIN_PRECISION: u32 = 64;

/// A binary floating value carrying its own precision.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct HpReal {
    value: Float,
}

impl HpReal {
    pub fn from_float(value: Float) -> Self {
        Self { value }
    }

    /// `x` rounded to nearest at `prec` bits.
    pub fn from_rational(x: &Rational, prec: u32) -> Self {
        Self { value: Float::with_val(prec, x) }
    }

    pub fn precision_bits(&self) -> u32 {
        self.value.prec()
    }

    pub fn as_float(&self) -> &Float {
        &self.value
    }

    pub fn into_float(self) -> Float {
        self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn abs(&self) -> Self {
        Self { value: self.value.clone().abs() }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// `log2 |x|` as an `f64`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.value.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (mantissa, exp) = self.value.to_f64_exp();
        mantissa.abs().log2() + exp as f64
    }

    /// Number of decimal digits that the precision supports.
    pub fn decimal_digits(&self) -> usize {
        (self.precision_bits() as f64 * std::f64::consts::LOG10_2).floor() as usize + 1
    }

    /// Scientific decimal rendering with [`decimal_digits`](Self::decimal_digits)
    /// significant digits, always with `.` as separator.
    pub fn to_decimal_string(&self) -> String {
        self.value.to_string_radix(10, Some(self.decimal_digits()))
    }

    /// Relative agreement in bits: `-log2(|a - b| / |b|)`, infinite if equal.
    pub fn agreement_bits(&self, other: &HpReal) -> f64 {
        let prec = self.precision_bits().max(other.precision_bits()) + 64;
        let diff = Float::with_val(prec, &self.value - &other.value);
        if diff.is_zero() {
            return f64::INFINITY;
        }
        let diff = HpReal::from_float(diff);
        other.log2_abs() - diff.log2_abs()
    }
}

impl fmt::Display for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

fn check_q(q: &Rational) -> Result<()> {
    if *q <= 0 || *q >= 1 {
        return Err(Error::Domain("q must lie in (0, 1)".into()));
    }
    Ok(())
}

fn check_precision(prec: u32) -> Result<()> {
    if prec < MIN_PRECISION {
        return Err(Error::Domain(format!("precision must be at least {MIN_PRECISION} bits")));
    }
    Ok(())
}

/// Ratio of consecutive prefactors, `(k+1/2)(k+q)(k+1-q)/(k+1)³`.
fn prefactor_step(q: &Rational, k: u64) -> Rational {
    let k = Rational::from(k);
    let a = &k + Rational::from((1, 2));
    let b = Rational::from(&k + q);
    let c = Rational::from(&k + 1u32) - q;
    let d = Rational::from(&k + 1u32);
    a * b * c / pow(&d, 3)
}

/// `(1/2)_n (q)_n (1-q)_n / (n!)³`, exactly.
pub fn pochhammer_prefactor(q: &Rational, n: u64) -> Result<Rational> {
    check_q(q)?;
    let mut acc = Rational::from(1);
    for k in 0..n {
        acc *= prefactor_step(q, k);
    }
    Ok(acc)
}

fn term_from_prefactor(params: &SeriesParams, prefactor: &Rational, t_pow: &Rational, k: u64) -> Rational {
    let linear = params.r + params.s * k as i64;
    Rational::from(prefactor * t_pow) * linear
}

/// `u_k = prefactor(q, k) · (r + s k) · t^k`.
pub fn term(params: &SeriesParams, k: u64) -> Rational {
    let pre = pochhammer_prefactor(&params.q, k).expect("catalog q is in (0, 1)");
    term_from_prefactor(params, &pre, &pow(&params.t, k as u32), k)
}

/// `F_n = prefactor(q, n) · n · t^n`, for `n ≥ 1`.
pub fn f_n(params: &SeriesParams, n: u64) -> Result<Rational> {
    if n == 0 {
        return Err(Error::Domain("F_n is defined for n >= 1".into()));
    }
    let pre = pochhammer_prefactor(&params.q, n)?;
    Ok(pre * pow(&params.t, n as u32) * n)
}

/// `Σ_{k=0}^{n} u_k`, exactly.
pub fn partial_sum(params: &SeriesParams, n: u64) -> Rational {
    let mut pre = Rational::from(1);
    let mut t_pow = Rational::from(1);
    let mut acc = Rational::new();
    for k in 0..=n {
        if k > 0 {
            pre *= prefactor_step(&params.q, k - 1);
            t_pow *= &params.t;
        }
        acc += term_from_prefactor(params, &pre, &t_pow, k);
    }
    acc
}

/// A finite stretch of the series together with a rigorous bound on what
/// was left out.
#[derive(Debug, Clone)]
pub struct TailSum {
    /// `Σ_{k=first}^{last} u_k`.
    pub sum: Rational,
    pub first: u64,
    pub last: u64,
    /// `log2` of an upper bound on `|Σ_{k>last} u_k|`.
    pub log2_omitted: f64,
}

/// Sums `u_first + u_{first+1} + …` until the omitted tail is below
/// `2^-rel_bits · |sum|`.
///
/// For `k ≥ K` the term ratio is at most `ρ_K = |t| (r + s(K+1)) / (r + sK)`,
/// because the prefactor step is below 1 and the linear factor's ratio
/// decreases in `k`. The tail after `u_K` is then below `|u_K| ρ_K/(1-ρ_K)`.
/// That bound is unavailable when `ρ_K ≥ 1`, in particular for `|t| = 1`.
pub fn tail_sum(params: &SeriesParams, first: u64, rel_bits: u32, cap: u64) -> Result<TailSum> {
    if params.r <= 0 || params.s < 0 {
        return Err(Error::Domain("tail bound needs r > 0 and s >= 0".into()));
    }
    let mut pre = pochhammer_prefactor(&params.q, first)?;
    let mut t_pow = pow(&params.t, first as u32);
    let mut sum = Rational::new();
    let abs_t = Rational::from(params.t.abs_ref());
    let mut k = first;
    loop {
        let u = term_from_prefactor(params, &pre, &t_pow, k);
        sum += &u;
        let lin = |k: u64| Rational::from(params.r + params.s * k as i64);
        let rho = (&abs_t * lin(k + 1)) / lin(k);
        if rho < 1 {
            let omitted = log2_abs(&u) + log2_abs(&rho) - log2_abs(&Rational::from(1 - &rho));
            if sum != 0 && omitted < log2_abs(&sum) - rel_bits as f64 - 2.0 {
                return Ok(TailSum { sum, first, last: k, log2_omitted: omitted });
            }
        }
        if k - first + 1 >= cap {
            return Err(Error::Resource(format!(
                "tail summation of series {} needs more than {cap} terms",
                params.id
            )));
        }
        pre *= prefactor_step(&params.q, k);
        t_pow *= &params.t;
        k += 1;
    }
}

/// `1/π` at `prec` bits, from the Chudnovsky row
/// `426880 √10005 / π = Σ u_k`. Memoized per precision.
pub fn inv_pi(prec: u32, cap: u64) -> Result<Float> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Float>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&prec) {
        return Ok(v.clone());
    }
    let chud = get_series(7).expect("row 7 exists");
    let work = prec + 32;
    let tail = tail_sum(chud, 0, work + 8, cap)?;
    let scale = chud.p.to_float(work);
    let mut v = Float::with_val(work, &tail.sum);
    v /= &scale;
    let v = Float::with_val(prec, v);
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(prec, v.clone());
    Ok(v)
}

pub fn pi(prec: u32) -> Result<Float> {
    let inv = inv_pi(prec + 8, DEFAULT_TERM_CAP)?;
    Ok(Float::with_val(prec, inv.recip_ref()))
}

fn p_over_pi(params: &SeriesParams, prec: u32, cap: u64) -> Result<Float> {
    let work = prec + 64;
    let inv = inv_pi(work, cap)?;
    let scale = params.p.to_float(work);
    Ok(Float::with_val(prec, scale * inv))
}

/// `p/π` for the row at `prec` bits.
///
/// `1/π` and `√radicand` are each carried at `prec + 64` bits with a few ulp
/// of error there, so the rounded result is within 4 ulp at `prec` (in
/// practice within one).
pub fn reference_value(params: &SeriesParams, prec: u32) -> Result<HpReal> {
    check_precision(prec)?;
    p_over_pi(params, prec, DEFAULT_TERM_CAP).map(HpReal::from_float)
}

/// `R_n = p/π - Σ_{k≤n} u_k` carrying at least `prec` significant bits.
pub fn remainder(params: &SeriesParams, n: u64, prec: u32) -> Result<HpReal> {
    remainder_capped(params, n, prec, DEFAULT_TERM_CAP)
}

/// [`remainder`] with an explicit cap on the terms of the `1/π` summation.
///
/// The partial sum is exact, so the only loss is the cancellation between
/// `p/π` and the partial sum. The working precision starts at
/// `prec + 64 + log2|S_n / u_{n+1}|` and is raised until the computed
/// difference provably has `prec + 2` correct bits.
pub fn remainder_capped(params: &SeriesParams, n: u64, prec: u32, cap: u64) -> Result<HpReal> {
    check_precision(prec)?;
    let partial = partial_sum(params, n);
    let next = term(params, n + 1);
    let cancel = (log2_abs(&partial) - log2_abs(&next)).max(0.0).ceil() as u32;
    let mut work = prec + 64 + cancel + 8;
    for _ in 0..6 {
        let reference = p_over_pi(params, work, cap)?;
        let s = Float::with_val(work, &partial);
        let diff = Float::with_val(work, &reference - &s);
        if !diff.is_zero() {
            let scale = HpReal::from_float(reference.abs()).log2_abs().max(log2_abs(&partial));
            let log2_err = scale - work as f64 + 3.0;
            let have = HpReal::from_float(diff.clone()).log2_abs() - log2_err;
            if have >= prec as f64 + 2.0 {
                return Ok(HpReal::from_float(Float::with_val(prec, diff)));
            }
            work += (prec as f64 + 2.0 - have).max(0.0).ceil() as u32 + 32;
        } else {
            work *= 2;
        }
    }
    Err(Error::InsufficientPrecision(format!(
        "remainder of series {} at n = {n} did not resolve",
        params.id
    )))
}

/// `α_n = ln(prefactor(q, n) · (πn)^{3/2} / sin(πq))` at `prec` bits.
///
/// The logarithm is of a number close to 1 and `α_n ≈ f_1/n`, so besides
/// 32 guard bits the working precision adds `log2 n` bits.
pub fn alpha_direct(q: &Rational, n: u64, prec: u32) -> Result<HpReal> {
    check_q(q)?;
    check_precision(prec)?;
    if n == 0 {
        return Err(Error::Domain("alpha_n is defined for n >= 1".into()));
    }
    let work = prec + 32 + (64 - n.leading_zeros());
    let pre = pochhammer_prefactor(q, n)?;
    let pi = pi(work)?;
    let pi_n = Float::with_val(work, &pi * n);
    let pow32 = Float::with_val(work, &pi_n * Float::with_val(work, pi_n.sqrt_ref()));
    let sin = Float::with_val(work, &pi * q).sin();
    let mut x = Float::with_val(work, &pre);
    x *= &pow32;
    x /= &sin;
    x.ln_mut();
    Ok(HpReal::from_float(Float::with_val(prec, x)))
}

/// One verification point of `R_n / F_n ≈ Σ_{j<J} c_j / n^j`.
#[derive(Debug, Clone)]
pub struct RemainderReport {
    pub series_id: u32,
    pub n: u64,
    pub big_j: usize,
    pub remainder: HpReal,
    /// `F_n` exactly; it includes the factor `n`.
    pub f_n_exact: Rational,
    pub f_n: HpReal,
    /// `R_n / F_n`.
    pub ratio: HpReal,
    /// `Σ_{j<J} c_j / n^j` rounded from its exact value.
    pub expansion_value: HpReal,
    /// `|ratio - expansion_value|`.
    pub abs_error: HpReal,
    /// `abs_error · n^J`.
    pub scaled_error: HpReal,
}

pub fn remainder_report(params: &SeriesParams, n: u64, big_j: usize, prec: u32) -> Result<RemainderReport> {
    let table = c_table(params, big_j)?;
    remainder_report_with(params, &table, n, prec)
}

/// Same as [`remainder_report`] but reuses a coefficient table; `J` is the
/// table length.
pub fn remainder_report_with(params: &SeriesParams, table: &CoeffTable, n: u64, prec: u32) -> Result<RemainderReport> {
    if n == 0 {
        return Err(Error::Domain("remainder reports need n >= 1".into()));
    }
    let big_j = table.len();
    let rem = remainder(params, n, prec)?;
    let f_exact = f_n(params, n)?;
    let ratio = Float::with_val(prec, rem.as_float() / &f_exact);
    let expansion = crate::analysis::expansion_value(table, n)?;
    let expansion_f = Float::with_val(prec, &expansion);
    let abs_error = Float::with_val(prec, &ratio - &expansion_f).abs();
    let n_pow = pow(&Rational::from(n), big_j as u32);
    let scaled = Float::with_val(prec, &abs_error * &n_pow);
    Ok(RemainderReport {
        series_id: params.id,
        n,
        big_j,
        remainder: rem,
        f_n: HpReal::from_rational(&f_exact, prec),
        f_n_exact: f_exact,
        ratio: HpReal::from_float(ratio),
        expansion_value: HpReal::from_float(expansion_f),
        abs_error: HpReal::from_float(abs_error),
        scaled_error: HpReal::from_float(scaled),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::float::Constant;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn prefactor_values() {
        assert_eq!(pochhammer_prefactor(&q(1, 3), 0).unwrap(), 1);
        assert_eq!(pochhammer_prefactor(&q(1, 2), 1).unwrap(), q(1, 8));
        let oracle = (q(1, 2) * q(3, 2)) * (q(1, 6) * q(7, 6)) * (q(5, 6) * q(11, 6)) / q(8, 1);
        assert_eq!(oracle, q(385, 13824));
        assert_eq!(pochhammer_prefactor(&q(1, 6), 2).unwrap(), oracle);
        assert!(pochhammer_prefactor(&q(3, 2), 2).is_err());
    }

    #[test]
    fn prefactor_is_the_factorial_form_for_quarter() {
        // (1/2)_n (1/4)_n (3/4)_n / n!³ = (4n)! / (n!⁴ 256^n)
        let fact = |m: u32| Rational::from(rug::Integer::from(rug::Integer::factorial(m)));
        for n in 0..12u32 {
            let closed = fact(4 * n) / (pow(&fact(n), 4) * pow(&q(256, 1), n));
            assert_eq!(pochhammer_prefactor(&q(1, 4), n as u64).unwrap(), closed);
        }
    }

    #[test]
    fn terms_and_prefactors() {
        let s33 = get_series(33).unwrap();
        assert_eq!(term(s33, 0), 1);
        assert_eq!(term(s33, 1), q(-5, 8));
        assert_eq!(term(get_series(7).unwrap(), 0), 13591409);
        assert_eq!(f_n(s33, 1).unwrap(), q(-1, 8));
        assert_eq!(f_n(get_series(35).unwrap(), 1).unwrap(), q(1, 32));
        assert!(f_n(s33, 0).is_err());
        for params in crate::catalog::load_catalog() {
            for n in [1u64, 4, 9] {
                let lin = params.r + params.s * n as i64;
                assert_eq!(f_n(params, n).unwrap() / term(params, n), q(n as i64, lin));
            }
        }
    }

    #[test]
    fn partial_sums() {
        assert_eq!(partial_sum(get_series(33).unwrap(), 1), q(3, 8));
        assert_eq!(partial_sum(get_series(35).unwrap(), 0), 1);
        assert_eq!(partial_sum(get_series(23).unwrap(), 0), 1103);
        let s = get_series(12).unwrap();
        let direct: Rational = (0..=7).map(|k| term(s, k)).sum();
        assert_eq!(partial_sum(s, 7), direct);
    }

    #[test]
    fn pi_matches_mpfr_constant() {
        for prec in [64u32, 300, 2048] {
            let ours = pi(prec).unwrap();
            let theirs = Float::with_val(prec, Constant::Pi);
            let diff = Float::with_val(prec + 8, &ours - &theirs).abs();
            let ulp = Float::with_val(prec + 8, Float::i_exp(2, -(prec as i32 - 3)));
            assert!(diff <= ulp, "prec {prec}");
        }
    }

    #[test]
    fn reference_for_series_33_is_two_over_pi() {
        let v = reference_value(get_series(33).unwrap(), 256).unwrap();
        assert!(v.to_decimal_string().starts_with("6.3661977236758"));
    }

    #[test]
    fn reference_cross_checked_by_ramanujan_row() {
        // 1/π from summing row 23 directly, with its own tail bound
        let prec = 1024;
        let s23 = get_series(23).unwrap();
        let tail = tail_sum(s23, 0, prec + 16, DEFAULT_TERM_CAP).unwrap();
        let mut inv = Float::with_val(prec + 32, &tail.sum);
        inv /= s23.p.to_float(prec + 32);
        let ours = HpReal::from_float(inv_pi(prec, DEFAULT_TERM_CAP).unwrap());
        assert!(HpReal::from_float(inv).agreement_bits(&ours) >= (prec - 8) as f64);
    }

    #[test]
    fn chudnovsky_reference_is_near_first_term() {
        let s7 = get_series(7).unwrap();
        let v = reference_value(s7, 256).unwrap();
        let diff = Float::with_val(512, v.as_float() - 13591409u32).abs();
        let bound = Float::with_val(512, term(s7, 1).abs() * 2u32);
        assert!(diff < bound);
    }

    #[test]
    fn precision_contract() {
        let s = get_series(19).unwrap();
        let a = reference_value(s, 200).unwrap();
        let b = reference_value(s, 400).unwrap();
        assert!(a.agreement_bits(&b) >= 196.0);
        assert!(reference_value(s, 32).is_err());
    }

    #[test]
    fn remainder_zero_is_bracketed_by_two_terms() {
        let s7 = get_series(7).unwrap();
        let r0 = remainder(s7, 0, 256).unwrap();
        let r0 = Float::with_val(256, r0.as_float().abs_ref());
        let u1 = Float::with_val(256, term(s7, 1).abs());
        let u2 = Float::with_val(256, term(s7, 2).abs());
        let hi = Float::with_val(256, &u1 * (1.0 + 1e-6));
        let lo = Float::with_val(256, &u1 * (1.0 - 1e-6)) * (1 - Float::with_val(256, &u2 / &u1));
        assert!(r0 < hi && r0 > lo);
    }

    #[test]
    fn remainder_agrees_with_direct_tail_for_fast_rows() {
        let prec = 300;
        for params in crate::catalog::load_catalog() {
            if Rational::from(params.t.abs_ref()) > q(1, 4) {
                continue;
            }
            for n in [0u64, 3, 11] {
                let rem = remainder(params, n, prec).unwrap();
                let tail = tail_sum(params, n + 1, prec + 16, DEFAULT_TERM_CAP).unwrap();
                let direct = HpReal::from_rational(&tail.sum, prec + 16);
                let agree = rem.agreement_bits(&direct);
                assert!(agree >= (prec - 8) as f64, "series {} n {n}: {agree}", params.id);
            }
        }
    }

    #[test]
    fn telescoping() {
        let prec = 256;
        for (id, n) in [(7u32, 3u64), (33, 10), (30, 25), (1, 2)] {
            let s = get_series(id as i64).unwrap();
            let a = remainder(s, n - 1, prec).unwrap();
            let b = remainder(s, n, prec).unwrap();
            let diff = HpReal::from_float(Float::with_val(2 * prec, a.as_float() - b.as_float()));
            let u = HpReal::from_rational(&term(s, n), 2 * prec);
            assert!(diff.agreement_bits(&u) >= (prec - 4) as f64, "series {id}");
        }
    }

    #[test]
    fn remainder_term_cap() {
        let err = remainder_capped(get_series(23).unwrap(), 2, 4096, 5).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn tail_sum_refuses_unit_t() {
        let err = tail_sum(get_series(33).unwrap(), 0, 64, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn alpha_at_half_uses_unit_sine() {
        let n = 17u64;
        let prec = 200;
        let a = alpha_direct(&q(1, 2), n, prec).unwrap();
        let pre = pochhammer_prefactor(&q(1, 2), n).unwrap();
        let pi_n = Float::with_val(400, Float::with_val(400, Constant::Pi) * n);
        let pow32 = Float::with_val(400, &pi_n * Float::with_val(400, pi_n.sqrt_ref()));
        let oracle = (Float::with_val(400, &pre) * pow32).ln();
        assert!(a.agreement_bits(&HpReal::from_float(oracle)) >= 190.0);
    }

    #[test]
    fn alpha_decays() {
        let mags: Vec<f64> = [10u64, 50, 200]
            .iter()
            .map(|&n| alpha_direct(&q(1, 3), n, 128).unwrap().to_f64().abs())
            .collect();
        assert!(mags[2] < mags[1] && mags[1] < mags[0]);
        assert!(alpha_direct(&q(1, 3), 0, 128).is_err());
    }

    #[test]
    fn decimal_rendering() {
        let x = HpReal::from_rational(&q(1, 3), 64);
        assert_eq!(x.decimal_digits(), 20);
        assert!(x.to_decimal_string().starts_with("3.333333333333333333"));
    }
}
