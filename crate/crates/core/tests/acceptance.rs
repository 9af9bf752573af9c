//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rug::ops::Pow;
use rug::{Float, Rational};

use pi_remainder::analysis::{
    accelerate, envelope_check, is_minus_minus_plus_plus, order_sweep, scaled_error_spread, sign_pattern, CellStatus,
    TruncationMode,
};
use pi_remainder::catalog::{get_series, load_catalog};
use pi_remainder::expansion::{alpha_series, c_table, fixed_point_sides};
use pi_remainder::hp::{alpha_direct, f_n, remainder, term, HpReal};
use pi_remainder::rational::{parse_rational, pow};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rationals(list: &[&str]) -> Vec<Rational> {
    list.iter().map(|s| parse_rational(s).unwrap()).collect()
}

fn exact_table(id: i64, expected: &[&str]) -> Outcome {
    let got = c_table(get_series(id).unwrap(), expected.len()).map_err(|e| e.to_string())?;
    let want = rationals(expected);
    for (j, (g, w)) in got.coeffs.iter().zip(&want).enumerate() {
        if g != w {
            return Err(format!("c_{j} = {g}, expected {w}"));
        }
    }
    Ok(format!("{} coefficients equal", want.len()))
}

fn criterion_1() -> Outcome {
    exact_table(
        7,
        &[
            "-2/557403",
            "885616447271/519552166475669481",
            "-348383485711899665152000/161423873265579705965912841729",
            "353617726049706364359910891893760000/150462274289922801810326124883532202249483",
            "-50809055546960209063426859112570403004227648000/20035004317262584720034794527173169059667245914401663",
        ],
    )
}

fn criterion_2() -> Outcome {
    exact_table(
        23,
        &[
            "1/3640",
            "-3035509/24114272000",
            "27421461880263/159752229145600000",
            "-40112960459081444847/211665313528754176000000",
            "41325245596206392083139943/200320052723612952166400000000",
            "-294617758251626753628627256762503/1327080285283391085511966720000000000",
        ],
    )
}

fn criterion_3() -> Outcome {
    let detail = exact_table(
        33,
        &["-2", "0", "0", "-1/4", "1/8", "3/8", "-13/32", "-83/64", "141/64", "2081/256"],
    )?;
    let signs = sign_pattern(&c_table(get_series(33).unwrap(), 10).unwrap());
    if signs.len() != 8 || !is_minus_minus_plus_plus(&signs) {
        return Err(format!("sign pattern {signs:?}"));
    }
    Ok(format!("{detail}; signs - - + + - - + +"))
}

fn criterion_4() -> Outcome {
    let (n_max, l_max, prec) = (200, 20, 512);
    let sweep = envelope_check(n_max, l_max, prec).map_err(|e| e.to_string())?;
    let cells = sweep.cells.len();
    let holds = sweep.count(CellStatus::Holds);
    let violated = sweep.count(CellStatus::Violated);
    let indeterminate = sweep.count(CellStatus::Indeterminate);
    let min_margin = sweep
        .cells
        .iter()
        .map(|c| c.margin.log2_abs())
        .fold(f64::INFINITY, f64::min);
    let detail = format!(
        "{cells} cells, {holds} hold, {violated} violated, {indeterminate} indeterminate, smallest margin 2^{min_margin:.1}"
    );
    if cells == (n_max as usize) * l_max && holds == cells && indeterminate == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Outcome {
    let n_list = [10u64, 20, 40, 80];
    let mut parts = vec![];
    let mut ok = true;
    for id in [7i64, 23] {
        for big_j in [2usize, 4, 6] {
            let reports = order_sweep(get_series(id).unwrap(), &n_list, big_j, 1024).map_err(|e| e.to_string())?;
            let spread = scaled_error_spread(&reports);
            ok &= spread < 10.0;
            parts.push(format!("#{id} J={big_j}: {spread:.3}"));
        }
    }
    let detail = format!("max/min scaled error: {}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn growth_index(id: i64, n: u64, limit: usize) -> Option<usize> {
    let table = c_table(get_series(id).unwrap(), limit + 2).unwrap();
    let n = Rational::from(n);
    (0..=limit).find(|&j| {
        let a = Rational::from(table.coeffs[j + 1].abs_ref());
        let b = Rational::from(table.coeffs[j].abs_ref()) * &n;
        a > b
    })
}

fn criterion_6() -> Outcome {
    let mut parts = vec![];
    for id in [7i64, 23] {
        match growth_index(id, 5, 200) {
            Some(j) => parts.push(format!("#{id}: |c_(j+1)/5^(j+1)| > |c_j/5^j| at j = {j}")),
            None => return Err(format!("#{id}: no growth up to j = 200")),
        }
    }
    Ok(parts.join(", "))
}

fn criterion_7() -> Outcome {
    let prec = 2048;
    let big_j = 8usize;
    let mut parts = vec![];
    let mut ok = true;
    for qs in ["1/6", "1/4", "1/3", "1/2"] {
        let q = parse_rational(qs).unwrap();
        let f = alpha_series(&q, big_j).map_err(|e| e.to_string())?;
        let mut logs = vec![];
        for n in [50u64, 100, 200] {
            let direct = alpha_direct(&q, n, prec).map_err(|e| e.to_string())?;
            let approx = f.eval_at_n(&Rational::from(n));
            let err = Float::with_val(prec, direct.as_float() - &approx).abs() * Float::with_val(prec, Float::with_val(prec, n).pow(big_j as u32));
            logs.push(HpReal::from_float(err).log2_abs());
        }
        let spread = (logs.iter().cloned().fold(f64::MIN, f64::max) - logs.iter().cloned().fold(f64::MAX, f64::min)).exp2();
        ok &= spread < 10.0 && logs.iter().all(|l| l.is_finite());
        parts.push(format!("q={qs}: {spread:.3}"));
    }
    let detail = format!("max/min of |alpha_n - sum f_j/n^j| n^8: {}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Outcome {
    let params = get_series(23).unwrap();
    let n = 3u64;
    let rep = accelerate(params, n, TruncationMode::Auto, 512).map_err(|e| e.to_string())?;
    let j = rep.j_used;
    let table = c_table(params, j + 1).unwrap();
    let omitted = f_n(params, n).unwrap() * &table.coeffs[j] / pow(&Rational::from(n), j as u32);
    let bound = Float::with_val(rep.measured_bits, omitted.abs()) * 10u32;
    let detail = format!(
        "J* = {j}, raw error 2^{:.1}, corrected error 2^{:.1}, bound 2^{:.1}",
        rep.raw_error.log2_abs(),
        rep.corrected_error.log2_abs(),
        HpReal::from_float(bound.clone()).log2_abs()
    );
    if rep.corrected_error.as_float() < rep.raw_error.as_float() && *rep.corrected_error.as_float() <= bound {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9() -> Outcome {
    let prec = 256;
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let id = rng.gen_range(1..=36i64);
        let n = rng.gen_range(1..=60u64);
        let params = get_series(id).unwrap();
        let before = remainder(params, n - 1, prec).map_err(|e| e.to_string())?;
        let after = remainder(params, n, prec).map_err(|e| e.to_string())?;
        let diff = HpReal::from_float(Float::with_val(2 * prec, before.as_float() - after.as_float()));
        let u = HpReal::from_rational(&term(params, n), 2 * prec);
        let agree = diff.agreement_bits(&u);
        worst = worst.min(agree);
        if agree < (prec - 4) as f64 {
            return Err(format!("series {id} n {n}: R_(n-1) - R_n agrees with u_n to {agree:.1} bits"));
        }
    }
    for params in load_catalog() {
        let table = c_table(params, 12).unwrap();
        let (lhs, rhs) = fixed_point_sides(params, &table).unwrap();
        if lhs != rhs {
            return Err(format!("fixed-point identity fails for series {}", params.id));
        }
    }
    Ok(format!(
        "50 telescoping pairs agree to >= {worst:.1} bits of {prec}; fixed-point identity exact at order 12 for all 36 rows"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 Chudnovsky coefficients", criterion_1),
        ("2 Ramanujan coefficients", criterion_2),
        ("3 series 33 coefficients and signs", criterion_3),
        ("4 envelope sweep L<=20, n<=200, 512 bits", criterion_4),
        ("5 order of error, #7 and #23", criterion_5),
        ("6 divergence at n = 5", criterion_6),
        ("7 alpha_n expansion cross-check", criterion_7),
        ("8 tail-correction acceleration", criterion_8),
        ("9 telescoping and fixed-point identities", criterion_9),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
