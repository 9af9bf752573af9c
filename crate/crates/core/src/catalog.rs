//! The 36 known rational hypergeometric series for 1/π.
//!
//! Every row has the shape
//!
//! ```text
//! p/π = Σ_k (1/2)_k (q)_k (1-q)_k / (k!)³ · (r + s·k) · t^k
//! ```
//!
//! with `q ∈ {1/6, 1/4, 1/3, 1/2}`, integer `r, s`, rational `t` and an
//! algebraic scale `p = coeff·√radicand`. The table is compiled in and
//! immutable.

use std::sync::OnceLock;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, to_fraction_string};

/// `coeff · √radicand` with a squarefree radicand (1 for rational values).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraicScale {
    pub coeff: Rational,
    pub radicand: u32,
}

impl AlgebraicScale {
    pub fn new(coeff: Rational, radicand: u32) -> Result<Self> {
        if radicand == 0 {
            return Err(Error::Domain("radicand must be positive".into()));
        }
        if !is_squarefree(radicand) {
            return Err(Error::Domain(format!("radicand {radicand} is not squarefree")));
        }
        Ok(Self { coeff, radicand })
    }

    /// The value rounded to `prec` bits; the square root is taken with
    /// 64 extra bits so the result is within one ulp or so.
    pub fn to_float(&self, prec: u32) -> Float {
        let work = prec + 64;
        let root = Float::with_val(work, self.radicand).sqrt();
        Float::with_val(prec, root * &self.coeff)
    }

    pub fn is_rational(&self) -> bool {
        self.radicand == 1
    }
}

impl std::fmt::Display for AlgebraicScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}*sqrt({})", to_fraction_string(&self.coeff), self.radicand)
    }
}

pub(crate) fn is_squarefree(n: u32) -> bool {
    let mut m = n;
    let mut d = 2u32;
    while d * d <= m {
        if m.is_multiple_of(d) {
            m /= d;
            if m.is_multiple_of(d) {
                return false;
            }
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesParams {
    pub id: u32,
    pub p: AlgebraicScale,
    pub q: Rational,
    pub r: i64,
    pub s: i64,
    pub t: Rational,
    /// True when `|t| = 1`, where the remainder expansion is unproved.
    pub conjectural: bool,
}

impl SeriesParams {
    /// Builds a row outside the compiled catalog, for experiments and tests.
    ///
    /// Checks `0 < q < 1`, `|t| ≤ 1` and `t ≠ 1`; the conjectural flag is
    /// derived from `|t| = 1`. Nothing checks that the row actually sums to
    /// `p/π`.
    pub fn new(id: u32, p: AlgebraicScale, q: Rational, r: i64, s: i64, t: Rational) -> Result<Self> {
        if q <= 0 || q >= 1 {
            return Err(Error::Domain(format!("q = {} must lie in (0, 1)", to_fraction_string(&q))));
        }
        let abs_t = Rational::from(t.abs_ref());
        if abs_t > 1 {
            return Err(Error::Domain(format!("|t| = {} exceeds 1", to_fraction_string(&abs_t))));
        }
        if t == 1 {
            return Err(Error::Domain("t = 1 makes the series diverge".into()));
        }
        let conjectural = abs_t == 1;
        Ok(Self { id, p, q, r, s, t, conjectural })
    }
}

// (id, p coeff num, p coeff den, radicand, q den, r, s, t num, t den)
type Row = (u32, i64, i64, u32, i64, i64, i64, i64, i64);

const ROWS: [Row; 36] = [
    (1, 5, 1, 15, 6, 8, 63, -64, 125),
    (2, 32, 1, 2, 6, 15, 154, -27, 512),
    (3, 32, 1, 6, 6, 25, 342, -1, 512),
    (4, 160, 9, 30, 6, 31, 506, -9, 64_000),
    (5, 640, 3, 15, 6, 263, 5418, -1, 512_000),
    (6, 1760, 1, 330, 6, 10177, 261_702, -1, 440 * 440 * 440),
    (7, 426_880, 1, 10005, 6, 13_591_409, 545_140_134, -1, 53_360 * 53_360 * 53_360),
    (8, 5, 1, 5, 6, 3, 28, 27, 125),
    (9, 5, 6, 15, 6, 1, 11, 4, 125),
    (10, 11, 4, 33, 6, 5, 63, 8, 1331),
    (11, 85, 54, 255, 6, 8, 133, 64, 614_125),
    (12, 8, 1, 1, 4, 3, 20, -1, 4),
    (13, 72, 1, 1, 4, 23, 260, -1, 324),
    (14, 3528, 1, 1, 4, 1123, 21460, -1, 777_924),
    (15, 9, 1, 7, 4, 8, 65, -256, 3969),
    (16, 16, 3, 3, 4, 3, 28, -1, 48),
    (17, 288, 5, 5, 4, 41, 644, -1, 25920),
    (18, 9, 2, 1, 4, 1, 7, 32, 81),
    (19, 2, 1, 3, 4, 1, 8, 1, 9),
    (20, 9, 4, 2, 4, 1, 10, 1, 81),
    (21, 49, 9, 3, 4, 3, 40, 1, 2401),
    (22, 18, 1, 11, 4, 19, 280, 1, 9801),
    (23, 9801, 4, 2, 4, 1103, 26390, 1, 99 * 99 * 99 * 99),
    (24, 12, 1, 3, 3, 7, 51, -1, 16),
    (25, 96, 1, 3, 3, 53, 615, -1, 1024),
    (26, 1500, 1, 3, 3, 827, 14151, -1, 250_000),
    (27, 4, 3, 3, 3, 1, 5, -9, 16),
    (28, 4, 5, 15, 3, 1, 9, -1, 80),
    (29, 108, 7, 7, 3, 13, 165, -1, 3024),
    (30, 3, 1, 3, 3, 1, 6, 1, 2),
    (31, 27, 4, 1, 3, 2, 15, 2, 27),
    (32, 15, 2, 3, 3, 4, 33, 4, 125),
    (33, 2, 1, 1, 2, 1, 4, -1, 1),
    (34, 2, 1, 2, 2, 1, 6, -1, 8),
    (35, 4, 1, 1, 2, 1, 6, 1, 4),
    (36, 16, 1, 1, 2, 5, 42, 1, 64),
];

/// All 36 rows, ids 1..=36 in order.
pub fn load_catalog() -> &'static [SeriesParams] {
    static CATALOG: OnceLock<Vec<SeriesParams>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        ROWS.iter()
            .map(|&(id, pn, pd, rad, qd, r, s, tn, td)| {
                let p = AlgebraicScale::new(Rational::from((pn, pd)), rad)
                    .expect("catalog radicands are squarefree");
                SeriesParams::new(id, p, Rational::from((1, qd)), r, s, Rational::from((tn, td)))
                    .expect("catalog rows are valid")
            })
            .collect()
    })
}

pub fn get_series(id: i64) -> Result<&'static SeriesParams> {
    if !(1..=36).contains(&id) {
        return Err(Error::UnknownSeries(id));
    }
    Ok(&load_catalog()[id as usize - 1])
}

/// JSON shape of one catalog row; rationals travel as `"num/den"` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub id: u32,
    pub p: ScaleRecord,
    pub q: String,
    pub r: i64,
    pub s: i64,
    pub t: String,
    pub conjectural: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub coeff: String,
    pub radicand: u32,
}

impl From<&SeriesParams> for SeriesRecord {
    fn from(s: &SeriesParams) -> Self {
        SeriesRecord {
            id: s.id,
            p: ScaleRecord {
                coeff: to_fraction_string(&s.p.coeff),
                radicand: s.p.radicand,
            },
            q: to_fraction_string(&s.q),
            r: s.r,
            s: s.s,
            t: to_fraction_string(&s.t),
            conjectural: s.conjectural,
        }
    }
}

impl TryFrom<&SeriesRecord> for SeriesParams {
    type Error = Error;

    fn try_from(rec: &SeriesRecord) -> Result<Self> {
        let p = AlgebraicScale::new(parse_rational(&rec.p.coeff)?, rec.p.radicand)?;
        let params = SeriesParams::new(
            rec.id,
            p,
            parse_rational(&rec.q)?,
            rec.r,
            rec.s,
            parse_rational(&rec.t)?,
        )?;
        if params.conjectural != rec.conjectural {
            return Err(Error::Parse(format!("series {}: inconsistent conjectural flag", rec.id)));
        }
        Ok(params)
    }
}

pub fn export_json() -> String {
    let records: Vec<SeriesRecord> = load_catalog().iter().map(SeriesRecord::from).collect();
    serde_json::to_string_pretty(&records).expect("records serialize")
}

pub fn import_json(text: &str) -> Result<Vec<SeriesParams>> {
    let records: Vec<SeriesRecord> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    records.iter().map(SeriesParams::try_from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_six_rows_in_order() {
        let cat = load_catalog();
        assert_eq!(cat.len(), 36);
        for (i, row) in cat.iter().enumerate() {
            assert_eq!(row.id as usize, i + 1);
        }
    }

    #[test]
    fn chudnovsky_row() {
        let s = get_series(7).unwrap();
        assert_eq!(s.q, Rational::from((1, 6)));
        assert_eq!(s.r, 13591409);
        assert_eq!(s.s, 545140134);
        assert_eq!(s.t, Rational::from((-1, 53360i64.pow(3))));
        assert_eq!(s.p, AlgebraicScale { coeff: Rational::from(426880), radicand: 10005 });
        assert!(!s.conjectural);
    }

    #[test]
    fn ramanujan_and_half_rows() {
        let s = get_series(23).unwrap();
        assert_eq!(s.t, Rational::from((1, 99i64.pow(4))));
        assert_eq!(s.s, 26390);

        let s = get_series(35).unwrap();
        assert_eq!((s.q.clone(), s.r, s.s), (Rational::from((1, 2)), 1, 6));
        assert_eq!(s.t, Rational::from((1, 4)));

        let s = get_series(33).unwrap();
        assert_eq!((s.r, s.s), (1, 4));
        assert_eq!(s.t, -1);
        assert!(s.conjectural);
        assert!(s.p.is_rational());
    }

    #[test]
    fn out_of_range_ids() {
        assert_eq!(get_series(0).unwrap_err(), Error::UnknownSeries(0));
        assert_eq!(get_series(37).unwrap_err(), Error::UnknownSeries(37));
        assert!(get_series(-3).is_err());
    }

    #[test]
    fn row_invariants() {
        let allowed_q: Vec<Rational> = [6, 4, 3, 2].iter().map(|&d| Rational::from((1, d))).collect();
        let mut unit_t = vec![];
        for row in load_catalog() {
            assert!(allowed_q.contains(&row.q));
            assert!(Rational::from(row.t.abs_ref()) <= 1);
            assert!(row.t != 1);
            assert!(row.p.coeff > 0);
            assert!(is_squarefree(row.p.radicand) && row.p.radicand < 1_000_000);
            if row.conjectural {
                unit_t.push(row.id);
            }
        }
        assert_eq!(unit_t, vec![33]);
    }

    #[test]
    fn squarefree_check() {
        assert!(is_squarefree(10005));
        assert!(is_squarefree(1));
        assert!(!is_squarefree(12));
        assert!(!is_squarefree(49));
        assert!(AlgebraicScale::new(Rational::from(1), 8).is_err());
    }

    #[test]
    fn constructor_rejects_bad_rows() {
        let p = AlgebraicScale::new(Rational::from(1), 1).unwrap();
        assert!(SeriesParams::new(0, p.clone(), Rational::from(1), 1, 1, Rational::from((1, 2))).is_err());
        assert!(SeriesParams::new(0, p.clone(), Rational::from((1, 3)), 1, 1, Rational::from(1)).is_err());
        assert!(SeriesParams::new(0, p.clone(), Rational::from((1, 3)), 1, 1, Rational::from(-2)).is_err());
        let ok = SeriesParams::new(0, p, Rational::from((1, 3)), 1, 0, Rational::from((1, 5))).unwrap();
        assert!(!ok.conjectural);
    }

    #[test]
    fn json_round_trip() {
        let text = export_json();
        let back = import_json(&text).unwrap();
        assert_eq!(back.as_slice(), load_catalog());
        assert!(text.contains("\"t\": \"-1/151931373056000\""));
    }

    #[test]
    fn display_of_scale() {
        assert_eq!(get_series(4).unwrap().p.to_string(), "160/9*sqrt(30)");
        assert_eq!(get_series(33).unwrap().p.to_string(), "2/1*sqrt(1)");
    }
}
