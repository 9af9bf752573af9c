//! Asymptotic expansions of the truncation remainder of the rational
//! hypergeometric series for 1/π.
//!
//! For a series `p/π = Σ u_k` with
//! `u_k = (1/2)_k (q)_k (1-q)_k / (k!)³ · (r + s k) · t^k`, the remainder
//! after `n + 1` terms behaves like
//!
//! ```text
//! R_n = F_n · (c_0 + c_1/n + … + c_{J-1}/n^{J-1} + O(n^-J)),
//! F_n = (1/2)_n (q)_n (1-q)_n / n!³ · n · t^n.
//! ```
//!
//! The crate computes the `c_j` exactly ([`expansion`]), evaluates `R_n`
//! and friends at arbitrary precision ([`hp`]) and puts both to work
//! ([`analysis`]). The 36 known rows live in [`catalog`].
//!
//! ```
//! use pi_remainder::{catalog::get_series, expansion::c_table};
//!
//! let chudnovsky = get_series(7).unwrap();
//! let table = c_table(chudnovsky, 2).unwrap();
//! assert_eq!(table.coeffs[0].to_string(), "-2/557403");
//! ```

pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod expansion;
pub mod hp;
pub mod rational;
pub mod series;

pub use error::{Error, Result};

/// The guide's chapters, compiled here so their code blocks run as doctests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/catalog.md")]
    pub mod catalog {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    pub mod coefficients {}
    #[doc = include_str!("../../../book/src/stirling.md")]
    pub mod stirling {}
    #[doc = include_str!("../../../book/src/remainders.md")]
    pub mod remainders {}
    #[doc = include_str!("../../../book/src/truncation.md")]
    pub mod truncation {}
    #[doc = include_str!("../../../book/src/envelope.md")]
    pub mod envelope {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
