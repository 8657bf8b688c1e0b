//! Exact rational arithmetic for edge weights and objective values.
//!
//! All costs are carried as `Ratio<i128>` so that every bound in the test
//! suite can be checked with exact comparisons instead of tolerances.

use num_rational::Ratio;
use num_traits::{Signed, Zero};

pub type Rational = Ratio<i128>;

/// Shorthand for an integer rational.
pub fn rat(n: i128) -> Rational {
    Rational::from_integer(n)
}

/// `num / den`, panicking on a zero denominator.
pub fn ratio(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

/// Display-only decimal rendering with six places, used by reports and CSV.
pub fn to_decimal_6(r: &Rational) -> String {
    if r.is_zero() {
        return "0.000000".to_string();
    }
    // Scale to micro-units with rounding half away from zero.
    let scaled = r * rat(1_000_000);
    let num = scaled.numer();
    let den = scaled.denom();
    let half = den / 2;
    let rounded = if *num >= 0 {
        (num + half) / den
    } else {
        (num - half) / den
    };
    let sign = if rounded < 0 { "-" } else { "" };
    let abs = rounded.abs();
    format!("{}{}.{:06}", sign, abs / 1_000_000, abs % 1_000_000)
}
