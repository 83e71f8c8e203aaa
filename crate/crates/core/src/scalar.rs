//! Exact scalar field abstraction.
//!
//! Every geometric decision in this crate is an equality or sign test, so the
//! scalar type must be an exact ordered field. [`BigRational`] is the default;
//! fixed-width ratios such as [`Rational64`] also satisfy the trait and are
//! handy for small, overflow-free experiments.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, Signed};

pub use num_rational::{BigRational, Rational64};

/// An exact ordered field with a textual `p/q` form.
pub trait Field:
    Clone + Num + Signed + Ord + Hash + Debug + Display + FromStr<Err: Display> + FromPrimitive + Send + Sync + 'static
{
    /// Embeds a machine integer.
    fn int(n: i64) -> Self {
        Self::from_i64(n).expect("field must contain the integers")
    }

    /// The ratio `p / q`. Panics when `q == 0`.
    fn ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Self::int(p) / Self::int(q)
    }

    /// Exact division that reports a zero divisor instead of panicking.
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else {
            Some(self.clone() / rhs.clone())
        }
    }
}

impl<T> Field for T where
    T: Clone
        + Num
        + Signed
        + Ord
        + Hash
        + Debug
        + Display
        + FromStr<Err: Display>
        + FromPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Parses a scalar from `"p/q"` or `"p"`.
pub fn parse_scalar<F: Field>(text: &str) -> Result<F, String> {
    let trimmed = text.trim();
    if let Some((_, den)) = trimmed.split_once('/') {
        if den.trim().trim_start_matches(['+', '-']).chars().all(|c| c == '0') {
            return Err(format!("zero denominator in {trimmed:?}"));
        }
    }
    trimmed.parse::<F>().map_err(|e| format!("invalid rational {trimmed:?}: {e}"))
}

/// Renders a scalar in canonical `p/q` form (`p` when `q = 1`).
pub fn format_scalar<F: Field>(value: &F) -> String {
    value.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    #[test]
    fn lowest_terms_and_sign() {
        let a: BigRational = parse_scalar("6/-4").unwrap();
        assert_eq!(format_scalar(&a), "-3/2");
        let b: BigRational = parse_scalar("10/5").unwrap();
        assert_eq!(format_scalar(&b), "2");
    }

    #[test]
    fn zero_denominator_is_an_error() {
        assert!(parse_scalar::<BigRational>("1/0").is_err());
        assert!(BigRational::one().checked_div(&BigRational::zero()).is_none());
    }

    #[test]
    fn fixed_width_ratio_is_a_field() {
        let x = Rational64::ratio(1, 3) + Rational64::ratio(1, 6);
        assert_eq!(x, Rational64::ratio(1, 2));
    }
}
