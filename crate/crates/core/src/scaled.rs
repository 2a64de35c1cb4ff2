//! Extended-range non-negative reals.
//!
//! Products of thousands of kernel values leave the `f64` range quickly, so
//! values are kept as `mantissa * 2^exponent` with the mantissa in `[1, 2)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledNonneg {
    mantissa: f64,
    exponent: i64,
}

const EXP_MASK: u64 = 0x7ff0_0000_0000_0000;
const FRAC_MASK: u64 = 0x000f_ffff_ffff_ffff;

/// Split a positive finite `x` into `(m, e)` with `x = m * 2^e`, `m` in `[1, 2)`.
fn frexp(x: f64) -> (f64, i64) {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let raw = ((bits & EXP_MASK) >> 52) as i64;
    if raw == 0 {
        // subnormal: renormalise through an exact power-of-two scaling
        let (m, e) = frexp(x * f64::from_bits(((1023 + 64) as u64) << 52));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & FRAC_MASK) | (1023u64 << 52));
    (m, raw - 1023)
}

/// `2^e` for `e` inside the normal range.
pub(crate) fn pow2(e: i64) -> f64 {
    if e < -1022 {
        if e < -1074 {
            return 0.0;
        }
        return f64::from_bits(1u64 << (e + 1074));
    }
    if e > 1023 {
        return f64::INFINITY;
    }
    f64::from_bits(((e + 1023) as u64) << 52)
}

impl ScaledNonneg {
    pub const ZERO: Self = Self { mantissa: 0.0, exponent: 0 };
    pub const ONE: Self = Self { mantissa: 1.0, exponent: 0 };

    /// Panics on negative or non-finite input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0 && x.is_finite(), "ScaledNonneg::from_f64({x})");
        if x == 0.0 {
            return Self::ZERO;
        }
        let (mantissa, exponent) = frexp(x);
        Self { mantissa, exponent }
    }

    /// `x * 2^e` without leaving the extended range.
    pub fn from_parts(x: f64, e: i64) -> Self {
        let mut s = Self::from_f64(x);
        if !s.is_zero() {
            s.exponent += e;
        }
        s
    }

    /// Build from a natural logarithm; `-inf` maps to zero.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        assert!(ln.is_finite(), "ScaledNonneg::from_ln({ln})");
        let l2 = ln / std::f64::consts::LN_2;
        let e = l2.floor();
        let frac = (ln - e * std::f64::consts::LN_2).exp();
        Self::from_parts(frac, e as i64)
    }

    pub fn mantissa(self) -> f64 {
        self.mantissa
    }

    pub fn exponent(self) -> i64 {
        self.exponent
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    pub fn ln(self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mantissa.ln() + self.exponent as f64 * std::f64::consts::LN_2
    }

    /// Nearest `f64`; saturates to `inf` or flushes to `0`.
    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.exponent > 1023 {
            return f64::INFINITY;
        }
        if self.exponent < -1074 {
            return 0.0;
        }
        if self.exponent < -1022 {
            // two steps so the intermediate stays normal
            return self.mantissa * pow2(-1022) * pow2(self.exponent + 1022);
        }
        self.mantissa * pow2(self.exponent)
    }

    pub fn powf(self, p: f64) -> Self {
        if self.is_zero() {
            return if p == 0.0 { Self::ONE } else { Self::ZERO };
        }
        Self::from_ln(self.ln() * p)
    }
}

impl Default for ScaledNonneg {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Mul for ScaledNonneg {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        let mut m = self.mantissa * rhs.mantissa;
        let mut e = self.exponent + rhs.exponent;
        if m >= 2.0 {
            m *= 0.5;
            e += 1;
        }
        Self { mantissa: m, exponent: e }
    }
}

impl Div for ScaledNonneg {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by zero ScaledNonneg");
        if self.is_zero() {
            return Self::ZERO;
        }
        let mut m = self.mantissa / rhs.mantissa;
        let mut e = self.exponent - rhs.exponent;
        if m < 1.0 {
            m *= 2.0;
            e -= 1;
        }
        Self { mantissa: m, exponent: e }
    }
}

impl Add for ScaledNonneg {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= rhs.exponent { (self, rhs) } else { (rhs, self) };
        let shift = small.exponent - big.exponent;
        if shift < -60 {
            return big;
        }
        Self::from_parts(big.mantissa + small.mantissa * pow2(shift), big.exponent)
    }
}

impl std::iter::Sum for ScaledNonneg {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for ScaledNonneg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            _ => match self.exponent.cmp(&other.exponent) {
                Ordering::Equal => self.mantissa.partial_cmp(&other.mantissa),
                o => Some(o),
            },
        }
    }
}

impl fmt::Debug for ScaledNonneg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Display for ScaledNonneg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let log10 = self.ln() / std::f64::consts::LN_10;
        let e10 = log10.floor();
        write!(f, "{:.12}e{}", 10f64.powf(log10 - e10), e10 as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn extreme_products_stay_finite() {
        let tiny = ScaledNonneg::from_f64(1e-300);
        let mut acc = ScaledNonneg::ONE;
        for _ in 0..100 {
            acc = acc * tiny;
        }
        assert!((acc.ln() - 100.0 * 1e-300f64.ln()).abs() < 1e-9);
        assert_eq!(acc.to_f64(), 0.0);
        let back = acc / acc;
        assert_eq!(back, ScaledNonneg::ONE);
    }

    #[test]
    fn subnormal_input_is_normalised() {
        let x = ScaledNonneg::from_f64(5e-320);
        assert!(x.mantissa() >= 1.0 && x.mantissa() < 2.0);
        assert!((x.to_f64() - 5e-320).abs() <= 1e-323);
    }

    #[test]
    fn zero_behaviour() {
        let z = ScaledNonneg::ZERO;
        assert_eq!(z.ln(), f64::NEG_INFINITY);
        assert_eq!(ScaledNonneg::from_ln(f64::NEG_INFINITY), z);
        assert_eq!(z + ScaledNonneg::ONE, ScaledNonneg::ONE);
        assert!(z < ScaledNonneg::from_f64(1e-200));
    }

    proptest! {
        #[test]
        fn matches_f64_arithmetic(a in 1e-150f64..1e150, b in 1e-150f64..1e150) {
            let sa = ScaledNonneg::from_f64(a);
            let sb = ScaledNonneg::from_f64(b);
            prop_assert!(((sa * sb).to_f64() / (a * b) - 1.0).abs() < 1e-15);
            prop_assert!(((sa + sb).to_f64() / (a + b) - 1.0).abs() < 1e-15);
            prop_assert!(((sa / sb).to_f64() / (a / b) - 1.0).abs() < 1e-15);
            prop_assert_eq!(sa.partial_cmp(&sb), a.partial_cmp(&b));
        }

        #[test]
        fn ln_roundtrip(l in -5000.0f64..5000.0) {
            let s = ScaledNonneg::from_ln(l);
            prop_assert!((s.ln() - l).abs() < 1e-12 * l.abs().max(1.0));
            prop_assert!(s.mantissa() >= 1.0 && s.mantissa() < 2.0);
        }
    }
}
