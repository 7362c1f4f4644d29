//! Exact dyadic-rational arithmetic.
//!
//! Every measure in this crate is a count of finest grid cells times a
//! power-of-two cell area, so measures are dyadic rationals and all
//! sparsity comparisons can be made exact. Thresholds supplied as `f64`
//! (β, ε, …) are themselves dyadic rationals, which lets us compare
//! `count / total` against a float threshold without any rounding.

use std::cmp::Ordering;

/// A nonnegative dyadic rational `num / 2^log2_den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicRat {
    num: u64,
    log2_den: u32,
}

impl DyadicRat {
    pub const ZERO: DyadicRat = DyadicRat { num: 0, log2_den: 0 };
    pub const ONE: DyadicRat = DyadicRat { num: 1, log2_den: 0 };

    pub fn new(num: u64, log2_den: u32) -> Self {
        DyadicRat { num, log2_den }.reduced()
    }

    fn reduced(self) -> Self {
        if self.num == 0 {
            return DyadicRat::ZERO;
        }
        let shift = self.num.trailing_zeros().min(self.log2_den);
        DyadicRat {
            num: self.num >> shift,
            log2_den: self.log2_den - shift,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / (self.log2_den as f64).exp2()
    }

    pub fn add(&self, other: &DyadicRat) -> DyadicRat {
        let d = self.log2_den.max(other.log2_den);
        let a = (self.num as u128) << (d - self.log2_den);
        let b = (other.num as u128) << (d - other.log2_den);
        let sum = a + b;
        debug_assert!(sum <= u64::MAX as u128);
        DyadicRat::new(sum as u64, d)
    }

    pub fn cmp_exact(&self, other: &DyadicRat) -> Ordering {
        let d = self.log2_den.max(other.log2_den);
        let a = (self.num as u128) << (d - self.log2_den);
        let b = (other.num as u128) << (d - other.log2_den);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

/// Exactly compare the fraction `count / total` against the `f64` value
/// `threshold`, with no rounding anywhere.
///
/// Decomposes `threshold = m · 2^e` from its bit pattern and cross-multiplies
/// in 128-bit integers. Requires `total > 0`, a finite `threshold` in
/// `(2^-40, 2^40)`, and `count`, `total` below 2^40; all comparisons in this
/// crate are overlap fractions against parameters like β ∈ (1/2, 1), well
/// inside those limits.
pub fn cmp_frac_vs_f64(count: u64, total: u64, threshold: f64) -> Ordering {
    assert!(total > 0, "empty total in exact comparison");
    assert!(
        threshold.is_finite() && threshold > 0.0,
        "threshold must be finite and positive"
    );
    assert!(count < (1 << 40) && total < (1 << 40), "count out of range");

    let bits = threshold.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let raw_mant = bits & ((1u64 << 52) - 1);
    // Normal floats carry an implicit leading bit; subnormals do not.
    let (mant, exp) = if raw_exp == 0 {
        (raw_mant, -1074i64)
    } else {
        (raw_mant | (1u64 << 52), raw_exp - 1075)
    };
    assert!((-100..=100).contains(&exp), "threshold magnitude out of range");

    // count / total  vs  mant · 2^exp   ⇔   count · 2^(-exp)  vs  mant · total (exp ≤ 0)
    if exp <= 0 {
        let lhs = (count as u128) << (-exp as u32);
        let rhs = (mant as u128) * (total as u128);
        lhs.cmp(&rhs)
    } else {
        let lhs = count as u128;
        let rhs = ((mant as u128) * (total as u128)) << (exp as u32);
        lhs.cmp(&rhs)
    }
}

/// `count / total < threshold`, exactly.
pub fn frac_lt(count: u64, total: u64, threshold: f64) -> bool {
    cmp_frac_vs_f64(count, total, threshold) == Ordering::Less
}

/// `count / total ≥ threshold`, exactly.
pub fn frac_ge(count: u64, total: u64, threshold: f64) -> bool {
    cmp_frac_vs_f64(count, total, threshold) != Ordering::Less
}
