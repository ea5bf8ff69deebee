//! Max-shifted accumulation of quantities held as logarithms.

use crate::scalar::Scalar;

/// Online `ln Σ exp(x_i)`.
///
/// The running sum is kept relative to the largest term seen so far, so
/// neither long products of small probabilities nor large capitals
/// underflow or overflow.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp<T> {
    max: T,
    scaled: T,
}

impl<T: Scalar> Default for LogSumExp<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> LogSumExp<T> {
    pub fn new() -> Self {
        Self {
            max: T::neg_infinity(),
            scaled: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        if x == T::neg_infinity() {
            return;
        }
        if x <= self.max {
            self.scaled = self.scaled + (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + T::one();
            self.max = x;
        }
    }

    /// `ln` of the accumulated sum; `-inf` when nothing was added.
    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            T::neg_infinity()
        } else {
            self.max + self.scaled.ln()
        }
    }
}

impl<T: Scalar> FromIterator<T> for LogSumExp<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn log_sum_exp<T: Scalar>(xs: impl IntoIterator<Item = T>) -> T {
    xs.into_iter().collect::<LogSumExp<T>>().value()
}

/// `ln |e^a - e^b|`, `-inf` when `a == b`.
pub fn log_abs_diff<T: Scalar>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == T::neg_infinity() {
        return hi;
    }
    let d = hi - lo;
    if d == T::zero() {
        return T::neg_infinity();
    }
    // ln(1 - e^{-d}), split at ln 2 for accuracy
    let tail = if d < T::LN_2() {
        (-(-d).exp_m1()).ln()
    } else {
        (-(-d).exp()).ln_1p()
    };
    hi + tail
}

/// Log-factorials `ln k!` for `k = 0..=n`.
pub fn log_factorials<T: Scalar>(n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    out.push(acc);
    for k in 1..=n {
        acc = acc + T::from_count(k).ln();
        out.push(acc);
    }
    out
}
