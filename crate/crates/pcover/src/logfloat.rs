//! Nonnegative numbers stored as natural logs, for the float cost mode.
//!
//! Costs like `p^|T|` with large `|T|` underflow f64; summing in log space
//! keeps them usable for Monte Carlo-scale instances where rationals would be
//! too slow.

/// ln(x) for x >= 0, with NEG_INFINITY for zero.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogNum(pub f64);

impl LogNum {
    pub const ZERO: LogNum = LogNum(f64::NEG_INFINITY);
    pub const ONE: LogNum = LogNum(0.0);

    pub fn from_value(x: f64) -> Self {
        assert!(x >= 0.0, "LogNum holds nonnegative values, got {x}");
        LogNum(x.ln())
    }

    pub fn from_ln(ln: f64) -> Self {
        LogNum(ln)
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// log-sum-exp in two operands.
    pub fn add(self, other: LogNum) -> LogNum {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.0 >= other.0 {
            (self.0, other.0)
        } else {
            (other.0, self.0)
        };
        LogNum(hi + (lo - hi).exp().ln_1p())
    }

    pub fn mul(self, other: LogNum) -> LogNum {
        if self.is_zero() || other.is_zero() {
            return LogNum::ZERO;
        }
        LogNum(self.0 + other.0)
    }

    pub fn powi(self, k: i64) -> LogNum {
        if self.is_zero() {
            return if k == 0 { LogNum::ONE } else { LogNum::ZERO };
        }
        LogNum(self.0 * k as f64)
    }

    pub fn sum(items: impl IntoIterator<Item = LogNum>) -> LogNum {
        items.into_iter().fold(LogNum::ZERO, LogNum::add)
    }
}
