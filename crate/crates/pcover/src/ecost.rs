//! Exact costs of the form `sum_k c_k * e^k` with rational coefficients.
//!
//! Poissonized cover elements price at `prod_x (e*N*mu(x))^{G(x)} / G(x)!`,
//! which is `e^{|G|}` times a rational. Sums of such terms are polynomials in
//! `e`; comparisons against rationals (the 1/2 budget) or against each other
//! are decided exactly by interval refinement on `e`. Transcendence of `e`
//! guarantees a nonzero polynomial never straddles forever.

use crate::rational::{e_bounds, rat_pow, rat_to_f64, rat_to_string, Rat};
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign};

/// A finite sum `sum_k coeffs[k] * e^k`, `k >= 0`. Zero coefficients are not
/// stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct ECost {
    coeffs: BTreeMap<u32, Rat>,
}

impl ECost {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rat(r: Rat) -> Self {
        Self::term(r, 0)
    }

    /// The single term `r * e^k`.
    pub fn term(r: Rat, k: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !r.is_zero() {
            coeffs.insert(k, r);
        }
        ECost { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: u32) -> Rat {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rat)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    /// Approximate value; fine for reports, never for certification.
    pub fn to_f64(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| rat_to_f64(c) * std::f64::consts::E.powi(*k as i32))
            .sum()
    }

    fn sub(&self, other: &ECost) -> BTreeMap<u32, Rat> {
        let mut diff = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let entry = diff.entry(*k).or_insert_with(Rat::zero);
            *entry -= c;
            if entry.is_zero() {
                diff.remove(k);
            }
        }
        diff
    }

    /// Exact comparison with another cost.
    pub fn cmp_cost(&self, other: &ECost) -> Ordering {
        poly_sign(&self.sub(other))
    }

    /// Exact comparison with a plain rational.
    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        self.cmp_cost(&ECost::from_rat(r.clone()))
    }
}

impl Add<&ECost> for ECost {
    type Output = ECost;
    fn add(mut self, rhs: &ECost) -> ECost {
        self += rhs;
        self
    }
}

impl AddAssign<&ECost> for ECost {
    fn add_assign(&mut self, rhs: &ECost) {
        for (k, c) in &rhs.coeffs {
            let entry = self.coeffs.entry(*k).or_insert_with(Rat::zero);
            *entry += c;
            if entry.is_zero() {
                self.coeffs.remove(k);
            }
        }
    }
}

impl fmt::Debug for ECost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                if *k == 0 {
                    rat_to_string(c)
                } else {
                    format!("{}*e^{}", rat_to_string(c), k)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Display for ECost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Sign of `sum_k c_k e^k` for rational `c_k`, decided exactly.
fn poly_sign(coeffs: &BTreeMap<u32, Rat>) -> Ordering {
    if coeffs.is_empty() {
        return Ordering::Equal;
    }
    if coeffs.values().all(|c| c.is_positive()) {
        return Ordering::Greater;
    }
    if coeffs.values().all(|c| c.is_negative()) {
        return Ordering::Less;
    }
    // Mixed signs: evaluate over a shrinking rational bracket of e. A nonzero
    // rational polynomial cannot vanish at the transcendental point e, so the
    // bracket eventually excludes zero.
    let mut terms = 8u32;
    loop {
        let (e_lo, e_hi) = e_bounds(terms);
        let mut lo = Rat::zero();
        let mut hi = Rat::zero();
        for (k, c) in coeffs {
            let pk_lo = rat_pow(&e_lo, *k as i64);
            let pk_hi = rat_pow(&e_hi, *k as i64);
            if c.is_positive() {
                lo += c * &pk_lo;
                hi += c * &pk_hi;
            } else {
                lo += c * &pk_hi;
                hi += c * &pk_lo;
            }
        }
        if lo.is_positive() {
            return Ordering::Greater;
        }
        if hi.is_negative() {
            return Ordering::Less;
        }
        terms *= 2;
        assert!(
            terms <= 1 << 16,
            "e-polynomial comparison failed to converge: {coeffs:?}"
        );
    }
}
