//! Finite sums of exponentials `Σ aₖ e^{rₖ t}` with complex amplitudes and real rates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Rates closer than this are treated as the same exponential.
pub const RATE_MERGE_TOL: f64 = 1e-12;
/// Amplitudes below this magnitude are dropped after every operation.
pub const AMPLITUDE_DROP_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub amp: Complex64,
    pub rate: f64,
}

/// A canonical (sorted, merged, pruned) exponential sum.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpSum {
    terms: Vec<ExpTerm>,
}

impl ExpSum {
    pub fn zero() -> Self {
        ExpSum { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::term(Complex64::new(c, 0.0), 0.0)
    }

    pub fn real(amp: f64, rate: f64) -> Self {
        Self::term(Complex64::new(amp, 0.0), rate)
    }

    pub fn term(amp: Complex64, rate: f64) -> Self {
        Self::from_terms(vec![ExpTerm { amp, rate }])
    }

    pub fn from_terms(mut terms: Vec<ExpTerm>) -> Self {
        terms.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        let mut merged: Vec<ExpTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if (t.rate - last.rate).abs() <= RATE_MERGE_TOL => last.amp += t.amp,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.amp.norm() >= AMPLITUDE_DROP_TOL);
        ExpSum { terms: merged }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the sum carries no time dependence.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.rate.abs() <= RATE_MERGE_TOL)
    }

    /// Amplitude of the rate-zero term (zero if absent).
    pub fn constant_part(&self) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.rate.abs() <= RATE_MERGE_TOL)
            .map(|t| t.amp)
            .sum()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| term.amp * (term.rate * t).exp())
            .sum()
    }

    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    amp: t.amp * t.rate,
                    rate: t.rate,
                })
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    amp: t.amp * c,
                    rate: t.rate,
                })
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.amp.re.is_finite() && t.amp.im.is_finite() && t.rate.is_finite())
    }

    /// Largest amplitude magnitude, or zero.
    pub fn max_amp(&self) -> f64 {
        self.terms.iter().map(|t| t.amp.norm()).fold(0.0, f64::max)
    }

    /// Termwise comparison after canonicalization.
    pub fn approx_eq(&self, other: &ExpSum, tol: f64) -> bool {
        (self - other).max_amp() <= tol
    }

    /// `[re, im, rate]` triples, used by the JSON dumps.
    pub fn triples(&self) -> Vec<[f64; 3]> {
        self.terms
            .iter()
            .map(|t| [t.amp.re, t.amp.im, t.rate])
            .collect()
    }
}

impl fmt::Display for ExpSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if t.amp.im == 0.0 {
                write!(f, "{}", t.amp.re)?;
            } else {
                write!(f, "({})", t.amp)?;
            }
            if t.rate != 0.0 {
                write!(f, "·e^({}t)", t.rate)?;
            }
        }
        Ok(())
    }
}

impl Add for &ExpSum {
    type Output = ExpSum;
    fn add(self, rhs: &ExpSum) -> ExpSum {
        ExpSum::from_terms(self.terms.iter().chain(rhs.terms.iter()).copied().collect())
    }
}

impl Sub for &ExpSum {
    type Output = ExpSum;
    fn sub(self, rhs: &ExpSum) -> ExpSum {
        self + &(-rhs)
    }
}

impl Neg for &ExpSum {
    type Output = ExpSum;
    fn neg(self) -> ExpSum {
        ExpSum {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm {
                    amp: -t.amp,
                    rate: t.rate,
                })
                .collect(),
        }
    }
}

impl Mul for &ExpSum {
    type Output = ExpSum;
    fn mul(self, rhs: &ExpSum) -> ExpSum {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                out.push(ExpTerm {
                    amp: a.amp * b.amp,
                    rate: a.rate + b.rate,
                });
            }
        }
        ExpSum::from_terms(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ExpSum {
            type Output = ExpSum;
            fn $m(self, rhs: ExpSum) -> ExpSum {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ExpSum {
    type Output = ExpSum;
    fn neg(self) -> ExpSum {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn merges_and_prunes() {
        let s = ExpSum::from_terms(vec![
            ExpTerm { amp: c(1.0), rate: 0.2 },
            ExpTerm { amp: c(2.0), rate: 0.2 + 1e-13 },
            ExpTerm { amp: c(1e-15), rate: 3.0 },
        ]);
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].amp, c(3.0));
        assert!((&s - &s).is_zero());
    }

    #[test]
    fn product_adds_rates() {
        let a = ExpSum::real(2.0, 0.1);
        let b = ExpSum::real(3.0, -0.3);
        let p = &a * &b;
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].amp, c(6.0));
        assert!((p.terms()[0].rate + 0.2).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = &ExpSum::real(1.5, 0.4) + &ExpSum::term(Complex64::new(0.0, -2.0), -1.1);
        let t = 0.7;
        let h = 1e-5;
        let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
        assert!((fd - s.derivative().eval(t)).norm() < 1e-8);
    }

    proptest! {
        #[test]
        fn eval_is_a_ring_homomorphism(a1 in -3.0f64..3.0, r1 in -1.0f64..1.0,
                                       a2 in -3.0f64..3.0, r2 in -1.0f64..1.0,
                                       t in -2.0f64..2.0) {
            let x = ExpSum::real(a1, r1);
            let y = ExpSum::real(a2, r2);
            let sum = (&x + &y).eval(t);
            let prod = (&x * &y).eval(t);
            prop_assert!((sum - (x.eval(t) + y.eval(t))).norm() < 1e-12);
            prop_assert!((prod - x.eval(t) * y.eval(t)).norm() < 1e-11);
        }
    }
}
