//! Outward-rounded interval arithmetic over MPFR floats.
//!
//! Every [`Interval`] is a closed enclosure `[lo, hi]` of some real number.
//! Lower endpoints are always rounded toward `-inf` and upper endpoints
//! toward `+inf`, so any real computed along the same arithmetic path is
//! guaranteed to lie inside the result. Comparisons return `None` when the
//! enclosures overlap and the answer cannot be decided at the current
//! precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::AssignRound;
use rug::{Assign, Float, Integer, Rational};

use crate::error::{Error, Result};

/// Closed interval with MPFR endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, value: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    let mut f = Float::new(prec);
    f.assign_round(value, Round::Down);
    f
}

fn up<T>(prec: u32, value: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    let mut f = Float::new(prec);
    f.assign_round(value, Round::Up);
    f
}

impl Interval {
    /// Builds `[lo, hi]`. Panics if `lo > hi` or either endpoint is NaN.
    pub fn new(lo: Float, hi: Float) -> Self {
        assert!(
            !lo.is_nan() && !hi.is_nan() && lo <= hi,
            "invalid interval endpoints"
        );
        Interval { lo, hi }
    }

    /// Degenerate interval holding one float exactly.
    pub fn point(x: Float) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_int(prec: u32, value: i64) -> Self {
        Interval {
            lo: down(prec, value),
            hi: up(prec, value),
        }
    }

    pub fn from_f64(prec: u32, value: f64) -> Self {
        Interval::point(Float::with_val(prec, value))
    }

    pub fn from_rational(prec: u32, value: &Rational) -> Self {
        Interval {
            lo: down(prec, value),
            hi: up(prec, value),
        }
    }

    /// Encloses a big integer, widening the precision if needed so that the
    /// value is held exactly.
    pub fn from_integer(prec: u32, value: &Integer) -> Self {
        let bits = value.significant_bits().max(1);
        let prec = prec.max(bits);
        Interval {
            lo: down(prec, value),
            hi: up(prec, value),
        }
    }

    /// Parses a decimal string (`"0.3"`, `"1e-3"`, `"-2.5"`) into an
    /// enclosure: the lower endpoint is the parse rounded down and the upper
    /// endpoint the parse rounded up, so the exact decimal value is inside.
    pub fn from_decimal(prec: u32, text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let parse = || {
            Float::parse(trimmed)
                .map_err(|e| Error::Domain(format!("cannot parse {trimmed:?} as a real: {e}")))
        };
        let (lo, _) = Float::with_val_round(prec, parse()?, Round::Down);
        let (hi, _) = Float::with_val_round(prec, parse()?, Round::Up);
        if lo.is_nan() || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("{trimmed:?} is not a finite real")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn ln2(prec: u32) -> Self {
        Interval {
            lo: down(prec, Constant::Log2),
            hi: up(prec, Constant::Log2),
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    fn prec_with(&self, other: &Interval) -> u32 {
        self.prec().max(other.prec())
    }

    /// Midpoint, rounded to nearest.
    pub fn mid(&self) -> Float {
        let prec = self.prec();
        let mut m = Float::with_val(prec + 1, &self.lo + &self.hi);
        m /= 2;
        m.set_prec(prec);
        m
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Certified sign: `Some(Greater)` if every element is positive,
    /// `Some(Less)` if every element is negative, `Some(Equal)` for the
    /// point zero, `None` otherwise.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_sign_positive() && !self.lo.is_zero() {
            Some(Ordering::Greater)
        } else if self.hi.is_sign_negative() && !self.hi.is_zero() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// `Some(true)` if every element of `self` is below every element of
    /// `other`, `Some(false)` if no element of `self` is below any element
    /// of `other`, `None` when undecided.
    pub fn lt(&self, other: &Interval) -> Option<bool> {
        if self.hi < other.lo {
            Some(true)
        } else if self.lo >= other.hi {
            Some(false)
        } else {
            None
        }
    }

    pub fn gt(&self, other: &Interval) -> Option<bool> {
        other.lt(self)
    }

    /// Interval hull of two enclosures.
    pub fn hull(&self, other: &Interval) -> Interval {
        let lo = if self.lo <= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi >= other.hi { &self.hi } else { &other.hi };
        Interval {
            lo: lo.clone(),
            hi: hi.clone(),
        }
    }

    /// Pointwise maximum of two enclosed reals.
    pub fn max(&self, other: &Interval) -> Interval {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi >= other.hi { &self.hi } else { &other.hi };
        Interval {
            lo: lo.clone(),
            hi: hi.clone(),
        }
    }

    pub fn abs(&self) -> Interval {
        match self.sign() {
            Some(Ordering::Less) => -self,
            Some(_) => self.clone(),
            None => {
                let neg_lo = Float::with_val(self.prec(), -&self.lo);
                let hi = if neg_lo > self.hi { neg_lo } else { self.hi.clone() };
                Interval {
                    lo: Float::new(self.prec()),
                    hi,
                }
            }
        }
    }

    /// Upper bound on `|x|` over the enclosure.
    pub fn mag(&self) -> Float {
        self.abs().hi
    }

    /// `self^exponent` by binary exponentiation on intervals.
    pub fn powu(&self, exponent: u64) -> Interval {
        let prec = self.prec();
        let mut result = Interval::from_int(prec, 1);
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn recip(&self) -> Interval {
        &Interval::from_int(self.prec(), 1) / self
    }

    /// Natural logarithm. Requires a strictly positive enclosure.
    pub fn ln(&self) -> Result<Interval> {
        if self.sign() != Some(Ordering::Greater) {
            return Err(Error::Domain(
                "logarithm of a non-positive enclosure".into(),
            ));
        }
        let prec = self.prec();
        Ok(Interval {
            lo: down(prec, self.lo.ln_ref()),
            hi: up(prec, self.hi.ln_ref()),
        })
    }

    pub fn exp(&self) -> Interval {
        let prec = self.prec();
        Interval {
            lo: down(prec, self.lo.exp_ref()),
            hi: up(prec, self.hi.exp_ref()),
        }
    }

    /// Square root. Requires a non-negative enclosure.
    pub fn sqrt(&self) -> Result<Interval> {
        if self.lo.is_sign_negative() && !self.lo.is_zero() {
            return Err(Error::Domain("square root of a negative enclosure".into()));
        }
        let prec = self.prec();
        Ok(Interval {
            lo: down(prec, self.lo.sqrt_ref()),
            hi: up(prec, self.hi.sqrt_ref()),
        })
    }

    /// Sum `1 + x + ... + x^(count-1)`, with `0` for `count == 0`.
    pub fn geometric_sum(&self, count: u64) -> Interval {
        let prec = self.prec();
        match count {
            0 => Interval::from_int(prec, 0),
            1 => Interval::from_int(prec, 1),
            _ if count <= 16 => {
                let mut term = Interval::from_int(prec, 1);
                let mut sum = Interval::from_int(prec, 1);
                for _ in 1..count {
                    term = &term * self;
                    sum = &sum + &term;
                }
                sum
            }
            _ => {
                let one = Interval::from_int(prec, 1);
                let closed = &(&one - &self.powu(count)) / &(&one - self);
                // the closed form suffers from the dependency problem near x = 1;
                // clip to the trivial bounds [1, count] for x in [0, 1]
                if self.lo >= 0 && self.hi <= 1 {
                    let lower = Interval::from_int(prec, 1);
                    let upper = Interval::from_int(prec, count as i64);
                    closed.intersect(&lower.hull(&upper)).unwrap_or(closed)
                } else {
                    closed
                }
            }
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi <= other.hi { &self.hi } else { &other.hi };
        (lo <= hi).then(|| Interval {
            lo: lo.clone(),
            hi: hi.clone(),
        })
    }

    /// Decimal string of the midpoint, with enough digits to round-trip.
    pub fn to_decimal(&self) -> String {
        float_to_decimal(&self.mid())
    }
}

/// Decimal string that parses back to exactly `x` at the same precision.
pub fn float_to_decimal(x: &Float) -> String {
    x.to_string_radix(10, None)
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(17);
        write!(
            f,
            "[{}, {}]",
            self.lo.to_string_radix(10, Some(digits)),
            self.hi.to_string_radix(10, Some(digits))
        )
    }
}

impl<'a> Add<&'a Interval> for &'a Interval {
    type Output = Interval;
    fn add(self, rhs: &'a Interval) -> Interval {
        let prec = self.prec_with(rhs);
        Interval {
            lo: down(prec, &self.lo + &rhs.lo),
            hi: up(prec, &self.hi + &rhs.hi),
        }
    }
}

impl<'a> Sub<&'a Interval> for &'a Interval {
    type Output = Interval;
    fn sub(self, rhs: &'a Interval) -> Interval {
        let prec = self.prec_with(rhs);
        Interval {
            lo: down(prec, &self.lo - &rhs.hi),
            hi: up(prec, &self.hi - &rhs.lo),
        }
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        let prec = self.prec();
        Interval {
            lo: Float::with_val(prec, -&self.hi),
            hi: Float::with_val(prec, -&self.lo),
        }
    }
}

impl<'a> Mul<&'a Interval> for &'a Interval {
    type Output = Interval;
    fn mul(self, rhs: &'a Interval) -> Interval {
        let prec = self.prec_with(rhs);
        if self.lo >= 0 && rhs.lo >= 0 {
            return Interval {
                lo: down(prec, &self.lo * &rhs.lo),
                hi: up(prec, &self.hi * &rhs.hi),
            };
        }
        let pairs = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let lo = pairs
            .iter()
            .map(|(a, b)| down(prec, *a * *b))
            .reduce(|acc, x| if x < acc { x } else { acc })
            .unwrap();
        let hi = pairs
            .iter()
            .map(|(a, b)| up(prec, *a * *b))
            .reduce(|acc, x| if x > acc { x } else { acc })
            .unwrap();
        Interval { lo, hi }
    }
}

impl<'a> Div<&'a Interval> for &'a Interval {
    type Output = Interval;
    /// Division by an enclosure containing zero yields `[-inf, +inf]`.
    fn div(self, rhs: &'a Interval) -> Interval {
        let prec = self.prec_with(rhs);
        if rhs.sign().is_none() || rhs.sign() == Some(Ordering::Equal) {
            let mut lo = Float::new(prec);
            lo.assign(rug::float::Special::NegInfinity);
            let mut hi = Float::new(prec);
            hi.assign(rug::float::Special::Infinity);
            return Interval { lo, hi };
        }
        let pairs = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let lo = pairs
            .iter()
            .map(|(a, b)| down(prec, *a / *b))
            .reduce(|acc, x| if x < acc { x } else { acc })
            .unwrap();
        let hi = pairs
            .iter()
            .map(|(a, b)| up(prec, *a / *b))
            .reduce(|acc, x| if x > acc { x } else { acc })
            .unwrap();
        Interval { lo, hi }
    }
}
