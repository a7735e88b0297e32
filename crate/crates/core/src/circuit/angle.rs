use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rotation angle of a parameterized gate.
///
/// Angles written as rational multiples of `pi` stay exact, so `pi/2^40`
/// survives a print/parse cycle without rounding. Anything else is kept as
/// a plain `f64` in radians.
#[derive(Clone, Debug)]
pub enum Angle {
    PiMultiple(BigRational),
    Radians(f64),
}

impl Angle {
    pub fn pi_fraction(numer: i64, denom: i64) -> Self {
        Angle::PiMultiple(BigRational::new(numer.into(), denom.into()))
    }

    /// `sign * pi / 2^k`
    pub fn pi_over_pow2(k: u32, negative: bool) -> Self {
        let denom = BigInt::one() << k;
        let numer = if negative { -BigInt::one() } else { BigInt::one() };
        Angle::PiMultiple(BigRational::new(numer, denom))
    }

    pub fn radians(&self) -> f64 {
        match self {
            Angle::PiMultiple(r) => r.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI,
            Angle::Radians(v) => *v,
        }
    }
}

impl PartialEq for Angle {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Angle::PiMultiple(a), Angle::PiMultiple(b)) => a == b,
            (Angle::Radians(a), Angle::Radians(b)) => a.to_bits() == b.to_bits() || a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Radians(v) => write!(f, "{v:?}"),
            Angle::PiMultiple(r) => {
                if r.is_zero() {
                    return write!(f, "0");
                }
                let numer = r.numer();
                let denom = r.denom();
                let sign = if numer.is_negative() { "-" } else { "" };
                let abs = numer.abs();
                let head = if abs.is_one() {
                    format!("{sign}pi")
                } else {
                    format!("{sign}{abs}*pi")
                };
                if denom.is_one() {
                    write!(f, "{head}")
                } else if denom.bits() > 1 && (denom.clone() & (denom - BigInt::one())).is_zero() {
                    // power of two: print as 2^k so long denominators stay readable
                    write!(f, "{head}/2^{}", denom.bits() - 1)
                } else {
                    write!(f, "{head}/{denom}")
                }
            }
        }
    }
}

/// Intermediate value while evaluating an angle expression: an exact
/// rational times `pi^power`, or a float once exactness is lost.
#[derive(Clone, Debug)]
pub(crate) enum Value {
    Exact { coef: BigRational, pi_power: i32 },
    Float(f64),
}

const MAX_EXPONENT: i64 = 4096;

impl Value {
    pub(crate) fn integer(v: BigInt) -> Self {
        Value::Exact {
            coef: BigRational::from_integer(v),
            pi_power: 0,
        }
    }

    pub(crate) fn pi() -> Self {
        Value::Exact {
            coef: BigRational::one(),
            pi_power: 1,
        }
    }

    pub(crate) fn to_f64(&self) -> f64 {
        match self {
            Value::Float(v) => *v,
            Value::Exact { coef, pi_power } => {
                coef.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(*pi_power)
            }
        }
    }

    pub(crate) fn neg(self) -> Self {
        match self {
            Value::Exact { coef, pi_power } => Value::Exact {
                coef: -coef,
                pi_power,
            },
            Value::Float(v) => Value::Float(-v),
        }
    }

    pub(crate) fn add(self, rhs: Self) -> Self {
        match (&self, &rhs) {
            (
                Value::Exact { coef: a, pi_power: pa },
                Value::Exact { coef: b, pi_power: pb },
            ) => {
                if pa == pb {
                    return Value::Exact {
                        coef: a + b,
                        pi_power: *pa,
                    };
                }
                if a.is_zero() {
                    return rhs;
                }
                if b.is_zero() {
                    return self;
                }
                Value::Float(self.to_f64() + rhs.to_f64())
            }
            _ => Value::Float(self.to_f64() + rhs.to_f64()),
        }
    }

    pub(crate) fn mul(self, rhs: Self) -> Self {
        match (self, rhs) {
            (
                Value::Exact { coef: a, pi_power: pa },
                Value::Exact { coef: b, pi_power: pb },
            ) => Value::Exact {
                coef: a * b,
                pi_power: pa + pb,
            },
            (l, r) => Value::Float(l.to_f64() * r.to_f64()),
        }
    }

    pub(crate) fn div(self, rhs: Self) -> Result<Self, &'static str> {
        match (self, rhs) {
            (
                Value::Exact { coef: a, pi_power: pa },
                Value::Exact { coef: b, pi_power: pb },
            ) => {
                if b.is_zero() {
                    return Err("division by zero");
                }
                Ok(Value::Exact {
                    coef: a / b,
                    pi_power: pa - pb,
                })
            }
            (l, r) => {
                let d = r.to_f64();
                if d == 0.0 {
                    return Err("division by zero");
                }
                Ok(Value::Float(l.to_f64() / d))
            }
        }
    }

    pub(crate) fn pow(self, rhs: Self) -> Result<Self, &'static str> {
        if let (
            Value::Exact { coef: base, pi_power: pb },
            Value::Exact { coef: exp, pi_power: 0 },
        ) = (&self, &rhs)
        {
            if exp.is_integer() {
                let e = exp
                    .to_integer()
                    .to_i64()
                    .filter(|e| e.abs() <= MAX_EXPONENT)
                    .ok_or("exponent too large")?;
                if base.is_zero() && e < 0 {
                    return Err("division by zero");
                }
                let magnitude = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
                let coef = if e < 0 { magnitude.recip() } else { magnitude };
                return Ok(Value::Exact {
                    coef,
                    pi_power: pb * e as i32,
                });
            }
        }
        Ok(Value::Float(self.to_f64().powf(rhs.to_f64())))
    }

    pub(crate) fn into_angle(self) -> Angle {
        match self {
            Value::Exact { coef, pi_power: 1 } => Angle::PiMultiple(coef),
            Value::Exact { ref coef, .. } if coef.is_zero() => Angle::PiMultiple(coef.clone()),
            other => Angle::Radians(other.to_f64()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        assert_eq!(Angle::pi_fraction(1, 1).to_string(), "pi");
        assert_eq!(Angle::pi_fraction(-1, 2).to_string(), "-pi/2^1");
        assert_eq!(Angle::pi_fraction(3, 4).to_string(), "3*pi/2^2");
        assert_eq!(Angle::pi_fraction(2, 3).to_string(), "2*pi/3");
        assert_eq!(Angle::pi_fraction(0, 3).to_string(), "0");
        assert_eq!(Angle::Radians(0.25).to_string(), "0.25");
    }

    #[test]
    fn deep_power_of_two_is_exact() {
        let a = Angle::pi_over_pow2(99, false);
        assert_eq!(a.to_string(), "pi/2^99");
        assert!(a.radians() > 0.0);
    }
}
