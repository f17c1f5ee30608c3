//! Arithmetic in a quadratic extension by a generator mu with mu^2 fixed.
//!
//! Elements are pairs a + b*mu of polynomials over a common indeterminate
//! list, together with the reduction value mu^2 = musq. Every product is
//! reduced eagerly, so no mu^2 ever survives in a stored element. With a
//! negative rational musq this is a field; with symbolic musq it is an
//! integral domain, which is all fraction-free elimination needs.

use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::poly::{MPoly, Rat};

#[derive(Clone, PartialEq, Eq)]
pub struct QuadExt {
    pub a: MPoly,
    pub b: MPoly,
    musq: MPoly,
}

impl QuadExt {
    pub fn new(a: MPoly, b: MPoly, musq: MPoly) -> Result<Self> {
        if a.vars() != b.vars() || a.vars() != musq.vars() {
            return Err(Error::Structure(
                "quadratic extension parts over different indeterminate lists".into(),
            ));
        }
        Ok(QuadExt { a, b, musq })
    }

    pub fn from_rational(r: Rat, musq: &MPoly) -> Self {
        QuadExt {
            a: MPoly::constant(musq.vars(), r),
            b: MPoly::zero(musq.vars()),
            musq: musq.clone(),
        }
    }

    pub fn from_poly(a: MPoly, musq: &MPoly) -> Result<Self> {
        let b = MPoly::zero(musq.vars());
        Self::new(a, b, musq.clone())
    }

    /// b*mu with rational b.
    pub fn mu_times(r: Rat, musq: &MPoly) -> Self {
        QuadExt {
            a: MPoly::zero(musq.vars()),
            b: MPoly::constant(musq.vars(), r),
            musq: musq.clone(),
        }
    }

    pub fn zero(musq: &MPoly) -> Self {
        Self::from_rational(Rat::from_integer(0.into()), musq)
    }

    pub fn one(musq: &MPoly) -> Self {
        Self::from_rational(Rat::one(), musq)
    }

    pub fn musq(&self) -> &MPoly {
        &self.musq
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.musq == other.musq {
            Ok(())
        } else {
            Err(Error::Structure(format!(
                "mixed extensions: mu^2 = {} vs mu^2 = {}",
                self.musq, other.musq
            )))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(QuadExt {
            a: self.a.add(&other.a)?,
            b: self.b.add(&other.b)?,
            musq: self.musq.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        QuadExt {
            a: self.a.neg(),
            b: self.b.neg(),
            musq: self.musq.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        // (a1 + b1 mu)(a2 + b2 mu) = a1 a2 + musq b1 b2 + (a1 b2 + a2 b1) mu
        let a = self
            .a
            .mul(&other.a)?
            .add(&self.b.mul(&other.b)?.mul(&self.musq)?)?;
        let b = self.a.mul(&other.b)?.add(&self.b.mul(&other.a)?)?;
        Ok(QuadExt { a, b, musq: self.musq.clone() })
    }

    pub fn conj(&self) -> Self {
        QuadExt {
            a: self.a.clone(),
            b: self.b.neg(),
            musq: self.musq.clone(),
        }
    }

    /// Field norm a^2 - musq * b^2 (the mu-free product with the conjugate).
    pub fn norm(&self) -> Result<MPoly> {
        self.a
            .mul(&self.a)?
            .sub(&self.b.mul(&self.b)?.mul(&self.musq)?)
    }

    /// Exact quotient, erroring when `self` is not a multiple of `other`.
    pub fn div_exact(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if other.is_zero() {
            return Err(Error::Arithmetic("extension division by zero".into()));
        }
        let norm = other.norm()?;
        if norm.is_zero() {
            return Err(Error::Arithmetic(format!(
                "division by zero divisor {} in the extension",
                other
            )));
        }
        let num = self.mul(&other.conj())?;
        Ok(QuadExt {
            a: num.a.div_exact(&norm)?,
            b: num.b.div_exact(&norm)?,
            musq: self.musq.clone(),
        })
    }

    pub fn scale(&self, r: &Rat) -> Self {
        QuadExt {
            a: self.a.scale(r),
            b: self.b.scale(r),
            musq: self.musq.clone(),
        }
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "({})*mu", self.b)
        } else {
            write!(f, "{} + ({})*mu", self.a, self.b)
        }
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
