//! Exact multivariate polynomials over arbitrary-precision rationals.
//!
//! Polynomials are sparse maps from exponent vectors (over a declared,
//! ordered list of indeterminate names) to `BigRational` coefficients.
//! No zero coefficient is ever stored, so structural equality of the
//! coefficient maps is semantic equality. Canonical printing orders
//! terms graded-lexicographically, which keeps golden strings stable.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// `p/q` from integers.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Integer as a rational.
pub fn rint(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

/// Parse "p/q" or "p". Rejects zero denominators.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("malformed rational {s:?}")))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("malformed rational {s:?}")))?;
            if q.is_zero() {
                return Err(Error::Arithmetic(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(p, q))
        }
        None => {
            let p: BigInt = s
                .parse()
                .map_err(|_| Error::Parameter(format!("malformed rational {s:?}")))?;
            Ok(Rat::from_integer(p))
        }
    }
}

/// Checked rational division; `b = 0` is an explicit arithmetic error.
pub fn rat_div(a: &Rat, b: &Rat) -> Result<Rat> {
    if b.is_zero() {
        Err(Error::Arithmetic("division by zero".into()))
    } else {
        Ok(a / b)
    }
}

/// A sparse multivariate polynomial over `Rat`.
///
/// The indeterminate list is fixed at construction; two polynomials can
/// only be combined when their lists agree exactly.
#[derive(Clone, PartialEq, Eq)]
pub struct MPoly {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl MPoly {
    pub fn zero(vars: &Arc<Vec<String>>) -> Self {
        MPoly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &Arc<Vec<String>>, c: Rat) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        p
    }

    pub fn one(vars: &Arc<Vec<String>>) -> Self {
        Self::constant(vars, Rat::one())
    }

    /// The indeterminate `name` to the first power.
    pub fn var(vars: &Arc<Vec<String>>, name: &str) -> Result<Self> {
        let idx = Self::var_index(vars, name)?;
        let mut exps = vec![0; vars.len()];
        exps[idx] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(exps, Rat::one());
        Ok(p)
    }

    pub fn monomial(vars: &Arc<Vec<String>>, exps: Vec<u32>, c: Rat) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent vector length mismatch");
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    fn var_index(vars: &Arc<Vec<String>>, name: &str) -> Result<usize> {
        vars.iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Structure(format!("undeclared indeterminate {name:?}")))
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    /// The constant term.
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&vec![0; self.vars.len()])
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// As a rational number, if constant.
    pub fn as_rat(&self) -> Result<Rat> {
        if self.is_constant() {
            Ok(self.constant_term())
        } else {
            Err(Error::Structure(format!("polynomial {self} is not constant")))
        }
    }

    /// `Some((coeff, exps))` when the polynomial is a single monomial
    /// (nonzero); `None` for zero or multi-term polynomials.
    pub fn as_monomial(&self) -> Option<(Rat, Vec<u32>)> {
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            Some((c.clone(), e.clone()))
        } else {
            None
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, name: &str) -> Result<Option<u32>> {
        let idx = Self::var_index(&self.vars, name)?;
        Ok(self.terms.keys().map(|e| e[idx]).max())
    }

    /// Coefficient of `name^k` as a polynomial in the remaining variables
    /// (same variable list, exponent of `name` zeroed).
    pub fn coeff_of(&self, name: &str, k: u32) -> Result<MPoly> {
        let idx = Self::var_index(&self.vars, name)?;
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[idx] == k {
                let mut e2 = e.clone();
                e2[idx] = 0;
                out.add_term(e2, c.clone());
            }
        }
        Ok(out)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_same_vars(&self, other: &Self) -> Result<()> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::Structure(format!(
                "mismatched indeterminate lists {:?} vs {:?}",
                self.vars, other.vars
            )))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = Self::zero(&self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        let mut out = Self::zero(&self.vars);
        for (e, k) in &self.terms {
            out.terms.insert(e.clone(), k * c);
        }
        out
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.vars);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).unwrap();
            }
            base = base.mul(&base).unwrap();
            k >>= 1;
        }
        acc
    }

    /// Partial derivative with respect to `name`.
    pub fn derive(&self, name: &str) -> Result<Self> {
        let idx = Self::var_index(&self.vars, name)?;
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[idx] > 0 {
                let mut e2 = e.clone();
                e2[idx] -= 1;
                out.add_term(e2, c * rint(e[idx] as i64));
            }
        }
        Ok(out)
    }

    /// Substitute `name := value` and drop the indeterminate from the list.
    pub fn eval(&self, name: &str, value: &Rat) -> Result<Self> {
        let idx = Self::var_index(&self.vars, name)?;
        let new_vars: Arc<Vec<String>> = Arc::new(
            self.vars
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != idx)
                .map(|(_, v)| v.clone())
                .collect(),
        );
        let mut out = Self::zero(&new_vars);
        for (e, c) in &self.terms {
            let mut pw = Rat::one();
            for _ in 0..e[idx] {
                pw *= value;
            }
            let mut e2 = e.clone();
            e2.remove(idx);
            out.add_term(e2, c * pw);
        }
        Ok(out)
    }

    /// Ground every indeterminate; errors if one is missing from `assignment`.
    pub fn eval_all(&self, assignment: &BTreeMap<String, Rat>) -> Result<Rat> {
        let mut cur = self.clone();
        for v in self.vars.iter() {
            let val = assignment
                .get(v)
                .ok_or_else(|| Error::Structure(format!("unground indeterminate {v:?}")))?;
            cur = cur.eval(v, val)?;
        }
        cur.as_rat()
    }

    /// Leading term in graded-lex order: `(exps, coeff)`.
    fn leading_term(&self) -> Option<(&Vec<u32>, &Rat)> {
        self.terms
            .iter()
            .max_by(|(ea, _), (eb, _)| grlex(ea, eb))
    }

    /// Exact division; errors when `self` is not a polynomial multiple of
    /// `divisor`. This is the workhorse behind fraction-free elimination,
    /// where every pivot division is exact by construction.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self> {
        self.check_same_vars(divisor)?;
        if divisor.is_zero() {
            return Err(Error::Arithmetic("polynomial division by zero".into()));
        }
        let (de, dc) = {
            let (e, c) = divisor.leading_term().unwrap();
            (e.clone(), c.clone())
        };
        let mut rem = self.clone();
        let mut quot = Self::zero(&self.vars);
        while !rem.is_zero() {
            let (re, rc) = {
                let (e, c) = rem.leading_term().unwrap();
                (e.clone(), c.clone())
            };
            if re.iter().zip(&de).any(|(a, b)| a < b) {
                return Err(Error::Arithmetic(format!(
                    "inexact polynomial division: {self} by {divisor}"
                )));
            }
            let qe: Vec<u32> = re.iter().zip(&de).map(|(a, b)| a - b).collect();
            let qc = &rc / &dc;
            let t = Self::monomial(&self.vars, qe, qc);
            quot = quot.add(&t)?;
            rem = rem.sub(&t.mul(divisor)?)?;
        }
        Ok(quot)
    }
}

/// Graded-lex comparison of exponent vectors.
fn grlex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Vec<u32>, &Rat)> = self.terms.iter().collect();
        terms.sort_by(|(ea, _), (eb, _)| grlex(eb, ea));
        for (i, (e, c)) in terms.iter().enumerate() {
            let is_const = e.iter().all(|&x| x == 0);
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if is_const || !mag.is_one() {
                write!(f, "{mag}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (k, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", self.vars[k])?;
                if x > 1 {
                    write!(f, "^{x}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Unique polynomial of degree < #samples through the given points,
/// in one indeterminate `var_name`.
pub fn lagrange_interpolate(samples: &[(Rat, Rat)], var_name: &str) -> Result<MPoly> {
    if samples.is_empty() {
        return Err(Error::Structure("interpolation needs at least one sample".into()));
    }
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            if samples[i].0 == samples[j].0 {
                return Err(Error::Structure(format!(
                    "duplicate interpolation node {}",
                    samples[i].0
                )));
            }
        }
    }
    let vars = Arc::new(vec![var_name.to_string()]);
    let x = MPoly::var(&vars, var_name)?;
    let mut acc = MPoly::zero(&vars);
    for (i, (xi, yi)) in samples.iter().enumerate() {
        let mut basis = MPoly::constant(&vars, yi.clone());
        for (j, (xj, _)) in samples.iter().enumerate() {
            if i == j {
                continue;
            }
            let num = x.sub(&MPoly::constant(&vars, xj.clone()))?;
            let den = xi - xj;
            basis = basis.mul(&num)?.scale(&(Rat::one() / den));
        }
        acc = acc.add(&basis)?;
    }
    Ok(acc)
}
