use std::collections::BTreeMap;

use num_integer::Roots;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::cyclo::CycValue;
use super::rational::{fmt_q, Q};
use crate::error::{Error, Result};

/// sign·√radicand with an exact nonnegative rational radicand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtRational {
    pub sign: i8,
    pub radicand: Q,
}

fn exact_sqrt_int(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = n.sqrt();
    (r * r == n).then_some(r)
}

pub fn exact_sqrt(x: &Q) -> Option<Q> {
    Some(Q::new(exact_sqrt_int(*x.numer())?, exact_sqrt_int(*x.denom())?))
}

impl SqrtRational {
    pub fn sqrt(radicand: Q) -> Result<Self> {
        if radicand.is_negative() {
            return Err(Error::Precondition("negative radicand".into()));
        }
        let sign = if radicand.is_zero() { 0 } else { 1 };
        Ok(Self { sign, radicand })
    }

    pub fn from_rational(c: Q) -> Self {
        let sign = if c.is_zero() {
            0
        } else if c.is_positive() {
            1
        } else {
            -1
        };
        Self { sign, radicand: c * c }
    }

    pub fn one() -> Self {
        Self::from_rational(Q::one())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let sign = self.sign * other.sign;
        let radicand = if sign == 0 { Q::zero() } else { self.radicand * other.radicand };
        Self { sign, radicand }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.sign == 0 {
            return Err(Error::Singular);
        }
        Ok(Self { sign: self.sign, radicand: self.radicand.recip() })
    }

    pub fn square(&self) -> Q {
        self.radicand
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The value as a rational, when the radicand is a perfect square.
    pub fn as_rational(&self) -> Option<Q> {
        exact_sqrt(&self.radicand).map(|r| r * Q::from_integer(self.sign as i128))
    }

    /// self / other when the quotient is rational.
    pub fn ratio(&self, other: &Self) -> Option<Q> {
        if other.sign == 0 {
            return None;
        }
        if self.sign == 0 {
            return Some(Q::zero());
        }
        exact_sqrt(&(self.radicand / other.radicand))
            .map(|r| r * Q::from_integer((self.sign * other.sign) as i128))
    }

    pub fn to_f64(&self) -> f64 {
        self.sign as f64 * (*self.radicand.numer() as f64 / *self.radicand.denom() as f64).sqrt()
    }

    pub fn to_text(&self) -> String {
        match (self.sign, self.as_rational()) {
            (0, _) => "0".into(),
            (_, Some(r)) => fmt_q(&r),
            (1, None) => format!("sqrt({})", fmt_q(&self.radicand)),
            _ => format!("-sqrt({})", fmt_q(&self.radicand)),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "sign": self.sign, "radicand": fmt_q(&self.radicand) })
    }
}

/// scalar·T^{offset/2}·∏ (T^{1/2})^{e_i s_i}; exponents are in T^{1/2}-units.
#[derive(Clone, Debug, PartialEq)]
pub struct MellinMonomial {
    pub cyc: CycValue,
    pub root: SqrtRational,
    pub exponents: Vec<i64>,
    pub offset: Q,
}

impl MellinMonomial {
    pub fn identity(p: u64, rank: usize) -> Self {
        Self { cyc: CycValue::one(p), root: SqrtRational::one(), exponents: vec![0; rank], offset: Q::zero() }
    }

    pub fn mono_mul(&self, other: &Self) -> Result<Self> {
        if self.exponents.len() != other.exponents.len() {
            return Err(Error::Dimension("monomials in different numbers of variables".into()));
        }
        Ok(Self {
            cyc: self.cyc.try_mul(&other.cyc)?,
            root: self.root.mul(&other.root),
            exponents: self.exponents.iter().zip(&other.exponents).map(|(a, b)| a + b).collect(),
            offset: self.offset + other.offset,
        })
    }

    /// (exponent vector, offset), both in T^{1/2}-units.
    pub fn mono_extract_t_exponent(&self) -> (Vec<i64>, Q) {
        (self.exponents.clone(), self.offset)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "scalar": self.cyc.to_json(),
            "sqrt": self.root.to_json(),
            "exponents_half_t": self.exponents,
            "offset_half_t": fmt_q(&self.offset),
        })
    }
}

pub fn mono_mul(a: &MellinMonomial, b: &MellinMonomial) -> Result<MellinMonomial> {
    a.mono_mul(b)
}

/// A finite sum Σ_v C_v·|p^v|^s with |p^v|^s = ∏ p^{-v_i s_i}; each coefficient is
/// a fixed square root times a cyclotomic value.
#[derive(Clone, Debug)]
pub struct MellinSum {
    pub p: u64,
    pub terms: BTreeMap<Vec<i64>, (SqrtRational, CycValue)>,
}

impl MellinSum {
    pub fn zero(p: u64) -> Self {
        Self { p, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, key: Vec<i64>, root: &SqrtRational, cyc: &CycValue) -> Result<()> {
        if root.is_zero() || cyc.is_zero() {
            return Ok(());
        }
        match self.terms.get_mut(&key) {
            None => {
                self.terms.insert(key, (root.clone(), cyc.clone()));
            }
            Some((r0, c0)) => {
                let ratio = root
                    .ratio(r0)
                    .ok_or_else(|| Error::Unsupported("adding incommensurable square roots".into()))?;
                *c0 = c0.try_add(&cyc.scale(&ratio))?;
            }
        }
        Ok(())
    }

    pub fn add_sum(&mut self, other: &MellinSum) -> Result<()> {
        for (k, (r, c)) in &other.terms {
            self.add_term(k.clone(), r, c)?;
        }
        Ok(())
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self {
            p: self.p,
            terms: self.terms.iter().map(|(k, (r, v))| (k.clone(), (r.clone(), v.scale(c)))).collect(),
        }
    }

    pub fn scale_root(&self, s: &SqrtRational) -> Self {
        Self { p: self.p, terms: self.terms.iter().map(|(k, (r, v))| (k.clone(), (r.mul(s), v.clone()))).collect() }
    }

    /// Drops vanishing coefficients.
    pub fn pruned(&self) -> Self {
        Self { p: self.p, terms: self.terms.iter().filter(|(_, (_, c))| !c.is_zero()).map(|(k, v)| (k.clone(), v.clone())).collect() }
    }

    /// True iff the sum vanishes for every s.
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|(r, c)| r.is_zero() || c.is_zero())
    }

    pub fn eq_exact(&self, other: &MellinSum) -> Result<bool> {
        let mut d = self.clone();
        let mut neg = other.clone();
        for (_, (_, c)) in neg.terms.iter_mut() {
            *c = c.neg_value();
        }
        d.add_sum(&neg)?;
        Ok(d.is_zero())
    }

    /// The single surviving term as a monomial in T^{1/2}-units at depth m.
    pub fn as_monomial(&self, m: u32) -> Option<MellinMonomial> {
        let live = self.pruned();
        if live.terms.len() != 1 {
            return None;
        }
        let (k, (r, c)) = live.terms.into_iter().next()?;
        let mut exponents = Vec::with_capacity(k.len());
        for v in &k {
            if v % m as i64 != 0 {
                return None;
            }
            exponents.push(-v / m as i64);
        }
        Some(MellinMonomial { cyc: c, root: r, exponents, offset: Q::zero() })
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .pruned()
            .terms
            .iter()
            .map(|(k, (r, c))| json!({ "valuation": k, "sqrt": r.to_json(), "cyc": c.to_json() }))
            .collect();
        json!({ "terms": terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{q, qr};
    use proptest::prelude::*;

    #[test]
    fn identity_monomial_has_zero_exponents() {
        let m = MellinMonomial::identity(2, 3);
        assert_eq!(m.mono_extract_t_exponent(), (vec![0, 0, 0], q(0)));
    }

    #[test]
    fn monomial_exponents_add() {
        let a = MellinMonomial { exponents: vec![2], ..MellinMonomial::identity(2, 1) };
        let b = MellinMonomial { exponents: vec![2], offset: q(1), ..MellinMonomial::identity(2, 1) };
        assert_eq!(mono_mul(&a, &b).unwrap().mono_extract_t_exponent(), (vec![4], q(1)));
    }

    #[test]
    fn sqrt_products() {
        let a = SqrtRational::sqrt(qr(1, 2)).unwrap();
        let b = SqrtRational::sqrt(q(8)).unwrap();
        assert_eq!(a.mul(&b).as_rational(), Some(q(2)));
        let c = SqrtRational::from_rational(q(-3));
        assert_eq!(c.square(), q(9));
        assert!(!c.is_positive());
        assert_eq!(a.ratio(&SqrtRational::sqrt(q(2)).unwrap()), Some(qr(1, 2)));
        assert_eq!(a.ratio(&SqrtRational::sqrt(q(3)).unwrap()), None);
        assert!(SqrtRational::sqrt(q(-1)).is_err());
    }

    #[test]
    fn mellin_sum_cancels() {
        let mut s = MellinSum::zero(2);
        let r = SqrtRational::sqrt(q(2)).unwrap();
        s.add_term(vec![1], &r, &CycValue::one(2)).unwrap();
        s.add_term(vec![1], &SqrtRational::sqrt(q(8)).unwrap(), &CycValue::from_rational(2, qr(-1, 2))).unwrap();
        assert!(s.is_zero());
        s.add_term(vec![2], &r, &CycValue::one(2)).unwrap();
        assert!(!s.is_zero());
        let mono = s.as_monomial(1).unwrap();
        assert_eq!(mono.exponents, vec![-2]);
    }

    proptest! {
        #[test]
        fn sqrt_mul_commutes_and_squares(a in 1i128..50, b in 1i128..50, c in 1i128..50) {
            let x = SqrtRational::sqrt(qr(a, c)).unwrap();
            let y = SqrtRational::sqrt(qr(b, c)).unwrap();
            prop_assert_eq!(x.mul(&y), y.mul(&x));
            prop_assert_eq!(x.mul(&y).square(), x.square() * y.square());
        }
    }
}
