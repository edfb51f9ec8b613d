use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::rational::{fmt_q, frac_part, int_valuation, ipow, DepthContext, Q};
use crate::error::{Error, Result};

/// Element of Q(ζ_{p^M}) written in the power basis of ζ = exp(2πi/p^M).
#[derive(Clone, Debug)]
pub struct CycValue {
    p: u64,
    level: u32,
    coeffs: Vec<Q>,
}

impl CycValue {
    pub fn zero(p: u64) -> Self {
        Self { p, level: 0, coeffs: vec![Q::zero()] }
    }

    pub fn one(p: u64) -> Self {
        Self::from_rational(p, Q::one())
    }

    pub fn from_rational(p: u64, c: Q) -> Self {
        Self { p, level: 0, coeffs: vec![c] }
    }

    /// exp(2πi r) for r with p-power denominator.
    pub fn root(p: u64, r: &Q) -> Result<Self> {
        Self::root_scaled(p, r, Q::one())
    }

    pub fn root_scaled(p: u64, r: &Q, c: Q) -> Result<Self> {
        let den = *r.denom();
        let k = int_valuation(den, p);
        if ipow(p, k) != den {
            return Err(Error::Unsupported(format!("root of unity of order {den} for p = {p}")));
        }
        let size = ipow(p, k) as usize;
        let e = r.numer().rem_euclid(den) as usize;
        let mut coeffs = vec![Q::zero(); size];
        coeffs[e] = c;
        Ok(Self { p, level: k, coeffs })
    }

    /// Coefficient vector of length p^level.
    pub fn from_coeffs(p: u64, level: u32, coeffs: Vec<Q>) -> Result<Self> {
        if coeffs.len() != ipow(p, level) as usize {
            return Err(Error::Dimension(format!("expected {} coefficients", ipow(p, level))));
        }
        Ok(Self { p, level, coeffs })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn promote(&self, level: u32) -> Self {
        if level <= self.level {
            return self.clone();
        }
        let step = ipow(self.p, level - self.level) as usize;
        let mut coeffs = vec![Q::zero(); ipow(self.p, level) as usize];
        for (e, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs[e * step] = *c;
            }
        }
        Self { p: self.p, level, coeffs }
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::IncompatibleContext(format!("primes {} and {}", self.p, other.p)));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let level = self.level.max(other.level);
        let mut a = self.promote(level);
        let b = other.promote(level);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += *y;
        }
        Ok(a)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg_value())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let level = self.level.max(other.level);
        let a = self.promote(level);
        let b = other.promote(level);
        let size = a.coeffs.len();
        let mut out = vec![Q::zero(); size];
        let nb: Vec<(usize, Q)> =
            b.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, *c)).collect();
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in &nb {
                out[(i + j) % size] += *x * *y;
            }
        }
        Ok(Self { p: self.p, level, coeffs: out })
    }

    pub fn try_eq(&self, other: &Self) -> Result<bool> {
        Ok(self.try_sub(other)?.is_zero())
    }

    pub fn neg_value(&self) -> Self {
        Self { p: self.p, level: self.level, coeffs: self.coeffs.iter().map(|c| -*c).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self { p: self.p, level: self.level, coeffs: self.coeffs.iter().map(|x| *x * *c).collect() }
    }

    /// Complex conjugate: ζ^e ↦ ζ^{-e}.
    pub fn conj(&self) -> Self {
        let size = self.coeffs.len();
        let mut coeffs = vec![Q::zero(); size];
        for (e, c) in self.coeffs.iter().enumerate() {
            coeffs[(size - e) % size] = *c;
        }
        Self { p: self.p, level: self.level, coeffs }
    }

    /// Canonical representative: reduced modulo Φ_{p^M} and written at the
    /// smallest level containing the value.
    pub fn canonical(&self) -> Self {
        let mut v = self.clone();
        if v.level > 0 {
            let p = v.p as usize;
            let s = ipow(v.p, v.level - 1) as usize;
            for e in ((p - 1) * s..p * s).rev() {
                let c = v.coeffs[e];
                if c.is_zero() {
                    continue;
                }
                for k in 1..p {
                    v.coeffs[e - k * s] -= c;
                }
                v.coeffs[e] = Q::zero();
            }
        }
        while v.level > 0 {
            let p = v.p as usize;
            if v.coeffs.iter().enumerate().any(|(e, c)| e % p != 0 && !c.is_zero()) {
                break;
            }
            let coeffs: Vec<Q> = v.coeffs.iter().step_by(p).copied().collect();
            v = Self { p: v.p, level: v.level - 1, coeffs };
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.canonical().coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational() == Some(Q::one())
    }

    /// The value as a rational, when it is one.
    pub fn as_rational(&self) -> Option<Q> {
        let c = self.canonical();
        if c.level == 0 {
            Some(c.coeffs[0])
        } else {
            None
        }
    }

    /// Writes the value as c·exp(2πi r) when possible; for p = 2 the sign is absorbed
    /// into r so that c ≥ 0.
    pub fn as_monomial(&self) -> Option<(Q, Q)> {
        let c = self.canonical();
        let (coef, r) = if c.level == 0 {
            (c.coeffs[0], Q::zero())
        } else {
            let size = c.coeffs.len();
            (0..size).find_map(|e| {
                let shift = Self::root(c.p, &Q::new(-(e as i128), size as i128)).ok()?;
                (&c * &shift).as_rational().map(|v| (v, Q::new(e as i128, size as i128)))
            })?
        };
        if c.p == 2 && coef < Q::zero() {
            return Some((-coef, frac_part(&(r + Q::new(1, 2)), 2)));
        }
        Some((coef, r))
    }

    /// Absolute value of a rational multiple of a root of unity.
    pub fn abs_if_monomial(&self) -> Option<Q> {
        self.as_monomial().map(|(c, _)| if c < Q::zero() { -c } else { c })
    }

    /// Floating-point value, for sanity comparisons only.
    pub fn to_complex(&self) -> (f64, f64) {
        let size = self.coeffs.len() as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (e, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let x = *c.numer() as f64 / *c.denom() as f64;
            let t = 2.0 * std::f64::consts::PI * e as f64 / size;
            re += x * t.cos();
            im += x * t.sin();
        }
        (re, im)
    }

    /// Canonical JSON: level plus the nonzero coefficients of the reduced form.
    pub fn to_json(&self) -> Value {
        let c = self.canonical();
        let coeffs: serde_json::Map<String, Value> = c
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(e, x)| (e.to_string(), Value::String(fmt_q(x))))
            .collect();
        json!({ "level": c.level, "coeffs": coeffs })
    }

    pub fn to_text(&self) -> String {
        let c = self.canonical();
        let size = c.coeffs.len();
        let terms: Vec<String> = c
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(e, x)| if e == 0 { fmt_q(x) } else { format!("{}*z{}^{}", fmt_q(x), size, e) })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

impl PartialEq for CycValue {
    fn eq(&self, other: &Self) -> bool {
        self.try_eq(other).unwrap_or(false)
    }
}

impl Add for &CycValue {
    type Output = CycValue;
    fn add(self, rhs: &CycValue) -> CycValue {
        self.try_add(rhs).expect("cyclotomic values over the same prime")
    }
}

impl Sub for &CycValue {
    type Output = CycValue;
    fn sub(self, rhs: &CycValue) -> CycValue {
        self.try_sub(rhs).expect("cyclotomic values over the same prime")
    }
}

impl Mul for &CycValue {
    type Output = CycValue;
    fn mul(self, rhs: &CycValue) -> CycValue {
        self.try_mul(rhs).expect("cyclotomic values over the same prime")
    }
}

impl Neg for &CycValue {
    type Output = CycValue;
    fn neg(self) -> CycValue {
        self.neg_value()
    }
}

pub fn cyc_add(a: &CycValue, b: &CycValue) -> Result<CycValue> {
    a.try_add(b)
}

pub fn cyc_mul(a: &CycValue, b: &CycValue) -> Result<CycValue> {
    a.try_mul(b)
}

pub fn cyc_eq(a: &CycValue, b: &CycValue) -> Result<bool> {
    a.try_eq(b)
}

pub fn cyc_is_zero(a: &CycValue) -> bool {
    a.is_zero()
}

/// ψ(x) = exp(2πi·frac_part(x)).
pub fn psi(x: &Q, p: u64) -> CycValue {
    CycValue::root(p, &frac_part(x, p)).expect("fractional part has p-power denominator")
}

/// ψ_T̃(x) = ψ(T̃x).
pub fn psi_t(x: &Q, ctx: &DepthContext) -> CycValue {
    psi(&(*x * ctx.t_tilde()), ctx.p)
}

/// Integer-weighted sum of p-power roots of unity, for hot loops.
#[derive(Clone, Debug)]
pub struct RootCounter {
    p: u64,
    level: u32,
    counts: Vec<i64>,
}

impl RootCounter {
    pub fn new(p: u64) -> Self {
        Self { p, level: 0, counts: vec![0] }
    }

    fn grow(&mut self, level: u32) {
        if level <= self.level {
            return;
        }
        let step = ipow(self.p, level - self.level) as usize;
        let mut counts = vec![0; ipow(self.p, level) as usize];
        for (e, c) in self.counts.iter().enumerate() {
            counts[e * step] = *c;
        }
        self.counts = counts;
        self.level = level;
    }

    /// Adds w·exp(2πi r); r is reduced mod 1 and must have p-power denominator.
    pub fn add_root(&mut self, r: &Q, w: i64) {
        let den = *r.denom();
        let k = int_valuation(den, self.p);
        debug_assert_eq!(ipow(self.p, k), den);
        self.grow(k);
        let step = ipow(self.p, self.level - k);
        let e = r.numer().rem_euclid(den) * step;
        self.counts[e as usize] += w;
    }

    pub fn add_psi(&mut self, x: &Q, w: i64) {
        self.add_root(&frac_part(x, self.p), w);
    }

    pub fn merge(&mut self, other: &RootCounter) {
        self.grow(other.level);
        let step = ipow(self.p, self.level - other.level) as usize;
        for (e, c) in other.counts.iter().enumerate() {
            self.counts[e * step] += *c;
        }
    }

    pub fn total_weight(&self) -> i64 {
        self.counts.iter().sum()
    }

    /// The sum scaled by c.
    pub fn to_cyc(&self, c: &Q) -> CycValue {
        let coeffs = self.counts.iter().map(|n| Q::from_integer(*n as i128) * *c).collect();
        CycValue { p: self.p, level: self.level, coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{q, qr};
    use proptest::prelude::*;

    #[test]
    fn one_plus_minus_one_vanishes() {
        let z2 = CycValue::root(2, &qr(1, 2)).unwrap();
        assert!((&CycValue::one(2) + &z2).is_zero());
    }

    #[test]
    fn fourth_root_squares_to_minus_one() {
        let z4 = CycValue::root(2, &qr(1, 4)).unwrap();
        let z2 = CycValue::root(2, &qr(1, 2)).unwrap();
        assert!(cyc_eq(&(&z4 * &z4), &z2).unwrap());
        assert_eq!((&z4 * &z4).as_rational(), Some(q(-1)));
    }

    #[test]
    fn cube_roots_sum_to_zero() {
        let mut s = CycValue::zero(3);
        for j in 0..3 {
            s = &s + &CycValue::root(3, &qr(j, 3)).unwrap();
        }
        assert!(cyc_is_zero(&s));
    }

    #[test]
    fn orbit_sums_vanish() {
        for p in [2u64, 3, 5] {
            let pm = ipow(p, 2);
            for j0 in 0..p as i128 {
                let mut s = CycValue::zero(p);
                for k in 0..p as i128 {
                    s = &s + &CycValue::root(p, &qr(j0 + k * p as i128, pm)).unwrap();
                }
                assert!(s.is_zero(), "p={p} j0={j0}");
            }
        }
    }

    #[test]
    fn mixed_primes_rejected() {
        let a = CycValue::one(2);
        let b = CycValue::one(3);
        assert!(matches!(cyc_add(&a, &b), Err(Error::IncompatibleContext(_))));
        assert!(matches!(cyc_mul(&a, &b), Err(Error::IncompatibleContext(_))));
    }

    #[test]
    fn psi_examples() {
        assert!(psi(&q(0), 2).is_one());
        assert_eq!(psi(&qr(1, 2), 2).as_rational(), Some(q(-1)));
        let mut s = CycValue::zero(5);
        for j in 0..5 {
            s = &s + &psi(&qr(j, 5), 5);
        }
        assert!(s.is_zero());
    }

    #[test]
    fn psi_t_conductor_is_q_squared() {
        for (p, m) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2)] {
            let ctx = DepthContext::new(p, m).unwrap();
            for u in 1..20i128 {
                assert!(psi_t(&(q(u) * q(ctx.q2())), &ctx).is_one());
            }
            assert!(!psi_t(&q(ipow(p, 2 * m - 1)), &ctx).is_one());
        }
    }

    #[test]
    fn canonical_form_is_minimal_level() {
        let z4 = CycValue::root(2, &qr(1, 4)).unwrap();
        let sq = &z4 * &z4;
        assert_eq!(sq.canonical().level(), 0);
        let z9 = CycValue::root(3, &qr(3, 9)).unwrap();
        assert_eq!(z9.canonical().level(), 1);
    }

    #[test]
    fn monomial_detection() {
        let z8 = CycValue::root(2, &qr(5, 8)).unwrap().scale(&qr(-3, 2));
        let (c, r) = z8.as_monomial().unwrap();
        assert_eq!(z8, CycValue::root_scaled(2, &r, c).unwrap());
        assert_eq!(z8.abs_if_monomial(), Some(qr(3, 2)));
        let two_terms = &CycValue::one(3) + &CycValue::root(3, &qr(1, 3)).unwrap();
        assert_eq!(two_terms.abs_if_monomial(), Some(q(1)));
        let not_mono = &two_terms + &CycValue::one(3);
        assert_eq!(not_mono.as_monomial(), None);
    }

    #[test]
    fn root_counter_matches_direct_sum() {
        let mut rc = RootCounter::new(3);
        let mut direct = CycValue::zero(3);
        for j in 0..27i128 {
            let r = qr(j * j, 27);
            rc.add_psi(&r, 1);
            direct = &direct + &psi(&r, 3);
        }
        assert_eq!(rc.to_cyc(&q(1)), direct);
    }

    #[test]
    fn json_is_canonical() {
        let a = &CycValue::one(2) + &CycValue::root(2, &qr(1, 2)).unwrap();
        assert_eq!(a.to_json(), json!({"level": 0, "coeffs": {}}));
        let z = CycValue::root(2, &qr(3, 4)).unwrap();
        assert_eq!(z.to_json(), json!({"level": 2, "coeffs": {"1": "-1/1"}}));
    }

    fn cyc_strategy(p: u64) -> impl Strategy<Value = CycValue> {
        prop::collection::vec((0i128..27, -5i128..6), 1..6).prop_map(move |terms| {
            let mut s = CycValue::zero(p);
            for (e, c) in terms {
                s = &s + &CycValue::root_scaled(p, &qr(e, ipow(p, 3)), q(c)).unwrap();
            }
            s
        })
    }

    proptest! {
        #[test]
        fn equality_agrees_with_numeric(a in cyc_strategy(3), b in cyc_strategy(3)) {
            let (ar, ai) = a.to_complex();
            let (br, bi) = b.to_complex();
            let close = (ar - br).abs() < 1e-9 && (ai - bi).abs() < 1e-9;
            prop_assert_eq!(a == b, close);
            let (dr, di) = (&a - &a).to_complex();
            prop_assert!(dr.abs() < 1e-12 && di.abs() < 1e-12);
        }

        #[test]
        fn ring_laws(a in cyc_strategy(2), b in cyc_strategy(2), c in cyc_strategy(2)) {
            prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        }
    }
}
