use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational scalar used for every matrix entry and measure.
pub type Q = Ratio<i128>;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn qr(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn ipow(p: u64, e: u32) -> i128 {
    (p as i128).pow(e)
}

/// Valuation of a nonzero integer.
pub fn int_valuation(mut n: i128, p: u64) -> u32 {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn valuation(x: &Q, p: u64) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::ValuationOfZero);
    }
    Ok(int_valuation(*x.numer(), p) as i64 - int_valuation(*x.denom(), p) as i64)
}

/// Valuation with zero mapped to `i64::MAX`.
pub fn val_or_inf(x: &Q, p: u64) -> i64 {
    valuation(x, p).unwrap_or(i64::MAX)
}

pub fn p_pow(p: u64, e: i64) -> Q {
    if e >= 0 {
        q(ipow(p, e as u32))
    } else {
        Q::new(1, ipow(p, (-e) as u32))
    }
}

/// |x|_p as an exact rational; zero maps to zero.
pub fn abs_p(x: &Q, p: u64) -> Q {
    match valuation(x, p) {
        Ok(v) => p_pow(p, -v),
        Err(_) => Q::zero(),
    }
}

pub fn is_integral(x: &Q, p: u64) -> bool {
    x.is_zero() || int_valuation(*x.denom(), p) == 0
}

pub fn is_unit(x: &Q, p: u64) -> bool {
    !x.is_zero() && valuation(x, p) == Ok(0)
}

pub fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let g = a.extended_gcd(&m);
    if g.gcd != 1 && g.gcd != -1 {
        return None;
    }
    let inv = g.x * g.gcd;
    Some(inv.rem_euclid(m))
}

pub fn mod_inverse_i64(a: i64, m: i64) -> Option<i64> {
    mod_inverse(a as i128, m as i128).map(|x| x as i64)
}

/// Residue of a p-integral rational modulo p^k, in [0, p^k).
pub fn residue(x: &Q, p: u64, k: u32) -> Result<i128> {
    if !is_integral(x, p) {
        return Err(Error::Precondition(format!("{} is not {}-integral", fmt_q(x), p)));
    }
    let m = ipow(p, k);
    if m == 1 {
        return Ok(0);
    }
    let den = x.denom().rem_euclid(m);
    let inv = mod_inverse(den, m).expect("denominator prime to p");
    Ok((x.numer().rem_euclid(m) * inv).rem_euclid(m))
}

/// The p-adic fractional part: the unique r in [0,1) with p-power denominator
/// such that x - r is p-integral.
pub fn frac_part(x: &Q, p: u64) -> Q {
    if x.is_zero() {
        return Q::zero();
    }
    let k = int_valuation(*x.denom(), p);
    if k == 0 {
        return Q::zero();
    }
    let pk = ipow(p, k);
    let rest = x.denom() / pk;
    let inv = mod_inverse(rest.rem_euclid(pk), pk).expect("cofactor prime to p");
    let c = (x.numer().rem_euclid(pk) * inv).rem_euclid(pk);
    Q::new(c, pk)
}

pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Short form: integers without a denominator.
pub fn fmt_q_short(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        fmt_q(x)
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(q(s.parse().map_err(|_| bad())?)),
    }
}

pub fn q_sign(x: &Q) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

pub fn q_one() -> Q {
    Q::one()
}

/// A rational together with the prime that gives its valuation meaning.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    pub value: Q,
    pub p: u64,
}

impl PadicScalar {
    pub fn new(value: Q, p: u64) -> Self {
        Self { value, p }
    }

    pub fn value(&self) -> Q {
        self.value
    }

    pub fn valuation(&self) -> Result<i64> {
        valuation(&self.value(), self.p)
    }

    pub fn frac_part(&self) -> Q {
        frac_part(&self.value(), self.p)
    }

    pub fn abs(&self) -> Q {
        abs_p(&self.value(), self.p)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::IncompatibleContext(format!("primes {} and {}", self.p, other.p)));
        }
        Ok(Self::new(self.value() * other.value(), self.p))
    }
}

/// Depth data: the ideal q = p^m, the fixed generator T̃ = p^{-2m} and T = p^{2m}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DepthContext {
    pub p: u64,
    pub m: u32,
}

impl DepthContext {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Precondition(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(Error::Precondition("depth must be at least 1".into()));
        }
        Ok(Self { p, m })
    }

    /// p^m as an integer.
    pub fn q(&self) -> i128 {
        ipow(self.p, self.m)
    }

    /// p^{2m} as an integer.
    pub fn q2(&self) -> i128 {
        ipow(self.p, 2 * self.m)
    }

    pub fn t_tilde(&self) -> Q {
        p_pow(self.p, -2 * self.m as i64)
    }

    pub fn t_tilde_half(&self) -> Q {
        p_pow(self.p, -(self.m as i64))
    }

    pub fn big_t(&self) -> Q {
        p_pow(self.p, 2 * self.m as i64)
    }

    /// v_p(T) = 2m.
    pub fn v_t(&self) -> i64 {
        2 * self.m as i64
    }
}
