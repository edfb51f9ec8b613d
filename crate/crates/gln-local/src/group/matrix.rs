use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{abs_p, fmt_q, fmt_q_short, is_integral, is_unit, parse_q, residue, val_or_inf, valuation, Q};
use crate::error::{Error, Result};

/// Square matrix over Q with a distinguished prime p.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatG {
    pub n: usize,
    pub p: u64,
    pub e: Vec<Q>,
}

impl MatG {
    pub fn zero(n: usize, p: u64) -> Self {
        Self { n, p, e: vec![Q::zero(); n * n] }
    }

    pub fn identity(n: usize, p: u64) -> Self {
        let mut m = Self::zero(n, p);
        for i in 0..n {
            m.e[i * n + i] = Q::one();
        }
        m
    }

    pub fn from_rows(p: u64, rows: &[Vec<Q>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix rows must form a square".into()));
        }
        Ok(Self { n, p, e: rows.iter().flatten().copied().collect() })
    }

    pub fn from_ints(p: u64, rows: &[&[i128]]) -> Self {
        let r: Vec<Vec<Q>> = rows.iter().map(|row| row.iter().map(|x| Q::from_integer(*x)).collect()).collect();
        Self::from_rows(p, &r).expect("square integer matrix")
    }

    pub fn diag(p: u64, d: &[Q]) -> Self {
        let n = d.len();
        let mut m = Self::zero(n, p);
        for (i, x) in d.iter().enumerate() {
            m.e[i * n + i] = *x;
        }
        m
    }

    /// diag(p^{v_1}, …, p^{v_n}).
    pub fn diag_pow(p: u64, v: &[i64]) -> Self {
        let d: Vec<Q> = v.iter().map(|x| crate::arith::p_pow(p, *x)).collect();
        Self::diag(p, &d)
    }

    /// I + t·E_{ij}.
    pub fn elementary(n: usize, p: u64, i: usize, j: usize, t: Q) -> Self {
        let mut m = Self::identity(n, p);
        m.e[i * n + j] += t;
        m
    }

    /// The antidiagonal permutation matrix.
    pub fn w_g(n: usize, p: u64) -> Self {
        let mut m = Self::zero(n, p);
        for i in 0..n {
            m.e[i * n + (n - 1 - i)] = Q::one();
        }
        m
    }

    /// Text format: rows separated by ';', entries by ','.
    pub fn parse(text: &str, p: u64) -> Result<Self> {
        let rows: Vec<Vec<Q>> = text
            .split(';')
            .map(|r| r.split(',').map(parse_q).collect::<Result<Vec<Q>>>())
            .collect::<Result<_>>()?;
        Self::from_rows(p, &rows)
    }

    pub fn to_text(&self) -> String {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| fmt_q_short(&self.get(i, j))).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn to_canonical_text(&self) -> String {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| fmt_q(&self.get(i, j))).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Q {
        self.e[i * self.n + j]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &Q {
        &self.e[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Q) {
        self.e[i * self.n + j] = x;
    }

    pub fn diagonal(&self) -> Vec<Q> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matrix sizes differ");
        let n = self.n;
        let mut out = vec![Q::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.e[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.e[k * n + j];
                    if !b.is_zero() {
                        out[i * n + j] += *a * *b;
                    }
                }
            }
        }
        Self { n, p: self.p, e: out }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("{} vs {}", self.n, other.n)));
        }
        if self.p != other.p {
            return Err(Error::IncompatibleContext(format!("primes {} and {}", self.p, other.p)));
        }
        Ok(self.mul(other))
    }

    pub fn mul3(a: &Self, b: &Self, c: &Self) -> Self {
        a.mul(b).mul(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, p: self.p, e: self.e.iter().zip(&other.e).map(|(a, b)| *a + *b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { n: self.n, p: self.p, e: self.e.iter().zip(&other.e).map(|(a, b)| *a - *b).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self { n: self.n, p: self.p, e: self.e.iter().map(|a| *a * *c).collect() }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut m = Self::zero(n, self.p);
        for i in 0..n {
            for j in 0..n {
                m.e[j * n + i] = self.e[i * n + j];
            }
        }
        m
    }

    pub fn det(&self) -> Q {
        let n = self.n;
        match n {
            0 => return Q::one(),
            1 => return self.e[0],
            2 => return self.e[0] * self.e[3] - self.e[1] * self.e[2],
            _ => {}
        }
        let mut a = self.e.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(r) = (c..n).find(|&r| !a[r * n + c].is_zero()) else {
                return Q::zero();
            };
            if r != c {
                for j in 0..n {
                    a.swap(r * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = a[c * n + c];
            det *= piv;
            for r in c + 1..n {
                let f = a[r * n + c] / piv;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let t = a[c * n + j];
                    a[r * n + j] -= f * t;
                }
            }
        }
        det
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn inv(&self) -> Result<Self> {
        let n = self.n;
        if n == 2 {
            let d = self.det();
            if d.is_zero() {
                return Err(Error::Singular);
            }
            let e = &self.e;
            return Ok(Self { n, p: self.p, e: vec![e[3] / d, -e[1] / d, -e[2] / d, e[0] / d] });
        }
        let mut a = self.e.clone();
        let mut b = Self::identity(n, self.p).e;
        for c in 0..n {
            let r = (c..n).find(|&r| !a[r * n + c].is_zero()).ok_or(Error::Singular)?;
            if r != c {
                for j in 0..n {
                    a.swap(r * n + j, c * n + j);
                    b.swap(r * n + j, c * n + j);
                }
            }
            let piv = a[c * n + c].recip();
            for j in 0..n {
                a[c * n + j] *= piv;
                b[c * n + j] *= piv;
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = a[r * n + c];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (ta, tb) = (a[c * n + j], b[c * n + j]);
                    a[r * n + j] -= f * ta;
                    b[r * n + j] -= f * tb;
                }
            }
        }
        Ok(Self { n, p: self.p, e: b })
    }

    /// Conjugation x ↦ g x g⁻¹.
    pub fn conj_by(&self, g: &Self) -> Result<Self> {
        Ok(g.mul(self).mul(&g.inv()?))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n, self.p)
    }

    pub fn is_integral(&self) -> bool {
        self.e.iter().all(|x| is_integral(x, self.p))
    }

    pub fn in_k(&self) -> bool {
        self.is_integral() && is_unit(&self.det(), self.p)
    }

    /// Minimum valuation of the entries (i64::MAX for the zero matrix).
    pub fn min_valuation(&self) -> i64 {
        self.e.iter().map(|x| val_or_inf(x, self.p)).min().unwrap_or(i64::MAX)
    }

    /// x ≡ I modulo p^e.
    pub fn in_principal(&self, e: u32) -> bool {
        let n = self.n;
        self.e.iter().enumerate().all(|(k, x)| {
            let d = if k / n == k % n { *x - Q::one() } else { *x };
            val_or_inf(&d, self.p) >= e as i64
        })
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n;
        self.e.iter().enumerate().all(|(k, x)| k / n == k % n || x.is_zero())
    }

    pub fn is_upper_unipotent(&self) -> bool {
        let n = self.n;
        self.e.iter().enumerate().all(|(k, x)| {
            let (i, j) = (k / n, k % n);
            if i == j {
                x.is_one()
            } else {
                i < j || x.is_zero()
            }
        })
    }

    pub fn is_lower_unipotent(&self) -> bool {
        self.transpose().is_upper_unipotent()
    }

    pub fn is_upper_triangular(&self) -> bool {
        let n = self.n;
        self.e.iter().enumerate().all(|(k, x)| k / n <= k % n || x.is_zero())
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.transpose().is_upper_triangular()
    }

    /// Residues of an integral matrix modulo p^k, row-major.
    pub fn residues(&self, k: u32) -> Result<Vec<i128>> {
        self.e.iter().map(|x| residue(x, self.p, k)).collect()
    }

    /// Block-diagonal embedding diag(self, 1, …, 1) into size `n`.
    pub fn embed(&self, n: usize) -> Self {
        let mut m = Self::identity(n, self.p);
        for i in 0..self.n {
            for j in 0..self.n {
                m.e[i * n + j] = self.get(i, j);
            }
        }
        m
    }

    /// Upper-left k×k block.
    pub fn upper_left(&self, k: usize) -> Self {
        let mut m = Self::zero(k, self.p);
        for i in 0..k {
            for j in 0..k {
                m.e[i * k + j] = self.get(i, j);
            }
        }
        m
    }

    /// Valuations of diagonal entries of a diagonal matrix.
    pub fn diag_valuations(&self) -> Result<Vec<i64>> {
        (0..self.n).map(|i| valuation(&self.get(i, i), self.p)).collect()
    }

    pub fn entry_abs(&self, i: usize, j: usize) -> Q {
        abs_p(&self.get(i, j), self.p)
    }
}

impl fmt::Display for MatG {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}
