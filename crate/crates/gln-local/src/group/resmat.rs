use std::fmt;

use super::matrix::MatG;
use crate::arith::{ipow, mod_inverse_i64, Q};
use crate::error::{Error, Result};

/// Square matrix over Z/p^k with entries in [0, p^k).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResMat {
    pub n: usize,
    pub p: u64,
    pub k: u32,
    pub e: Vec<i64>,
}

impl ResMat {
    pub fn modulus(&self) -> i64 {
        ipow(self.p, self.k) as i64
    }

    pub fn zero(n: usize, p: u64, k: u32) -> Self {
        Self { n, p, k, e: vec![0; n * n] }
    }

    pub fn identity(n: usize, p: u64, k: u32) -> Self {
        let mut m = Self::zero(n, p, k);
        let one = if k == 0 { 0 } else { 1 };
        for i in 0..n {
            m.e[i * n + i] = one;
        }
        m
    }

    pub fn from_vec(n: usize, p: u64, k: u32, e: Vec<i64>) -> Self {
        let md = ipow(p, k) as i64;
        Self { n, p, k, e: e.into_iter().map(|x| x.rem_euclid(md)).collect() }
    }

    pub fn from_mat(g: &MatG, k: u32) -> Result<Self> {
        let r = g.residues(k)?;
        Ok(Self { n: g.n, p: g.p, k, e: r.into_iter().map(|x| x as i64).collect() })
    }

    pub fn lift(&self) -> MatG {
        MatG { n: self.n, p: self.p, e: self.e.iter().map(|x| Q::from_integer(*x as i128)).collect() }
    }

    /// Reduction to a lower level.
    pub fn reduce(&self, k: u32) -> Self {
        Self::from_vec(self.n, self.p, k.min(self.k), self.e.clone())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.e[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: i64) {
        let md = self.modulus();
        self.e[i * self.n + j] = x.rem_euclid(md);
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (n, md) = (self.n, self.modulus());
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.e[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = (out[i * n + j] + a * other.e[k * n + j]) % md;
                }
            }
        }
        Self { n, p: self.p, k: self.k, e: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        let md = self.modulus();
        Self { e: self.e.iter().zip(&other.e).map(|(a, b)| (a + b) % md).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let md = self.modulus();
        Self { e: self.e.iter().zip(&other.e).map(|(a, b)| (a - b).rem_euclid(md)).collect(), ..self.clone() }
    }

    pub fn scale(&self, c: i64) -> Self {
        let md = self.modulus();
        Self { e: self.e.iter().map(|a| (a * c).rem_euclid(md)).collect(), ..self.clone() }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut m = self.clone();
        for i in 0..n {
            for j in 0..n {
                m.e[j * n + i] = self.e[i * n + j];
            }
        }
        m
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        let (n, md) = (self.n, self.modulus());
        (0..n).map(|i| (0..n).map(|j| self.e[i * n + j] * v[j]).sum::<i64>().rem_euclid(md)).collect()
    }

    /// Determinant by cofactor expansion over the integers, then reduced.
    pub fn det(&self) -> i64 {
        let md = self.modulus() as i128;
        let e: Vec<i128> = self.e.iter().map(|x| *x as i128).collect();
        (int_det(&e, self.n) % md).rem_euclid(md) as i64
    }

    pub fn det_is_unit(&self) -> bool {
        self.det() % self.p as i64 != 0
    }

    /// Inverse via the adjugate.
    pub fn inv(&self) -> Result<Self> {
        let n = self.n;
        let md = self.modulus();
        let d = self.det();
        let dinv = mod_inverse_i64(d, md).ok_or(Error::Singular)?;
        if n == 1 {
            return Ok(Self { e: vec![dinv], ..self.clone() });
        }
        let mut out = vec![0i64; n * n];
        let e: Vec<i128> = self.e.iter().map(|x| *x as i128).collect();
        for i in 0..n {
            for j in 0..n {
                let minor = minor_matrix(&e, n, i, j);
                let c = int_det(&minor, n - 1) % md as i128;
                let sgn = if (i + j) % 2 == 0 { 1 } else { -1 };
                out[j * n + i] = ((sgn * c).rem_euclid(md as i128) as i64 * dinv).rem_euclid(md);
            }
        }
        Ok(Self { e: out, ..self.clone() })
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| *x == 0)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n, self.p, self.k)
    }

    pub fn is_upper_unipotent(&self) -> bool {
        let n = self.n;
        let one = if self.k == 0 { 0 } else { 1 };
        self.e.iter().enumerate().all(|(idx, x)| {
            let (i, j) = (idx / n, idx % n);
            if i == j {
                *x == one
            } else {
                i < j || *x == 0
            }
        })
    }

    /// Columns as vectors.
    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn from_columns(p: u64, k: u32, cols: &[Vec<i64>]) -> Self {
        let n = cols.len();
        let mut m = Self::zero(n, p, k);
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, *x);
            }
        }
        m
    }

    pub fn to_text(&self) -> String {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse(text: &str, p: u64, k: u32) -> Result<Self> {
        let rows: Vec<Vec<i64>> = text
            .split(';')
            .map(|r| {
                r.split(',')
                    .map(|x| x.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad residue '{x}'"))))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<_>>()?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix rows must form a square".into()));
        }
        Ok(Self::from_vec(n, p, k, rows.into_iter().flatten().collect()))
    }
}

impl fmt::Display for ResMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

fn minor_matrix(e: &[i128], n: usize, r: usize, c: usize) -> Vec<i128> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in 0..n {
        if i == r {
            continue;
        }
        for j in 0..n {
            if j != c {
                out.push(e[i * n + j]);
            }
        }
    }
    out
}

/// Integer determinant by cofactor expansion along the first row.
pub fn int_det(e: &[i128], n: usize) -> i128 {
    match n {
        0 => 1,
        1 => e[0],
        2 => e[0] * e[3] - e[1] * e[2],
        _ => {
            let mut d = 0;
            for j in 0..n {
                if e[j] == 0 {
                    continue;
                }
                let s = if j % 2 == 0 { 1 } else { -1 };
                d += s * e[j] * int_det(&minor_matrix(e, n, 0, j), n - 1);
            }
            d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::sample::random_k;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, p, k) in [(2usize, 2u64, 2u32), (3, 2, 1), (3, 3, 2), (4, 2, 3)] {
            for _ in 0..50 {
                let g = ResMat::from_mat(&random_k(&mut rng, n, p, k), k).unwrap();
                assert!(g.mul(&g.inv().unwrap()).is_identity());
            }
        }
    }

    #[test]
    fn singular_residue_matrix() {
        let g = ResMat::from_vec(2, 2, 2, vec![2, 0, 0, 1]);
        assert!(!g.det_is_unit());
        assert!(g.inv().is_err());
    }
}
