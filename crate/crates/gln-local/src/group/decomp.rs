use num_traits::Zero;

use super::matrix::MatG;
use crate::arith::{abs_p, p_pow, val_or_inf, valuation, Q};
use crate::error::{Error, Result};

/// g = n·a·k with n upper unipotent, a a diagonal of pure p-powers, k ∈ K.
#[derive(Clone, Debug, PartialEq)]
pub struct IwasawaNAK {
    pub n: MatG,
    pub a: MatG,
    pub k: MatG,
}

/// g = u·a·k with u lower unipotent, a a diagonal of pure p-powers, k ∈ K.
#[derive(Clone, Debug, PartialEq)]
pub struct IwasawaUAK {
    pub u: MatG,
    pub a: MatG,
    pub k: MatG,
}

/// g = u·a·n with u lower unipotent, a diagonal, n upper unipotent.
#[derive(Clone, Debug, PartialEq)]
pub struct BruhatLDU {
    pub u: MatG,
    pub a: MatG,
    pub n: MatG,
}

/// Iwasawa decomposition by bottom-up column reduction: in each row the
/// leftmost entry of least valuation among the active columns is the pivot.
pub fn iwasawa_nak(g: &MatG) -> Result<IwasawaNAK> {
    let (n, p) = (g.n, g.p);
    if g.det().is_zero() {
        return Err(Error::Singular);
    }
    if g.in_k() {
        return Ok(IwasawaNAK { n: MatG::identity(n, p), a: MatG::identity(n, p), k: g.clone() });
    }
    let mut b = g.e.clone();
    for r in (0..n).rev() {
        let mut piv = 0;
        let mut best = i64::MAX;
        for c in 0..=r {
            let v = val_or_inf(&b[r * n + c], p);
            if v < best {
                best = v;
                piv = c;
            }
        }
        if piv != r {
            for i in 0..n {
                b.swap(i * n + piv, i * n + r);
            }
        }
        let pv = b[r * n + r];
        for c in 0..r {
            let f = b[r * n + c] / pv;
            if f.is_zero() {
                continue;
            }
            for i in 0..n {
                let t = b[i * n + r];
                b[i * n + c] -= f * t;
            }
        }
    }
    let bm = MatG { n, p, e: b };
    let diag = bm.diagonal();
    let mut nn = bm.clone();
    for j in 0..n {
        for i in 0..n {
            let x = nn.get(i, j) / diag[j];
            nn.set(i, j, x);
        }
    }
    let vals: Vec<i64> = diag.iter().map(|x| valuation(x, p)).collect::<Result<_>>()?;
    let a = MatG::diag_pow(p, &vals);
    let a_inv = MatG::diag_pow(p, &vals.iter().map(|v| -v).collect::<Vec<_>>());
    let k = a_inv.mul(&nn.inv()?).mul(g);
    debug_assert!(k.in_k());
    Ok(IwasawaNAK { n: nn, a, k })
}

/// Lower-unipotent Iwasawa form, obtained by conjugating with w_G.
pub fn iwasawa_uak(g: &MatG) -> Result<IwasawaUAK> {
    let (n, p) = (g.n, g.p);
    if g.det().is_zero() {
        return Err(Error::Singular);
    }
    if g.in_k() {
        return Ok(IwasawaUAK { u: MatG::identity(n, p), a: MatG::identity(n, p), k: g.clone() });
    }
    let w = MatG::w_g(n, p);
    let d = iwasawa_nak(&w.mul(g).mul(&w))?;
    Ok(IwasawaUAK { u: w.mul(&d.n).mul(&w), a: w.mul(&d.a).mul(&w), k: w.mul(&d.k).mul(&w) })
}

/// Open-cell factorization g = u·a·n; absent iff some leading principal minor vanishes.
pub fn bruhat_open_cell(g: &MatG) -> Option<BruhatLDU> {
    let (n, p) = (g.n, g.p);
    let mut a = g.e.clone();
    let mut l = MatG::identity(n, p);
    for c in 0..n {
        let piv = a[c * n + c];
        if piv.is_zero() {
            return None;
        }
        for r in c + 1..n {
            let f = a[r * n + c] / piv;
            if f.is_zero() {
                continue;
            }
            l.e[r * n + c] = f;
            for j in c..n {
                let t = a[c * n + j];
                a[r * n + j] -= f * t;
            }
        }
    }
    let upper = MatG { n, p, e: a };
    let d = upper.diagonal();
    let mut nn = upper;
    for i in 0..n {
        for j in 0..n {
            let x = nn.get(i, j) / d[i];
            nn.set(i, j, x);
        }
    }
    Some(BruhatLDU { u: l, a: MatG::diag(p, &d), n: nn })
}

/// Leading principal minors Δ_1, …, Δ_N.
pub fn leading_minors(g: &MatG) -> Vec<Q> {
    (1..=g.n).map(|k| g.upper_left(k).det()).collect()
}

/// Iwahori factorization k = u·a·n of k ∈ K(p^e) into level-e pieces.
pub fn iwahori_factor(k: &MatG, e: u32) -> Result<BruhatLDU> {
    if e == 0 || !k.in_principal(e) {
        return Err(Error::NotInSubgroup(format!("K(p^{e})")));
    }
    let d = bruhat_open_cell(k).ok_or_else(|| Error::NotInSubgroup("open cell".into()))?;
    debug_assert!(d.u.in_principal(e) && d.a.in_principal(e) && d.n.in_principal(e));
    Ok(d)
}

/// Max of |minor|_p over the l×l minors of the bottom l rows.
pub fn minor_norm_m(g: &MatG, l: usize) -> Result<Q> {
    let n = g.n;
    if l == 0 || l > n {
        return Err(Error::Precondition(format!("minor size {l} out of range")));
    }
    let rows: Vec<usize> = (n - l..n).collect();
    let mut best = Q::zero();
    let mut cols: Vec<usize> = (0..l).collect();
    loop {
        let mut sub = MatG::zero(l, g.p);
        for (i, r) in rows.iter().enumerate() {
            for (j, c) in cols.iter().enumerate() {
                sub.set(i, j, g.get(*r, *c));
            }
        }
        let v = abs_p(&sub.det(), g.p);
        if v > best {
            best = v;
        }
        let Some(pos) = (0..l).rev().find(|&i| cols[i] != i + n - l) else {
            break;
        };
        cols[pos] += 1;
        for i in pos + 1..l {
            cols[i] = cols[i - 1] + 1;
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaSide {
    N,
    U,
}

/// δ_N(a) = ∏_{i<j} |a_i/a_j| and δ_U = δ_N⁻¹.
pub fn modular_delta(a: &MatG, side: DeltaSide) -> Result<Q> {
    if !a.is_diagonal() {
        return Err(Error::Precondition("modular character of a non-diagonal element".into()));
    }
    let n = a.n;
    let mut e = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            e += valuation(&a.get(i, i), a.p)? - valuation(&a.get(j, j), a.p)?;
        }
    }
    Ok(match side {
        DeltaSide::N => p_pow(a.p, -e),
        DeltaSide::U => p_pow(a.p, e),
    })
}

/// p-adic exponent of δ_N(diag(p^v)).
pub fn delta_n_exponent(v: &[i64]) -> i64 {
    let mut e = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            e -= v[i] - v[j];
        }
    }
    e
}

pub fn is_unit_diagonal(a: &MatG) -> bool {
    a.is_diagonal() && a.diagonal().iter().all(|x| !x.is_zero() && val_or_inf(x, a.p) == 0)
}
