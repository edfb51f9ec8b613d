use std::collections::{HashMap, HashSet};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::eclass::{diag_vals, EClassElement};
use crate::arith::{fmt_q, frac_part, ipow, p_pow, psi, CycValue, RootCounter, Q};
use crate::error::{Error, Result};
use crate::group::{for_each_coset, for_each_tuple, iwasawa_nak, modular_delta, DeltaSide, MatG, ResMat, SubgroupSpec};

/// sqrt(scale_sq)·sum, with scale_sq = δ_N(c)·c₁² a positive rational.
#[derive(Clone, Debug, PartialEq)]
pub struct WfcgValue {
    pub scale_sq: Q,
    pub sum: CycValue,
}

impl WfcgValue {
    pub fn is_zero(&self) -> bool {
        self.sum.is_zero()
    }

    /// |W|² as an element of the real cyclotomic field.
    pub fn abs_sq(&self) -> CycValue {
        (&self.sum * &self.sum.conj()).scale(&self.scale_sq)
    }

    pub fn to_json(&self) -> Value {
        json!({ "scale_sq": fmt_q(&self.scale_sq), "sum": self.sum.to_json() })
    }
}

/// One right N''(o)-coset of u with prescribed A-part of w''u: the K-part of w''u
/// modulo p^{2m} and the superdiagonal of u inside the block.
#[derive(Clone, Debug)]
struct Cell {
    k1: ResMat,
    sup: Vec<Q>,
}

/// The partial transform
///   W_P(f, c, g) = δ_N^{1/2}(c) ∫_{u∈N''} f(c⁻¹ w''⁻¹ u g) ψ⁻¹(u) du,
/// where N'' and w'' are the upper unipotent and longest Weyl element of the lower-right
/// GL_{n−start} block. start = 0 is the full transform W(f, c, g).
///
/// For g = a·k, substituting u = a u' a⁻¹ and writing w''u' = n₁a₁k₁ gives
///   W = δ_N^{1/2}(c)·c₁·δ_{N''}(a) Σ_{u'} φ(k₁k)ψ⁻¹(a u' a⁻¹)
/// over u' with v(a₁) = v(s) − v(c⁻¹·a^{w''}). The set of such u' is right N''(o)-stable
/// and its entries in block row r are bounded by the r-th bottom minor of w''u'.
pub struct Transform<'a> {
    pub elt: &'a EClassElement,
    pub start: usize,
    pub cap: u128,
    cells: HashMap<(Vec<i64>, i64), Vec<Cell>>,
    inner: HashMap<u32, Vec<(ResMat, Vec<i128>)>>,
}

impl<'a> Transform<'a> {
    pub fn new(elt: &'a EClassElement, start: usize) -> Result<Self> {
        if start + 1 >= elt.n {
            return Err(Error::Precondition(format!("block start {start} leaves no unipotent block in rank {}", elt.n)));
        }
        Ok(Self { elt, start, cap: 1 << 22, cells: HashMap::new(), inner: HashMap::new() })
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    fn n(&self) -> usize {
        self.elt.n
    }

    /// Block positions (i, j), i < j, of N''.
    fn positions(&self) -> Vec<(usize, usize)> {
        let (s, n) = (self.start, self.n());
        (s..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    }

    pub fn block_dim(&self) -> usize {
        let b = self.n() - self.start;
        b * (b - 1) / 2
    }

    /// w'' = diag(1_{start}, antidiagonal on the block).
    pub fn w_block(&self) -> MatG {
        let (s, n, p) = (self.start, self.n(), self.elt.ctx.p);
        let mut w = MatG::zero(n, p);
        for i in 0..s {
            w.set(i, i, Q::one());
        }
        for i in s..n {
            w.set(i, s + n - 1 - i, Q::one());
        }
        w
    }

    /// Index permutation of a ↦ w'' a w''⁻¹.
    fn sigma(&self, i: usize) -> usize {
        if i < self.start {
            i
        } else {
            self.start + self.n() - 1 - i
        }
    }

    /// Target valuations of the A-part of w''u' for given c and a.
    pub fn lambda(&self, c: &[i64], a: &[i64]) -> Vec<i64> {
        (0..self.n()).map(|i| self.elt.support[i] + c[i] - a[self.sigma(i)]).collect()
    }

    fn cells(&mut self, lambda: &[i64], growth: i64) -> Result<&Vec<Cell>> {
        let key = (lambda.to_vec(), growth);
        if !self.cells.contains_key(&key) {
            let v = self.build_cells(lambda, growth)?;
            self.cells.insert(key.clone(), v);
        }
        Ok(&self.cells[&key])
    }

    fn build_cells(&self, lambda: &[i64], growth: i64) -> Result<Vec<Cell>> {
        let (s, n) = (self.start, self.n());
        let (p, m) = (self.elt.ctx.p, self.elt.ctx.m);
        // det(w''u') is a unit, so the A-part has total valuation 0.
        if lambda.iter().sum::<i64>() != 0 {
            return Ok(Vec::new());
        }
        // |u'_{ij}| ≤ M_r(w''u') = p^{B_r} for i in block row r.
        let bound = |i: usize| -> i64 {
            let r = i - s + 1;
            -lambda[n - r..].iter().sum::<i64>()
        };
        if (s..n - 1).any(|i| bound(i) < 0) {
            return Ok(Vec::new());
        }
        let pos = self.positions();
        let exps: Vec<i64> = pos.iter().map(|(i, _)| bound(*i) + growth).collect();
        let count: u128 = exps.iter().map(|e| ipow(p, *e as u32) as u128).product();
        if count > self.cap {
            return Err(Error::TruncationCap(format!("{count} cells for lambda={lambda:?}")));
        }
        let radices: Vec<i128> = exps.iter().map(|e| ipow(p, *e as u32)).collect();
        let w = self.w_block();
        let mut out = Vec::new();
        let mut err = None;
        for_each_tuple(&radices, |t| {
            if err.is_some() {
                return;
            }
            let mut u = MatG::identity(n, p);
            for (((i, j), x), e) in pos.iter().zip(t).zip(&exps) {
                u.set(*i, *j, Q::new(*x, ipow(p, *e as u32)));
            }
            let d = match iwasawa_nak(&w.mul(&u)) {
                Ok(d) => d,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            match diag_vals(&d.a) {
                Ok(v) if v == lambda => match ResMat::from_mat(&d.k, 2 * m) {
                    Ok(k1) => out.push(Cell { k1, sup: (s..n - 1).map(|i| u.get(i, i + 1)).collect() }),
                    Err(e) => err = Some(e),
                },
                Ok(_) => {}
                Err(e) => err = Some(e),
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Representatives of N''(p^from)/N''(p^to): residues mod p^{2m} and exact superdiagonal entries.
    fn unipotents(&self, from: u32, to: u32) -> Vec<(ResMat, Vec<i128>)> {
        let (s, n) = (self.start, self.n());
        let (p, m) = (self.elt.ctx.p, self.elt.ctx.m);
        let pos = self.positions();
        let step = ipow(p, from);
        let mut out = Vec::new();
        for_each_tuple(&vec![ipow(p, to - from); pos.len()], |t| {
            let mut r = ResMat::identity(n, p, 2 * m);
            let mut sup = vec![0i128; n - 1 - s];
            for ((i, j), x) in pos.iter().zip(t) {
                r.set(*i, *j, (step * x).rem_euclid(ipow(p, 2 * m)) as i64);
                if *j == *i + 1 {
                    sup[i - s] = step * x;
                }
            }
            out.push((r, sup));
        });
        out
    }

    /// Integration level for u': φ needs p^{2m}, ψ(a u' a⁻¹) needs p^{v_{i+1}−v_i}.
    pub fn level_for(&self, a: &[i64]) -> u32 {
        let m = self.elt.ctx.m as i64;
        let need = (self.start..self.n() - 1).map(|i| a[i + 1] - a[i]).max().unwrap_or(0);
        need.max(2 * m) as u32
    }

    /// W_P(f, c, a·k) for diagonal valuations c, a and k ∈ GL_n(Z/p^{2m}).
    /// `extra` raises the integration level and `growth` widens the u'-box.
    pub fn at_ak(&mut self, c: &[i64], a: &[i64], k: &ResMat, extra: u32, growth: i64) -> Result<WfcgValue> {
        let (s, n) = (self.start, self.n());
        let (p, m) = (self.elt.ctx.p, self.elt.ctx.m);
        let scale_sq = modular_delta(&MatG::diag_pow(p, c), DeltaSide::N)? * self.elt.c1_sq;
        let lambda = self.lambda(c, a);
        let e = self.level_for(a) + extra;
        let r: Vec<Q> = (s..n - 1).map(|i| p_pow(p, a[i] - a[i + 1])).collect();
        let mut delta_exp = 0i64;
        for i in s..n {
            for j in i + 1..n {
                delta_exp -= a[i] - a[j];
            }
        }
        let weight = p_pow(p, delta_exp) * p_pow(p, -(e as i64) * self.block_dim() as i64);
        // φ transforms by a character under K(p^m), so N''(o)/N''(p^e) splits as
        // (N''(o)/N''(p^m)) × (N''(p^m)/N''(p^e)) and the second factor is a character sum.
        if !self.inner.contains_key(&m) {
            let v = self.unipotents(0, m);
            self.inner.insert(m, v);
        }
        let kinv = k.inv()?;
        let tail_sum = if extra == 0 {
            // The tail integrand is a character of N''(p^m); it is trivial iff it is
            // trivial on the generators 1 + p^m E_ij, and then the sum is the group order.
            let pm = ipow(p, m) as i64;
            let mut trivial = true;
            for (i, j) in self.positions() {
                let mut u4 = ResMat::identity(n, p, 2 * m);
                u4.set(i, j, pm);
                let h = kinv.mul(&u4).mul(k);
                let x = if j == i + 1 { r[i - s] * Q::from_integer(pm as i128) } else { Q::zero() };
                if !frac_part(&(self.elt.right_char_exponent(&h)? - x), p).is_zero() {
                    trivial = false;
                    break;
                }
            }
            if trivial {
                CycValue::from_rational(p, Q::from_integer(ipow(p, (e - m) * self.block_dim() as u32)))
            } else {
                CycValue::zero(p)
            }
        } else {
            let mut chars = RootCounter::new(p);
            for (u4, sup4) in &self.unipotents(m, e) {
                let h = kinv.mul(u4).mul(k);
                let x: Q = r.iter().zip(sup4).map(|(ri, x)| *ri * Q::from_integer(*x)).sum();
                chars.add_root(&frac_part(&(self.elt.right_char_exponent(&h)? - x), p), 1);
            }
            chars.to_cyc(&Q::one())
        };
        if tail_sum.is_zero() || self.cells(&lambda, growth)?.is_empty() {
            return Ok(WfcgValue { scale_sq, sum: CycValue::zero(p) });
        }
        let elt = self.elt;
        let head = self.inner[&m].clone();
        let cells = self.cells(&lambda, growth)?;
        let mut acc = RootCounter::new(p);
        for cell in cells {
            let x0: Q = r.iter().zip(&cell.sup).map(|(ri, x)| *ri * *x).sum();
            for (u3, sup3) in &head {
                let Some(ph) = elt.phi_exponent(&cell.k1.mul(u3).mul(k)) else {
                    continue;
                };
                let x: Q = x0 + r.iter().zip(sup3).map(|(ri, x)| *ri * Q::from_integer(*x)).sum::<Q>();
                acc.add_root(&frac_part(&(ph - x), p), 1);
            }
        }
        let sum = (&acc.to_cyc(&weight) * &tail_sum).canonical();
        Ok(WfcgValue { scale_sq, sum })
    }

    /// W_P(f, c, g) for arbitrary g, via g = n₀·a·k and W(n₀g) = ψ''(n₀)W(g), together
    /// with a stabilization certificate (one extra level and one extra box unit).
    pub fn at(&mut self, c: &MatG, g: &MatG) -> Result<WfcgReport> {
        let p = self.elt.ctx.p;
        let cv = diag_vals_any(c)?;
        let d = iwasawa_nak(g)?;
        let av = diag_vals(&d.a)?;
        let k = ResMat::from_mat(&d.k, 2 * self.elt.ctx.m)?;
        let x: Q = (self.start..self.n() - 1).map(|i| d.n.get(i, i + 1)).sum();
        let ph = psi(&x, p);
        let base = self.at_ak(&cv, &av, &k, 0, 0)?;
        let finer = self.at_ak(&cv, &av, &k, 1, 1)?;
        let value = WfcgValue { scale_sq: base.scale_sq, sum: (&base.sum * &ph).canonical() };
        Ok(WfcgReport { certified: base == finer, level: self.level_for(&av), value })
    }
}

/// Valuations of an invertible diagonal matrix (units are absorbed by K_A-invariance).
pub fn diag_vals_any(c: &MatG) -> Result<Vec<i64>> {
    if !c.is_diagonal() {
        return Err(Error::Precondition("c must be diagonal".into()));
    }
    c.diagonal().iter().map(|x| crate::arith::valuation(x, c.p)).collect()
}

#[derive(Clone, Debug)]
pub struct WfcgReport {
    pub value: WfcgValue,
    pub level: u32,
    pub certified: bool,
}

impl WfcgReport {
    pub fn to_json(&self) -> Value {
        json!({ "value": self.value.to_json(), "level": self.level, "certified": self.certified })
    }
}

/// W(f, c, g) on GL₂ by a direct Riemann sum over u = (1 x; 0 1), x ∈ p^{lo}Z/p^{hi}Z,
/// evaluating f through the explicit test function.
pub fn w_fcg_oracle(elt: &EClassElement, c: &MatG, g: &MatG, lo: i64, hi: i64) -> Result<WfcgValue> {
    if elt.n != 2 {
        return Err(Error::Unsupported("the direct oracle is for rank 2".into()));
    }
    let p = elt.ctx.p;
    let cv = diag_vals_any(c)?;
    let scale_sq = modular_delta(&MatG::diag_pow(p, &cv), DeltaSide::N)? * elt.c1_sq;
    let w = MatG::w_g(2, p);
    let left = c.inv()?.mul(&w);
    let mut acc = CycValue::zero(p);
    for t in 0..ipow(p, (hi - lo) as u32) {
        let x = p_pow(p, lo) * Q::from_integer(t);
        let u = MatG::elementary(2, p, 0, 1, x);
        let v = elt.eval(&left.mul(&u).mul(g))?;
        if v.is_zero() {
            continue;
        }
        acc = &acc + &(&v * &psi(&(-x), p));
    }
    Ok(WfcgValue { scale_sq, sum: acc.scale(&p_pow(p, -hi)).canonical() })
}

/// Representatives of N(Z/p^l)\GL_n(Z/p^l), lifted to level `lift`, with the common
/// orbit weight |N(Z/p^l)|/|GL_n(Z/p^l)|.
pub fn k_orbits(n: usize, p: u64, l: u32, lift: u32) -> Result<(Vec<ResMat>, Q)> {
    let mut seen = HashSet::new();
    let mut reps = Vec::new();
    let mut total = 0i128;
    let nl: Vec<ResMat> = {
        let mut v = Vec::new();
        for_each_coset(SubgroupSpec::Upper(0), n, p, l, |u| v.push(ResMat::from_mat(u, l).expect("integral")))?;
        v
    };
    let mut err = None;
    for_each_coset(SubgroupSpec::K, n, p, l, |k| {
        total += 1;
        let r = match ResMat::from_mat(k, l) {
            Ok(r) => r,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        if seen.contains(&r) {
            return;
        }
        for u in &nl {
            seen.insert(u.mul(&r));
        }
        reps.push(ResMat { k: lift, ..r });
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((reps, Q::new(nl.len() as i128, total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DepthContext;
    use crate::rslocal::eclass::EClassKind;

    fn elt(p: u64, m: u32, n: usize, kind: EClassKind) -> EClassElement {
        let ctx = DepthContext::new(p, m).unwrap();
        match kind {
            EClassKind::Translated => EClassElement::translated(ctx, n).unwrap(),
            EClassKind::Dual => EClassElement::dual(ctx, n).unwrap(),
        }
    }

    #[test]
    fn matches_direct_sum_on_gl2() {
        for (p, m) in [(2u64, 1u32), (3, 1), (2, 2)] {
            for kind in [EClassKind::Translated, EClassKind::Dual] {
                let e = elt(p, m, 2, kind);
                let mut tr = Transform::new(&e, 0).unwrap();
                let w = MatG::w_g(2, p);
                let gs = [
                    w.mul(&e.support_point()).mul(&w),
                    w.mul(&e.support_point()),
                    MatG::from_ints(p, &[&[1, 0], &[0, 1]]),
                    MatG::diag_pow(p, &[-1, 0]).mul(&MatG::from_ints(p, &[&[1, 1], &[p as i128, 1]])),
                    MatG::diag_pow(p, &[1, 0]).mul(&MatG::from_ints(p, &[&[0, 1], &[1, 2]])),
                ];
                let cs = [MatG::identity(2, p), MatG::diag_pow(p, &[1, 0]), MatG::diag_pow(p, &[0, -1])];
                for g in &gs {
                    for c in &cs {
                        let r = tr.at(c, g).unwrap();
                        assert!(r.certified);
                        let r0 = 2 * m as i64 + if p == 2 { 3 } else { 2 };
                        let o = w_fcg_oracle(&e, c, g, -r0, r0).unwrap();
                        assert_eq!(r.value, o, "p={p} m={m} g={} c={}", g.to_text(), c.to_text());
                    }
                }
            }
        }
    }

    #[test]
    fn nonzero_at_support_point() {
        let e = elt(2, 1, 2, EClassKind::Translated);
        let mut tr = Transform::new(&e, 0).unwrap();
        let w = MatG::w_g(2, 2);
        let g = w.mul(&e.support_point()).mul(&w);
        let r = tr.at(&MatG::identity(2, 2), &g).unwrap();
        assert!(!r.value.is_zero());
        assert_eq!(r.value, w_fcg_oracle(&e, &MatG::identity(2, 2), &g, -8, 6).unwrap());
    }

    #[test]
    fn left_equivariance() {
        let e = elt(3, 1, 2, EClassKind::Translated);
        let mut tr = Transform::new(&e, 0).unwrap();
        let g = MatG::from_ints(3, &[&[1, 1], &[3, 2]]);
        let c = MatG::identity(2, 3);
        let n0 = MatG::elementary(2, 3, 0, 1, Q::new(1, 9));
        let a = tr.at(&c, &g).unwrap().value;
        let b = tr.at(&c, &n0.mul(&g)).unwrap().value;
        assert_eq!(b.sum, (&a.sum * &psi(&Q::new(1, 9), 3)).canonical());
    }

    #[test]
    fn orbit_weights_sum_to_one() {
        let (reps, w) = k_orbits(2, 3, 1, 2).unwrap();
        assert_eq!(w * Q::from_integer(reps.len() as i128), Q::one());
        let (reps, w) = k_orbits(3, 2, 1, 2).unwrap();
        assert_eq!(reps.len(), 21);
        assert_eq!(w * Q::from_integer(21), Q::one());
    }
}
