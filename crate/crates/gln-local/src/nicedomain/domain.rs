use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::arith::{int_valuation, ipow, p_pow, residue, valuation, Q};
use crate::error::{Error, Result};
use crate::group::{for_each_tuple, MatG, ResMat};

/// A(ρ) = diag(p^{(n−1)ρ}, p^{(n−2)ρ}, …, 1); negative ρ gives A(ρ)⁻¹.
pub fn a_rho(p: u64, n: usize, rho: i64) -> MatG {
    let v: Vec<i64> = (0..n).map(|i| (n - 1 - i) as i64 * rho).collect();
    MatG::diag_pow(p, &v)
}

/// g^{A(ρ)} = A(ρ)·g·A(ρ)⁻¹: entry (i, j) scaled by p^{(j−i)ρ}.
pub fn conj_a(g: &MatG, rho: i64) -> MatG {
    let mut out = g.clone();
    for i in 0..g.n {
        for j in 0..g.n {
            let x = g.get(i, j);
            if !x.is_zero() {
                out.set(i, j, x * p_pow(g.p, (j as i64 - i as i64) * rho));
            }
        }
    }
    out
}

/// Strictly upper positions (i, j), row-major.
pub fn upper_positions(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn res_val(x: i64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        cap
    } else {
        int_valuation(x as i128, p).min(cap)
    }
}

/// A nice domain of N: slope 0 is N(o); slope ρ > 0 is {u : u^{A(ρ)} ∈ u₀·K_N(pⁿo)} with
/// u₀ ∈ N(Z/pⁿ), remainder l = min v(u₀_{ij}) attained at the pivot (i₀, j₀) of least
/// j − i (largest i among ties), and ρ minimal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NiceDomain {
    pub p: u64,
    pub n: usize,
    pub rho: u32,
    pub l: u32,
    pub u0: ResMat,
    pub pivot: Option<(usize, usize)>,
}

impl NiceDomain {
    pub fn slope_zero(p: u64, n: usize) -> Self {
        Self { p, n, rho: 0, l: 0, u0: ResMat::identity(n, p, n as u32), pivot: None }
    }

    /// The domain with slope ρ > 0 and base point u₀, or None if ρ would not be minimal.
    pub fn from_base(rho: u32, u0: ResMat) -> Option<Self> {
        let (p, n) = (u0.p, u0.n);
        let cap = n as u32;
        if rho == 0 || u0.k != cap || !u0.is_upper_unipotent() {
            return None;
        }
        let pos = upper_positions(n);
        if !pos.iter().any(|(i, j)| (res_val(u0.get(*i, *j), p, cap) as usize) < j - i) {
            return None;
        }
        let l = pos.iter().map(|(i, j)| res_val(u0.get(*i, *j), p, cap)).min()?;
        let pivot = pos
            .iter()
            .filter(|(i, j)| res_val(u0.get(*i, *j), p, cap) == l)
            .min_by_key(|(i, j)| (j - i, std::cmp::Reverse(*i)))
            .copied();
        Some(Self { p, n, rho, l, u0, pivot })
    }

    pub fn level(&self) -> u32 {
        self.n as u32
    }

    pub fn contains(&self, u: &MatG) -> bool {
        if u.n != self.n || !u.is_upper_unipotent() {
            return false;
        }
        let up = conj_a(u, self.rho as i64);
        if !up.is_integral() {
            return false;
        }
        if self.rho == 0 {
            return true;
        }
        match ResMat::from_mat(&up, self.level()) {
            Ok(r) => r == self.u0,
            Err(_) => false,
        }
    }

    /// The defining conditions, each checked directly; returns the violated ones.
    pub fn verify(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.rho == 0 {
            if self.pivot.is_some() || !self.u0.is_identity() {
                bad.push("slope-0 domain must be N(o)".into());
            }
            return bad;
        }
        let (p, n, cap) = (self.p, self.n, self.level());
        let pos = upper_positions(n);
        let v = |i: usize, j: usize| res_val(self.u0.get(i, j), p, cap);
        if !self.u0.is_upper_unipotent() || self.u0.k != cap {
            bad.push("base point is not unipotent over Z/p^n".into());
        }
        if pos.iter().any(|(i, j)| v(*i, *j) < self.l) {
            bad.push("an entry of u0 has valuation below the remainder".into());
        }
        match self.pivot {
            None => bad.push("missing pivot".into()),
            Some((i0, j0)) => {
                if v(i0, j0) != self.l {
                    bad.push("pivot does not attain the remainder".into());
                }
                if pos.iter().any(|(i, j)| v(*i, *j) == self.l && j - i < j0 - i0) {
                    bad.push("pivot gap is not minimal".into());
                }
                if pos.iter().any(|(i, j)| v(*i, *j) == self.l && j - i == j0 - i0 && *i > i0) {
                    bad.push("pivot row is not maximal".into());
                }
            }
        }
        if !pos.iter().any(|(i, j)| (v(*i, *j) as usize) < j - i) {
            bad.push("slope is not minimal".into());
        }
        if self.l as usize >= n {
            bad.push("remainder not below rank".into());
        }
        bad
    }

    /// A member with u^{A(ρ)} = lift(u₀) + pⁿ·t for the given integer offsets t.
    pub fn member(&self, t: &[i128]) -> MatG {
        let pn = ipow(self.p, self.level());
        let mut up = MatG::identity(self.n, self.p);
        for ((i, j), x) in upper_positions(self.n).iter().zip(t) {
            let base = if self.rho == 0 { 0 } else { self.u0.get(*i, *j) as i128 };
            let scale = if self.rho == 0 { 1 } else { pn };
            up.set(*i, *j, Q::from_integer(base + scale * x));
        }
        conj_a(&up, -(self.rho as i64))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rho": self.rho,
            "l": self.l,
            "u0": self.u0.to_text(),
            "pivot": self.pivot.map(|(i, j)| vec![i, j]),
        })
    }
}

/// The nice domain containing u.
pub fn classify(u: &MatG) -> Result<NiceDomain> {
    if !u.is_upper_unipotent() {
        return Err(Error::Precondition("classify expects an upper unipotent matrix".into()));
    }
    let (p, n) = (u.p, u.n);
    let mut rho = 0i64;
    for (i, j) in upper_positions(n) {
        let x = u.get(i, j);
        if x.is_zero() {
            continue;
        }
        let v = valuation(&x, p)?;
        let g = (j - i) as i64;
        if v < 0 {
            rho = rho.max((-v + g - 1) / g);
        }
    }
    if rho == 0 {
        return Ok(NiceDomain::slope_zero(p, n));
    }
    let up = conj_a(u, rho);
    let u0 = ResMat::from_mat(&up, n as u32)?;
    NiceDomain::from_base(rho as u32, u0).ok_or_else(|| Error::Precondition("slope is not minimal".into()))
}

/// Every valid base point u₀ ∈ N(Z/pⁿ) for slope ρ > 0.
pub fn domains_of_slope(p: u64, n: usize, rho: u32) -> Vec<NiceDomain> {
    let pos = upper_positions(n);
    let cap = n as u32;
    let mut out = Vec::new();
    for_each_tuple(&vec![ipow(p, cap); pos.len()], |t| {
        let mut u0 = ResMat::identity(n, p, cap);
        for ((i, j), x) in pos.iter().zip(t) {
            u0.set(*i, *j, *x as i64);
        }
        if let Some(d) = NiceDomain::from_base(rho, u0) {
            out.push(d);
        }
    });
    out
}

/// Number of residue classes mod p^L (entrywise) of the domain inside {v(u_{ij}) ≥ −b}.
fn class_count(d: &NiceDomain, b: i64, big_l: i64) -> u128 {
    let p = d.p;
    let mut total: u128 = 1;
    for (i, j) in upper_positions(d.n) {
        let (center_zero, center_val, modulus) = if d.rho == 0 {
            (true, i64::MAX, 0)
        } else {
            let r = d.u0.get(i, j);
            let g = (j - i) as i64 * d.rho as i64;
            let v = if r == 0 { i64::MAX } else { int_valuation(r as i128, p) as i64 - g };
            (r == 0, v, d.n as i64 - g)
        };
        let c = if modulus >= -b {
            if center_zero || center_val >= -b {
                ipow(p, (big_l - modulus) as u32) as u128
            } else {
                0
            }
        } else if center_zero {
            ipow(p, (big_l + b) as u32) as u128
        } else {
            0
        };
        total *= c;
    }
    total
}

/// The nice domains meeting {u : v(u_{ij}) ≥ −b}, with an exact partition certificate at
/// the refinement level L = n: the class counts add up to the region's, and every class
/// of the region classifies into a listed domain with the predicted multiplicity.
#[derive(Clone, Debug)]
pub struct RegionDecomposition {
    pub p: u64,
    pub n: usize,
    pub b: u32,
    pub level: u32,
    pub domains: Vec<(NiceDomain, u128)>,
    pub region_classes: u128,
    pub counted_classes: u128,
    pub classified: u128,
    pub failures: Vec<String>,
}

impl RegionDecomposition {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.region_classes == self.counted_classes && self.classified == self.region_classes
    }

    pub fn to_json(&self) -> Value {
        let by_slope: BTreeMap<u32, usize> = self.domains.iter().fold(BTreeMap::new(), |mut m, (d, _)| {
            *m.entry(d.rho).or_insert(0) += 1;
            m
        });
        json!({
            "p": self.p, "n": self.n, "b": self.b, "level": self.level,
            "domains": self.domains.len(),
            "domains_by_slope": by_slope.iter().map(|(k, v)| json!({"rho": k, "count": v})).collect::<Vec<_>>(),
            "region_classes": self.region_classes.to_string(),
            "counted_classes": self.counted_classes.to_string(),
            "classified": self.classified.to_string(),
            "failures": self.failures,
            "passed": self.passed(),
        })
    }
}

pub fn decompose_region(p: u64, n: usize, b: u32, cap: u128) -> Result<RegionDecomposition> {
    if n < 2 {
        return Err(Error::Precondition("rank must be at least 2".into()));
    }
    let big_l = n as i64;
    let bi = b as i64;
    let dim = upper_positions(n).len() as u32;
    let region_classes = (ipow(p, (big_l + bi) as u32) as u128).pow(dim);
    if region_classes > cap {
        return Err(Error::TruncationCap(format!("{region_classes} residue classes")));
    }
    let mut domains = vec![(NiceDomain::slope_zero(p, n), class_count(&NiceDomain::slope_zero(p, n), bi, big_l))];
    // A slope-ρ domain has an entry of valuation ≤ −(ρ−1)(j−i) − 1, so ρ ≤ b.
    for rho in 1..=b {
        for d in domains_of_slope(p, n, rho) {
            let c = class_count(&d, bi, big_l);
            if c > 0 {
                domains.push((d, c));
            }
        }
    }
    let counted_classes = domains.iter().map(|(_, c)| *c).sum();
    let index: BTreeMap<(u32, Vec<i64>), usize> = domains.iter().enumerate().map(|(k, (d, _))| ((d.rho, d.u0.e.clone()), k)).collect();
    let mut seen = vec![0u128; domains.len()];
    let mut failures = Vec::new();
    let mut classified = 0u128;
    let pos = upper_positions(n);
    let radix = ipow(p, (big_l + bi) as u32);
    let mut err = None;
    for_each_tuple(&vec![radix; pos.len()], |t| {
        if err.is_some() {
            return;
        }
        let mut u = MatG::identity(n, p);
        for ((i, j), x) in pos.iter().zip(t) {
            u.set(*i, *j, p_pow(p, -bi) * Q::from_integer(*x));
        }
        match classify(&u) {
            Ok(d) => match index.get(&(d.rho, d.u0.e.clone())) {
                Some(k) => {
                    seen[*k] += 1;
                    classified += 1;
                }
                None => failures.push(format!("class {} lands in unlisted domain {}", u.to_text(), d.to_json())),
            },
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    for ((d, c), s) in domains.iter().zip(&seen) {
        if c != s {
            failures.push(format!("domain {} predicted {c} classes, classified {s}", d.to_json()));
        }
        for f in d.verify() {
            failures.push(format!("domain {}: {f}", d.to_json()));
        }
    }
    Ok(RegionDecomposition { p, n, b, level: big_l as u32, domains, region_classes, counted_classes, classified, failures })
}

/// Residue of an integral entry modulo p^k, as used for base points.
pub fn entry_residue(x: &Q, p: u64, k: u32) -> Result<i64> {
    Ok(residue(x, p, k)? as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn a_rho_examples() {
        assert!(a_rho(2, 3, 0).is_identity());
        assert_eq!(a_rho(2, 3, 1), MatG::from_ints(2, &[&[4, 0, 0], &[0, 2, 0], &[0, 0, 1]]));
        let u = MatG::parse("1,1,1;0,1,1;0,0,1", 2).unwrap();
        let c = conj_a(&u, 2);
        assert_eq!(c.get(0, 1), Q::from_integer(4));
        assert_eq!(c.get(0, 2), Q::from_integer(16));
        assert_eq!(c, a_rho(2, 3, 2).mul(&u).mul(&a_rho(2, 3, -2)));
    }

    #[test]
    fn classify_examples() {
        let u = MatG::parse("1,3;0,1", 2).unwrap();
        assert_eq!(classify(&u).unwrap().rho, 0);
        let d = classify(&MatG::parse("1,1/4;0,1", 2).unwrap()).unwrap();
        assert_eq!((d.rho, d.l, d.pivot), (2, 0, Some((0, 1))));
        for p in [2u64, 3] {
            for k in 1..5i64 {
                let mut u = MatG::identity(3, p);
                u.set(0, 1, p_pow(p, -k + 1));
                u.set(0, 2, p_pow(p, -2 * k + 1));
                u.set(1, 2, p_pow(p, -k + 2));
                let d = classify(&u).unwrap();
                assert_eq!((d.rho, d.l, d.pivot), (k as u32, 1, Some((0, 1))), "p={p} k={k}");
                assert_eq!(d.u0.get(0, 1), p as i64);
                assert_eq!(d.u0.get(0, 2), p as i64);
                assert_eq!(d.u0.get(1, 2), (p * p) as i64);
                assert!(d.verify().is_empty());
            }
        }
    }

    #[test]
    fn classify_is_constant_on_domains() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, n) in [(2u64, 2usize), (3, 2), (2, 3)] {
            for rho in 1..4 {
                let ds = domains_of_slope(p, n, rho);
                for d in ds.iter().take(40) {
                    for _ in 0..5 {
                        let t: Vec<i128> = (0..n * (n - 1) / 2).map(|_| rng.gen_range(-20..20)).collect();
                        let u = d.member(&t);
                        assert!(d.contains(&u));
                        assert_eq!(&classify(&u).unwrap(), d);
                    }
                }
            }
        }
        let u = MatG::identity(2, 2);
        let mut v = u.clone();
        v.set(0, 1, qr(5, 3));
        assert_eq!(classify(&v).unwrap(), NiceDomain::slope_zero(2, 2));
    }

    #[test]
    fn region_partitions() {
        let d0 = decompose_region(2, 2, 0, 1 << 22).unwrap();
        assert_eq!(d0.domains.len(), 1);
        assert!(d0.passed());
        for (p, n, b) in [(2u64, 2usize, 2u32), (3, 2, 2), (2, 3, 1), (2, 2, 4)] {
            let r = decompose_region(p, n, b, 1 << 22).unwrap();
            assert!(r.passed(), "{}", r.to_json());
        }
    }
}
