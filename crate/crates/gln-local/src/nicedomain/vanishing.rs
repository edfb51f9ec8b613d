use std::collections::BTreeMap;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::congruence::{pivot_character_sum, q1_q2_construct, q1_q2_threshold};
use super::domain::{domains_of_slope, upper_positions, NiceDomain};
use crate::arith::{frac_part, ipow, p_pow, CycValue, RootCounter, Q};
use crate::error::{Error, Result};
use crate::group::{for_each_tuple, iwasawa_nak, random_k, MatG, ResMat};
use crate::rslocal::{eclass::diag_vals, EClassElement};

/// A vector f[s] of the induced model: f[s](n·a·k) = p^{−⟨s, v(a)⟩}·φ(k), with φ the
/// left B(o)-invariant, right K(q²)-invariant function of a class element.
pub struct InducedVector<'a> {
    pub elt: &'a EClassElement,
    pub s: Vec<i64>,
}

impl<'a> InducedVector<'a> {
    pub fn new(elt: &'a EClassElement, s: Vec<i64>) -> Result<Self> {
        if s.len() != elt.n {
            return Err(Error::Dimension(format!("s has {} entries for rank {}", s.len(), elt.n)));
        }
        Ok(Self { elt, s })
    }

    pub fn chi(&self, v: &[i64]) -> Q {
        p_pow(self.elt.ctx.p, -self.s.iter().zip(v).map(|(a, b)| a * b).sum::<i64>())
    }

    pub fn eval(&self, g: &MatG) -> Result<CycValue> {
        let d = iwasawa_nak(g)?;
        let v = diag_vals(&d.a)?;
        let k = ResMat::from_mat(&d.k, self.elt.phi_level())?;
        Ok(self.elt.phi(&k).scale(&self.chi(&v)).canonical())
    }
}

/// ∫_{u∈N₀} f[s](w_G·u·a·k)ψ⁻¹(u) du as an exact finite sum.
#[derive(Clone, Debug)]
pub struct VanishingValue {
    pub value: CycValue,
    pub slices: usize,
    pub nonzero_slices: usize,
    pub points: u128,
}

impl VanishingValue {
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

/// Computes the domain integral in the coordinates ũ = a⁻¹ua, where the domain is an
/// entrywise box ũ_{ij} ∈ x_{ij} + p^{f_{ij}}o. The integrand is right invariant under the
/// pattern group E (exponents max(f, L) with L from K(q²) and ψ), and its A-part is constant
/// on cosets of C = N ∩ K (exponents max(f, 0)). Grid points of C\box carry one Iwasawa
/// decomposition each; the C/E sum uses residues only. `extra` refines E by that many levels.
pub fn vanishing_check(fv: &InducedVector, dom: &NiceDomain, a: &[i64], k: &ResMat, extra: u32, cap: u128) -> Result<VanishingValue> {
    let elt = fv.elt;
    let (p, n, m) = (elt.ctx.p, elt.n, elt.ctx.m as i64);
    if dom.n != n || dom.p != p || a.len() != n {
        return Err(Error::Dimension("domain, a and f must share rank and prime".into()));
    }
    if a[n - 1] != 0 {
        return Err(Error::Precondition("|a_n| = 1 is required".into()));
    }
    let pos = upper_positions(n);
    let rho = dom.rho as i64;
    let mut xs = Vec::new();
    let mut fs = Vec::new();
    let mut cs = Vec::new();
    let mut es = Vec::new();
    for (i, j) in &pos {
        let (f, x) = if rho == 0 {
            (a[*j] - a[*i], Q::from_integer(0))
        } else {
            let g = (j - i) as i64 * rho;
            (n as i64 + a[*j] - a[*i] - g, p_pow(p, a[*j] - a[*i] - g) * Q::from_integer(dom.u0.get(*i, *j) as i128))
        };
        let mut l = 2 * m + extra as i64;
        if *j == *i + 1 {
            l = l.max(a[*j] - a[*i] + extra as i64);
        }
        xs.push(x);
        fs.push(f);
        cs.push(f.max(0));
        es.push(f.max(l));
    }
    let outer: Vec<i128> = fs.iter().zip(&cs).map(|(f, c)| ipow(p, (c - f) as u32)).collect();
    let inner_r: Vec<i128> = cs.iter().zip(&es).map(|(c, e)| ipow(p, (e - c) as u32)).collect();
    let points = outer.iter().chain(&inner_r).fold(1u128, |acc, r| acc.saturating_mul(*r as u128));
    if points > cap {
        return Err(Error::TruncationCap(format!("{points} points for domain {}", dom.to_json())));
    }
    let l2 = elt.phi_level();
    let mut inner = Vec::new();
    for_each_tuple(&inner_r, |t| {
        let mut h = ResMat::identity(n, p, l2);
        let mut sup = vec![Q::from_integer(0); n - 1];
        for (((i, j), x), c) in pos.iter().zip(t).zip(&cs) {
            let v = ipow(p, *c as u32) * x;
            h.set(*i, *j, v.rem_euclid(ipow(p, l2)) as i64);
            if *j == *i + 1 {
                sup[*i] = Q::from_integer(v);
            }
        }
        inner.push((h, sup));
    });
    let r: Vec<Q> = (0..n - 1).map(|i| p_pow(p, a[i] - a[i + 1])).collect();
    let w = MatG::w_g(n, p);
    let mut slices: BTreeMap<Vec<i64>, RootCounter> = BTreeMap::new();
    let mut err = None;
    for_each_tuple(&outer, |t| {
        if err.is_some() {
            return;
        }
        let mut u = MatG::identity(n, p);
        for ((((i, j), x), f), s) in pos.iter().zip(&xs).zip(&fs).zip(t) {
            u.set(*i, *j, *x + p_pow(p, *f) * Q::from_integer(*s));
        }
        let d = match iwasawa_nak(&w.mul(&u)) {
            Ok(d) => d,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let (lam, k1) = match (diag_vals(&d.a), ResMat::from_mat(&d.k, l2)) {
            (Ok(v), Ok(k1)) => (v, k1),
            (Err(e), _) | (_, Err(e)) => {
                err = Some(e);
                return;
            }
        };
        let x0: Q = (0..n - 1).map(|i| r[i] * u.get(i, i + 1)).sum();
        let counter = slices.entry(lam).or_insert_with(|| RootCounter::new(p));
        for (h, sup) in &inner {
            if let Some(ph) = elt.phi_exponent(&k1.mul(h).mul(k)) {
                let x: Q = x0 + r.iter().zip(sup).map(|(ri, s)| *ri * *s).sum::<Q>();
                counter.add_root(&frac_part(&(ph - x), p), 1);
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let aw: Vec<i64> = a.iter().rev().copied().collect();
    let jac: i64 = pos.iter().map(|(i, j)| a[*j] - a[*i]).sum::<i64>() - es.iter().sum::<i64>();
    let scale = fv.chi(&aw) * p_pow(p, jac);
    let mut value = CycValue::zero(p);
    let mut nonzero_slices = 0;
    for (lam, c) in &slices {
        let part = c.to_cyc(&(scale * fv.chi(lam))).canonical();
        if !part.is_zero() {
            nonzero_slices += 1;
            value = &value + &part;
        }
    }
    Ok(VanishingValue { value: value.canonical(), slices: slices.len(), nonzero_slices, points })
}

/// The invariance chain of the vanishing argument, checked pointwise on members u of N₀ and
/// x ∈ o/p^{l+1}: h(u) = h(w) for h = f[s](w_G·a·k), the superdiagonal of w differs from
/// that of u by p^{−l−1}u₀_{i₀j₀}x modulo o, and the x-sum of that character is zero.
#[derive(Clone, Debug, Default)]
pub struct MechanismReport {
    pub checked: usize,
    pub invariance_failures: usize,
    pub shift_failures: usize,
    pub x_sum_zero: bool,
}

impl MechanismReport {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.invariance_failures == 0 && self.shift_failures == 0 && self.x_sum_zero
    }

    pub fn to_json(&self) -> Value {
        json!({
            "checked": self.checked,
            "invariance_failures": self.invariance_failures,
            "shift_failures": self.shift_failures,
            "x_sum_zero": self.x_sum_zero,
            "passed": self.passed(),
        })
    }
}

/// Slope above which the chain is expected to hold for |a^α| ≤ T: q₁^{A(−ρ)} must land in
/// a·K(q²)·a⁻¹.
pub fn mechanism_threshold(n: usize, m: u32) -> u32 {
    q1_q2_threshold(n).max(2 * m + n as u32)
}

pub fn mechanism_check(fv: &InducedVector, dom: &NiceDomain, a: &[i64], k: &MatG, members: &[Vec<i128>]) -> Result<MechanismReport> {
    let p = dom.p;
    let n = dom.n;
    let (i0, j0) = dom.pivot.ok_or_else(|| Error::Precondition("slope-0 domain".into()))?;
    let w_g = MatG::w_g(n, p);
    let ak = MatG::diag_pow(p, a).mul(k);
    let h = |g: &MatG| fv.eval(&w_g.mul(g).mul(&ak));
    let sup = |g: &MatG| -> Q { (0..n - 1).map(|i| g.get(i, i + 1)).sum() };
    let c = p_pow(p, -(dom.l as i64) - 1) * Q::from_integer(dom.u0.get(i0, j0) as i128);
    let mut rep = MechanismReport { x_sum_zero: pivot_character_sum(dom)?.is_zero(), ..Default::default() };
    let _ = j0;
    for t in members {
        let u = dom.member(t);
        let hu = h(&u)?;
        for x in 0..ipow(p, dom.l + 1) {
            let xq = Q::from_integer(x);
            let cw = q1_q2_construct(dom, &u, &xq)?;
            rep.checked += 1;
            if h(&cw.w)? != hu {
                rep.invariance_failures += 1;
            }
            if !frac_part(&(sup(&cw.w) - sup(&u) - c * xq), p).is_zero() {
                rep.shift_failures += 1;
            }
        }
    }
    Ok(rep)
}

/// Scan box for the vanishing statement.
#[derive(Clone, Debug)]
pub struct VanishingScanConfig {
    pub rho_max: u32,
    pub a_box: Vec<Vec<i64>>,
    pub ks: Vec<ResMat>,
    /// Domains kept per (remainder, pivot) class and slope; None keeps all.
    pub per_class: Option<usize>,
    pub seed: u64,
    pub cap: u128,
    pub certify: bool,
}

impl VanishingScanConfig {
    /// a with |a_n| = 1 and v(a_i) − v(a_{i+1}) ∈ {−2m, 0}, k ∈ {1, w_G} plus two seeded draws.
    pub fn standard(elt: &EClassElement, rho_max: u32, per_class: Option<usize>) -> Self {
        let (p, n, m) = (elt.ctx.p, elt.n, elt.ctx.m as i64);
        let mut a_box = Vec::new();
        for_each_tuple(&vec![2; n - 1], |t| {
            let mut v = vec![0i64; n];
            for i in (0..n - 1).rev() {
                v[i] = v[i + 1] - 2 * m * t[i] as i64;
            }
            a_box.push(v);
        });
        let l2 = elt.phi_level();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut ks = vec![ResMat::identity(n, p, l2), ResMat::from_mat(&MatG::w_g(n, p), l2).expect("w_G is integral")];
        for _ in 0..2 {
            ks.push(ResMat::from_mat(&random_k(&mut rng, n, p, l2), l2).expect("K element"));
        }
        Self { rho_max, a_box, ks, per_class, seed: 17, cap: 1 << 26, certify: false }
    }
}

#[derive(Clone, Debug)]
pub struct DomainOutcome {
    pub domain: NiceDomain,
    pub cases: usize,
    pub nonzero_cases: usize,
    pub nonzero_slices: usize,
    pub uncertified: usize,
    pub example: Option<String>,
}

#[derive(Clone, Debug)]
pub struct VanishingScanReport {
    pub p: u64,
    pub n: usize,
    pub m: u32,
    pub rho_max: u32,
    pub outcomes: Vec<DomainOutcome>,
    /// One more than the largest slope with a nonvanishing domain integral.
    pub rho0: u32,
    pub slope_zero_nonzero: bool,
    pub uncertified: usize,
}

impl VanishingScanReport {
    pub fn bound(&self) -> u32 {
        4 * self.m + self.n as u32
    }

    pub fn passed(&self) -> bool {
        self.rho0 <= self.bound() && self.rho0 <= self.rho_max && self.slope_zero_nonzero && self.uncertified == 0
    }

    pub fn to_json(&self) -> Value {
        let mut by_slope: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
        for o in &self.outcomes {
            let e = by_slope.entry(o.domain.rho).or_insert((0, 0));
            e.0 += 1;
            if o.nonzero_cases > 0 {
                e.1 += 1;
            }
        }
        json!({
            "p": self.p, "n": self.n, "m": self.m,
            "v_t": 2 * self.m,
            "rho_max": self.rho_max,
            "rho0": self.rho0,
            "rho0_bound": self.bound(),
            "slope_zero_nonzero": self.slope_zero_nonzero,
            "uncertified": self.uncertified,
            "slopes": by_slope.iter().map(|(r, (d, nz))| json!({"rho": r, "domains": d, "nonvanishing_domains": nz})).collect::<Vec<_>>(),
            "domains": self.outcomes.iter().map(|o| json!({
                "domain": o.domain.to_json(),
                "cases": o.cases,
                "nonzero_cases": o.nonzero_cases,
                "nonzero_slices": o.nonzero_slices,
                "zero": o.nonzero_cases == 0,
                "example": o.example,
            })).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

/// Domains of one slope, optionally thinned to a seeded sample per (remainder, pivot) class.
pub fn scan_domains(p: u64, n: usize, rho: u32, per_class: Option<usize>, seed: u64) -> Vec<NiceDomain> {
    if rho == 0 {
        return vec![NiceDomain::slope_zero(p, n)];
    }
    let all = domains_of_slope(p, n, rho);
    let Some(k) = per_class else { return all };
    let mut classes: BTreeMap<(u32, Option<(usize, usize)>), Vec<NiceDomain>> = BTreeMap::new();
    for d in all {
        classes.entry((d.l, d.pivot)).or_default().push(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ rho as u64);
    let mut out = Vec::new();
    for (_, mut v) in classes {
        v.shuffle(&mut rng);
        v.truncate(k);
        v.sort();
        out.extend(v);
    }
    out
}

/// Evaluates one domain over the whole (a, k) box.
pub fn domain_outcome(fv: &InducedVector, dom: &NiceDomain, cfg: &VanishingScanConfig) -> Result<DomainOutcome> {
    let mut out = DomainOutcome { domain: dom.clone(), cases: 0, nonzero_cases: 0, nonzero_slices: 0, uncertified: 0, example: None };
    for a in &cfg.a_box {
        for k in &cfg.ks {
            let v = vanishing_check(fv, dom, a, k, 0, cfg.cap)?;
            if cfg.certify {
                let finer = vanishing_check(fv, dom, a, k, 1, cfg.cap)?;
                if finer.value != v.value {
                    out.uncertified += 1;
                }
            }
            out.cases += 1;
            out.nonzero_slices += v.nonzero_slices;
            if !v.is_zero() {
                out.nonzero_cases += 1;
                if out.example.is_none() {
                    out.example = Some(format!("a={a:?} k={} value={}", k.to_text(), v.value.to_text()));
                }
            }
        }
    }
    Ok(out)
}

pub fn vanishing_scan(fv: &InducedVector, cfg: &VanishingScanConfig) -> Result<VanishingScanReport> {
    let elt = fv.elt;
    let (p, n) = (elt.ctx.p, elt.n);
    let mut outcomes = Vec::new();
    for rho in 0..=cfg.rho_max {
        for d in scan_domains(p, n, rho, cfg.per_class, cfg.seed) {
            outcomes.push(domain_outcome(fv, &d, cfg)?);
        }
    }
    Ok(summarize(elt, cfg.rho_max, outcomes))
}

/// Folds per-domain outcomes (in scan order) into the report.
pub fn summarize(elt: &EClassElement, rho_max: u32, outcomes: Vec<DomainOutcome>) -> VanishingScanReport {
    let rho0 = outcomes.iter().filter(|o| o.nonzero_cases > 0).map(|o| o.domain.rho + 1).max().unwrap_or(0);
    let slope_zero_nonzero = outcomes.iter().any(|o| o.domain.rho == 0 && o.nonzero_cases > 0);
    let uncertified = outcomes.iter().map(|o| o.uncertified).sum();
    VanishingScanReport { p: elt.ctx.p, n: elt.n, m: elt.ctx.m, rho_max, outcomes, rho0, slope_zero_nonzero, uncertified }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DepthContext;
    use crate::rslocal::EClassElement;

    fn elt(p: u64, m: u32, n: usize) -> EClassElement {
        EClassElement::translated(DepthContext::new(p, m).unwrap(), n).unwrap()
    }

    /// Direct Riemann sum over N₀ at a uniform fine level: u′ = u₀ + pⁿt with t mod p^{L−n}.
    fn direct_gl2(fv: &InducedVector, dom: &NiceDomain, a: &[i64], k: &MatG, big_l: u32) -> CycValue {
        let p = dom.p;
        let w = MatG::w_g(2, p);
        let ak = MatG::diag_pow(p, a).mul(k);
        let mut acc = CycValue::zero(p);
        let count = ipow(p, big_l - 2);
        for t in 0..count {
            let u = dom.member(&[t]);
            let v = fv.eval(&w.mul(&u).mul(&ak)).unwrap();
            let ps = crate::arith::psi(&-u.get(0, 1), p);
            acc = &acc + &(&v * &ps);
        }
        // Each point carries the measure of p^{L−ρ}o in the u-coordinate.
        acc.scale(&p_pow(p, -(big_l as i64) + dom.rho as i64)).canonical()
    }

    #[test]
    fn matches_direct_sum_on_gl2() {
        for (p, m) in [(2u64, 1u32), (3, 1)] {
            let e = elt(p, m, 2);
            let fv = InducedVector::new(&e, vec![1, 0]).unwrap();
            let cfg = VanishingScanConfig::standard(&e, 0, None);
            for rho in 1..5 {
                for dom in scan_domains(p, 2, rho, None, 0).iter().take(3) {
                    for a in &cfg.a_box {
                        for kr in &cfg.ks {
                            let fast = vanishing_check(&fv, dom, a, kr, 0, 1 << 24).unwrap();
                            let slow = direct_gl2(&fv, dom, a, &kr.lift(), rho + 2 * m + 2);
                            assert_eq!(fast.value, slow, "p={p} rho={rho} a={a:?} k={}", kr.to_text());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn slope_five_vanishes_gl2() {
        let e = elt(2, 1, 2);
        let fv = InducedVector::new(&e, vec![0, 0]).unwrap();
        let cfg = VanishingScanConfig::standard(&e, 5, None);
        for dom in scan_domains(2, 2, 5, None, 0) {
            let o = domain_outcome(&fv, &dom, &cfg).unwrap();
            assert_eq!(o.nonzero_cases, 0);
        }
        let zero = domain_outcome(&fv, &NiceDomain::slope_zero(2, 2), &cfg).unwrap();
        assert!(zero.nonzero_cases > 0);
    }

    #[test]
    fn scans_find_threshold_gl2() {
        for (p, m) in [(2u64, 1u32), (3, 1), (2, 2)] {
            let e = elt(p, m, 2);
            let fv = InducedVector::new(&e, vec![0, 0]).unwrap();
            let mut cfg = VanishingScanConfig::standard(&e, 4 * m + 3, None);
            cfg.certify = true;
            let r = vanishing_scan(&fv, &cfg).unwrap();
            assert!(r.passed(), "{}", r.to_json());
        }
    }

    #[test]
    fn mechanism_chain_gl2() {
        for (p, m) in [(2u64, 1u32), (3, 1)] {
            let e = elt(p, m, 2);
            let fv = InducedVector::new(&e, vec![1, 0]).unwrap();
            let rho = mechanism_threshold(2, m);
            let members: Vec<Vec<i128>> = (0..6).map(|t| vec![t * 7 - 11]).collect();
            for dom in scan_domains(p, 2, rho, None, 0) {
                for a in [vec![0, 0], vec![-2 * m as i64, 0]] {
                    let r = mechanism_check(&fv, &dom, &a, &MatG::w_g(2, p), &members).unwrap();
                    assert!(r.passed(), "{}", r.to_json());
                }
            }
        }
    }

    #[test]
    fn refinement_does_not_change_value() {
        let e = elt(2, 1, 3);
        let fv = InducedVector::new(&e, vec![0, 0, 0]).unwrap();
        let k = ResMat::identity(3, 2, 2);
        for rho in 0..3 {
            for dom in scan_domains(2, 3, rho, Some(1), 3) {
                let a = vec![-2, 0, 0];
                let v0 = vanishing_check(&fv, &dom, &a, &k, 0, 1 << 24).unwrap();
                let v1 = vanishing_check(&fv, &dom, &a, &k, 1, 1 << 24).unwrap();
                assert_eq!(v0.value, v1.value);
            }
        }
    }

    #[test]
    fn scan_gl3_sampled() {
        let e = elt(2, 1, 3);
        let fv = InducedVector::new(&e, vec![0, 0, 0]).unwrap();
        let cfg = VanishingScanConfig::standard(&e, 4, Some(1));
        let r = vanishing_scan(&fv, &cfg).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.rho0, 4);
    }
}
