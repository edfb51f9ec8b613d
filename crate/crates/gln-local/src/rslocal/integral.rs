use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::eclass::EClassElement;
use super::transform::{k_orbits, Transform};
use crate::arith::{fmt_q, p_pow, CycValue, Q};
use crate::error::{Error, Result};
use crate::group::{for_each_tuple, ResMat};

/// Truncation policy for the noncompact a-direction of the Rankin–Selberg integrals.
#[derive(Clone, Debug)]
pub struct RSIntegralConfig {
    /// Valuation units by which the a-box is widened to certify stabilization.
    pub growth: i64,
    /// Largest number of u-cells enumerated for one transform.
    pub cap: u128,
}

impl Default for RSIntegralConfig {
    fn default() -> Self {
        Self { growth: 1, cap: 1 << 22 }
    }
}

/// D_P = ∏_{n′<i≤n} T^{i−(n+1)/2}, returned as its exponent in units of T^{1/2}.
pub fn d_p_half_exponent(n: usize, n1: usize) -> Result<i64> {
    if n1 > n {
        return Err(Error::Precondition(format!("n′ = {n1} exceeds n = {n}")));
    }
    Ok((n1 + 1..=n).map(|i| 2 * i as i64 - n as i64 - 1).sum())
}

/// D_P as a rational number, with T = p^{2m}.
pub fn d_p(p: u64, m: u32, n: usize, n1: usize) -> Result<Q> {
    Ok(p_pow(p, m as i64 * d_p_half_exponent(n, n1)?))
}

/// log_p of the real number D_P·|det c|.
fn size_exponent(elt: &EClassElement, start: usize, c: &[i64]) -> Result<i64> {
    Ok(elt.ctx.m as i64 * d_p_half_exponent(elt.n, start)? - c.iter().sum::<i64>())
}

/// log_p of T^{n″(n″−1)/2}.
fn size_bound(elt: &EClassElement, start: usize) -> i64 {
    let b = (elt.n - start) as i64;
    elt.ctx.m as i64 * b * (b - 1)
}

/// Valuation box for a in the Iwasawa integral: |a_n| = 1, the coordinates left of the
/// block pinned by the support of f, the block bounded below by a^α ∈ q⁻² and above
/// by the determinant condition.
fn a_box(elt: &EClassElement, start: usize, c: &[i64], growth: i64) -> Vec<(i64, i64)> {
    let n = elt.n;
    let m2 = 2 * elt.ctx.m as i64;
    let total: i64 = (start..n).map(|i| elt.support[i] + c[i]).sum();
    let lo: Vec<i64> = (0..n).map(|i| -m2 * (n - 1 - i) as i64).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i == n - 1 {
            out.push((0, 0));
        } else if i < start {
            let v = elt.support[i] + c[i];
            out.push((v - growth, v + growth));
        } else {
            let others: i64 = (start..n - 1).filter(|j| *j != i).map(|j| lo[j]).sum();
            out.push((lo[i] - growth, total - others + growth));
        }
    }
    out
}

fn for_each_in_box(bx: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    let radices: Vec<i128> = bx.iter().map(|(l, h)| (h - l + 1).max(0) as i128).collect();
    for_each_tuple(&radices, |t| {
        let v: Vec<i64> = bx.iter().zip(t).map(|((l, _), x)| l + *x as i64).collect();
        f(&v);
    });
}

fn in_box(v: &[i64], bx: &[(i64, i64)]) -> bool {
    v.iter().zip(bx).all(|(x, (l, h))| l <= x && x <= h)
}

/// An exact value of 𝒬_P(φ, f, c) with its truncation certificate.
#[derive(Clone, Debug)]
pub struct QValue {
    pub c: Vec<i64>,
    pub value: CycValue,
    pub rational: Option<Q>,
    pub a_points: usize,
    pub certified: bool,
}

/// 𝒬_P(φ, f, c) = ∫_{|a_n|=1} ∫_K |W_P(f, c, ak)|² dk da/δ_N(a), with φ the indicator of
/// primitive integral rows. The K-integral runs over N(o)\K/K(p^m), where |W_P(a·)| is
/// invariant; the a-sum is certified by widening the box by `cfg.growth`.
pub fn q_phi_f_c(tr: &mut Transform, c: &[i64], orbits: &(Vec<ResMat>, Q), cfg: &RSIntegralConfig) -> Result<QValue> {
    let elt = tr.elt;
    let p = elt.ctx.p;
    let base = a_box(elt, tr.start, c, 0);
    let wide = a_box(elt, tr.start, c, cfg.growth);
    let mut inside = CycValue::zero(p);
    let mut ring = CycValue::zero(p);
    let mut points = 0;
    let mut err = None;
    let mut pts = Vec::new();
    for_each_in_box(&wide, |v| pts.push(v.to_vec()));
    for v in pts {
        let mut acc = CycValue::zero(p);
        for k in &orbits.0 {
            match tr.at_ak(c, &v, k, 0, 0) {
                Ok(w) => {
                    if !w.is_zero() {
                        acc = &acc + &w.abs_sq();
                    }
                }
                Err(e) => {
                    err = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = err {
            return Err(e);
        }
        if acc.is_zero() {
            continue;
        }
        let delta_inv = p_pow(p, -crate::group::delta_n_exponent(&v));
        let contrib = acc.scale(&(orbits.1 * delta_inv));
        if in_box(&v, &base) {
            points += 1;
            inside = &inside + &contrib;
        } else {
            ring = &ring + &contrib;
        }
    }
    let value = inside.canonical();
    Ok(QValue { c: c.to_vec(), rational: value.as_rational(), value, a_points: points, certified: ring.is_zero() })
}

/// One grid point of a 𝒬_P scan.
#[derive(Clone, Debug)]
pub struct QEntry {
    pub q: QValue,
    pub size_exponent: i64,
    pub allowed: bool,
    pub ratio: Option<Q>,
}

/// Scan of 𝒬_P over a c-grid: zero outside D_P|det c| ≤ T^{n″(n″−1)/2}, and the ratio
/// 𝒬_P·D_P·|det c|/‖f‖² tabulated inside.
#[derive(Clone, Debug)]
pub struct QScanReport {
    pub kind: &'static str,
    pub n: usize,
    pub n1: usize,
    pub p: u64,
    pub m: u32,
    pub entries: Vec<QEntry>,
    pub violations: Vec<Vec<i64>>,
    pub uncertified: Vec<Vec<i64>>,
    pub irrational: Vec<Vec<i64>>,
    pub nonzero_inside: usize,
    pub max_ratio: Q,
}

impl QScanReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.uncertified.is_empty() && self.irrational.is_empty() && self.nonzero_inside > 0
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "c": e.q.c,
                    "value": e.q.rational.map(|x| fmt_q(&x)).unwrap_or_else(|| e.q.value.to_text()),
                    "size_exponent": e.size_exponent,
                    "allowed": e.allowed,
                    "ratio": e.ratio.map(|x| fmt_q(&x)),
                    "a_points": e.q.a_points,
                    "certified": e.q.certified,
                })
            })
            .collect();
        json!({
            "kind": self.kind,
            "n": self.n, "n1": self.n1, "p": self.p, "m": self.m,
            "d_p_half_exponent": d_p_half_exponent(self.n, self.n1).unwrap_or(0),
            "entries": rows,
            "violations": self.violations,
            "uncertified": self.uncertified,
            "irrational": self.irrational,
            "nonzero_inside": self.nonzero_inside,
            "max_ratio": fmt_q(&self.max_ratio),
            "passed": self.passed(),
        })
    }
}

/// All c ∈ A'' with block valuations in [−window, window].
pub fn c_grid(n: usize, n1: usize, window: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for_each_tuple(&vec![(2 * window + 1) as i128; n - n1], |t| {
        let mut c = vec![0i64; n1];
        c.extend(t.iter().map(|x| *x as i64 - window));
        out.push(c);
    });
    out
}

/// 𝒬_P over a c-grid for the parabolic with Levi GL_{n′} × GL_{n″}; n′ = 0 is 𝒬 itself.
pub fn qp_nonvanishing_check(elt: &EClassElement, n1: usize, grid: &[Vec<i64>], cfg: &RSIntegralConfig) -> Result<QScanReport> {
    let (n, p, m) = (elt.n, elt.ctx.p, elt.ctx.m);
    let mut tr = Transform::new(elt, n1)?.with_cap(cfg.cap);
    let orbits = k_orbits(n, p, elt.equivariance_level(), 2 * m)?;
    let bound = size_bound(elt, n1);
    let mut rep = QScanReport {
        kind: elt.kind.name(),
        n,
        n1,
        p,
        m,
        entries: Vec::new(),
        violations: Vec::new(),
        uncertified: Vec::new(),
        irrational: Vec::new(),
        nonzero_inside: 0,
        max_ratio: Q::zero(),
    };
    for c in grid {
        let q = q_phi_f_c(&mut tr, c, &orbits, cfg)?;
        let se = size_exponent(elt, n1, c)?;
        let allowed = se <= bound;
        let nonzero = !q.value.is_zero();
        if !q.certified {
            rep.uncertified.push(c.clone());
        }
        if nonzero && q.rational.is_none() {
            rep.irrational.push(c.clone());
        }
        if nonzero && !allowed {
            rep.violations.push(c.clone());
        }
        let ratio = match (nonzero, q.rational) {
            (true, Some(x)) => Some(x * p_pow(p, se) / elt.norm_sq),
            _ => None,
        };
        if nonzero && allowed {
            rep.nonzero_inside += 1;
        }
        if let Some(r) = ratio {
            if r > rep.max_ratio {
                rep.max_ratio = r;
            }
        }
        rep.entries.push(QEntry { q, size_exponent: se, allowed, ratio });
    }
    Ok(rep)
}

/// Pointwise vanishing laws of W: a^α ∉ q⁻² for some simple root forces W(f, c, ak) = 0, and
/// W(f, b, ak)·conj W(f, c, ak) = 0 whenever |det b| ≠ |det c|.
#[derive(Clone, Debug, Default)]
pub struct SupportReport {
    pub n: usize,
    pub p: u64,
    pub m: u32,
    pub wsupport_points: usize,
    pub wsupport_violations: Vec<String>,
    pub det_pairs: usize,
    pub det_violations: Vec<String>,
    pub det_nonzero_matched: usize,
}

impl SupportReport {
    pub fn passed(&self) -> bool {
        self.wsupport_violations.is_empty() && self.det_violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n, "p": self.p, "m": self.m,
            "wsupport_points": self.wsupport_points,
            "wsupport_violations": self.wsupport_violations,
            "det_pairs": self.det_pairs,
            "det_violations": self.det_violations,
            "det_nonzero_matched": self.det_nonzero_matched,
            "passed": self.passed(),
        })
    }
}

/// W = 0 at every a in [−bound, bound]^n with some v(a_i) − v(a_{i+1}) < −2m, for every c
/// in `cs` and every k in N(o)\K/K(p^{k_level}).
pub fn wsupport_scan(elt: &EClassElement, cs: &[Vec<i64>], bound: i64, k_level: u32, cfg: &RSIntegralConfig, rep: &mut SupportReport) -> Result<()> {
    let (n, p, m) = (elt.n, elt.ctx.p, elt.ctx.m);
    rep.n = n;
    rep.p = p;
    rep.m = m;
    let mut tr = Transform::new(elt, 0)?.with_cap(cfg.cap);
    let (reps, _) = k_orbits(n, p, k_level, 2 * m)?;
    let mut pts = Vec::new();
    for_each_in_box(&vec![(-bound, bound); n], |v| pts.push(v.to_vec()));
    for v in pts {
        if !(0..n - 1).any(|i| v[i] - v[i + 1] < -2 * m as i64) {
            continue;
        }
        for c in cs {
            for k in &reps {
                rep.wsupport_points += 1;
                if !tr.at_ak(c, &v, k, 0, 0)?.is_zero() {
                    rep.wsupport_violations.push(format!("a={v:?} c={c:?} k={}", k.to_text()));
                }
            }
        }
    }
    Ok(())
}

/// The det-matching law on all pairs (b, c) from `cs`, over the admissible a-box and
/// N(o)\K/K(p^m).
pub fn det_matching_scan(elt: &EClassElement, cs: &[Vec<i64>], cfg: &RSIntegralConfig, rep: &mut SupportReport) -> Result<()> {
    let (n, p, m) = (elt.n, elt.ctx.p, elt.ctx.m);
    let mut tr = Transform::new(elt, 0)?.with_cap(cfg.cap);
    let (reps, _) = k_orbits(n, p, elt.equivariance_level(), 2 * m)?;
    let mut pts = Vec::new();
    for c in cs {
        for_each_in_box(&a_box(elt, 0, c, 0), |v| pts.push(v.to_vec()));
    }
    pts.sort();
    pts.dedup();
    for v in &pts {
        let mut vals = Vec::new();
        for k in &reps {
            let row: Vec<bool> = cs.iter().map(|c| tr.at_ak(c, v, k, 0, 0).map(|w| !w.is_zero())).collect::<Result<_>>()?;
            vals.push(row);
        }
        for (i, b) in cs.iter().enumerate() {
            for (j, c) in cs.iter().enumerate().skip(i + 1) {
                rep.det_pairs += 1;
                let same = b.iter().sum::<i64>() == c.iter().sum::<i64>();
                for row in &vals {
                    if row[i] && row[j] {
                        if same {
                            rep.det_nonzero_matched += 1;
                        } else {
                            rep.det_violations.push(format!("a={v:?} b={b:?} c={c:?}"));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Empirical denominator bound: the largest e = max_i(−v(c_i)) with W(f, c, ak) ≠ 0 for
/// some admissible a (|a_n| = 1, a^α ∈ q⁻²) and k.
#[derive(Clone, Debug)]
pub struct DenominatorReport {
    pub n: usize,
    pub p: u64,
    pub m: u32,
    pub window: i64,
    pub scanned: usize,
    pub nonzero: usize,
    pub max_e: i64,
    pub empirical_d: i64,
    pub beyond_checked: usize,
    pub beyond_nonzero: usize,
    pub baseline_nonzero: bool,
}

impl DenominatorReport {
    /// The threshold is determined only if it sits strictly inside the window.
    pub fn passed(&self) -> bool {
        self.baseline_nonzero && self.beyond_nonzero == 0 && self.max_e < self.window
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n, "p": self.p, "m": self.m,
            "window": self.window,
            "scanned": self.scanned,
            "nonzero": self.nonzero,
            "max_e": self.max_e,
            "empirical_d": self.empirical_d,
            "beyond_checked": self.beyond_checked,
            "beyond_nonzero": self.beyond_nonzero,
            "baseline_nonzero": self.baseline_nonzero,
            "passed": self.passed(),
        })
    }
}

pub fn denominator_scan(elt: &EClassElement, window: i64, cfg: &RSIntegralConfig) -> Result<DenominatorReport> {
    let (n, p, m) = (elt.n, elt.ctx.p, elt.ctx.m);
    let mut tr = Transform::new(elt, 0)?.with_cap(cfg.cap);
    let (reps, _) = k_orbits(n, p, elt.equivariance_level(), 2 * m)?;
    let grid = c_grid(n, 0, window);
    let mut found = Vec::with_capacity(grid.len());
    for c in &grid {
        let mut any = false;
        let mut pts = Vec::new();
        for_each_in_box(&a_box(elt, 0, c, 0), |v| pts.push(v.to_vec()));
        'outer: for v in &pts {
            for k in &reps {
                if !tr.at_ak(c, v, k, 0, 0)?.is_zero() {
                    any = true;
                    break 'outer;
                }
            }
        }
        found.push(any);
    }
    let e_of = |c: &Vec<i64>| c.iter().map(|x| -x).max().unwrap_or(0);
    let max_e = grid.iter().zip(&found).filter(|(_, f)| **f).map(|(c, _)| e_of(c)).max().unwrap_or(i64::MIN);
    let two_m = 2 * m as i64;
    let empirical_d = if max_e <= 0 { 0 } else { (max_e + two_m - 1) / two_m };
    let beyond: Vec<bool> = grid.iter().zip(&found).filter(|(c, _)| e_of(c) > two_m * empirical_d).map(|(_, f)| *f).collect();
    let baseline = grid.iter().zip(&found).any(|(c, f)| c.iter().all(|x| *x == 0) && *f);
    Ok(DenominatorReport {
        n,
        p,
        m,
        window,
        scanned: grid.len(),
        nonzero: found.iter().filter(|f| **f).count(),
        max_e,
        empirical_d,
        beyond_checked: beyond.len(),
        beyond_nonzero: beyond.iter().filter(|f| **f).count(),
        baseline_nonzero: baseline,
    })
}

/// ‖f‖² recomputed as Σ_a ∫_K |f(ak)|² dk/δ_N(a) from the explicit values on s·K/K(q²).
pub fn norm_sq_by_iwasawa(elt: &EClassElement) -> Result<Q> {
    let (n, p, m) = (elt.n, elt.ctx.p, elt.ctx.m);
    let s = elt.support_point();
    let mut acc = Q::zero();
    let mut total = 0i128;
    let mut err = None;
    crate::group::for_each_coset(crate::group::SubgroupSpec::K, n, p, m, |k| {
        total += 1;
        match elt.eval(&s.mul(k)) {
            Ok(v) if !v.is_zero() => acc += Q::one(),
            Ok(_) => {}
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let delta_inv = p_pow(p, -crate::group::delta_n_exponent(&elt.support));
    Ok(elt.c1_sq * delta_inv * acc / Q::from_integer(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DepthContext;
    use crate::rslocal::transform::w_fcg_oracle;

    fn gl2(p: u64, m: u32) -> EClassElement {
        EClassElement::translated(DepthContext::new(p, m).unwrap(), 2).unwrap()
    }

    #[test]
    fn d_p_examples() {
        assert_eq!(d_p_half_exponent(3, 1).unwrap(), 2);
        assert_eq!(d_p_half_exponent(3, 3).unwrap(), 0);
        assert_eq!(d_p_half_exponent(2, 0).unwrap(), 0);
        assert_eq!(d_p(2, 1, 3, 1).unwrap(), Q::from_integer(4));
        assert!(d_p_half_exponent(2, 3).is_err());
    }

    #[test]
    fn norm_via_iwasawa_is_one() {
        for (p, m) in [(2u64, 1u32), (3, 1), (2, 2)] {
            let e = gl2(p, m);
            assert_eq!(norm_sq_by_iwasawa(&e).unwrap(), Q::one());
        }
    }

    #[test]
    fn q_scan_gl2() {
        for (p, m) in [(2u64, 1u32), (3, 1)] {
            let e = gl2(p, m);
            let grid = c_grid(2, 0, 3 * m as i64);
            let r = qp_nonvanishing_check(&e, 0, &grid, &RSIntegralConfig::default()).unwrap();
            assert!(r.passed(), "{}", r.to_json());
        }
    }

    #[test]
    fn q_matches_full_k_oracle() {
        let e = gl2(2, 1);
        let mut tr = Transform::new(&e, 0).unwrap();
        let orbits = k_orbits(2, 2, 1, 2).unwrap();
        let mut ks = Vec::new();
        crate::group::for_each_coset(crate::group::SubgroupSpec::K, 2, 2, 2, |k| ks.push(k.clone())).unwrap();
        for c in [vec![0, 0], vec![1, 0], vec![-1, 1], vec![0, 1]] {
            let fast = q_phi_f_c(&mut tr, &c, &orbits, &RSIntegralConfig::default()).unwrap();
            let cm = crate::group::MatG::diag_pow(2, &c);
            let mut acc = CycValue::zero(2);
            for_each_in_box(&a_box(&e, 0, &c, 1), |v| {
                let a = crate::group::MatG::diag_pow(2, v);
                let dinv = p_pow(2, -crate::group::delta_n_exponent(v));
                for k in &ks {
                    let w = w_fcg_oracle(&e, &cm, &a.mul(k), -5, 5).unwrap();
                    acc = &acc + &w.abs_sq().scale(&(dinv / Q::from_integer(ks.len() as i128)));
                }
            });
            assert_eq!(fast.rational, acc.canonical().as_rational(), "c = {c:?}");
        }
    }

    #[test]
    fn q_scan_dual_gl2() {
        let e = EClassElement::dual(DepthContext::new(2, 1).unwrap(), 2).unwrap();
        let r = qp_nonvanishing_check(&e, 0, &c_grid(2, 0, 3), &RSIntegralConfig::default()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn support_laws_gl2() {
        let e = gl2(2, 1);
        let cfg = RSIntegralConfig::default();
        let mut rep = SupportReport::default();
        let cs = c_grid(2, 0, 2);
        wsupport_scan(&e, &[vec![0, 0], vec![1, -1], vec![-1, 0]], 4, 2, &cfg, &mut rep).unwrap();
        det_matching_scan(&e, &cs, &cfg, &mut rep).unwrap();
        assert!(rep.passed(), "{}", rep.to_json());
        assert!(rep.wsupport_points > 0 && rep.det_nonzero_matched > 0);
    }

    #[test]
    fn denominators_gl2() {
        let e = gl2(2, 1);
        let r = denominator_scan(&e, 6, &RSIntegralConfig::default()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }
}
