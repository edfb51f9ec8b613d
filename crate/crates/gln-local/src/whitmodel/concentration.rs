use serde_json::{json, Value};

use crate::arith::{ipow, p_pow, psi_t, DepthContext, Q};
use crate::error::Result;
use crate::group::{for_each_coset, for_each_tuple, MatG, ResMat, SubgroupSpec};
use crate::params::{is_stable, is_subcyclic_wrt, CharChiTau, DecoratedFlag, TauParam};
use crate::testfn::superdiagonal_sum;

/// All τ ∈ M_N(Z/p^m) subcyclic with respect to the standard basis: ones on the
/// subdiagonal, zeros below it, free entries on and above the diagonal.
pub fn subcyclic_params(ctx: DepthContext, size: usize) -> Result<Vec<TauParam>> {
    let free: Vec<(usize, usize)> = (0..size).flat_map(|i| (i..size).map(move |j| (i, j))).collect();
    let md = ipow(ctx.p, ctx.m);
    let mut out = Vec::new();
    let mut err = None;
    for_each_tuple(&vec![md; free.len()], |t| {
        let mut r = ResMat::zero(size, ctx.p, ctx.m);
        for i in 0..size - 1 {
            r.set(i + 1, i, 1);
        }
        for ((i, j), x) in free.iter().zip(t) {
            r.set(*i, *j, *x as i64);
        }
        match TauParam::new(ctx, r) {
            Ok(tp) => out.push(tp),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn embed_res(h: &ResMat, size: usize) -> ResMat {
    let mut g = ResMat::identity(size, h.p, h.k);
    for i in 0..h.n {
        for j in 0..h.n {
            g.set(i, j, h.get(i, j));
        }
    }
    g
}

#[derive(Clone, Debug, Default)]
pub struct ConcentrationReport {
    pub n: usize,
    pub p: u64,
    pub m: u32,
    pub taus: usize,
    pub classes: usize,
    pub subcyclic_hits: usize,
    pub counterexamples: Vec<String>,
    pub converse_failures: Vec<String>,
    pub witnesses: usize,
    pub witness_failures: Vec<String>,
}

impl ConcentrationReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty() && self.converse_failures.is_empty() && self.witness_failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n, "p": self.p, "m": self.m,
            "taus": self.taus,
            "classes": self.classes,
            "subcyclic_hits": self.subcyclic_hits,
            "counterexamples": self.counterexamples,
            "converse_failures": self.converse_failures,
            "witnesses": self.witnesses,
            "witness_failures": self.witness_failures,
            "passed": self.passed(),
        })
    }
}

/// For every h̄ ∈ H(o/q) = GL_n(Z/p^m): Ad(h)τ subcyclic ⟺ h̄ ∈ N_H(o/q).
pub fn integral_scan(tau: &TauParam, report: &mut ConcentrationReport) -> Result<()> {
    let size = tau.size();
    let (n, p, m) = (size - 1, tau.ctx.p, tau.ctx.m);
    let flag = DecoratedFlag::standard(size, p, m);
    let mut err = None;
    for_each_coset(SubgroupSpec::K, n, p, m, |hl| {
        if err.is_some() {
            return;
        }
        let h = match ResMat::from_mat(hl, m) {
            Ok(h) => h,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let g = embed_res(&h, size);
        let conj = match g.inv() {
            Ok(gi) => g.mul(&tau.tau).mul(&gi),
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        report.classes += 1;
        let sub = is_subcyclic_wrt(&conj, &flag);
        let unip = h.is_upper_unipotent();
        if sub {
            report.subcyclic_hits += 1;
            if !unip {
                report.counterexamples.push(format!("tau={} h={}", tau.to_text(), h.to_text()));
            }
        } else if unip {
            report.converse_failures.push(format!("tau={} h={}", tau.to_text(), h.to_text()));
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// A unipotent u with ψ_T̃(u) ≠ χ_τ(h⁻¹uh), for h = diag(p^ℓ)·k with ℓ ≠ 0 and k ∈ K_H.
pub fn find_witness(tau: &TauParam, chi: &CharChiTau, ell: &[i64], k: &MatG) -> Result<Option<MatG>> {
    let size = tau.size();
    let (p, m) = (tau.ctx.p, tau.ctx.m as i64);
    let mut l = ell.to_vec();
    l.push(0);
    let h = MatG::diag_pow(p, &l).mul(&k.embed(size));
    let hinv = h.inv()?;
    let separates = |u: &MatG| -> Result<bool> {
        let y = hinv.mul(u).mul(&h);
        let lhs = psi_t(&superdiagonal_sum(u), &tau.ctx);
        Ok(lhs != chi.eval(&y)?)
    };
    if let Some(i) = (0..size - 1).find(|&i| l[i] < l[i + 1]) {
        let u = MatG::elementary(size, p, i, i + 1, p_pow(p, l[i] - l[i + 1] + 2 * m));
        return Ok(if separates(&u)? { Some(u) } else { None });
    }
    let top = match (0..size - 1).rev().find(|&i| l[i] > 0) {
        Some(t) => t,
        None => return Ok(None),
    };
    let x = k.embed(size).mul(&tau.tau.lift()).mul(&k.embed(size).inv()?);
    for i in 0..=top {
        for j in top + 1..size {
            if crate::arith::val_or_inf(&x.get(j, i), p) != 0 {
                continue;
            }
            for t0 in 1..p as i128 {
                let t = p_pow(p, 2 * m - 1 + l[i]) * Q::from_integer(t0);
                let u = MatG::elementary(size, p, i, j, t);
                if separates(&u)? {
                    return Ok(Some(u));
                }
            }
        }
    }
    Ok(None)
}

/// Witnesses for every ℓ ∈ [−bound, bound]^n − {0} and every k in a K_H/K_H(p) transversal.
pub fn witness_scan(tau: &TauParam, bound: i64, report: &mut ConcentrationReport) -> Result<()> {
    let size = tau.size();
    let (n, p) = (size - 1, tau.ctx.p);
    let chi = CharChiTau::new(tau.clone());
    let ks = crate::group::enumerate_cosets(SubgroupSpec::K, n, p, 1)?;
    let mut ells = Vec::new();
    for_each_tuple(&vec![(2 * bound + 1) as i128; n], |t| {
        let l: Vec<i64> = t.iter().map(|x| *x as i64 - bound).collect();
        if l.iter().any(|x| *x != 0) {
            ells.push(l);
        }
    });
    for l in &ells {
        for k in &ks {
            report.witnesses += 1;
            if find_witness(tau, &chi, l, k)?.is_none() {
                report.witness_failures.push(format!("tau={} ell={:?} k={}", tau.to_text(), l, k.to_text()));
            }
        }
    }
    Ok(())
}

/// Part (a) over all stable subcyclic τ of size n+1, part (b) over the first `witness_taus`
/// of them.
pub fn concentration_check(ctx: DepthContext, n: usize, bound: i64, witness_taus: usize) -> Result<ConcentrationReport> {
    let mut report = ConcentrationReport { n, p: ctx.p, m: ctx.m, ..Default::default() };
    let mut stable = Vec::new();
    for t in subcyclic_params(ctx, n + 1)? {
        if is_stable(&t)? {
            stable.push(t);
        }
    }
    report.taus = stable.len();
    for t in &stable {
        integral_scan(t, &mut report)?;
    }
    for t in stable.iter().take(witness_taus) {
        witness_scan(t, bound, &mut report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::companion;

    #[test]
    fn subcyclic_count() {
        let c = DepthContext::new(2, 1).unwrap();
        assert_eq!(subcyclic_params(c, 3).unwrap().len(), 64);
    }

    #[test]
    fn identity_is_integral_case() {
        let c = DepthContext::new(2, 1).unwrap();
        let tau = companion(c, &[1, 0, 0]).unwrap();
        let mut r = ConcentrationReport::default();
        integral_scan(&tau, &mut r).unwrap();
        assert!(r.passed());
        assert!(r.subcyclic_hits >= 1);
    }

    #[test]
    fn diag_p_witness() {
        let c = DepthContext::new(2, 1).unwrap();
        let tau = companion(c, &[1, 0, 0]).unwrap();
        let chi = CharChiTau::new(tau.clone());
        let u = find_witness(&tau, &chi, &[1, 0], &MatG::identity(2, 2)).unwrap().unwrap();
        assert!(u.is_upper_unipotent() && u.in_principal(1));
    }

    #[test]
    fn full_check_p2() {
        let r = concentration_check(DepthContext::new(2, 1).unwrap(), 2, 2, 4).unwrap();
        assert!(r.passed(), "{:?} {:?}", r.counterexamples.first(), r.witness_failures.first());
        assert!(r.taus > 0);
    }

    #[test]
    fn gl2_over_gl1() {
        let r = concentration_check(DepthContext::new(3, 1).unwrap(), 1, 3, 3).unwrap();
        assert!(r.passed(), "{:?}", r.witness_failures.first());
    }
}
