use serde_json::{json, Value};

use super::explicit::{f_explicit, j_open_cell, superdiagonal_sum};
use crate::arith::{ipow, val_or_inf, CycValue, DepthContext, RootCounter, Q};
use crate::error::{Error, Result};
use crate::group::{bruhat_open_cell, for_each_coset, MatG, SubgroupSpec};

/// avg over r ∈ (1+q)/(1+p^level) of ψ_T̃(x·r).
fn ratio_average(ctx: &DepthContext, x: &Q, level: u32) -> CycValue {
    let p = ctx.p;
    let count = ipow(p, level - ctx.m);
    let step = Q::from_integer(ipow(p, ctx.m));
    let mut acc = RootCounter::new(p);
    for t in 0..count {
        let r = Q::from_integer(1) + step * Q::from_integer(t);
        acc.add_psi(&(*x * r * ctx.t_tilde()), 1);
    }
    acc.to_cyc(&Q::new(1, count))
}

/// f = 𝒥 ∗ e_θ at g, discretized at level p^level. Writing h ∈ K(q) as u·a·n, the
/// n-integral cancels against χ_θ⁻¹, leaving an average over K_U(q)/K_U(p^level) and
/// over the ratios a_{k+1}/a_k ∈ (1+q)/(1+p^level).
pub fn f_convolution_at_level(ctx: &DepthContext, g: &MatG, level: u32) -> Result<CycValue> {
    if level <= ctx.m {
        return Err(Error::Precondition(format!("level {level} must exceed m = {}", ctx.m)));
    }
    let (n, p) = (g.n, g.p);
    let mut total = CycValue::zero(p);
    let mut count = 0i128;
    let mut err = None;
    for_each_coset(SubgroupSpec::Lower(ctx.m), n, p, level, |u| {
        count += 1;
        if err.is_some() {
            return;
        }
        let Some(d) = bruhat_open_cell(&g.mul(u)) else { return };
        if d.a.diagonal().iter().any(|x| val_or_inf(x, p) != 0) {
            return;
        }
        let mut term = CycValue::one(p);
        for k in 0..n.saturating_sub(1) {
            term = &term * &ratio_average(ctx, &d.n.get(k, k + 1), level);
            if term.is_zero() {
                return;
            }
        }
        match total.try_add(&term) {
            Ok(t) => total = t,
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total.scale(&Q::new(1, count)).canonical())
}

/// f_convolution with its discretization level certified: starting at p^{2m+1}, returns the
/// first level L whose value agrees with level L+1.
pub fn f_convolution(ctx: &DepthContext, g: &MatG, cap: u32) -> Result<(CycValue, u32)> {
    let mut level = 2 * ctx.m + 1;
    let mut prev = f_convolution_at_level(ctx, g, level)?;
    while level < cap {
        let next = f_convolution_at_level(ctx, g, level + 1)?;
        if next == prev {
            return Ok((prev, level));
        }
        prev = next;
        level += 1;
    }
    Err(Error::LevelCap(cap))
}

/// The defining average vol(K(q))⁻¹∫_{K(q)} 𝒥(gh)χ_θ⁻¹(h) dh as a full sum over
/// K(q)/K(p^level).
pub fn f_convolution_brute(ctx: &DepthContext, g: &MatG, level: u32) -> Result<CycValue> {
    let (n, p) = (g.n, g.p);
    let mut total = CycValue::zero(p);
    let mut count = 0i128;
    let mut err = None;
    for_each_coset(SubgroupSpec::Principal(ctx.m), n, p, level, |h| {
        count += 1;
        if err.is_some() {
            return;
        }
        let j = j_open_cell(ctx, &g.mul(h));
        if j.is_zero() {
            return;
        }
        let chi_inv = crate::arith::psi_t(&-superdiagonal_sum(h), ctx);
        match total.try_add(&(&j * &chi_inv)) {
            Ok(t) => total = t,
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total.scale(&Q::new(1, count)).canonical())
}

/// Grid for comparing the two constructions: U-coset representatives n of the support,
/// n ∈ K_N(q)/K_N(p^{2m+1}), followed by off-support probes (torus box, integral upper
/// unipotents, the long Weyl element).
pub fn agreement_grid(ctx: &DepthContext, n: usize) -> Result<Vec<MatG>> {
    let p = ctx.p;
    let mut pts = Vec::new();
    for_each_coset(SubgroupSpec::Upper(ctx.m), n, p, 2 * ctx.m + 1, |x| pts.push(x.clone()))?;
    let box_radix = vec![3i128; n];
    crate::group::for_each_tuple(&box_radix, |t| {
        let v: Vec<i64> = t.iter().map(|x| *x as i64 - 1).collect();
        if v.iter().any(|x| *x != 0) {
            pts.push(MatG::diag_pow(p, &v));
        }
    });
    for_each_coset(SubgroupSpec::Upper(0), n, p, 1, |x| {
        if !x.in_principal(ctx.m) {
            pts.push(x.clone());
        }
    })?;
    pts.push(MatG::w_g(n, p));
    Ok(pts)
}

#[derive(Clone, Debug)]
pub struct AgreementReport {
    pub n: usize,
    pub ctx: DepthContext,
    pub points: usize,
    pub support_points: usize,
    pub mismatches: Vec<String>,
    pub max_level: u32,
    pub f_at_identity_is_one: bool,
}

impl AgreementReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.f_at_identity_is_one
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "p": self.ctx.p,
            "m": self.ctx.m,
            "points": self.points,
            "support_points": self.support_points,
            "mismatches": self.mismatches,
            "max_level": self.max_level,
            "f_at_identity_is_one": self.f_at_identity_is_one,
            "passed": self.passed(),
        })
    }
}

/// Compares f_explicit with the certified f_convolution on the whole agreement grid.
pub fn agreement_scan(ctx: &DepthContext, n: usize, cap: u32) -> Result<AgreementReport> {
    let grid = agreement_grid(ctx, n)?;
    let mut mismatches = Vec::new();
    let mut max_level = 0;
    let mut support_points = 0;
    for g in &grid {
        let e = f_explicit(ctx, g)?;
        let (c, l) = f_convolution(ctx, g, cap)?;
        max_level = max_level.max(l);
        if !e.is_zero() {
            support_points += 1;
        }
        if e != c {
            mismatches.push(g.to_text());
        }
    }
    let f_at_identity_is_one = f_explicit(ctx, &MatG::identity(n, ctx.p))?.is_one()
        && f_convolution(ctx, &MatG::identity(n, ctx.p), cap)?.0.is_one();
    Ok(AgreementReport { n, ctx: *ctx, points: grid.len(), support_points, mismatches, max_level, f_at_identity_is_one })
}
