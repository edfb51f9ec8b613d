use num_traits::Zero;
use serde_json::{json, Value};

use crate::arith::{fmt_q, ipow, p_pow, psi, CycValue, DepthContext, MellinMonomial, MellinSum, SqrtRational, Q};
use crate::error::{Error, Result};
use crate::group::{for_each_coset, for_each_tuple, modular_delta, DeltaSide, MatG, SubgroupSpec};
use crate::testfn::{superdiagonal_sum, TranslatedTestFunction};
use crate::whitmodel::WhittakerOnH;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Explicit,
    Direct,
}

/// Z(W, f[s]) = c·T^{(n+1)trace(s)/2 − n²/4}.
#[derive(Clone, Debug)]
pub struct ZetaResult {
    pub route: Route,
    pub n: usize,
    pub sum: MellinSum,
    pub monomial: MellinMonomial,
    pub c: SqrtRational,
}

impl ZetaResult {
    fn from_sum(route: Route, ctx: &DepthContext, n: usize, sum: MellinSum) -> Result<Self> {
        let mono = sum
            .as_monomial(ctx.m)
            .ok_or_else(|| Error::Precondition("zeta integral is not a single monomial".into()))?;
        let scalar = mono
            .cyc
            .as_rational()
            .ok_or_else(|| Error::Precondition("zeta coefficient is not rational".into()))?;
        let z0_sq = mono.root.square() * scalar * scalar;
        let t_quarter_n2_sq = Q::from_integer(ipow(ctx.p, ctx.m * (n * n) as u32));
        let sign = if scalar > Q::zero() { mono.root.sign } else { -mono.root.sign };
        let c = SqrtRational { sign, radicand: z0_sq * t_quarter_n2_sq };
        let monomial = MellinMonomial {
            cyc: CycValue::one(ctx.p),
            root: c.clone(),
            exponents: mono.exponents.clone(),
            offset: Q::new(-((n * n) as i128), 2),
        };
        Ok(Self { route, n, sum, monomial, c })
    }

    /// T-exponent per unit of each s_i.
    pub fn exponent_per_trace(&self) -> Vec<Q> {
        self.monomial.exponents.iter().map(|e| Q::new(*e as i128, 2)).collect()
    }

    /// True when every s_i carries (n+1)/2 and the constant exponent is −n²/4.
    pub fn exponent_matches_closed_form(&self) -> bool {
        let target = Q::new(self.n as i128 + 1, 2);
        self.exponent_per_trace().iter().all(|e| *e == target) && self.monomial.offset / Q::from_integer(2) == Q::new(-((self.n * self.n) as i128), 4)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "route": match self.route { Route::Explicit => "explicit", Route::Direct => "direct" },
            "n": self.n,
            "exponent_vector": self.exponent_per_trace().iter().map(fmt_q).collect::<Vec<_>>(),
            "t_exponent_at_zero": fmt_q(&(self.monomial.offset / Q::from_integer(2))),
            "c_squared": fmt_q(&self.c.square()),
            "c_positive": self.c.is_positive(),
        })
    }
}

fn mul_cyc(sum: &MellinSum, root: &SqrtRational, cyc: &CycValue) -> Result<MellinSum> {
    let mut out = MellinSum::zero(sum.p);
    for (k, (r, c)) in &sum.terms {
        out.add_term(k.clone(), &r.mul(root), &c.try_mul(cyc)?)?;
    }
    Ok(out)
}

/// vol(a_T K_{N_H}(q) a_T⁻¹, dn) = δ_{N_H}(a_T)·p^{−m·dim N_H}.
pub fn vol_conjugated_kn(w: &WhittakerOnH) -> Q {
    let d = (w.n * (w.n - 1) / 2) as i64;
    modular_delta(&w.a_t, DeltaSide::N).expect("diagonal") * p_pow(w.ctx.p, -(w.ctx.m as i64) * d)
}

/// W[f[s], ψ⁻¹](a_T) = ∫_{N_H} f[s](n·a_T)ψ(n) dn as a sum over n = a_T n′ a_T⁻¹ with
/// n′ ∈ K_{N_H}(q)/K_{N_H}(q²).
pub fn whittaker_transform_at_a_t(w: &WhittakerOnH, f: &TranslatedTestFunction) -> Result<MellinSum> {
    let (n, p, m) = (w.n, w.ctx.p, w.ctx.m);
    let ainv = w.a_t.inv()?;
    let mut acc = MellinSum::zero(p);
    let mut count = 0i128;
    let mut err = None;
    for_each_coset(SubgroupSpec::Upper(m), n, p, 2 * m, |np| {
        count += 1;
        if err.is_some() {
            return;
        }
        let nn = w.a_t.mul(np).mul(&ainv);
        let term = f.mellin(&nn.mul(&w.a_t)).and_then(|s| mul_cyc(&s, &SqrtRational::one(), &psi(&superdiagonal_sum(&nn), p)));
        match term.and_then(|t| acc.add_sum(&t)) {
            Ok(()) => {}
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(acc.scale(&(vol_conjugated_kn(w) / Q::from_integer(count))))
}

/// Z(W, f[s]) = W[f[s], ψ⁻¹](a_T)·√vol(X).
pub fn zeta_explicit(w: &WhittakerOnH, f: &TranslatedTestFunction) -> Result<ZetaResult> {
    let t = whittaker_transform_at_a_t(w, f)?;
    let sum = t.scale_root(&SqrtRational::sqrt(w.vol_x)?);
    ZetaResult::from_sum(Route::Explicit, &w.ctx, w.n, sum)
}

/// ∫_{N_H} f[s](n·h)ψ(n) dn truncated to n with entries in p^{lo}o, on the grid p^{lo}o/o.
pub fn jacquet_truncated(f: &TranslatedTestFunction, h: &MatG, lo: i64) -> Result<MellinSum> {
    let (n, p) = (h.n, h.p);
    let pos: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let per = ipow(p, (-lo) as u32);
    let step = p_pow(p, lo);
    let mut acc = MellinSum::zero(p);
    let mut count = 0i128;
    let mut err = None;
    for_each_tuple(&vec![per; pos.len()], |t| {
        count += 1;
        if err.is_some() {
            return;
        }
        let mut nn = MatG::identity(n, p);
        for ((i, j), x) in pos.iter().zip(t) {
            nn.set(*i, *j, step * Q::from_integer(*x));
        }
        let term = f.mellin(&nn.mul(h)).and_then(|s| mul_cyc(&s, &SqrtRational::one(), &psi(&superdiagonal_sum(&nn), p)));
        match term.and_then(|t| acc.add_sum(&t)) {
            Ok(()) => {}
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let vol_box = p_pow(p, -lo * pos.len() as i64);
    Ok(acc.scale(&(vol_box / Q::from_integer(count))))
}

/// Z(W, f[s]) = vol(X)·avg_{y ∈ K_H(q)/K_H(q²)} W(a_T y)·W[f[s], ψ⁻¹](a_T y), with the inner
/// unipotent integral truncated at p^{lo} and certified against p^{lo−1}.
pub fn zeta_direct(w: &WhittakerOnH, f: &TranslatedTestFunction) -> Result<(ZetaResult, i64)> {
    let (n, m) = (w.n, w.ctx.m as i64);
    let mut lo = -(2 * m * (n as i64 - 1)).max(m) - 1;
    let mut prev = zeta_direct_at(w, f, lo)?;
    for _ in 0..4 {
        let next = zeta_direct_at(w, f, lo - 1)?;
        if next.eq_exact(&prev)? {
            return Ok((ZetaResult::from_sum(Route::Direct, &w.ctx, n, prev)?, lo));
        }
        prev = next;
        lo -= 1;
    }
    Err(Error::TruncationCap(format!("unipotent box down to p^{lo}")))
}

pub fn zeta_direct_at(w: &WhittakerOnH, f: &TranslatedTestFunction, lo: i64) -> Result<MellinSum> {
    let (n, p, m) = (w.n, w.ctx.p, w.ctx.m);
    let mut acc = MellinSum::zero(p);
    let mut count = 0i128;
    let mut err = None;
    for_each_coset(SubgroupSpec::Principal(m), n, p, 2 * m, |y| {
        count += 1;
        if err.is_some() {
            return;
        }
        let h = w.a_t.mul(y);
        let step = w.eval(&h).and_then(|wv| {
            if wv.is_zero() {
                return Ok(());
            }
            let inner = jacquet_truncated(f, &h, lo)?;
            acc.add_sum(&mul_cyc(&inner, &wv.scale, &wv.cyc)?)
        });
        if let Err(e) = step {
            err = Some(e);
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(acc.scale(&(w.vol_x / Q::from_integer(count))))
}

/// c² for every uniform companion τ of size n+1 at (p, m); all entries coincide.
pub fn c_squared_across_tau(ctx: DepthContext, n: usize, limit: usize) -> Result<Vec<(String, Q)>> {
    let f = crate::testfn::translate_for_h(ctx, n)?;
    let md = ipow(ctx.p, ctx.m);
    let mut taus = Vec::new();
    for_each_tuple(&vec![md; n + 1], |t| {
        if taus.len() < limit && t[0] % ctx.p as i128 != 0 {
            taus.push(t.iter().map(|x| *x as i64).collect::<Vec<_>>());
        }
    });
    let mut out = Vec::new();
    for coeffs in taus {
        let tau = crate::params::companion(ctx, &coeffs)?;
        if !crate::params::is_uniform(&tau) {
            continue;
        }
        let w = WhittakerOnH::new(tau.clone())?;
        out.push((tau.to_text(), zeta_explicit(&w, &f)?.c.square()));
    }
    if out.is_empty() {
        return Err(Error::Precondition("no uniform parameter found".into()));
    }
    Ok(out)
}
