use std::collections::HashMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::tau::{centralizer, TauParam};
use crate::arith::{fmt_q, frac_part, int_valuation, ipow, CycValue, Q};
use crate::error::{Error, Result};
use crate::group::{for_each_tuple, MatG, ResMat};

/// Reduces a phase to [0, 1).
pub fn wrap_phase(x: Q) -> Q {
    x - x.floor()
}

fn phase_is_p_power(x: &Q, p: u64) -> bool {
    let d = *x.denom();
    ipow(p, int_valuation(d, p)) == d
}

/// The character χ_τ(1 + x) = ψ_T̃(tr(xτ)) of K(q)/K(q²).
#[derive(Clone, Debug)]
pub struct CharChiTau {
    pub tau: TauParam,
}

impl CharChiTau {
    pub fn new(tau: TauParam) -> Self {
        Self { tau }
    }

    /// χ_τ(k) as a phase r with χ_τ(k) = exp(2πi r).
    pub fn phase(&self, k: &MatG) -> Result<Q> {
        let ctx = self.tau.ctx;
        if k.n != self.tau.size() || k.p != ctx.p {
            return Err(Error::Dimension("χ_τ argument has the wrong shape".into()));
        }
        if !k.in_principal(ctx.m) {
            return Err(Error::NotInSubgroup(format!("{k} is not in K(p^{})", ctx.m)));
        }
        let n = k.n;
        let mut tr = Q::zero();
        for i in 0..n {
            for j in 0..n {
                let x = k.get(i, j) - if i == j { Q::one() } else { Q::zero() };
                tr += x * Q::from_integer(self.tau.tau.get(j, i) as i128);
            }
        }
        Ok(frac_part(&(tr * ctx.t_tilde()), ctx.p))
    }

    pub fn eval(&self, k: &MatG) -> Result<CycValue> {
        CycValue::root(self.tau.ctx.p, &self.phase(k)?)
    }

    /// Phase for k ∈ K(q) given modulo p^{2m}.
    pub fn phase_res(&self, k: &ResMat) -> Q {
        let n = k.n;
        let md = k.modulus();
        let mut tr = 0i64;
        for i in 0..n {
            for j in 0..n {
                let x = k.get(i, j) - if i == j { 1 } else { 0 };
                tr = (tr + x * self.tau.tau.get(j, i)) % md;
            }
        }
        Q::new(tr.rem_euclid(md) as i128, md as i128)
    }
}

/// The quotient J_τ/K(q²), where J_τ ≤ K is the preimage of the centralizer G_τ(o/q).
/// Elements are s(c)·(1 + p^m x) with s the entrywise lift of c ∈ G_τ(o/q).
#[derive(Clone, Debug)]
pub struct JQuotient {
    pub chi: CharChiTau,
    pub cent: Vec<ResMat>,
    index: HashMap<Vec<i64>, usize>,
    sections: Vec<ResMat>,
    section_inv: Vec<ResMat>,
}

impl JQuotient {
    pub fn new(tau: TauParam) -> Result<Self> {
        let cent = centralizer(&tau);
        let m = tau.ctx.m;
        let index = cent.iter().enumerate().map(|(i, c)| (c.e.clone(), i)).collect();
        let sections: Vec<ResMat> = cent.iter().map(|c| ResMat::from_vec(c.n, c.p, 2 * m, c.e.clone())).collect();
        let section_inv = sections.iter().map(|s| s.inv()).collect::<Result<Vec<_>>>()?;
        Ok(Self { chi: CharChiTau::new(tau), cent, index, sections, section_inv })
    }

    pub fn tau(&self) -> &TauParam {
        &self.chi.tau
    }

    /// |G_τ(o/q)|.
    pub fn order(&self) -> usize {
        self.cent.len()
    }

    /// |J_τ/K(q²)|.
    pub fn quotient_order(&self) -> u128 {
        let t = self.tau();
        self.order() as u128 * ipow(t.ctx.p, t.ctx.m * (t.size() * t.size()) as u32) as u128
    }

    pub fn identity_index(&self) -> usize {
        let t = self.tau();
        self.index[&ResMat::identity(t.size(), t.ctx.p, t.ctx.m).e]
    }

    pub fn section(&self, i: usize) -> &ResMat {
        &self.sections[i]
    }

    pub fn index_of(&self, c: &ResMat) -> Option<usize> {
        self.index.get(&c.reduce(self.tau().ctx.m).e).copied()
    }

    pub fn mul_index(&self, a: usize, b: usize) -> usize {
        self.index[&self.cent[a].mul(&self.cent[b]).e]
    }

    pub fn contains(&self, k: &MatG) -> bool {
        k.in_k() && ResMat::from_mat(k, self.tau().ctx.m).map(|r| self.index.contains_key(&r.e)).unwrap_or(false)
    }

    /// Splits j (mod p^{2m}) as s(c)·k with k ∈ K(q)/K(q²).
    pub fn decompose(&self, j: &ResMat) -> Option<(usize, ResMat)> {
        let i = self.index_of(j)?;
        Some((i, self.section_inv[i].mul(j)))
    }

    /// All representatives of J_τ/K(q²), modulo p^{2m}.
    pub fn elements(&self) -> Vec<ResMat> {
        let t = self.tau();
        let (n, p, m) = (t.size(), t.ctx.p, t.ctx.m);
        let mut out = Vec::new();
        let pm = ipow(p, m) as i64;
        let kq: Vec<ResMat> = {
            let mut v = Vec::new();
            for_each_tuple(&vec![pm as i128; n * n], |x| {
                let mut k = ResMat::identity(n, p, 2 * m);
                for (idx, xi) in x.iter().enumerate() {
                    k.e[idx] = (k.e[idx] + pm * *xi as i64) % (pm * pm);
                }
                v.push(k);
            });
            v
        };
        for s in &self.sections {
            for k in &kq {
                out.push(s.mul(k));
            }
        }
        out
    }

    /// χ_τ(s(ab)⁻¹ s(a) s(b)).
    pub fn cocycle(&self, a: usize, b: usize) -> Q {
        let ab = self.mul_index(a, b);
        let k = self.section_inv[ab].mul(&self.sections[a]).mul(&self.sections[b]);
        self.chi.phase_res(&k)
    }

    fn order_of(&self, g: usize) -> usize {
        let id = self.identity_index();
        let mut x = g;
        let mut o = 1;
        while x != id {
            x = self.mul_index(x, g);
            o += 1;
        }
        o
    }

    /// Greedy generating set of the abelian group G_τ(o/q).
    pub fn generators(&self) -> Vec<usize> {
        let id = self.identity_index();
        let mut inside = vec![false; self.order()];
        inside[id] = true;
        let mut members = vec![id];
        let mut gens = Vec::new();
        for c in 0..self.order() {
            if inside[c] {
                continue;
            }
            gens.push(c);
            let mut frontier = members.clone();
            while let Some(x) = frontier.pop() {
                for g in &gens {
                    let y = self.mul_index(x, *g);
                    if !inside[y] {
                        inside[y] = true;
                        members.push(y);
                        frontier.push(y);
                    }
                }
            }
        }
        gens
    }
}

/// A character of J_τ/K(q²) extending χ_τ, stored as the phases φ(c) = χ̃(s(c)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionTable {
    pub phases: Vec<Q>,
}

impl ExtensionTable {
    pub fn phase(&self, jq: &JQuotient, j: &ResMat) -> Option<Q> {
        let (i, k) = jq.decompose(j)?;
        Some(wrap_phase(self.phases[i] + jq.chi.phase_res(&k)))
    }

    pub fn eval(&self, jq: &JQuotient, j: &ResMat) -> Result<Option<CycValue>> {
        match self.phase(jq, j) {
            Some(r) => CycValue::root(jq.tau().ctx.p, &r).map(Some),
            None => Ok(None),
        }
    }

    pub fn is_p_power(&self, p: u64) -> bool {
        self.phases.iter().all(|x| phase_is_p_power(x, p))
    }

    pub fn to_json(&self) -> Value {
        json!(self.phases.iter().map(fmt_q).collect::<Vec<_>>())
    }
}

/// Checks that the table defines a character: φ(a) + φ(b) = φ(ab) + χ_τ(s(ab)⁻¹s(a)s(b)).
/// Together with the conjugation invariance of χ_τ under J_τ this is multiplicativity on J_τ.
pub fn check_extension(jq: &JQuotient, table: &ExtensionTable) -> Result<()> {
    if !table.phases[jq.identity_index()].is_zero() {
        return Err(Error::Precondition("extension is nontrivial at the identity".into()));
    }
    for a in 0..jq.order() {
        for b in 0..jq.order() {
            let lhs = wrap_phase(table.phases[a] + table.phases[b]);
            let rhs = wrap_phase(table.phases[jq.mul_index(a, b)] + jq.cocycle(a, b));
            if lhs != rhs {
                return Err(Error::Precondition(format!(
                    "extension fails multiplicativity at {} · {}",
                    jq.cent[a], jq.cent[b]
                )));
            }
        }
    }
    Ok(())
}

/// Every extension of χ_τ to J_τ/K(q²), found by assigning each generator one of the
/// admissible roots and propagating; inconsistent assignments are discarded.
pub fn enumerate_extensions(jq: &JQuotient) -> Vec<ExtensionTable> {
    let gens = jq.generators();
    let id = jq.identity_index();
    let mut choices: Vec<Vec<Q>> = Vec::new();
    for g in &gens {
        let o = jq.order_of(*g);
        let mut pw = ResMat::identity(jq.tau().size(), jq.tau().ctx.p, 2 * jq.tau().ctx.m);
        for _ in 0..o {
            pw = pw.mul(jq.section(*g));
        }
        let base = jq.chi.phase_res(&pw);
        choices.push((0..o).map(|j| wrap_phase((base + Q::from_integer(j as i128)) / Q::from_integer(o as i128))).collect());
    }
    let radices: Vec<i128> = choices.iter().map(|c| c.len() as i128).collect();
    let mut out = Vec::new();
    let mut cocycles: HashMap<(usize, usize), Q> = HashMap::new();
    let mut cocycle = |a: usize, b: usize| *cocycles.entry((a, b)).or_insert_with(|| jq.cocycle(a, b));
    for_each_tuple(&radices, |pick| {
        let mut phases: Vec<Option<Q>> = vec![None; jq.order()];
        phases[id] = Some(Q::zero());
        let mut frontier = vec![id];
        let mut ok = true;
        while let Some(x) = frontier.pop() {
            for (t, g) in gens.iter().enumerate() {
                let y = jq.mul_index(x, *g);
                let val = wrap_phase(phases[x].unwrap() + choices[t][pick[t] as usize] - cocycle(x, *g));
                match phases[y] {
                    Some(v) if v != val => ok = false,
                    Some(_) => {}
                    None => {
                        phases[y] = Some(val);
                        frontier.push(y);
                    }
                }
            }
            if !ok {
                break;
            }
        }
        if ok {
            let table = ExtensionTable { phases: phases.into_iter().map(|x| x.unwrap()).collect() };
            if check_extension(jq, &table).is_ok() {
                out.push(table);
            }
        }
    });
    out
}

/// Extensions grouped by whether all values are p-power roots of unity.
#[derive(Clone, Debug)]
pub struct ExtensionReport {
    pub group_order: usize,
    pub total: usize,
    pub p_power: Vec<ExtensionTable>,
}

impl ExtensionReport {
    pub fn to_json(&self) -> Value {
        json!({
            "centralizer_order": self.group_order,
            "extensions_total": self.total,
            "extensions_p_power": self.p_power.len(),
        })
    }
}

pub fn extension_report(jq: &JQuotient) -> ExtensionReport {
    let all = enumerate_extensions(jq);
    let p = jq.tau().ctx.p;
    let total = all.len();
    ExtensionReport { group_order: jq.order(), total, p_power: all.into_iter().filter(|t| t.is_p_power(p)).collect() }
}

/// Builds χ̃ from a function known to transform under J_τ by a character (such as the
/// explicit test function for τ = θ), and checks both multiplicativity and that it
/// restricts to χ_τ on K(q).
pub fn extension_from_function(jq: &JQuotient, f: impl Fn(&MatG) -> Result<CycValue>) -> Result<ExtensionTable> {
    let phase_of = |g: &MatG| -> Result<Q> {
        let v = f(g)?;
        match v.as_monomial() {
            Some((c, r)) if c.is_one() => Ok(wrap_phase(r)),
            _ => Err(Error::Precondition(format!("value at {g} is not a root of unity"))),
        }
    };
    let mut phases = Vec::with_capacity(jq.order());
    for i in 0..jq.order() {
        phases.push(phase_of(&jq.cent[i].lift())?);
    }
    let table = ExtensionTable { phases };
    check_extension(jq, &table)?;
    let t = jq.tau();
    let (n, p, m) = (t.size(), t.ctx.p, t.ctx.m);
    let pm = ipow(p, m);
    let mut result = Ok(());
    for_each_tuple(&vec![pm; n * n], |x| {
        if result.is_err() {
            return;
        }
        let mut k = MatG::identity(n, p);
        for (idx, xi) in x.iter().enumerate() {
            k.e[idx] += Q::from_integer(pm * xi);
        }
        match (phase_of(&k), jq.chi.phase(&k)) {
            (Ok(a), Ok(b)) if a == b => {}
            (Err(e), _) | (_, Err(e)) => result = Err(e),
            _ => result = Err(Error::Precondition(format!("extension differs from χ_τ at {k}"))),
        }
    });
    result.map(|_| table)
}
