use std::collections::HashSet;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use gln_local::arith::{fmt_q, ipow, DepthContext, Q};
use gln_local::group::{
    bruhat_open_cell, for_each_tuple, iwahori_factor, iwasawa_nak, iwasawa_uak, leading_minors, random_gl, random_principal, MatG, ResMat,
};
use gln_local::nicedomain::{
    decompose_region, domain_outcome, mechanism_check, mechanism_threshold, minor_scan, q1_q2_bijection, q1_q2_construct, q1_q2_properties,
    q1_q2_threshold, scan_domains, summarize, InducedVector, VanishingScanConfig,
};
use gln_local::params::{
    build_omega, centralizer, check_extension, companion, extension_report, factor_subcyclic, is_cyclic_wrt, is_stable, is_subcyclic_wrt,
    is_uniform, unique_nf_conjugate_cyclic, wrap_phase, CharChiTau, DecoratedFlag, JQuotient, TauParam,
};
use gln_local::rslocal::{
    c_grid, denominator_scan, det_matching_scan, norm_sq_by_iwasawa, qp_nonvanishing_check, wsupport_scan, EClassElement, RSIntegralConfig,
    SupportReport,
};
use gln_local::testfn::{agreement_scan, extend_chi_theta, f_explicit, translate_for_h};
use gln_local::whitmodel::{concentration_check, subcyclic_params, WhittakerOnH};
use gln_local::zeta::{c_squared_across_tau, volume_lemma_suite, zeta_direct, zeta_explicit};
use gln_local::Result;

use crate::config::{RunConfig, Suite};
use crate::report::{Check, Report};

const SEED: u64 = 0x9e37_79b9;

/// Runs a suite on a pool of `cfg.jobs` threads. Parallel work is collected in a fixed
/// order, so the report does not depend on the number of threads.
pub fn run_suite(cfg: &RunConfig) -> Report {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().expect("thread pool");
    let checks = pool.install(|| match cfg.suite {
        Suite::TestfnAgreement => testfn_agreement(cfg),
        Suite::Zeta => zeta(cfg),
        Suite::Concentration => concentration(cfg),
        Suite::RsSupport => rs_support(cfg),
        Suite::NicedomainVanishing => nicedomain(cfg),
        Suite::ParamsExhaustive => params_exhaustive(cfg),
        Suite::Volumes => volumes(cfg),
        Suite::Decompositions => decompositions(cfg),
    });
    Report { suite: cfg.suite.name().into(), params: cfg.params_json(), checks }
}

fn ctx(cfg: &RunConfig) -> DepthContext {
    DepthContext::new(cfg.p, cfg.m).expect("validated config")
}

type Job<'a> = (String, Box<dyn Fn() -> Result<(bool, Value)> + Send + Sync + 'a>);

fn run_jobs(jobs: Vec<Job>) -> Vec<Check> {
    jobs.into_par_iter().map(|(name, f)| Check::from_result(name, f())).collect()
}

fn testfn_agreement(cfg: &RunConfig) -> Vec<Check> {
    let c = ctx(cfg);
    vec![Check::from_result(
        "agreement",
        agreement_scan(&c, cfg.rank, 2 * c.m + 3).map(|r| (r.passed(), r.to_json())),
    )]
}

/// Uniform companion parameters of the given size with unit constant term.
fn uniform_companions(c: DepthContext, size: usize, limit: usize) -> Result<Vec<TauParam>> {
    let md = ipow(c.p, c.m);
    let mut coeffs = Vec::new();
    for_each_tuple(&vec![md; size], |t| {
        if t[0] % c.p as i128 != 0 {
            coeffs.push(t.iter().map(|x| *x as i64).collect::<Vec<_>>());
        }
    });
    let mut out = Vec::new();
    for co in coeffs {
        let t = companion(c, &co)?;
        if is_uniform(&t) {
            out.push(t);
            if out.len() == limit {
                break;
            }
        }
    }
    Ok(out)
}

fn zeta(cfg: &RunConfig) -> Vec<Check> {
    let c = ctx(cfg);
    let taus = match uniform_companions(c, cfg.rank, 2) {
        Ok(t) if !t.is_empty() => t,
        Ok(_) => return vec![Check::new("uniform_parameter", false, json!({"error": "no uniform parameter"}))],
        Err(e) => return vec![Check::from_result("uniform_parameter", Err(e))],
    };
    let mut jobs: Vec<Job> = taus
        .into_iter()
        .map(|t| {
            let name = format!("explicit_vs_direct[{}]", t.tau.to_text());
            let f: Box<dyn Fn() -> Result<(bool, Value)> + Send + Sync> = Box::new(move || {
                let w = WhittakerOnH::new(t.clone())?;
                let f = translate_for_h(c, w.n)?;
                let e = zeta_explicit(&w, &f)?;
                let (d, lo) = zeta_direct(&w, &f)?;
                let equal = e.sum.eq_exact(&d.sum)? && e.c == d.c;
                let ok = equal && e.exponent_matches_closed_form() && e.c.is_positive();
                Ok((ok, json!({
                    "tau": t.tau.to_text(),
                    "explicit": e.to_json(),
                    "direct": d.to_json(),
                    "direct_truncation": lo,
                    "routes_equal": equal,
                    "exponent_closed_form": e.exponent_matches_closed_form(),
                })))
            });
            (name, f)
        })
        .collect();
    let n = cfg.rank - 1;
    jobs.push((
        "c_across_tau".into(),
        Box::new(move || {
            let list = c_squared_across_tau(c, n, 8)?;
            let same = list.iter().all(|(_, x)| *x == list[0].1);
            let rows: Vec<Value> = list.iter().map(|(t, x)| json!({"tau": t, "c_squared": fmt_q(x)})).collect();
            Ok((same && list[0].1 > Q::zero(), json!({ "values": rows })))
        }),
    ));
    run_jobs(jobs)
}

fn volumes(cfg: &RunConfig) -> Vec<Check> {
    vec![Check::from_result(
        "volume_lemma",
        volume_lemma_suite(ctx(cfg), cfg.rank - 1).map(|r| (r.passed(), r.to_json())),
    )]
}

fn concentration(cfg: &RunConfig) -> Vec<Check> {
    let bound = cfg.box_size.unwrap_or(2);
    vec![Check::from_result(
        "concentration",
        concentration_check(ctx(cfg), cfg.rank - 1, bound, 4).map(|r| (r.passed() && r.taus > 0, r.to_json())),
    )]
}

/// Size of the submodule generated by v under addition and x ↦ a·x.
pub fn generated_size(a: &ResMat, v: &[i64]) -> usize {
    let mut set: HashSet<Vec<i64>> = HashSet::new();
    set.insert(vec![0i64; a.n]);
    let md = a.modulus();
    let mut frontier = vec![v.to_vec()];
    while let Some(x) = frontier.pop() {
        if !set.insert(x.clone()) {
            continue;
        }
        frontier.push(a.apply(&x));
        let snapshot: Vec<Vec<i64>> = set.iter().cloned().collect();
        for y in snapshot {
            let s: Vec<i64> = x.iter().zip(&y).map(|(a, b)| (a + b) % md).collect();
            if !set.contains(&s) {
                frontier.push(s);
            }
        }
    }
    set.len()
}

fn witness_list(v: &[String]) -> Value {
    json!(v.iter().take(5).collect::<Vec<_>>())
}

fn stability_vs_generation(m: u32) -> Result<(bool, Value)> {
    let c = DepthContext::new(2, m)?;
    let md = ipow(2, m);
    let full = (md * md) as usize;
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut err = None;
    for_each_tuple(&[md; 4], |a| {
        let tau = ResMat::from_vec(2, 2, m, a.iter().map(|x| *x as i64).collect());
        let gen = generated_size(&tau, &[0, 1]) == full && generated_size(&tau.transpose(), &[0, 1]) == full;
        match TauParam::new(c, tau.clone()).and_then(|t| is_stable(&t)) {
            Ok(s) => {
                checked += 1;
                if s != gen {
                    bad.push(tau.to_text());
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok((bad.is_empty(), json!({"ring": format!("Z/{md}"), "checked": checked, "failures": bad.len(), "witnesses": witness_list(&bad)})))
}

fn random_subcyclic(rng: &mut ChaCha8Rng, n: usize, p: u64, m: u32) -> ResMat {
    let md = ipow(p, m) as i64;
    let mut t = ResMat::zero(n, p, m);
    for i in 0..n {
        for j in 0..n {
            if i <= j {
                t.set(i, j, rng.gen_range(0..md));
            } else if i == j + 1 {
                t.set(i, j, 1);
            }
        }
    }
    t
}

fn random_upper(rng: &mut ChaCha8Rng, n: usize, p: u64, m: u32) -> ResMat {
    let md = ipow(p, m) as i64;
    let mut u = ResMat::identity(n, p, m);
    for i in 0..n {
        for j in i + 1..n {
            u.set(i, j, rng.gen_range(0..md));
        }
    }
    u
}

fn factor_ok(tau: &ResMat, g: &ResMat, flag: &DecoratedFlag) -> Result<bool> {
    let (v, c) = factor_subcyclic(tau, g, flag)?;
    Ok(v.is_upper_unipotent() && c.mul(tau) == tau.mul(&c) && v.mul(&c) == *g)
}

fn factor_round_trips(n: usize, p: u64, m: u32, count: usize) -> Result<(bool, Value)> {
    let c = DepthContext::new(p, m)?;
    let flag = DecoratedFlag::standard(n, p, m);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let mut bad = Vec::new();
    for _ in 0..count {
        let tau = random_subcyclic(&mut rng, n, p, m);
        let cent = centralizer(&TauParam::new(c, tau.clone())?);
        let c0 = &cent[rng.gen_range(0..cent.len())];
        let g = random_upper(&mut rng, n, p, m).mul(c0);
        if !factor_ok(&tau, &g, &flag)? {
            bad.push(format!("tau={} g={}", tau.to_text(), g.to_text()));
        }
    }
    Ok((bad.is_empty(), json!({"n": n, "p": p, "m": m, "instances": count, "failures": bad.len(), "witnesses": witness_list(&bad)})))
}

fn gl_residue(n: usize, p: u64) -> Vec<ResMat> {
    let mut out = Vec::new();
    for_each_tuple(&vec![p as i128; n * n], |a| {
        let g = ResMat::from_vec(n, p, 1, a.iter().map(|x| *x as i64).collect());
        if g.det_is_unit() {
            out.push(g);
        }
    });
    out
}

fn factor_exhaustive_gl3_z2() -> Result<(bool, Value)> {
    let c = DepthContext::new(2, 1)?;
    let flag = DecoratedFlag::standard(3, 2, 1);
    let gl = gl_residue(3, 2);
    let taus = subcyclic_params(c, 3)?;
    let mut pairs = 0;
    let mut bad = Vec::new();
    for t in &taus {
        for g in &gl {
            if is_subcyclic_wrt(&g.mul(&t.tau).mul(&g.inv()?), &flag) {
                pairs += 1;
                if !factor_ok(&t.tau, g, &flag)? {
                    bad.push(format!("tau={} g={}", t.tau.to_text(), g.to_text()));
                }
            }
        }
    }
    Ok((bad.is_empty() && pairs > 0, json!({"taus": taus.len(), "group_order": gl.len(), "pairs": pairs, "failures": bad.len(), "witnesses": witness_list(&bad)})))
}

fn nf_unique_exhaustive_gl3_z2() -> Result<(bool, Value)> {
    let c = DepthContext::new(2, 1)?;
    let flag = DecoratedFlag::standard(3, 2, 1);
    let taus = subcyclic_params(c, 3)?;
    let mut bad = Vec::new();
    for t in &taus {
        let mut hits = Vec::new();
        for_each_tuple(&[2, 2, 2], |a| {
            let v = ResMat::from_vec(3, 2, 1, vec![1, a[0] as i64, a[1] as i64, 0, 1, a[2] as i64, 0, 0, 1]);
            if let Ok(vi) = v.inv() {
                if is_cyclic_wrt(&v.mul(&t.tau).mul(&vi), &flag.basis) {
                    hits.push(v);
                }
            }
        });
        let nf = unique_nf_conjugate_cyclic(&t.tau, &flag)?;
        if hits.len() != 1 || hits[0] != nf {
            bad.push(format!("tau={} hits={}", t.tau.to_text(), hits.len()));
        }
    }
    Ok((bad.is_empty(), json!({"taus": taus.len(), "failures": bad.len(), "witnesses": witness_list(&bad)})))
}

fn kq_reps(n: usize, p: u64, m: u32) -> Vec<ResMat> {
    let pm = ipow(p, m) as i64;
    let mut v = Vec::new();
    for_each_tuple(&vec![pm as i128; n * n], |x| {
        let mut k = ResMat::identity(n, p, 2 * m);
        for (idx, xi) in x.iter().enumerate() {
            k.e[idx] = (k.e[idx] + pm * *xi as i64) % (pm * pm);
        }
        v.push(k);
    });
    v
}

/// χ_τ on K(q)/K(q²): independent of the lift and of K(q²)-translates, and multiplicative,
/// exhaustively over pairs when there are at most 10⁴ of them and on 10⁴ samples otherwise.
fn chi_tau_laws(n: usize, p: u64, m: u32) -> Result<(bool, Value)> {
    let c = DepthContext::new(p, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let md = ipow(p, m) as i64;
    let tau = TauParam::new(c, ResMat::from_vec(n, p, m, (0..n * n).map(|_| rng.gen_range(0..md)).collect()))?;
    let chi = CharChiTau::new(tau.clone());
    let reps = kq_reps(n, p, m);
    let mut bad = Vec::new();
    for k in &reps {
        let a = chi.phase(&k.lift())?;
        let shift = random_principal(&mut rng, n, p, 2 * m, 2 * m + 2);
        if a != chi.phase_res(k) || chi.phase(&k.lift().mul(&shift))? != a {
            bad.push(format!("well-defined k={}", k.to_text()));
        }
    }
    let exhaustive = reps.len() * reps.len() <= 10_000;
    let mut pairs = 0usize;
    let mut mult = |a: &ResMat, b: &ResMat, bad: &mut Vec<String>| {
        pairs += 1;
        if chi.phase_res(&a.mul(b)) != wrap_phase(chi.phase_res(a) + chi.phase_res(b)) {
            bad.push(format!("multiplicative a={} b={}", a.to_text(), b.to_text()));
        }
    };
    if exhaustive {
        for a in &reps {
            for b in &reps {
                mult(a, b, &mut bad);
            }
        }
    } else {
        for _ in 0..10_000 {
            let a = &reps[rng.gen_range(0..reps.len())];
            let b = &reps[rng.gen_range(0..reps.len())];
            mult(a, b, &mut bad);
        }
    }
    Ok((bad.is_empty(), json!({
        "tau": tau.tau.to_text(), "classes": reps.len(), "pairs": pairs, "exhaustive": exhaustive,
        "failures": bad.len(), "witnesses": witness_list(&bad),
    })))
}

/// χ̃_θ := f|_{J_θ} is a character table extending χ_θ and agreeing with f on J_θ/K(q²).
fn extension_theta(c: DepthContext, n: usize) -> Result<(bool, Value)> {
    let (jq, table) = extend_chi_theta(c, n)?;
    let cocycle_ok = check_extension(&jq, &table).is_ok();
    let restricts = table.phases[jq.identity_index()].is_zero();
    let elems = jq.elements();
    let mut bad = Vec::new();
    for j in &elems {
        let lhs = table.eval(&jq, j)?;
        if lhs.as_ref() != Some(&f_explicit(&c, &j.lift())?) {
            bad.push(j.to_text());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut mult_bad = 0;
    for _ in 0..1000 {
        let a = &elems[rng.gen_range(0..elems.len())];
        let b = &elems[rng.gen_range(0..elems.len())];
        let lhs = table.phase(&jq, &a.mul(b));
        let rhs = table.phase(&jq, a).zip(table.phase(&jq, b)).map(|(x, y)| wrap_phase(x + y));
        if lhs != rhs {
            mult_bad += 1;
        }
    }
    let ok = cocycle_ok && restricts && bad.is_empty() && mult_bad == 0;
    Ok((ok, json!({
        "elements": elems.len(), "cocycle_identity": cocycle_ok, "restricts_to_chi_theta": restricts,
        "agrees_with_f_failures": bad.len(), "multiplicativity_failures": mult_bad, "witnesses": witness_list(&bad),
    })))
}

fn omega_idempotent(c: DepthContext, n: usize) -> Result<(bool, Value)> {
    let t = uniform_companions(c, n, 1)?
        .pop()
        .ok_or_else(|| gln_local::Error::Precondition("no uniform parameter".into()))?;
    let text = t.tau.to_text();
    let jq = JQuotient::new(t)?;
    let rep = extension_report(&jq);
    let Some(table) = rep.p_power.first().cloned() else {
        return Ok((false, json!({"tau": text, "error": "no p-power extension"})));
    };
    let om = build_omega(jq, table)?;
    let ok = om.check_idempotent(None)?;
    Ok((ok, json!({"tau": text, "extensions": rep.to_json(), "idempotent": ok})))
}

fn params_exhaustive(cfg: &RunConfig) -> Vec<Check> {
    let c = ctx(cfg);
    let (n, p, m) = (cfg.rank, cfg.p, cfg.m);
    let jobs: Vec<Job> = vec![
        ("factor_subcyclic_round_trip".into(), Box::new(move || factor_round_trips(n, p, m, 1000))),
        ("factor_subcyclic_exhaustive_gl3_z2".into(), Box::new(factor_exhaustive_gl3_z2)),
        ("nf_conjugate_unique_exhaustive_gl3_z2".into(), Box::new(nf_unique_exhaustive_gl3_z2)),
        ("stability_generation_gl2_z2".into(), Box::new(|| stability_vs_generation(1))),
        ("stability_generation_gl2_z4".into(), Box::new(|| stability_vs_generation(2))),
        ("chi_tau_laws".into(), Box::new(move || chi_tau_laws(n, p, m))),
        ("chi_theta_extension".into(), Box::new(move || extension_theta(c, n))),
        ("omega_idempotent".into(), Box::new(move || omega_idempotent(c, 2))),
    ];
    run_jobs(jobs)
}

fn rs_support(cfg: &RunConfig) -> Vec<Check> {
    let c = ctx(cfg);
    let (n, m) = (cfg.rank, cfg.m as i64);
    let rs = RSIntegralConfig::default();
    let elt = match EClassElement::translated(c, n) {
        Ok(e) => e,
        Err(e) => return vec![Check::from_result("class_element", Err(e))],
    };
    let dual = if n == 2 { EClassElement::dual(c, n).ok() } else { None };
    let mut jobs: Vec<Job> = Vec::new();
    let e = &elt;
    jobs.push((
        "norm_by_iwasawa".into(),
        Box::new(move || {
            let v = norm_sq_by_iwasawa(e)?;
            Ok((v == e.norm_sq, json!({"iwasawa": fmt_q(&v), "closed_form": fmt_q(&e.norm_sq)})))
        }),
    ));
    let full_window = if n == 2 { 3 * m } else { cfg.box_size.unwrap_or(1) };
    for n1 in 0..n - 1 {
        let window = if n1 == 0 { full_window } else { 3 * m };
        let rs = rs.clone();
        jobs.push((
            format!("q_scan[translated,n1={n1}]"),
            Box::new(move || {
                let r = qp_nonvanishing_check(e, n1, &c_grid(n, n1, window), &rs)?;
                Ok((r.passed(), r.to_json()))
            }),
        ));
    }
    if let Some(d) = dual.as_ref() {
        let rs = rs.clone();
        jobs.push((
            "q_scan[dual,n1=0]".into(),
            Box::new(move || {
                let r = qp_nonvanishing_check(d, 0, &c_grid(n, 0, 3 * m), &rs)?;
                Ok((r.passed(), r.to_json()))
            }),
        ));
    }
    let rs2 = rs.clone();
    jobs.push((
        "support_laws".into(),
        Box::new(move || {
            let mut rep = SupportReport::default();
            let mut cs = vec![vec![0i64; n]];
            let mut shifted = vec![0i64; n];
            shifted[0] = 1;
            shifted[n - 1] = -1;
            cs.push(shifted);
            let bound = if n == 2 { 4 } else { 2 };
            wsupport_scan(e, &cs, bound, 2 * c.m, &rs2, &mut rep)?;
            det_matching_scan(e, &c_grid(n, 0, if n == 2 { 2 } else { 1 }), &rs2, &mut rep)?;
            Ok((rep.passed() && rep.wsupport_points > 0 && rep.det_nonzero_matched > 0, rep.to_json()))
        }),
    ));
    if n == 2 {
        jobs.push((
            "denominators".into(),
            Box::new(move || {
                let r = denominator_scan(e, 6, &rs)?;
                Ok((r.passed(), r.to_json()))
            }),
        ));
    }
    run_jobs(jobs)
}

fn nicedomain(cfg: &RunConfig) -> Vec<Check> {
    let c = ctx(cfg);
    let (p, n, m) = (cfg.p, cfg.rank, cfg.m);
    let mut checks = Vec::new();
    let b_max = cfg.box_size.unwrap_or(2) as u32;
    let parts: Vec<Check> = (0..=b_max)
        .into_par_iter()
        .map(|b| {
            Check::from_result(
                format!("partition[b={b}]"),
                decompose_region(p, n, b, 1 << 22).map(|r| (r.passed(), r.to_json())),
            )
        })
        .collect();
    checks.extend(parts);

    let per_class = if n >= 3 { Some(1) } else { None };
    let thr = q1_q2_threshold(n);
    checks.push(Check::from_result("q1_q2_properties", q1q2_properties(p, n, thr, per_class)));
    checks.push(Check::from_result("q1_q2_bijection", q1q2_bijection(p, n, thr, per_class)));

    let elt = match EClassElement::translated(c, n) {
        Ok(e) => e,
        Err(e) => {
            checks.push(Check::from_result("class_element", Err(e)));
            return checks;
        }
    };
    let fv = InducedVector::new(&elt, vec![0; n]).expect("matching rank");
    checks.push(Check::from_result("mechanism", mechanism(&fv, cfg)));

    let default_max = if n == 2 { 4 * m + n as u32 + 1 } else { 5 };
    let rho_max = cfg.slope_max.unwrap_or(default_max);
    let scan_cfg = VanishingScanConfig::standard(&elt, rho_max, per_class);
    let doms: Vec<_> = (0..=rho_max).flat_map(|r| scan_domains(p, n, r, per_class, scan_cfg.seed)).collect();
    let outcomes: Result<Vec<_>> = doms.par_iter().map(|d| domain_outcome(&fv, d, &scan_cfg)).collect();
    checks.push(Check::from_result(
        "vanishing",
        outcomes.map(|o| {
            let r = summarize(&elt, rho_max, o);
            (r.passed(), r.to_json())
        }),
    ));
    checks
}

fn sample_domains(p: u64, n: usize, rho: u32, per_class: Option<usize>, cap: usize) -> Vec<gln_local::nicedomain::NiceDomain> {
    let mut d = scan_domains(p, n, rho, per_class, SEED);
    d.truncate(cap);
    d
}

fn q1q2_properties(p: u64, n: usize, thr: u32, per_class: Option<usize>) -> Result<(bool, Value)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut checked = 0;
    let mut bad = Vec::new();
    for rho in [thr, thr + 1] {
        for dom in sample_domains(p, n, rho, per_class, 24) {
            for _ in 0..4 {
                let t: Vec<i128> = (0..n * (n - 1) / 2).map(|_| rng.gen_range(-30..30)).collect();
                let u = dom.member(&t);
                let x = Q::from_integer(rng.gen_range(0..50));
                let c = q1_q2_construct(&dom, &u, &x)?;
                checked += 1;
                let f = q1_q2_properties(&dom, &c);
                if !f.is_empty() {
                    bad.push(format!("{} {:?}", c.to_json(), f));
                }
            }
        }
    }
    Ok((bad.is_empty() && checked > 0, json!({"threshold": thr, "checked": checked, "failures": bad.len(), "witnesses": witness_list(&bad)})))
}

fn q1q2_bijection(p: u64, n: usize, thr: u32, per_class: Option<usize>) -> Result<(bool, Value)> {
    let mut rows = Vec::new();
    let mut ok = true;
    for dom in sample_domains(p, n, thr, per_class, 6) {
        for x in [1, 2] {
            for level in [n as u32 + 1, n as u32 + 2] {
                let r = q1_q2_bijection(&dom, &Q::from_integer(x), level)?;
                ok &= r.passed();
                if !r.passed() {
                    rows.push(r.to_json());
                }
            }
        }
    }
    Ok((ok, json!({"threshold": thr, "failures": rows})))
}

fn mechanism(fv: &InducedVector, cfg: &RunConfig) -> Result<(bool, Value)> {
    let (p, n, m) = (cfg.p, cfg.rank, cfg.m);
    let rho = mechanism_threshold(n, m);
    let members: Vec<Vec<i128>> = (0..3i128).map(|t| (0..n * (n - 1) / 2).map(|i| 7 * t - 5 + i as i128).collect()).collect();
    let mut a_low = vec![0i64; n];
    for i in (0..n - 1).rev() {
        a_low[i] = a_low[i + 1] - 2 * m as i64;
    }
    let mut checked = 0;
    let mut failures = Vec::new();
    for dom in sample_domains(p, n, rho, Some(1), 4) {
        for a in [vec![0i64; n], a_low.clone()] {
            let r = mechanism_check(fv, &dom, &a, &MatG::w_g(n, p), &members)?;
            checked += r.checked;
            if !r.passed() {
                failures.push(json!({"domain": dom.to_json(), "a": a, "report": r.to_json()}));
            }
        }
    }
    Ok((failures.is_empty() && checked > 0, json!({"slope": rho, "checked": checked, "failures": failures})))
}

/// Counts failures of one decomposition over `count` seeded samples split into fixed chunks.
fn decomposition_check(n: usize, p: u64, which: usize, count: usize) -> (bool, Value) {
    let chunks = 16;
    let per = count / chunks;
    let results: Vec<(usize, usize, Vec<String>)> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ ((which as u64) << 32) ^ ci as u64);
            let mut tested = 0;
            let mut fails = Vec::new();
            for _ in 0..per {
                let ok = match which {
                    0 => {
                        let g = random_gl(&mut rng, n, p, 3);
                        iwasawa_nak(&g).map(|d| d.n.is_upper_unipotent() && d.a.is_diagonal() && d.k.in_k() && d.n.mul(&d.a).mul(&d.k) == g).map_err(|_| g)
                    }
                    1 => {
                        let g = random_gl(&mut rng, n, p, 3);
                        iwasawa_uak(&g).map(|d| d.u.is_lower_unipotent() && d.a.is_diagonal() && d.k.in_k() && d.u.mul(&d.a).mul(&d.k) == g).map_err(|_| g)
                    }
                    2 => {
                        let g = random_gl(&mut rng, n, p, 3);
                        let minors_nonzero = leading_minors(&g).iter().all(|x| !x.is_zero());
                        Ok(match bruhat_open_cell(&g) {
                            Some(b) => minors_nonzero && b.u.mul(&b.a).mul(&b.n) == g,
                            None => !minors_nonzero,
                        })
                    }
                    _ => {
                        let k = random_principal(&mut rng, n, p, 1, 4);
                        iwahori_factor(&k, 1)
                            .map(|f| f.u.in_principal(1) && f.a.in_principal(1) && f.n.in_principal(1) && f.u.mul(&f.a).mul(&f.n) == k)
                            .map_err(|_| k)
                    }
                };
                tested += 1;
                match ok {
                    Ok(true) => {}
                    Ok(false) => fails.push(format!("sample {tested} of chunk {ci}")),
                    Err(g) => fails.push(g.to_text()),
                }
            }
            (tested, fails.len(), fails)
        })
        .collect();
    let tested: usize = results.iter().map(|r| r.0).sum();
    let failed: usize = results.iter().map(|r| r.1).sum();
    let witnesses: Vec<String> = results.into_iter().flat_map(|r| r.2).take(5).collect();
    (failed == 0, json!({"n": n, "p": p, "samples": tested, "failures": failed, "witnesses": witnesses}))
}

fn decompositions(cfg: &RunConfig) -> Vec<Check> {
    let (n, p, m) = (cfg.rank, cfg.p, cfg.m);
    let count = 10_000;
    let names = ["iwasawa_nak", "iwasawa_uak", "bruhat_open_cell", "iwahori"];
    let mut checks: Vec<Check> = (0..4)
        .map(|w| {
            let (ok, d) = decomposition_check(n, p, w, count);
            Check::new(names[w], ok, d)
        })
        .collect();
    checks.push(Check::from_result("minor_identities", minor_scan(p, n, m, 1000, SEED).map(|r| (r.passed(), r.to_json()))));
    checks
}
