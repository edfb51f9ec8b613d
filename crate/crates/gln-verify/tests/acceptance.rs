//! Acceptance run: one pass/fail line per criterion. Every comparison is exact (tolerance 0).

use std::process::ExitCode;
use std::time::Instant;

use gln_verify::{run_suite, Format, Report, RunConfig, Suite};
use serde_json::Value;

const MATRIX: [(usize, u64, u32); 4] = [(2, 2, 1), (2, 3, 1), (3, 2, 1), (2, 2, 2)];

fn run(suite: Suite, (rank, p, m): (usize, u64, u32), jobs: usize) -> Report {
    let mut cfg = RunConfig::new(suite, p, m, rank);
    cfg.jobs = jobs;
    cfg.validate().expect("valid acceptance config");
    run_suite(&cfg)
}

fn tag((rank, p, m): (usize, u64, u32)) -> String {
    format!("(N={rank},p={p},m={m})")
}

/// Failing check names of a report, prefixed by the instance.
fn failures(inst: (usize, u64, u32), r: &Report, filter: &dyn Fn(&str) -> bool) -> Vec<String> {
    r.checks.iter().filter(|c| filter(&c.name) && !c.passed).map(|c| format!("{} {}", tag(inst), c.name)).collect()
}

fn detail<'a>(r: &'a Report, name: &str) -> Option<&'a Value> {
    r.checks.iter().find(|c| c.name == name).map(|c| &c.detail)
}

struct Outcome {
    id: u32,
    title: &'static str,
    passed: bool,
    summary: String,
    secs: f64,
}

fn criterion(id: u32, title: &'static str, f: impl FnOnce() -> (Vec<String>, String)) -> Outcome {
    let t = Instant::now();
    let (bad, info) = f();
    let passed = bad.is_empty();
    let summary = if passed { info } else { format!("{info}; failing: {}", bad.join(", ")) };
    Outcome { id, title, passed, summary, secs: t.elapsed().as_secs_f64() }
}

fn suite_over(suite: Suite, insts: &[(usize, u64, u32)], filter: &dyn Fn(&str) -> bool) -> (Vec<String>, Vec<(usize, u64, u32, Report)>) {
    let mut bad = Vec::new();
    let mut reports = Vec::new();
    for &inst in insts {
        let r = run(suite, inst, 4);
        bad.extend(failures(inst, &r, filter));
        if r.checks.iter().all(|c| !filter(&c.name)) {
            bad.push(format!("{} no checks", tag(inst)));
        }
        reports.push((inst.0, inst.1, inst.2, r));
    }
    (bad, reports)
}

fn main() -> ExitCode {
    let all = |_: &str| true;
    let mut out = Vec::new();

    out.push(criterion(1, "dual-construction agreement", || {
        let (bad, reps) = suite_over(Suite::TestfnAgreement, &MATRIX, &all);
        let pts: u64 = reps.iter().filter_map(|r| detail(&r.3, "agreement")?.get("points")?.as_u64()).sum();
        (bad, format!("tol=exact; {pts} grid points, f(1)=1"))
    }));

    out.push(criterion(2, "zeta identity and T-exponent", || {
        let (bad, reps) = suite_over(Suite::Zeta, &MATRIX, &all);
        let cs: Vec<String> = reps
            .iter()
            .filter_map(|r| {
                let v = detail(&r.3, "c_across_tau")?.get("values")?.get(0)?.get("c_squared")?.as_str()?.to_string();
                Some(format!("{}:c^2={v}", tag((r.0, r.1, r.2))))
            })
            .collect();
        (bad, format!("tol=exact; {}", cs.join(" ")))
    }));

    out.push(criterion(3, "volume lemma exponents", || {
        let (bad, _) = suite_over(Suite::Volumes, &MATRIX, &all);
        (bad, "tol=exact; constants recorded in the volumes report".into())
    }));

    out.push(criterion(4, "concentration", || {
        let (bad, reps) = suite_over(Suite::Concentration, &[(3, 2, 1), (3, 3, 1)], &all);
        let w: u64 = reps.iter().filter_map(|r| detail(&r.3, "concentration")?.get("witnesses")?.as_u64()).sum();
        (bad, format!("tol=0 counterexamples; GL3/GL2 at p=2,3; {w} witnesses built"))
    }));

    let mut params_reports = Vec::new();
    out.push(criterion(5, "parameter algorithms", || {
        let f = |n: &str| n.starts_with("factor_") || n.starts_with("nf_") || n.starts_with("stability_");
        let (bad, reps) = suite_over(Suite::ParamsExhaustive, &MATRIX, &f);
        params_reports = reps;
        (bad, "tol=0 failures; >=10^3 round trips per instance, exhaustive GL3/Z2, GL2 over Z/2 and Z/4".into())
    }));

    out.push(criterion(6, "character laws", || {
        let f = |n: &str| n.starts_with("chi_") || n.starts_with("omega_");
        let mut bad = Vec::new();
        for (rank, p, m, r) in &params_reports {
            bad.extend(failures((*rank, *p, *m), r, &f));
        }
        if params_reports.is_empty() {
            bad.push("no parameter reports".into());
        }
        (bad, "tol=exact; exhaustive at (2,2,1), 10^4 samples at (3,2,1), omega*omega=omega".into())
    }));

    out.push(criterion(7, "Rankin-Selberg support laws", || {
        let (bad, reps) = suite_over(Suite::RsSupport, &MATRIX, &all);
        let ratios: Vec<String> = reps
            .iter()
            .filter_map(|r| {
                let v = detail(&r.3, "q_scan[translated,n1=0]")?.get("max_ratio")?.as_str()?.to_string();
                Some(format!("{}:max_ratio={v}", tag((r.0, r.1, r.2))))
            })
            .collect();
        (bad, format!("tol=exact zeros outside; {}", ratios.join(" ")))
    }));

    out.push(criterion(8, "nice-domain suite", || {
        let insts = [(2, 2, 1), (2, 3, 1), (2, 2, 2), (2, 3, 2), (3, 2, 1)];
        let (mut bad, reps) = suite_over(Suite::NicedomainVanishing, &insts, &all);
        let mut rho = Vec::new();
        for (rank, p, m, r) in &reps {
            if let Some(d) = detail(r, "vanishing") {
                let r0 = d.get("rho0").and_then(|v| v.as_u64()).unwrap_or(u64::MAX);
                let bound = 4 * *m as u64 + *rank as u64;
                if r0 > bound {
                    bad.push(format!("{} rho0={r0} > {bound}", tag((*rank, *p, *m))));
                }
                rho.push(format!("{}:rho0={r0}<={bound}", tag((*rank, *p, *m))));
            }
        }
        (bad, format!("tol=exact zero; {}", rho.join(" ")))
    }));

    out.push(criterion(9, "decomposition soundness", || {
        let (bad, _) = suite_over(Suite::Decompositions, &MATRIX, &all);
        (bad, "tol=exact; 10^4 samples per decomposition per (N,p), 10^3 minor identities".into())
    }));

    out.push(criterion(10, "determinism", || {
        let mut bad = Vec::new();
        let cases = [(Suite::NicedomainVanishing, (2, 2, 1)), (Suite::RsSupport, (2, 2, 1)), (Suite::Decompositions, (3, 2, 1)), (Suite::Zeta, (3, 2, 1))];
        for (suite, inst) in cases {
            for format in [Format::Json, Format::Markdown] {
                let a = run(suite, inst, 1).render(format);
                let b = run(suite, inst, 1).render(format);
                let c = run(suite, inst, 4).render(format);
                if a != b || a != c {
                    bad.push(format!("{} {} {:?}", suite.name(), tag(inst), format));
                }
            }
        }
        (bad, "byte-identical across repeats and --jobs 1/4".into())
    }));

    let mut ok = true;
    for o in &out {
        ok &= o.passed;
        println!("criterion {:>2} [{}]: {} ({:.1}s) {}", o.id, o.title, if o.passed { "PASS" } else { "FAIL" }, o.secs, o.summary);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
