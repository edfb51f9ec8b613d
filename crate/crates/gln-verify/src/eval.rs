use serde_json::json;

use gln_local::arith::DepthContext;
use gln_local::group::{bruhat_open_cell, iwasawa_nak, MatG, ResMat};
use gln_local::nicedomain::classify;
use gln_local::params::{CharChiTau, TauParam};
use gln_local::rslocal::{EClassElement, Transform};
use gln_local::testfn::f_explicit;
use gln_local::whitmodel::WhittakerOnH;
use gln_local::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Object {
    F,
    #[value(name = "W")]
    W,
    Chi,
    Iwasawa,
    Bruhat,
    Classify,
    #[value(name = "Wfcg")]
    Wfcg,
}

/// Inputs of `eval`; matrices use the row format "a,b;c,d".
#[derive(Clone, Debug, Default)]
pub struct EvalArgs {
    pub p: u64,
    pub m: u32,
    pub g: Option<String>,
    pub u: Option<String>,
    pub tau: Option<String>,
    pub c: Option<String>,
}

fn need<'a>(x: &'a Option<String>, flag: &str) -> Result<&'a str> {
    x.as_deref().ok_or_else(|| Error::Parse(format!("--{flag} is required")))
}

fn tau_param(args: &EvalArgs, ctx: DepthContext) -> Result<TauParam> {
    let t = need(&args.tau, "tau")?;
    let n = t.split(';').count();
    let r = ResMat::parse(t, args.p, args.m)?;
    if r.n != n {
        return Err(Error::Parse("τ must be square".into()));
    }
    TauParam::new(ctx, r)
}

fn parse_vec(s: &str) -> Result<Vec<i64>> {
    s.split(',').map(|x| x.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{x}: {e}")))).collect()
}

/// Evaluates one object and returns its exact printed form.
pub fn eval(object: Object, args: &EvalArgs) -> Result<String> {
    let p = args.p;
    let ctx = DepthContext::new(p, args.m.max(1))?;
    let out = match object {
        Object::F => {
            let g = MatG::parse(need(&args.g, "g")?, p)?;
            f_explicit(&ctx, &g)?.to_text()
        }
        Object::W => {
            let w = WhittakerOnH::new(tau_param(args, ctx)?)?;
            let h = MatG::parse(need(&args.g, "g")?, p)?;
            serde_json::to_string(&w.eval(&h)?.to_json()).expect("json")
        }
        Object::Chi => {
            let chi = CharChiTau::new(tau_param(args, ctx)?);
            let k = MatG::parse(need(&args.g, "g")?, p)?;
            chi.eval(&k)?.to_text()
        }
        Object::Iwasawa => {
            let d = iwasawa_nak(&MatG::parse(need(&args.g, "g")?, p)?)?;
            format!("n = {}\na = {}\nk = {}", d.n.to_text(), d.a.to_text(), d.k.to_text())
        }
        Object::Bruhat => {
            let g = MatG::parse(need(&args.g, "g")?, p)?;
            let d = bruhat_open_cell(&g).ok_or_else(|| Error::NotInSubgroup("open Bruhat cell".into()))?;
            format!("u = {}\na = {}\nn = {}", d.u.to_text(), d.a.to_text(), d.n.to_text())
        }
        Object::Classify => {
            let d = classify(&MatG::parse(need(&args.u, "u")?, p)?)?;
            serde_json::to_string(&d.to_json()).expect("json")
        }
        Object::Wfcg => {
            let g = MatG::parse(need(&args.g, "g")?, p)?;
            let c = match &args.c {
                Some(s) => parse_vec(s)?,
                None => vec![0; g.n],
            };
            let elt = EClassElement::translated(ctx, g.n)?;
            let mut tr = Transform::new(&elt, 0)?;
            let r = tr.at(&MatG::diag_pow(p, &c), &g)?;
            serde_json::to_string(&json!({"c": c, "report": r.to_json()})).expect("json")
        }
    };
    Ok(out)
}
