use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::arith::{fmt_q, frac_part, ipow, valuation, CycValue, DepthContext, Q};
use crate::error::{Error, Result};
use crate::group::{
    for_each_coset, iwasawa_nak, modular_delta, random_gl, random_k, random_principal, random_upper_unipotent,
    DeltaSide, MatG, ResMat, SubgroupSpec,
};
use crate::testfn::{f0_explicit, rho_check_valuations, translate_for_h};

/// Which member of the class: the translated test function moved to N\G, or its dual.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EClassKind {
    Translated,
    Dual,
}

impl EClassKind {
    pub fn name(&self) -> &'static str {
        match self {
            EClassKind::Translated => "translated",
            EClassKind::Dual => "dual",
        }
    }
}

/// Counts of the checks run when certifying class membership.
#[derive(Clone, Debug, Default)]
pub struct ClassCertificate {
    pub left_torus_checks: usize,
    pub right_invariance_checks: usize,
    pub support_checks: usize,
    pub equivariance_checks: usize,
    pub failures: Vec<String>,
}

impl ClassCertificate {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// f ∈ 𝔈(N\G, q²) of the form f(n·a·k) = c₁·1[v(a) = v(s)]·φ(k), with s = T̃^{−ρ_N^∨}.
/// Values are carried as the shape φ; the positive constant c₁ enters through `c1_sq`.
#[derive(Clone, Debug)]
pub struct EClassElement {
    pub ctx: DepthContext,
    pub n: usize,
    pub kind: EClassKind,
    pub support: Vec<i64>,
    pub c1_sq: Q,
    pub norm_sq: Q,
    pub certificate: ClassCertificate,
}

fn w_rows(x: &ResMat) -> ResMat {
    let n = x.n;
    let mut y = x.clone();
    for i in 0..n {
        for j in 0..n {
            y.set(i, j, x.get(n - 1 - i, j));
        }
    }
    y
}

impl EClassElement {
    pub fn translated(ctx: DepthContext, n: usize) -> Result<Self> {
        Self::build(ctx, n, EClassKind::Translated)
    }

    pub fn dual(ctx: DepthContext, n: usize) -> Result<Self> {
        Self::build(ctx, n, EClassKind::Dual)
    }

    fn build(ctx: DepthContext, n: usize, kind: EClassKind) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition("class elements need rank at least 2".into()));
        }
        let c1_sq = translate_for_h(ctx, n)?.c1_sq();
        let mut e = Self {
            ctx,
            n,
            kind,
            support: rho_check_valuations(n, ctx.m),
            c1_sq,
            norm_sq: Q::zero(),
            certificate: ClassCertificate::default(),
        };
        e.norm_sq = e.norm_sq_by_enumeration()?;
        e.certificate = e.certify(40)?;
        Ok(e)
    }

    /// Level 2m at which φ is read.
    pub fn phi_level(&self) -> u32 {
        2 * self.ctx.m
    }

    /// |f| is right K(p^m)-invariant: f transforms by a character there.
    pub fn equivariance_level(&self) -> u32 {
        self.ctx.m
    }

    /// φ(x) = exp(2πi r) or 0, for x ∈ GL_n(Z/p^{2m}); returns r.
    pub fn phi_exponent(&self, x: &ResMat) -> Option<Q> {
        match self.kind {
            EClassKind::Translated => self.phi_translated(x),
            EClassKind::Dual => {
                let xi = x.inv().ok()?.transpose();
                self.phi_translated(&w_rows(&xi))
            }
        }
    }

    /// φ(k) = f₀(w_G k) on residues.
    fn phi_translated(&self, x: &ResMat) -> Option<Q> {
        let n = self.n;
        let pm = ipow(self.ctx.p, self.ctx.m) as i64;
        let y = w_rows(x);
        for i in 0..n {
            for j in i + 1..n {
                if y.get(i, j) % pm != 0 {
                    return None;
                }
            }
        }
        let mut b = y.clone();
        for i in 0..n {
            for j in i + 1..n {
                b.set(i, j, 0);
            }
        }
        let kp = b.inv().ok()?.mul(&y);
        let s: i64 = (0..n - 1).map(|i| kp.get(i, i + 1)).sum();
        Some(frac_part(&Q::new(-(s as i128), ipow(self.ctx.p, 2 * self.ctx.m)), self.ctx.p))
    }

    pub fn phi(&self, x: &ResMat) -> CycValue {
        match self.phi_exponent(x) {
            Some(r) => CycValue::root(self.ctx.p, &r).expect("p-power root"),
            None => CycValue::zero(self.ctx.p),
        }
    }

    /// The character by which φ transforms on the right under K(p^m).
    pub fn right_char_exponent(&self, h: &ResMat) -> Result<Q> {
        let n = self.n;
        let hh = match self.kind {
            EClassKind::Translated => h.clone(),
            EClassKind::Dual => h.inv()?.transpose(),
        };
        let s: i64 = (0..n - 1).map(|i| hh.get(i, i + 1)).sum();
        Ok(frac_part(&Q::new(-(s as i128), ipow(self.ctx.p, 2 * self.ctx.m)), self.ctx.p))
    }

    /// The shape f/c₁ at g, computed from the explicit test function (independent of φ).
    pub fn eval(&self, g: &MatG) -> Result<CycValue> {
        let (n, p) = (self.n, self.ctx.p);
        let w = MatG::w_g(n, p);
        let t = MatG::diag_pow(p, &rho_check_valuations(n, self.ctx.m));
        let x = match self.kind {
            EClassKind::Translated => g.clone(),
            EClassKind::Dual => w.mul(&g.inv()?.transpose()),
        };
        f0_explicit(&self.ctx, &t.mul(&w).mul(&x))
    }

    /// The shape via the N·A·K decomposition and φ.
    pub fn eval_nak(&self, g: &MatG) -> Result<CycValue> {
        let d = iwasawa_nak(g)?;
        let v = d.a.diag_valuations()?;
        if v != self.support {
            return Ok(CycValue::zero(self.ctx.p));
        }
        Ok(self.phi(&ResMat::from_mat(&d.k, self.phi_level())?))
    }

    /// ‖f‖² = c₁²·δ_N(s)⁻¹·∫_K|φ|², with the K-integral counted on K/K(p^m).
    pub fn norm_sq_by_enumeration(&self) -> Result<Q> {
        let (n, p, m) = (self.n, self.ctx.p, self.ctx.m);
        let (mut hits, mut total) = (0i128, 0i128);
        let mut err = None;
        for_each_coset(SubgroupSpec::K, n, p, m, |k| match ResMat::from_mat(k, 2 * m) {
            Ok(r) => {
                total += 1;
                if self.phi_exponent(&r).is_some() {
                    hits += 1;
                }
            }
            Err(e) => err = Some(e),
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        let delta = modular_delta(&MatG::diag_pow(p, &self.support), DeltaSide::N)?;
        Ok(self.c1_sq / delta * Q::new(hits, total))
    }

    /// Machine checks of the three defining conditions on seeded random samples:
    /// left K_A- and right K(q²)-invariance, support on N·K_A·s·K, and the right
    /// K(p^m)-character that makes |f| invariant at level m.
    pub fn certify(&self, samples: usize) -> Result<ClassCertificate> {
        let (n, p, m) = (self.n, self.ctx.p, self.ctx.m);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + n as u64 * 31 + p * 7 + m as u64);
        let mut cert = ClassCertificate::default();
        let s = MatG::diag_pow(p, &self.support);
        for i in 0..samples {
            let k = random_k(&mut rng, n, p, 2 * m + 1);
            let nn = random_upper_unipotent(&mut rng, n, p, -2, 4);
            let g = if i % 2 == 0 { nn.mul(&s).mul(&k) } else { random_gl(&mut rng, n, p, 2) };
            let fg = self.eval(&g)?;

            let z: Vec<Q> = (0..n)
                .map(|_| {
                    let mut t: i128 = rng.gen_range(1..40);
                    while t % p as i128 == 0 {
                        t += 1;
                    }
                    Q::from_integer(t)
                })
                .collect();
            cert.left_torus_checks += 1;
            if self.eval(&MatG::diag(p, &z).mul(&g))? != fg {
                cert.failures.push(format!("left K_A: g={}", g.to_text()));
            }

            let h = random_principal(&mut rng, n, p, 2 * m, 2 * m + 2);
            cert.right_invariance_checks += 1;
            if self.eval(&g.mul(&h))? != fg {
                cert.failures.push(format!("right K(q^2): g={}", g.to_text()));
            }

            cert.support_checks += 1;
            if self.eval_nak(&g)? != fg {
                cert.failures.push(format!("support/shape: g={}", g.to_text()));
            }
            let mut off = self.support.clone();
            off[i % n] += 1 + (i / n % 2) as i64;
            off[(i + 1) % n] -= 1;
            if !self.eval(&nn.mul(&MatG::diag_pow(p, &off)).mul(&k))?.is_zero() {
                cert.failures.push(format!("off-support value at a={off:?}"));
            }

            let kr = ResMat::from_mat(&k, 2 * m)?;
            let hr = ResMat::from_mat(&random_principal(&mut rng, n, p, m, 2 * m), 2 * m)?;
            cert.equivariance_checks += 1;
            let lhs = self.phi_exponent(&kr.mul(&hr));
            let rhs = self.phi_exponent(&kr).map(|r| frac_part(&(r + self.right_char_exponent(&hr).unwrap()), p));
            if lhs != rhs {
                cert.failures.push(format!("right K(q) character: k={}", kr.to_text()));
            }
        }
        Ok(cert)
    }

    pub fn support_point(&self) -> MatG {
        MatG::diag_pow(self.ctx.p, &self.support)
    }

    pub fn to_json(&self) -> Value {
        let c = &self.certificate;
        json!({
            "kind": self.kind.name(),
            "n": self.n, "p": self.ctx.p, "m": self.ctx.m,
            "support_valuations": self.support,
            "c1_sq": fmt_q(&self.c1_sq),
            "norm_sq": fmt_q(&self.norm_sq),
            "certificate": {
                "left_torus_checks": c.left_torus_checks,
                "right_invariance_checks": c.right_invariance_checks,
                "support_checks": c.support_checks,
                "equivariance_checks": c.equivariance_checks,
                "failures": c.failures,
                "passed": c.passed(),
            },
        })
    }
}

/// Valuation vector of a p-power diagonal.
pub fn diag_vals(a: &MatG) -> Result<Vec<i64>> {
    a.diagonal().iter().map(|x| valuation(x, a.p)).collect()
}
