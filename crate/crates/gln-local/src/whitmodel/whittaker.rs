use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arith::{fmt_q, psi, psi_t, val_or_inf, valuation, CycValue, DepthContext, SqrtRational, Q};
use crate::error::{Error, Result};
use crate::group::{gl_order, iwasawa_nak, modular_delta, DeltaSide, MatG, ResMat};
use crate::params::{theta_matrix, CharChiTau, TauParam};
use crate::testfn::superdiagonal_sum;

/// a_T = diag(T̃^n, …, T̃, 1) in GL_{n+1}.
pub fn a_t(ctx: &DepthContext, n: usize) -> MatG {
    let v: Vec<i64> = (0..=n).map(|i| 2 * ctx.m as i64 * (n - i) as i64).map(|x| -x).collect();
    MatG::diag_pow(ctx.p, &v)
}

/// The H-block diag(T̃^n, …, T̃) of a_T.
pub fn a_t_h(ctx: &DepthContext, n: usize) -> MatG {
    a_t(ctx, n).upper_left(n)
}

/// vol(X) for X = N_H\N_H a_T K_H(q): δ_{N_H}⁻¹(a_T)·vol_{K_H}(N_H(o)K_H(q)).
pub fn vol_x(ctx: &DepthContext, n: usize) -> Q {
    let d = (n * (n - 1) / 2) as u32;
    let delta = modular_delta(&a_t_h(ctx, n), DeltaSide::N).expect("diagonal");
    Q::one() / delta * Q::new(crate::arith::ipow(ctx.p, ctx.m * d), gl_order(n, ctx.p, ctx.m))
}

/// A value of W: scale·cyc.
#[derive(Clone, Debug, PartialEq)]
pub struct WValue {
    pub scale: SqrtRational,
    pub cyc: CycValue,
}

impl WValue {
    pub fn is_zero(&self) -> bool {
        self.scale.is_zero() || self.cyc.is_zero()
    }

    pub fn to_json(&self) -> Value {
        json!({ "scale": self.scale.to_json(), "cyc": self.cyc.to_json() })
    }
}

/// h = n·a_T·y with n ∈ N_H(F) and y ∈ K_{Q_H}(q).
#[derive(Clone, Debug)]
pub struct CosetWitness {
    pub n: MatG,
    pub y: MatG,
}

/// The localized Whittaker function restricted to H = GL_n ⊂ GL_{n+1}.
#[derive(Clone, Debug)]
pub struct WhittakerOnH {
    pub ctx: DepthContext,
    pub n: usize,
    pub chi: CharChiTau,
    pub a_t: MatG,
    pub vol_x: Q,
    pub w_at: SqrtRational,
}

impl WhittakerOnH {
    /// Requires τ ∈ M_{n+1}(o/q) whose H-block is θ, so that χ_τ restricts to χ_θ on K_H(q).
    pub fn new(tau: TauParam) -> Result<Self> {
        let size = tau.size();
        if size < 2 {
            return Err(Error::Dimension("W on H needs rank at least 2".into()));
        }
        let n = size - 1;
        let ctx = tau.ctx;
        let theta = theta_matrix(ctx, n)?;
        for i in 0..n {
            for j in 0..n {
                if tau.tau.get(i, j) != theta.tau.get(i, j) {
                    return Err(Error::Precondition("the H-block of τ must be θ modulo q".into()));
                }
            }
        }
        let vol = vol_x(&ctx, n);
        let w_at = SqrtRational::sqrt(Q::one() / vol)?;
        Ok(Self { ctx, n, chi: CharChiTau::new(tau), a_t: a_t_h(&ctx, n), vol_x: vol, w_at })
    }

    fn d(&self, i: usize) -> Q {
        self.a_t.get(i, i)
    }

    /// Solves for n with n⁻¹h ∈ a_T(1 + qM(o)) from the last row upward; None when h lies
    /// outside N_H a_T K_H(q).
    pub fn support_solve(&self, h: &MatG) -> Result<Option<CosetWitness>> {
        let (n, p, m) = (self.n, self.ctx.p, self.ctx.m as i64);
        if h.n != n {
            return Err(Error::Dimension(format!("expected an element of GL_{n}")));
        }
        let mut r = h.clone();
        let mut nprime = MatG::identity(n, p);
        for i in (0..n).rev() {
            let k = n - 1 - i;
            if k > 0 {
                let mut block = MatG::zero(k, p);
                for a in 0..k {
                    for b in 0..k {
                        block.set(a, b, r.get(i + 1 + a, i + 1 + b));
                    }
                }
                let binv = block.inv()?;
                let c: Vec<Q> = (0..k)
                    .map(|b| (0..k).fold(Q::zero(), |acc, a| acc - h.get(i, i + 1 + a) * binv.get(a, b)))
                    .collect();
                for (a, ca) in c.iter().enumerate() {
                    nprime.set(i, i + 1 + a, *ca);
                }
                for col in 0..n {
                    let x = (0..k).fold(h.get(i, col), |acc, a| acc + c[a] * r.get(i + 1 + a, col));
                    r.set(i, col, x);
                }
            }
            let di = self.d(i);
            let vd = valuation(&di, p)?;
            for col in 0..i {
                if val_or_inf(&r.get(i, col), p) < vd + m {
                    return Ok(None);
                }
            }
            if val_or_inf(&(r.get(i, i) / di - Q::one()), p) < m {
                return Ok(None);
            }
        }
        let y = self.a_t.inv()?.mul(&r);
        debug_assert!(y.in_principal(self.ctx.m) && y.is_lower_triangular());
        Ok(Some(CosetWitness { n: nprime.inv()?, y }))
    }

    /// Membership in N_H a_T K_H(q) read off an Iwasawa decomposition h = n·a·k.
    pub fn support_oracle(&self, h: &MatG) -> Result<bool> {
        let d = iwasawa_nak(h)?;
        if d.a.diag_valuations()? != self.a_t.diag_valuations()? {
            return Ok(false);
        }
        let k = ResMat::from_mat(&d.k, self.ctx.m)?;
        Ok(k.is_upper_unipotent())
    }

    pub fn chi_on_h(&self, y: &MatG) -> Result<CycValue> {
        self.chi.eval(&y.embed(self.n + 1))
    }

    /// W(h) = ψ(n)·χ_θ(y)·W(a_T) for h = n·a_T·y, zero off the support.
    pub fn eval(&self, h: &MatG) -> Result<WValue> {
        match self.support_solve(h)? {
            None => Ok(WValue { scale: self.w_at.clone(), cyc: CycValue::zero(self.ctx.p) }),
            Some(w) => {
                let cyc = &psi(&superdiagonal_sum(&w.n), self.ctx.p) * &self.chi_on_h(&w.y)?;
                Ok(WValue { scale: self.w_at.clone(), cyc })
            }
        }
    }

    /// ψ(a_T·x·a_T⁻¹) = ψ_T̃(x) on each simple-root coordinate of N_H.
    pub fn conjugation_check(&self) -> bool {
        let n = self.n;
        let ainv = self.a_t.inv().expect("diagonal");
        (0..n.saturating_sub(1)).all(|k| {
            [Q::one(), Q::new(1, self.ctx.p as i128), Q::from_integer(3)].iter().all(|x| {
                let e = MatG::elementary(n, self.ctx.p, k, k + 1, *x);
                let c = self.a_t.mul(&e).mul(&ainv);
                psi(&superdiagonal_sum(&c), self.ctx.p) == psi_t(x, &self.ctx)
            })
        })
    }

    /// c²·vol(X), which is 1.
    pub fn norm_sq(&self) -> Q {
        self.w_at.square() * self.vol_x
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "a_T_valuations": self.a_t.diag_valuations().unwrap_or_default(),
            "vol_X": fmt_q(&self.vol_x),
            "W_aT_sq": fmt_q(&self.w_at.square()),
            "norm_sq": fmt_q(&self.norm_sq()),
        })
    }
}
