use num_traits::One;
use serde_json::{json, Value};

use super::integral::{vol_conjugated_kn, zeta_explicit};
use crate::arith::{fmt_q, p_pow, DepthContext, Q};
use crate::error::Result;
use crate::group::{big_cell_constant, gl_order_residue, modular_delta, DeltaSide, MatG};
use crate::params::companion;
use crate::testfn::{rho_check_valuations, translate_for_h};
use crate::whitmodel::{a_t_h, vol_x, WhittakerOnH};

/// One volume quantity: exact value, the displayed δ/T main term, and their ratio.
#[derive(Clone, Debug)]
pub struct VolumeItem {
    pub name: &'static str,
    pub value: Q,
    pub main_term: Q,
    pub constant: Q,
    pub expected_constant: Q,
}

impl VolumeItem {
    fn new(name: &'static str, value: Q, main_term: Q, expected_constant: Q) -> Self {
        Self { name, value, main_term, constant: value / main_term, expected_constant }
    }

    pub fn passed(&self) -> bool {
        self.constant == self.expected_constant
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "value": fmt_q(&self.value),
            "main_term": fmt_q(&self.main_term),
            "constant": fmt_q(&self.constant),
            "expected_constant": fmt_q(&self.expected_constant),
            "passed": self.passed(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct VolumeReport {
    pub n: usize,
    pub ctx: DepthContext,
    pub items: Vec<VolumeItem>,
}

impl VolumeReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n, "p": self.ctx.p, "m": self.ctx.m,
            "items": self.items.iter().map(|i| i.to_json()).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

/// T^{e} for rational e with 2m·e integral.
fn t_pow(ctx: &DepthContext, e: Q) -> Q {
    let v = e * Q::from_integer(2 * ctx.m as i128);
    assert!(v.is_integer(), "T-power with non-integral p-exponent");
    p_pow(ctx.p, v.to_integer() as i64)
}

/// The three volume quantities entering the zeta identity and the final collapse
/// δ_{N_H}^{1/2}(T̃^{ρ∨}a_T)·T^{−n²/4}, each divided by its displayed main term.
pub fn volume_lemma_suite(ctx: DepthContext, n: usize) -> Result<VolumeReport> {
    let p = ctx.p;
    let nn = n as i128;
    let a = a_t_h(&ctx, n);
    let delta_a = modular_delta(&a, DeltaSide::N)?;
    let shift = rho_check_valuations(n, ctx.m);
    let neg_shift: Vec<i64> = shift.iter().map(|x| -x).collect();
    let delta_neg_rho = modular_delta(&MatG::diag_pow(p, &neg_shift), DeltaSide::N)?;
    let c0 = big_cell_constant(n, p);

    let item1 = VolumeItem::new(
        "vol_X",
        vol_x(&ctx, n),
        Q::one() / delta_a * t_pow(&ctx, Q::new(-nn * (nn + 1), 4)),
        p_pow(p, (n * n) as i64) / Q::from_integer(gl_order_residue(n, p)),
    );
    let f = translate_for_h(ctx, n)?;
    let item2 = VolumeItem::new(
        "c1_squared",
        f.c1_sq(),
        Q::one() / delta_neg_rho * t_pow(&ctx, Q::new(nn * (nn - 1), 4)),
        Q::one() / c0,
    );
    let coeffs: Vec<i64> = (0..=n).map(|i| (i == 0) as i64).collect();
    let w = WhittakerOnH::new(companion(ctx, &coeffs)?)?;
    let item3 = VolumeItem::new(
        "vol_aT_KN_aT_inv",
        vol_conjugated_kn(&w),
        delta_a * t_pow(&ctx, Q::new(-nn * (nn - 1), 4)),
        Q::one(),
    );
    let t_a: Vec<i64> = shift.iter().zip(a.diag_valuations()?).map(|(x, y)| x + y).collect();
    let delta_ta = modular_delta(&MatG::diag_pow(p, &t_a), DeltaSide::N)?;
    let z = zeta_explicit(&w, &f)?;
    let z0_sq = z.c.square() * t_pow(&ctx, Q::new(-nn * nn, 2));
    let item4 = VolumeItem::new(
        "zeta_at_zero_squared",
        z0_sq,
        delta_ta * t_pow(&ctx, Q::new(-nn * nn, 2)),
        item1.expected_constant / c0,
    );
    Ok(VolumeReport { n, ctx, items: vec![item1, item2, item3, item4] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_across_depths() {
        for n in [1usize, 2] {
            for (p, m) in [(2u64, 1u32), (3, 1), (2, 2), (3, 2)] {
                let r = volume_lemma_suite(DepthContext::new(p, m).unwrap(), n).unwrap();
                assert!(r.passed(), "{}", r.to_json());
            }
        }
    }

    #[test]
    fn item3_gl2_in_gl3() {
        let r = volume_lemma_suite(DepthContext::new(2, 1).unwrap(), 2).unwrap();
        let it = &r.items[2];
        assert_eq!(it.value, Q::from_integer(2));
        assert_eq!(it.constant, Q::one());
    }

    #[test]
    fn constants_do_not_depend_on_depth() {
        let a = volume_lemma_suite(DepthContext::new(3, 1).unwrap(), 2).unwrap();
        let b = volume_lemma_suite(DepthContext::new(3, 2).unwrap(), 2).unwrap();
        for (x, y) in a.items.iter().zip(&b.items) {
            assert_eq!(x.constant, y.constant, "{}", x.name);
        }
    }
}
