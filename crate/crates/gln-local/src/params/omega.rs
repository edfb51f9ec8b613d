use num_traits::Zero;
use serde_json::{json, Value};

use super::chi::{wrap_phase, ExtensionTable, JQuotient};
use super::tau::is_uniform;
use crate::arith::{fmt_q, ipow, CycValue, RootCounter, Q};
use crate::error::{Error, Result};
use crate::group::{for_each_tuple, gl_order, unit_count, ResMat};

/// Restriction of the central character to Z(o).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CentralCharacter {
    /// Trivial on Z(o); requires χ̃ to be trivial on the scalars of J_τ.
    Trivial,
    /// Equal to χ̃ on Z(o), the only choice compatible with a nonzero χ̃-isotypic vector.
    FromExtension,
}

/// ω = vol(J_τ)⁻¹·χ̃⁻¹·1_{J_τ}, stored through its character table.
#[derive(Clone, Debug)]
pub struct OmegaIdempotent {
    pub jq: JQuotient,
    pub table: ExtensionTable,
    pub vol_j: Q,
}

/// vol(J_τ) = |G_τ(o/q)|·vol(K(q)).
pub fn vol_j(jq: &JQuotient) -> Q {
    let t = jq.tau();
    Q::new(jq.order() as i128, gl_order(t.size(), t.ctx.p, t.ctx.m))
}

pub fn build_omega(jq: JQuotient, table: ExtensionTable) -> Result<OmegaIdempotent> {
    if !is_uniform(jq.tau()) {
        return Err(Error::Precondition("ω needs a uniform parameter".into()));
    }
    if !table.is_p_power(jq.tau().ctx.p) {
        return Err(Error::Unsupported("extension with values outside the p-power roots of unity".into()));
    }
    let vol = vol_j(&jq);
    Ok(OmegaIdempotent { jq, table, vol_j: vol })
}

impl OmegaIdempotent {
    fn p(&self) -> u64 {
        self.jq.tau().ctx.p
    }

    fn level2(&self) -> u32 {
        2 * self.jq.tau().ctx.m
    }

    /// ω(g) for g given modulo p^{2m}.
    pub fn value(&self, g: &ResMat) -> CycValue {
        match self.table.phase(&self.jq, g) {
            Some(r) => CycValue::root_scaled(self.p(), &wrap_phase(-r), Q::from_integer(1) / self.vol_j)
                .expect("p-power phase"),
            None => CycValue::zero(self.p()),
        }
    }

    /// (ω∗ω)(g) = Σ_{h ∈ J_τ/K(q²)} vol(K(q²))·ω(h)·ω(h⁻¹g).
    pub fn convolution_at(&self, g: &ResMat, reps: &[ResMat]) -> Result<CycValue> {
        let t = self.jq.tau();
        let mut acc = RootCounter::new(self.p());
        for h in reps {
            let hg = h.inv()?.mul(g);
            if let (Some(a), Some(b)) = (self.table.phase(&self.jq, h), self.table.phase(&self.jq, &hg)) {
                acc.add_root(&wrap_phase(-a - b), 1);
            }
        }
        let vol_kq2 = Q::new(1, gl_order(t.size(), t.ctx.p, self.level2()));
        Ok(acc.to_cyc(&(vol_kq2 / (self.vol_j * self.vol_j))).canonical())
    }

    /// Checks ω∗ω = ω at the given points (all of J_τ/K(q²) when `points` is None) and at
    /// one point outside J_τ.
    pub fn check_idempotent(&self, points: Option<&[ResMat]>) -> Result<bool> {
        let reps = self.jq.elements();
        let pts: Vec<ResMat> = match points {
            Some(p) => p.to_vec(),
            None => reps.clone(),
        };
        for g in &pts {
            if self.convolution_at(g, &reps)? != self.value(g) {
                return Ok(false);
            }
        }
        let t = self.jq.tau();
        let n = t.size();
        let mut outside = ResMat::identity(n, t.ctx.p, self.level2());
        if n >= 2 {
            outside.set(0, 1, 1);
        }
        if self.jq.index_of(&outside).is_none() && !self.convolution_at(&outside, &reps)?.is_zero() {
            return Ok(false);
        }
        Ok(true)
    }

    /// π(z) for z ∈ Z(o)/Z(q²) given by a unit residue.
    fn central_value(&self, z: i64, cc: CentralCharacter) -> Result<Q> {
        let t = self.jq.tau();
        let zi = ResMat::identity(t.size(), t.ctx.p, self.level2()).scale(z);
        let r = self.table.phase(&self.jq, &zi).expect("scalars lie in J_τ");
        match cc {
            CentralCharacter::FromExtension => Ok(r),
            CentralCharacter::Trivial if r.is_zero() => Ok(Q::zero()),
            CentralCharacter::Trivial => Err(Error::Precondition(
                "χ̃ is nontrivial on Z(o), so no vector transforms by it under a central character trivial on Z(o)".into(),
            )),
        }
    }

    /// ∫_H |ω♯| with ω♯(h) = ∫_{Z(o)} π(z)ω(zh) dz, as an exact sum over
    /// (H ∩ K)/K_H(q²) and Z(o)/Z(q²).
    pub fn omega_sharp_l1(&self, cc: CentralCharacter) -> Result<Q> {
        let t = self.jq.tau();
        let (n, p) = (t.size(), t.ctx.p);
        let l = self.level2();
        let md = ipow(p, l) as i64;
        let units: Vec<i64> = (1..md).filter(|z| z % p as i64 != 0).collect();
        let central: Vec<Q> = units.iter().map(|z| self.central_value(*z, cc)).collect::<Result<_>>()?;
        let vol_z = Q::new(1, unit_count(p, l));
        let vol_h = Q::new(1, gl_order(n - 1, p, l));
        let mut total = Q::zero();
        let mut err = None;
        for_each_tuple(&vec![md as i128; (n - 1) * (n - 1)], |a| {
            if err.is_some() {
                return;
            }
            let mut h = ResMat::identity(n, p, l);
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    h.set(i, j, a[i * (n - 1) + j] as i64);
                }
            }
            if self.jq.index_of(&h).is_none() {
                return;
            }
            let mut acc = RootCounter::new(p);
            for (z, pz) in units.iter().zip(&central) {
                if let Some(r) = self.table.phase(&self.jq, &h.scale(*z)) {
                    acc.add_root(&wrap_phase(*pz - r), 1);
                }
            }
            let sharp = acc.to_cyc(&(vol_z / self.vol_j)).canonical();
            match sharp.abs_if_monomial() {
                Some(v) => total += vol_h * v,
                None if sharp.is_zero() => {}
                None => err = Some(Error::Unsupported("|ω♯(h)| is not a monomial".into())),
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }

    /// |G_τ ∩ H (o/q)|·|GL_N(o/q)| / (|GL_n(o/q)|·|G_τ(o/q)|), the value of ∫_H |ω♯|
    /// when π(z) matches χ̃ on Z(o).
    pub fn omega_sharp_l1_closed_form(&self) -> Q {
        let t = self.jq.tau();
        let (n, p, m) = (t.size(), t.ctx.p, t.ctx.m);
        let in_h = self
            .jq
            .cent
            .iter()
            .filter(|c| (0..n).all(|i| c.get(n - 1, i) == (i == n - 1) as i64 && c.get(i, n - 1) == (i == n - 1) as i64))
            .count() as i128;
        Q::new(in_h * gl_order(n, p, m), gl_order(n - 1, p, m) * self.jq.order() as i128)
    }

    /// (∫_H |ω♯|)/T^{n/2} with n = N − 1.
    pub fn l1_ratio(&self, l1: &Q) -> Q {
        let t = self.jq.tau();
        *l1 / Q::from_integer(ipow(t.ctx.p, t.ctx.m * (t.size() as u32 - 1)))
    }

    pub fn to_json(&self, l1: &Q) -> Value {
        json!({
            "tau": self.jq.tau().to_json(),
            "vol_J": fmt_q(&self.vol_j),
            "omega_sharp_l1": fmt_q(l1),
            "ratio_to_T_half_n": fmt_q(&self.l1_ratio(l1)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, DepthContext};
    use crate::params::chi::extension_report;
    use crate::params::tau::{companion, theta_matrix, TauParam};
    use crate::group::{enumerate_cosets, SubgroupSpec};

    fn omega_for(t: TauParam) -> OmegaIdempotent {
        let jq = JQuotient::new(t).unwrap();
        let table = extension_report(&jq).p_power[0].clone();
        build_omega(jq, table).unwrap()
    }

    #[test]
    fn omega_is_idempotent_gl2() {
        let om = omega_for(companion(DepthContext::new(2, 1).unwrap(), &[1, 1]).unwrap());
        assert!(om.check_idempotent(None).unwrap());
    }

    #[test]
    fn vol_j_matches_centralizer_count() {
        let c = DepthContext::new(2, 1).unwrap();
        let om = omega_for(companion(c, &[1, 1]).unwrap());
        let k_count = enumerate_cosets(SubgroupSpec::K, 2, 2, 1).unwrap().len() as i128;
        let j_count = enumerate_cosets(SubgroupSpec::K, 2, 2, 1)
            .unwrap()
            .iter()
            .filter(|g| om.jq.contains(g))
            .count() as i128;
        assert_eq!(om.vol_j, Q::new(j_count, k_count));
        assert_eq!(om.vol_j, Q::new(3, 6));
    }

    #[test]
    fn omega_sharp_gl2_example() {
        let om = omega_for(companion(DepthContext::new(2, 1).unwrap(), &[1, 1]).unwrap());
        let l1 = om.omega_sharp_l1(CentralCharacter::FromExtension).unwrap();
        assert_eq!(l1, q(2));
        assert_eq!(l1, om.omega_sharp_l1_closed_form());
        assert_eq!(om.l1_ratio(&l1), q(1));
        assert!(om.omega_sharp_l1(CentralCharacter::Trivial).is_err());
    }

    #[test]
    fn omega_sharp_matches_closed_form() {
        for (coeffs, p, m) in [(vec![1i64, 1], 2u64, 2u32), (vec![1, 1, 0], 2, 1), (vec![2, 0], 3, 1)] {
            let om = omega_for(companion(DepthContext::new(p, m).unwrap(), &coeffs).unwrap());
            let l1 = om.omega_sharp_l1(CentralCharacter::FromExtension).unwrap();
            assert_eq!(l1, om.omega_sharp_l1_closed_form());
            assert!(l1 > Q::zero());
        }
    }

    #[test]
    fn omega_needs_uniform_parameter() {
        let jq = JQuotient::new(theta_matrix(DepthContext::new(2, 1).unwrap(), 2).unwrap()).unwrap();
        let table = extension_report(&jq).p_power[0].clone();
        assert!(build_omega(jq, table).is_err());
    }
}
