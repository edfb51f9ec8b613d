use std::collections::HashSet;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::domain::{conj_a, upper_positions, NiceDomain};
use crate::arith::{fmt_q, frac_part, ipow, is_integral, p_pow, val_or_inf, Q};
use crate::error::{Error, Result};
use crate::group::{bruhat_open_cell, for_each_tuple, MatG, ResMat};

/// Smallest slope at which the construction is run: ρ − l − 1 ≥ n + 1 for every remainder
/// l ≤ n − 2, so that q₁ ≡ q₂ ≡ I mod p^{n+1}.
pub fn q1_q2_threshold(n: usize) -> u32 {
    2 * n as u32
}

/// The two-parameter family at one point: q₁ = I + p^{ρ−l−1}x·E_{j₀,i₀+1}, the lower
/// triangular q₂ ∈ K_Q(p^{ρ−l−1}o) with w′ = q₂u′q₁ ∈ N, and w = (w′)^{A(−ρ)}.
#[derive(Clone, Debug)]
pub struct Q1Q2 {
    pub x: Q,
    pub u_prime: MatG,
    pub q1: MatG,
    pub q2: MatG,
    pub w_prime: MatG,
    pub w: MatG,
}

impl Q1Q2 {
    pub fn to_json(&self) -> Value {
        json!({
            "x": fmt_q(&self.x),
            "u_prime": self.u_prime.to_text(),
            "q1": self.q1.to_text(),
            "q2": self.q2.to_text(),
            "w_prime": self.w_prime.to_text(),
            "w": self.w.to_text(),
        })
    }
}

pub fn q1_q2_construct(dom: &NiceDomain, u: &MatG, x: &Q) -> Result<Q1Q2> {
    let (p, n) = (dom.p, dom.n);
    let (i0, j0) = dom.pivot.ok_or_else(|| Error::Precondition("slope-0 domain has no pivot".into()))?;
    if dom.rho < q1_q2_threshold(n) {
        return Err(Error::Precondition(format!("slope {} below threshold {}", dom.rho, q1_q2_threshold(n))));
    }
    if !dom.contains(u) {
        return Err(Error::NotInSubgroup("u is not in the domain".into()));
    }
    if !is_integral(x, p) {
        return Err(Error::Precondition("x must be integral".into()));
    }
    let e = dom.rho as i64 - dom.l as i64 - 1;
    let t = p_pow(p, e) * *x;
    let u_prime = conj_a(u, dom.rho as i64);
    let mut q1 = MatG::identity(n, p);
    q1.set(j0, i0 + 1, q1.get(j0, i0 + 1) + t);
    let m = u_prime.mul(&q1);
    let d = bruhat_open_cell(&m).ok_or_else(|| Error::NotInSubgroup("u'q1 is not in the open cell".into()))?;
    let q2 = d.u.mul(&d.a).inv()?;
    if !q2.is_lower_triangular() || (0..n).any(|i| (0..n).any(|j| val_or_inf(&(q2.get(i, j) - if i == j { Q::one() } else { Q::zero() }), p) < e)) {
        return Err(Error::NotInSubgroup(format!("q2 outside K_Q(p^{e})")));
    }
    let w_prime = d.n;
    let w = conj_a(&w_prime, -(dom.rho as i64));
    Ok(Q1Q2 { x: *x, u_prime, q1, q2, w_prime, w })
}

/// Properties (i) w′ ≡ u′ mod pⁿ, (ii) the superdiagonal shift mod p^ρ, and w ∈ N₀.
pub fn q1_q2_properties(dom: &NiceDomain, c: &Q1Q2) -> Vec<String> {
    let (p, n) = (dom.p, dom.n);
    let (i0, j0) = dom.pivot.expect("pivot");
    let mut bad = Vec::new();
    let pn = p_pow(p, n as i64);
    let rho = dom.rho as i64;
    for (i, j) in upper_positions(n) {
        if !is_integral(&((c.w_prime.get(i, j) - c.u_prime.get(i, j)) / pn), p) {
            bad.push(format!("(i) fails at ({i},{j})"));
        }
    }
    let shift = p_pow(p, rho - dom.l as i64 - 1) * Q::from_integer(dom.u0.get(i0, j0) as i128) * c.x;
    for i in 0..n - 1 {
        let mut want = c.u_prime.get(i, i + 1);
        if i == i0 {
            want += shift;
        }
        if !is_integral(&((c.w_prime.get(i, i + 1) - want) / p_pow(p, rho)), p) {
            bad.push(format!("(ii) fails at ({i},{})", i + 1));
        }
    }
    if !dom.contains(&c.w) {
        bad.push("w is not in the domain".into());
    }
    bad
}

/// For fixed x, u′ ↦ w′ on the residues of u₀K_N(pⁿo) modulo p^L: well defined (two lifts
/// agree), injective, landing in the domain; also the number of classes it fixes.
#[derive(Clone, Debug)]
pub struct BijectionReport {
    pub level: u32,
    pub x: Q,
    pub classes: usize,
    pub distinct_images: usize,
    pub fixed: usize,
    pub failures: Vec<String>,
}

impl BijectionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.distinct_images == self.classes
    }

    pub fn to_json(&self) -> Value {
        json!({
            "level": self.level, "x": fmt_q(&self.x), "classes": self.classes,
            "distinct_images": self.distinct_images, "fixed": self.fixed,
            "failures": self.failures, "passed": self.passed(),
        })
    }
}

pub fn q1_q2_bijection(dom: &NiceDomain, x: &Q, level: u32) -> Result<BijectionReport> {
    let (p, n) = (dom.p, dom.n);
    let nl = n as u32;
    if level < nl {
        return Err(Error::Precondition("level below p^n".into()));
    }
    let pos = upper_positions(n);
    let pn = ipow(p, nl);
    let pl = ipow(p, level);
    let mut images = HashSet::new();
    let mut classes = 0;
    let mut fixed = 0;
    let mut failures = Vec::new();
    let mut err = None;
    let image = |up: &MatG| -> Result<(ResMat, Q1Q2)> {
        let u = conj_a(up, -(dom.rho as i64));
        let c = q1_q2_construct(dom, &u, x)?;
        Ok((ResMat::from_mat(&c.w_prime, level)?, c))
    };
    for_each_tuple(&vec![ipow(p, level - nl); pos.len()], |t| {
        if err.is_some() {
            return;
        }
        let mut up = MatG::identity(n, p);
        let mut alt = MatG::identity(n, p);
        for ((i, j), s) in pos.iter().zip(t) {
            let base = dom.u0.get(*i, *j) as i128 + pn * s;
            up.set(*i, *j, Q::from_integer(base));
            alt.set(*i, *j, Q::from_integer(base + pl * (1 + (*i as i128) + 2 * (*j as i128))));
        }
        match (image(&up), image(&alt)) {
            (Ok((r1, c)), Ok((r2, _))) => {
                classes += 1;
                if r1 != r2 {
                    failures.push(format!("not well defined at {}", up.to_text()));
                }
                if let Ok(ru) = ResMat::from_mat(&up, level) {
                    if ru == r1 {
                        fixed += 1;
                    }
                }
                if !dom.contains(&c.w) {
                    failures.push(format!("image leaves the domain at {}", up.to_text()));
                }
                images.insert(r1);
            }
            (Err(e), _) | (_, Err(e)) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(BijectionReport { level, x: *x, classes, distinct_images: images.len(), fixed, failures })
}

/// ψ(p^{−l−1}u₀_{i₀j₀}x) summed over x ∈ o/p^{l+1}: the inner character sum of the vanishing argument.
pub fn pivot_character_sum(dom: &NiceDomain) -> Result<crate::arith::CycValue> {
    let (i0, j0) = dom.pivot.ok_or_else(|| Error::Precondition("no pivot".into()))?;
    let p = dom.p;
    let mut acc = crate::arith::RootCounter::new(p);
    let c = p_pow(p, -(dom.l as i64) - 1) * Q::from_integer(dom.u0.get(i0, j0) as i128);
    for x in 0..ipow(p, dom.l + 1) {
        acc.add_root(&frac_part(&(c * Q::from_integer(x)), p), 1);
    }
    Ok(acc.to_cyc(&Q::one()).canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nicedomain::domain::{classify, domains_of_slope};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unipotent(p: u64, rows: &[&[i128]]) -> MatG {
        MatG::from_ints(p, rows)
    }

    #[test]
    fn x_zero_is_identity() {
        let dom = domains_of_slope(2, 2, 4).into_iter().next().unwrap();
        let u = dom.member(&[5]);
        let c = q1_q2_construct(&dom, &u, &Q::zero()).unwrap();
        assert!(c.q1.is_identity() && c.q2.is_identity());
        assert_eq!(c.w, u);
    }

    #[test]
    fn gl3_elimination_matches_closed_form() {
        // Pivot (0, 2): w′ = (1, a + tc, c; 0, 1, b/(1 + tb); 0, 0, 1).
        let p = 2;
        for rho in 6..9u32 {
            let up = unipotent(p, &[&[1, 2, 1], &[0, 1, 6], &[0, 0, 1]]);
            let u = conj_a(&up, -(rho as i64));
            let dom = classify(&u).unwrap();
            assert_eq!((dom.rho, dom.l, dom.pivot), (rho, 0, Some((0, 2))));
            for x in 0..4 {
                let c = q1_q2_construct(&dom, &u, &Q::from_integer(x)).unwrap();
                let t = p_pow(p, rho as i64 - 1) * Q::from_integer(x);
                let (a, b, cc) = (up.get(0, 1), up.get(1, 2), up.get(0, 2));
                assert_eq!(c.w_prime.get(0, 1), a + t * cc);
                assert_eq!(c.w_prime.get(0, 2), cc);
                assert_eq!(c.w_prime.get(1, 2), b / (Q::one() + t * b));
                assert!(q1_q2_properties(&dom, &c).is_empty());
            }
        }
    }

    #[test]
    fn gl4_elimination_matches_closed_form() {
        // Pivot (0, 3) with the first three rows of w′ in closed form.
        let p = 2;
        let up = unipotent(p, &[&[1, 2, 6, 3], &[0, 1, 2, 10], &[0, 0, 1, 4], &[0, 0, 0, 1]]);
        let rho = 9;
        assert!(rho as u32 >= q1_q2_threshold(4));
        let u = conj_a(&up, -rho);
        let dom = classify(&u).unwrap();
        assert_eq!((dom.l, dom.pivot), (0, Some((0, 3))));
        let x = Q::from_integer(3);
        let c = q1_q2_construct(&dom, &u, &x).unwrap();
        let t = p_pow(p, rho - 1) * x;
        let g = |i, j| up.get(i, j);
        let w = |i, j| c.w_prime.get(i, j);
        assert_eq!(w(0, 3), g(0, 3));
        assert_eq!(w(0, 1), g(0, 1) + t * g(0, 3));
        assert_eq!(w(0, 2), g(0, 2));
        let d2 = Q::one() + t * g(1, 3);
        assert_eq!(w(1, 3), g(1, 3) / d2);
        assert_eq!(w(1, 2), g(1, 2) / d2);
        assert_eq!(w(2, 3), (g(2, 3) - t * g(2, 3) * w(1, 3)) / (Q::one() - t * g(2, 3) * w(1, 2)));
        assert!(q1_q2_properties(&dom, &c).is_empty());
    }

    #[test]
    fn properties_hold_above_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, n) in [(2u64, 2usize), (3, 2), (2, 3), (3, 3)] {
            let rho = q1_q2_threshold(n);
            for dom in domains_of_slope(p, n, rho).iter().take(60) {
                for _ in 0..4 {
                    let t: Vec<i128> = (0..n * (n - 1) / 2).map(|_| rng.gen_range(-30..30)).collect();
                    let u = dom.member(&t);
                    let x = Q::from_integer(rng.gen_range(0..50));
                    let c = q1_q2_construct(dom, &u, &x).unwrap();
                    let bad = q1_q2_properties(dom, &c);
                    assert!(bad.is_empty(), "{:?} {}", bad, c.to_json());
                }
            }
        }
    }

    #[test]
    fn finite_quotient_bijection() {
        for (p, n) in [(2u64, 2usize), (2, 3), (3, 2)] {
            let rho = q1_q2_threshold(n);
            for dom in domains_of_slope(p, n, rho).iter().take(12) {
                for x in [1, 2, 3] {
                    for level in [n as u32 + 1, n as u32 + 2] {
                        let r = q1_q2_bijection(dom, &Q::from_integer(x), level).unwrap();
                        assert!(r.passed(), "{}", r.to_json());
                        if level == n as u32 + 1 {
                            assert_eq!(r.fixed, r.classes);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pivot_sums_vanish() {
        for dom in domains_of_slope(2, 3, 2).iter().chain(domains_of_slope(3, 2, 1).iter()) {
            assert!(pivot_character_sum(dom).unwrap().is_zero());
        }
    }
}
