use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arith::{fmt_q, p_pow, psi_t, val_or_inf, valuation, CycValue, DepthContext, MellinSum, SqrtRational, Q};
use crate::error::{Error, Result};
use crate::group::{
    big_cell_constant, borel_order, bruhat_open_cell, gl_order, iwasawa_uak, modular_delta, DeltaSide, MatG,
};

/// Which of f and its complex conjugate f₀ = f̄ is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Twist {
    Plain,
    Conjugate,
}

fn twisted(v: CycValue, tw: Twist) -> CycValue {
    match tw {
        Twist::Plain => v,
        Twist::Conjugate => v.conj(),
    }
}

/// Σ_k x_{k,k+1}.
pub fn superdiagonal_sum(x: &MatG) -> Q {
    (0..x.n.saturating_sub(1)).fold(Q::zero(), |acc, k| acc + x.get(k, k + 1))
}

/// 𝒥[ψ_T̃, 1_{K_A}] on the open cell: ψ_T̃(n) when g = u·a·n with a ∈ K_A, zero elsewhere.
pub fn j_open_cell(ctx: &DepthContext, g: &MatG) -> CycValue {
    match bruhat_open_cell(g) {
        Some(d) if d.a.diagonal().iter().all(|x| val_or_inf(x, ctx.p) == 0) => psi_t(&superdiagonal_sum(&d.n), ctx),
        _ => CycValue::zero(ctx.p),
    }
}

/// f on K: nonzero iff k mod q is lower triangular, with value χ_θ(b⁻¹k) for the lower
/// triangular part b of k.
pub fn f_on_k(ctx: &DepthContext, k: &MatG) -> Result<CycValue> {
    let n = k.n;
    let m = ctx.m as i64;
    for i in 0..n {
        for j in i + 1..n {
            if val_or_inf(&k.get(i, j), ctx.p) < m {
                return Ok(CycValue::zero(ctx.p));
            }
        }
    }
    let mut b = k.clone();
    for i in 0..n {
        for j in i + 1..n {
            b.set(i, j, Q::zero());
        }
    }
    let kp = b.inv()?.mul(k);
    debug_assert!(kp.in_principal(ctx.m));
    Ok(psi_t(&superdiagonal_sum(&kp), ctx))
}

/// Iwasawa data g = u·a·k with a a diagonal of p-powers; returns (valuations of a, k).
fn uak(g: &MatG) -> Result<(Vec<i64>, MatG)> {
    let d = iwasawa_uak(g)?;
    let v = d.a.diagonal().iter().map(|x| valuation(x, g.p)).collect::<Result<Vec<_>>>()?;
    Ok((v, d.k))
}

/// f(u·a·k) = 1_{K_A}(a)·f(k).
pub fn f_explicit(ctx: &DepthContext, g: &MatG) -> Result<CycValue> {
    let (v, k) = uak(g)?;
    if v.iter().any(|x| *x != 0) {
        return Ok(CycValue::zero(ctx.p));
    }
    f_on_k(ctx, &k)
}

pub fn f0_explicit(ctx: &DepthContext, g: &MatG) -> Result<CycValue> {
    f_explicit(ctx, g).map(|v| v.conj())
}

/// f[s](u·a·k) = (δ_U^{1/2}|·|^s)(a)·f(k), as a single-term Mellin sum keyed by v(a).
pub fn mellin_component(ctx: &DepthContext, g: &MatG, tw: Twist) -> Result<MellinSum> {
    let (v, k) = uak(g)?;
    let mut out = MellinSum::zero(ctx.p);
    let a = MatG::diag_pow(ctx.p, &v);
    let root = SqrtRational::sqrt(modular_delta(&a, DeltaSide::U)?)?;
    out.add_term(v, &root, &twisted(f_on_k(ctx, &k)?, tw))?;
    Ok(out)
}

/// ‖f‖² over U\G = vol(K_A K_U K(q)) = |B⁻(Z/p^m)|/|GL_N(Z/p^m)|.
pub fn l2_norm_sq(n: usize, p: u64, m: u32) -> Q {
    Q::new(borel_order(n, p, m), gl_order(n, p, m))
}

/// ‖f‖²/c₀, which is exactly p^{−m·dim N}.
pub fn l2_norm_sq_over_c0(n: usize, p: u64, m: u32) -> Q {
    l2_norm_sq(n, p, m) / big_cell_constant(n, p)
}

/// f̃(g) = f(w_G·g^{−⊤}).
pub fn f_dual(ctx: &DepthContext, g: &MatG) -> Result<CycValue> {
    let w = MatG::w_g(g.n, g.p);
    f_explicit(ctx, &w.mul(&g.inv()?.transpose()))
}

/// Valuations of T̃^{ρ∨} = diag(T̃^{−(n−1)/2}, …, T̃^{(n−1)/2}): entry i has valuation m(n+1−2i).
pub fn rho_check_valuations(n: usize, m: u32) -> Vec<i64> {
    (1..=n as i64).map(|i| m as i64 * (n as i64 + 1 - 2 * i)).collect()
}

/// δ_U(diag(p^v)).
pub fn delta_u_of(p: u64, v: &[i64]) -> Q {
    modular_delta(&MatG::diag_pow(p, v), DeltaSide::U).expect("diagonal")
}

/// f_H(g) = c₁·f₀(T̃^{ρ∨}g), normalized so that ∫_{U_H\H}|f_H|² = 1.
#[derive(Clone, Debug)]
pub struct TranslatedTestFunction {
    pub ctx: DepthContext,
    pub n: usize,
    pub c1: SqrtRational,
    pub shift: Vec<i64>,
}

pub fn translate_for_h(ctx: DepthContext, n: usize) -> Result<TranslatedTestFunction> {
    let shift = rho_check_valuations(n, ctx.m);
    let norm = delta_u_of(ctx.p, &shift) * l2_norm_sq(n, ctx.p, ctx.m);
    let c1 = SqrtRational::sqrt(Q::one() / norm)?;
    Ok(TranslatedTestFunction { ctx, n, c1, shift })
}

impl TranslatedTestFunction {
    pub fn shift_matrix(&self) -> MatG {
        MatG::diag_pow(self.ctx.p, &self.shift)
    }

    /// c₁² as an exact rational.
    pub fn c1_sq(&self) -> Q {
        self.c1.square()
    }

    /// Value as (c₁, f₀(T̃^{ρ∨}g)).
    pub fn eval(&self, g: &MatG) -> Result<(SqrtRational, CycValue)> {
        Ok((self.c1.clone(), f0_explicit(&self.ctx, &self.shift_matrix().mul(g))?))
    }

    /// f_H[s](u·a·k) = c₁(δ_U^{1/2}|·|^s)(T̃^{ρ∨}a)·f₀(k).
    pub fn mellin(&self, g: &MatG) -> Result<MellinSum> {
        Ok(mellin_component(&self.ctx, &self.shift_matrix().mul(g), Twist::Conjugate)?.scale_root(&self.c1))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "c1_sq": fmt_q(&self.c1_sq()),
            "shift_valuations": self.shift,
        })
    }
}

/// ‖f‖² recomputed by enumerating K/K(q) and counting residue classes where f ≠ 0.
pub fn l2_norm_sq_by_enumeration(ctx: &DepthContext, n: usize, dual: bool) -> Result<Q> {
    let mut hits = 0i128;
    let mut total = 0i128;
    let mut err = None;
    crate::group::for_each_coset(crate::group::SubgroupSpec::K, n, ctx.p, ctx.m, |k| {
        total += 1;
        let v = if dual { f_dual(ctx, k) } else { f_explicit(ctx, k) };
        match v {
            Ok(v) if !v.is_zero() => hits += 1,
            Ok(_) => {}
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    if total == 0 {
        return Err(Error::Precondition("empty enumeration".into()));
    }
    Ok(Q::new(hits, total))
}

/// p^{−m·dim N}·c₀ as (exponent, constant).
pub fn l2_report(n: usize, p: u64, m: u32) -> Value {
    let d = (n * (n - 1) / 2) as i64;
    json!({
        "n": n, "p": p, "m": m,
        "l2_norm_sq": fmt_q(&l2_norm_sq(n, p, m)),
        "residue_constant": fmt_q(&big_cell_constant(n, p)),
        "p_exponent": -(m as i64) * d,
        "exact_after_constant": l2_norm_sq_over_c0(n, p, m) == p_pow(p, -(m as i64) * d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{psi, q, qr};
    use crate::group::{for_each_coset, random_k, random_principal, random_upper_unipotent, SubgroupSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(p: u64, m: u32) -> DepthContext {
        DepthContext::new(p, m).unwrap()
    }

    #[test]
    fn open_cell_examples() {
        let c = ctx(2, 1);
        assert!(j_open_cell(&c, &MatG::identity(3, 2)).is_one());
        assert!(j_open_cell(&c, &MatG::diag_pow(2, &[1, 0])).is_zero());
        let g = MatG::from_ints(2, &[&[3, 1], &[1, 2]]);
        assert_eq!(j_open_cell(&c, &g), psi_t(&qr(1, 3), &c));
    }

    #[test]
    fn open_cell_gl2_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let c = ctx(3, 1);
        for _ in 0..200 {
            let g = crate::group::random_gl(&mut rng, 2, 3, 2);
            let (a, b) = (g.get(0, 0), g.get(0, 1));
            let expected = if !a.is_zero() && val_or_inf(&a, 3) == 0 && val_or_inf(&g.det(), 3) == 0 {
                psi_t(&(b / a), &c)
            } else {
                CycValue::zero(3)
            };
            assert_eq!(j_open_cell(&c, &g), expected);
        }
    }

    #[test]
    fn f_at_identity_is_one() {
        for (n, p, m) in [(2usize, 2u64, 1u32), (3, 3, 2)] {
            assert!(f_explicit(&ctx(p, m), &MatG::identity(n, p)).unwrap().is_one());
        }
    }

    #[test]
    fn f_on_an_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for (n, p, m) in [(2usize, 2u64, 1u32), (3, 2, 1), (3, 3, 2)] {
            let c = ctx(p, m);
            for _ in 0..200 {
                let lo = rng.gen_range(-2..=2);
                let nn = random_upper_unipotent(&mut rng, n, p, lo, 4);
                let v: Vec<i64> = (0..n).map(|_| if rng.gen_bool(0.7) { 0 } else { rng.gen_range(-2..=2) }).collect();
                let g = MatG::diag_pow(p, &v).mul(&nn);
                let in_ka = v.iter().all(|x| *x == 0);
                let in_knq = nn.in_principal(m);
                let expected = if in_ka && in_knq { psi_t(&superdiagonal_sum(&nn), &c) } else { CycValue::zero(p) };
                assert_eq!(f_explicit(&c, &g).unwrap(), expected, "{g}");
            }
        }
    }

    #[test]
    fn f_gl2_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let c = ctx(2, 1);
        for _ in 0..300 {
            let g = crate::group::random_gl(&mut rng, 2, 2, 2);
            let (a, b) = (g.get(0, 0), g.get(0, 1));
            let unit = |x: &Q| !x.is_zero() && val_or_inf(x, 2) == 0;
            let expected = if unit(&a) && unit(&g.det()) && val_or_inf(&b, 2) >= 1 {
                psi_t(&(b / a), &c)
            } else {
                CycValue::zero(2)
            };
            assert_eq!(f_explicit(&c, &g).unwrap(), expected, "{g}");
        }
    }

    #[test]
    fn left_invariance_and_right_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for (n, p, m) in [(2usize, 3u64, 1u32), (3, 2, 1), (3, 2, 2)] {
            let c = ctx(p, m);
            let theta = crate::params::CharChiTau::new(crate::params::theta_matrix(c, n).unwrap());
            for _ in 0..100 {
                let g = if rng.gen_bool(0.5) {
                    random_upper_unipotent(&mut rng, n, p, m as i64, 3)
                } else {
                    random_k(&mut rng, n, p, 2 * m)
                };
                let base = f_explicit(&c, &g).unwrap();
                let mut u = MatG::identity(n, p);
                for i in 0..n {
                    for j in 0..i {
                        u.set(i, j, crate::group::random_scalar(&mut rng, p, 2));
                    }
                }
                let units: Vec<Q> = (0..n)
                    .map(|_| loop {
                        let x = crate::group::random_scalar(&mut rng, p, 0);
                        if !x.is_zero() {
                            break x;
                        }
                    })
                    .collect();
                let ka = MatG::diag(p, &units);
                assert_eq!(f_explicit(&c, &ka.mul(&u).mul(&g)).unwrap(), base);
                let k = random_principal(&mut rng, n, p, m, 2 * m + 1);
                let lhs = f_explicit(&c, &g.mul(&k)).unwrap();
                assert_eq!(lhs, &theta.eval(&k).unwrap() * &base);
            }
        }
    }

    #[test]
    fn vanishes_off_torus_units() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for (n, p, m) in [(2usize, 2u64, 1u32), (3, 3, 1)] {
            let c = ctx(p, m);
            for _ in 0..200 {
                let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
                if v.iter().all(|x| *x == 0) {
                    continue;
                }
                let k = random_k(&mut rng, n, p, 3);
                assert!(f_explicit(&c, &MatG::diag_pow(p, &v).mul(&k)).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn unipotent_with_congruent_k_part_is_congruent() {
        let c = ctx(2, 1);
        let mut count = 0;
        for_each_coset(SubgroupSpec::Upper(0), 3, 2, 3, |n0| {
            let nn = MatG::diag_pow(2, &[-1, 0, 1]).mul(n0).mul(&MatG::diag_pow(2, &[1, 0, -1]));
            let d = iwasawa_uak(&nn).unwrap();
            if d.k.in_principal(c.m) {
                assert!(nn.in_principal(c.m) && nn.is_integral());
                count += 1;
            }
        })
        .unwrap();
        assert!(count > 0);
    }

    #[test]
    fn l2_examples() {
        assert_eq!(l2_norm_sq(2, 2, 1), qr(1, 3));
        let v = l2_norm_sq(3, 2, 1);
        assert_eq!(v, Q::new(8, 168));
        assert_eq!(l2_norm_sq_over_c0(3, 2, 1), qr(1, 8));
        for (n, p, m) in [(2usize, 2u64, 1u32), (2, 3, 1), (3, 2, 1), (2, 2, 2), (3, 3, 2), (4, 2, 1)] {
            let d = (n * (n - 1) / 2) as i64;
            assert_eq!(l2_norm_sq_over_c0(n, p, m), p_pow(p, -(m as i64) * d));
        }
    }

    #[test]
    fn l2_matches_enumeration_and_dual_norm() {
        for (n, p, m) in [(2usize, 2u64, 1u32), (2, 3, 1), (3, 2, 1), (2, 2, 2)] {
            let c = ctx(p, m);
            let direct = l2_norm_sq_by_enumeration(&c, n, false).unwrap();
            assert_eq!(direct, l2_norm_sq(n, p, m));
            assert_eq!(l2_norm_sq_by_enumeration(&c, n, true).unwrap(), direct);
        }
    }

    #[test]
    fn dual_at_long_element() {
        let c = ctx(3, 1);
        assert!(f_dual(&c, &MatG::w_g(3, 3)).unwrap().is_one());
    }

    #[test]
    fn mellin_examples() {
        let c = ctx(2, 1);
        let s = mellin_component(&c, &MatG::identity(2, 2), Twist::Plain).unwrap();
        let mono = s.as_monomial(1).unwrap();
        assert!(mono.cyc.is_one());
        assert_eq!(mono.exponents, vec![0, 0]);
    }

    #[test]
    fn mellin_support_on_k_is_borel_times_kq() {
        let c = ctx(2, 1);
        for_each_coset(SubgroupSpec::K, 2, 2, 2, |k| {
            let s = mellin_component(&c, k, Twist::Plain).unwrap();
            let in_support = val_or_inf(&k.get(0, 1), 2) >= 1;
            assert_eq!(!s.is_zero(), in_support, "{k}");
        })
        .unwrap();
    }

    #[test]
    fn translated_function_values() {
        for (n, p, m) in [(1usize, 2u64, 1u32), (2, 2, 1), (2, 3, 1), (2, 2, 2)] {
            let c = ctx(p, m);
            let f = translate_for_h(c, n).unwrap();
            let t_inv = MatG::diag_pow(p, &f.shift.iter().map(|x| -x).collect::<Vec<_>>());
            let (c1, v) = f.eval(&t_inv).unwrap();
            assert!(v.is_one());
            assert_eq!(c1, f.c1);
            let expected = Q::one() / (delta_u_of(p, &f.shift) * l2_norm_sq(n, p, m));
            assert_eq!(f.c1_sq(), expected);
        }
    }

    #[test]
    fn translated_on_uan() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let c = ctx(2, 1);
        let f = translate_for_h(c, 2).unwrap();
        let t_inv = MatG::diag_pow(2, &f.shift.iter().map(|x| -x).collect::<Vec<_>>());
        for _ in 0..100 {
            let lo = rng.gen_range(0..=2);
            let nn = random_upper_unipotent(&mut rng, 2, 2, lo, 3);
            let (_, v) = f.eval(&t_inv.mul(&nn)).unwrap();
            let expected = if nn.in_principal(1) { psi_t(&superdiagonal_sum(&nn), &c).conj() } else { CycValue::zero(2) };
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn translated_right_invariant_under_lower_congruence_borel() {
        let c = ctx(2, 1);
        let f = translate_for_h(c, 2).unwrap();
        let t_inv = MatG::diag_pow(2, &f.shift.iter().map(|x| -x).collect::<Vec<_>>());
        let points = [t_inv.clone(), t_inv.mul(&MatG::from_ints(2, &[&[1, 2], &[0, 1]]))];
        for g in &points {
            let base = f.eval(g).unwrap().1;
            for_each_coset(SubgroupSpec::LowerBorel(1), 2, 2, 2, |b| {
                assert_eq!(f.eval(&g.mul(b)).unwrap().1, base);
            })
            .unwrap();
        }
    }

    #[test]
    fn psi_half_is_minus_one() {
        assert_eq!(psi(&qr(1, 2), 2).as_rational(), Some(q(-1)));
    }
}
