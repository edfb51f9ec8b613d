use num_traits::Zero;
use serde_json::{json, Value};

use crate::arith::{ipow, DepthContext, Q};
use crate::error::{Error, Result};
use crate::group::{for_each_tuple, int_det, ResMat};

/// A parameter τ ∈ M_N(Z/p^m) together with its characteristic polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauParam {
    pub ctx: DepthContext,
    pub tau: ResMat,
    /// Coefficients of det(X − τ) mod p^m, constant term first, monic.
    pub charpoly: Vec<i64>,
}

impl TauParam {
    pub fn new(ctx: DepthContext, tau: ResMat) -> Result<Self> {
        if tau.p != ctx.p || tau.k != ctx.m {
            return Err(Error::IncompatibleContext(format!(
                "matrix over Z/{}^{} in context p = {}, m = {}",
                tau.p, tau.k, ctx.p, ctx.m
            )));
        }
        let charpoly = charpoly_mod(&tau);
        Ok(Self { ctx, tau, charpoly })
    }

    pub fn parse(text: &str, ctx: DepthContext) -> Result<Self> {
        Self::new(ctx, ResMat::parse(text, ctx.p, ctx.m)?)
    }

    pub fn size(&self) -> usize {
        self.tau.n
    }

    pub fn to_text(&self) -> String {
        self.tau.to_text()
    }

    pub fn to_json(&self) -> Value {
        json!({"p": self.ctx.p, "m": self.ctx.m, "tau": self.tau.to_text()})
    }

    /// The upper-left (N−1)×(N−1) block.
    pub fn tau_h(&self) -> ResMat {
        upper_left_res(&self.tau, self.size() - 1)
    }

    pub fn is_cyclic(&self) -> bool {
        find_cyclic_vector(self).is_some()
    }

    pub fn det_is_unit(&self) -> bool {
        self.tau.det_is_unit()
    }
}

/// The standard lower-triangular nilpotent Jordan block θ of size N.
pub fn theta_matrix(ctx: DepthContext, n: usize) -> Result<TauParam> {
    if n == 0 {
        return Err(Error::Precondition("size must be at least 1".into()));
    }
    let mut t = ResMat::zero(n, ctx.p, ctx.m);
    for i in 1..n {
        t.set(i, i - 1, 1);
    }
    TauParam::new(ctx, t)
}

/// Companion matrix of X^N + c_{N−1}X^{N−1} + … + c_0 (coefficients constant term first),
/// cyclic with respect to the standard basis.
pub fn companion(ctx: DepthContext, coeffs: &[i64]) -> Result<TauParam> {
    let n = coeffs.len();
    if n == 0 {
        return Err(Error::Precondition("empty polynomial".into()));
    }
    let mut t = ResMat::zero(n, ctx.p, ctx.m);
    for i in 1..n {
        t.set(i, i - 1, 1);
    }
    for (i, c) in coeffs.iter().enumerate() {
        t.set(i, n - 1, -c);
    }
    TauParam::new(ctx, t)
}

fn upper_left_res(a: &ResMat, k: usize) -> ResMat {
    let mut out = ResMat::zero(k, a.p, a.k);
    for i in 0..k {
        for j in 0..k {
            out.set(i, j, a.get(i, j));
        }
    }
    out
}

/// det(X − a) mod p^k by interpolation at X = 0..N over the integers.
pub fn charpoly_mod(a: &ResMat) -> Vec<i64> {
    let n = a.n;
    let md = a.modulus() as i128;
    let values: Vec<Q> = (0..=n as i128)
        .map(|x| {
            let e: Vec<i128> = (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    let d = if i == j { x } else { 0 };
                    d - a.e[idx] as i128
                })
                .collect();
            Q::from_integer(int_det(&e, n))
        })
        .collect();
    let mut coeffs = vec![Q::zero(); n + 1];
    for (i, yi) in values.iter().enumerate() {
        // Lagrange basis polynomial for node i, expanded.
        let mut basis = vec![Q::zero(); n + 1];
        basis[0] = Q::from_integer(1);
        let mut denom = Q::from_integer(1);
        for j in 0..=n {
            if j == i {
                continue;
            }
            let mut next = vec![Q::zero(); n + 1];
            for d in 0..n {
                next[d + 1] += basis[d];
                next[d] -= basis[d] * Q::from_integer(j as i128);
            }
            basis = next;
            denom *= Q::from_integer(i as i128 - j as i128);
        }
        for d in 0..=n {
            coeffs[d] += *yi * basis[d] / denom;
        }
    }
    coeffs
        .iter()
        .map(|c| {
            debug_assert!(c.is_integer());
            c.numer().rem_euclid(md) as i64
        })
        .collect()
}

/// Resultant of two polynomials (constant term first) modulo `md`, via the Sylvester matrix.
pub fn resultant_mod(f: &[i64], g: &[i64], md: i64) -> i64 {
    let (df, dg) = (f.len() - 1, g.len() - 1);
    let s = df + dg;
    if s == 0 {
        return 1 % md;
    }
    let mut e = vec![0i128; s * s];
    for r in 0..dg {
        for (k, c) in f.iter().rev().enumerate() {
            e[r * s + r + k] = *c as i128;
        }
    }
    for r in 0..df {
        for (k, c) in g.iter().rev().enumerate() {
            e[(dg + r) * s + r + k] = *c as i128;
        }
    }
    (int_det(&e, s) % md as i128).rem_euclid(md as i128) as i64
}

/// Stability: the characteristic polynomials of τ and τ_H generate the unit ideal,
/// i.e. their resultant is a unit.
pub fn is_stable(t: &TauParam) -> Result<bool> {
    if t.size() < 2 {
        return Err(Error::Precondition("stability needs N ≥ 2".into()));
    }
    let ph = charpoly_mod(&t.tau_h());
    let r = resultant_mod(&t.charpoly, &ph, t.tau.modulus());
    Ok(r % t.ctx.p as i64 != 0)
}

/// Uniform: cyclic with unit determinant.
pub fn is_uniform(t: &TauParam) -> bool {
    t.is_cyclic() && t.det_is_unit()
}

/// Columns v, τv, …, τ^{N−1}v.
pub fn krylov(tau: &ResMat, v: &[i64]) -> ResMat {
    let mut cols = vec![v.to_vec()];
    for _ in 1..tau.n {
        let next = tau.apply(cols.last().unwrap());
        cols.push(next);
    }
    ResMat::from_columns(tau.p, tau.k, &cols)
}

/// First residue-field vector v, ordered by Σ v_i p^{i−1}, whose Krylov matrix is invertible.
/// A lift is cyclic iff its residue is, so the search runs over F_p^N.
pub fn find_cyclic_vector(t: &TauParam) -> Option<Vec<i64>> {
    let n = t.size();
    let p = t.ctx.p as i64;
    let tau1 = t.tau.reduce(1);
    let total = ipow(t.ctx.p, n as u32) as i64;
    for idx in 1..total {
        let mut v = vec![0i64; n];
        let mut r = idx;
        for x in v.iter_mut() {
            *x = r % p;
            r /= p;
        }
        if krylov(&tau1, &v).det_is_unit() {
            return Some(v);
        }
    }
    None
}

/// An ordered basis given by the columns of an invertible matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoratedFlag {
    pub basis: ResMat,
}

impl DecoratedFlag {
    pub fn new(basis: ResMat) -> Result<Self> {
        if !basis.det_is_unit() {
            return Err(Error::Singular);
        }
        Ok(Self { basis })
    }

    pub fn standard(n: usize, p: u64, k: u32) -> Self {
        Self { basis: ResMat::identity(n, p, k) }
    }

    /// B⁻¹xB.
    pub fn in_basis(&self, x: &ResMat) -> ResMat {
        let b = &self.basis;
        b.inv().expect("flag basis is invertible").mul(x).mul(b)
    }

    /// Membership in the stabilizer N_F.
    pub fn stabilizer_contains(&self, v: &ResMat) -> bool {
        self.in_basis(v).is_upper_unipotent()
    }

    /// Whether another basis gives rise to the same decorated flag.
    pub fn same_flag(&self, other: &ResMat) -> bool {
        let b = self.basis.inv().expect("flag basis is invertible").mul(other);
        b.is_upper_unipotent()
    }
}

/// τ e_j = e_{j+1} for j < N in the given basis.
pub fn is_cyclic_wrt(tau: &ResMat, basis: &ResMat) -> bool {
    let t = match basis.inv() {
        Ok(bi) => bi.mul(tau).mul(basis),
        Err(_) => return false,
    };
    let n = tau.n;
    (0..n.saturating_sub(1)).all(|j| (0..n).all(|i| t.get(i, j) == if i == j + 1 { 1 } else { 0 }))
}

/// τ e_j − e_{j+1} ∈ ⟨e_1, …, e_j⟩ for j < N.
pub fn is_subcyclic_wrt(tau: &ResMat, flag: &DecoratedFlag) -> bool {
    let t = flag.in_basis(tau);
    let n = tau.n;
    (0..n.saturating_sub(1)).all(|j| t.get(j + 1, j) == 1 && (j + 2..n).all(|i| t.get(i, j) == 0))
}

/// (g, Ad(g)τ) with Ad(g)τ cyclic with respect to the standard basis.
pub fn conjugate_to_standard_cyclic(t: &TauParam) -> Result<(ResMat, ResMat)> {
    let n = t.size();
    let id = ResMat::identity(n, t.ctx.p, t.ctx.m);
    if is_cyclic_wrt(&t.tau, &id) {
        return Ok((id, t.tau.clone()));
    }
    let e = find_cyclic_vector(t).ok_or_else(|| Error::Precondition("τ is not cyclic".into()))?;
    let b = krylov(&t.tau, &e);
    let g = b.inv()?;
    let conj = g.mul(&t.tau).mul(&b);
    Ok((g, conj))
}

/// The basis e′_1 = b_1, e′_j = τe′_{j−1}.
fn cyclic_basis_from_flag(tau: &ResMat, flag: &DecoratedFlag) -> ResMat {
    krylov(tau, &flag.basis.column(0))
}

/// The unique v ∈ N_F with Ad(v)τ cyclic with respect to the flag's basis.
pub fn unique_nf_conjugate_cyclic(tau: &ResMat, flag: &DecoratedFlag) -> Result<ResMat> {
    if !is_subcyclic_wrt(tau, flag) {
        return Err(Error::Precondition("τ is not subcyclic with respect to the flag".into()));
    }
    let b2 = cyclic_basis_from_flag(tau, flag);
    Ok(flag.basis.mul(&b2.inv()?))
}

/// Factors g = v·c with v ∈ N_F and c in the centralizer of τ, given that τ and Ad(g)τ are
/// both subcyclic with respect to F.
pub fn factor_subcyclic(tau: &ResMat, g: &ResMat, flag: &DecoratedFlag) -> Result<(ResMat, ResMat)> {
    let tau2 = g.mul(tau).mul(&g.inv()?);
    if !is_subcyclic_wrt(tau, flag) || !is_subcyclic_wrt(&tau2, flag) {
        return Err(Error::Precondition("τ and Ad(g)τ must both be subcyclic".into()));
    }
    let b_tau = cyclic_basis_from_flag(tau, flag);
    let b2 = cyclic_basis_from_flag(&tau2, flag);
    let u = b_tau.mul(&b2.inv()?);
    let c = u.mul(g);
    Ok((u.inv()?, c))
}

/// Elements of GL_N(Z/p^m) commuting with τ. For cyclic τ these are the invertible
/// polynomials in τ; otherwise all of GL_N(Z/p^m) is scanned.
pub fn centralizer(t: &TauParam) -> Vec<ResMat> {
    let (n, p, m) = (t.size(), t.ctx.p, t.ctx.m);
    let md = ipow(p, m);
    let mut out = Vec::new();
    if t.is_cyclic() {
        let mut powers = vec![ResMat::identity(n, p, m)];
        for _ in 1..n {
            powers.push(powers.last().unwrap().mul(&t.tau));
        }
        for_each_tuple(&vec![md; n], |a| {
            let mut c = ResMat::zero(n, p, m);
            for (pw, x) in powers.iter().zip(a) {
                c = c.add(&pw.scale(*x as i64));
            }
            if c.det_is_unit() {
                out.push(c);
            }
        });
    } else {
        for_each_tuple(&vec![md; n * n], |a| {
            let c = ResMat::from_vec(n, p, m, a.iter().map(|x| *x as i64).collect());
            if c.det_is_unit() && c.mul(&t.tau) == t.tau.mul(&c) {
                out.push(c);
            }
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::random_k;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn ctx(p: u64, m: u32) -> DepthContext {
        DepthContext::new(p, m).unwrap()
    }

    fn res_k(rng: &mut ChaCha8Rng, n: usize, p: u64, m: u32) -> ResMat {
        ResMat::from_mat(&random_k(rng, n, p, m), m).unwrap()
    }

    #[test]
    fn theta_shape() {
        let t = theta_matrix(ctx(2, 1), 3).unwrap();
        assert_eq!(t.to_text(), "0,0,0;1,0,0;0,1,0");
        assert_eq!(theta_matrix(ctx(2, 1), 1).unwrap().to_text(), "0");
    }

    #[test]
    fn trace_against_theta_picks_superdiagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = theta_matrix(ctx(5, 1), 4).unwrap();
        for _ in 0..20 {
            let x = ResMat::from_vec(4, 5, 1, (0..16).map(|_| rng.gen_range(0..5)).collect());
            let tr: i64 = (0..4).map(|i| x.mul(&t.tau).get(i, i)).sum::<i64>() % 5;
            let sup: i64 = (0..3).map(|k| x.get(k, k + 1)).sum::<i64>() % 5;
            assert_eq!(tr, sup);
        }
    }

    #[test]
    fn cyclic_and_subcyclic_examples() {
        let c = ctx(2, 1);
        let std = DecoratedFlag::standard(3, 2, 1);
        let pattern = ResMat::parse("1,1,1;1,0,1;0,1,1", 2, 1).unwrap();
        assert!(is_subcyclic_wrt(&pattern, &std));
        let comp = companion(c, &[-1, 0, 0]).unwrap();
        assert!(is_cyclic_wrt(&comp.tau, &std.basis));
        let diag = ResMat::parse("1,0,0;0,0,0;0,0,1", 2, 1).unwrap();
        assert!(!is_cyclic_wrt(&diag, &std.basis));
        assert!(!is_subcyclic_wrt(&diag, &std));
    }

    #[test]
    fn cyclic_vector_examples() {
        let c = ctx(3, 2);
        assert_eq!(find_cyclic_vector(&companion(c, &[1, 2, 0]).unwrap()), Some(vec![1, 0, 0]));
        assert_eq!(find_cyclic_vector(&theta_matrix(c, 3).unwrap()), Some(vec![1, 0, 0]));
        let zero = TauParam::new(c, ResMat::zero(3, 3, 2)).unwrap();
        assert_eq!(find_cyclic_vector(&zero), None);
    }

    #[test]
    fn cyclicity_is_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = ctx(2, 2);
        for _ in 0..200 {
            let tau = ResMat::from_vec(3, 2, 2, (0..9).map(|_| rng.gen_range(0..4)).collect());
            let g = res_k(&mut rng, 3, 2, 2);
            let t1 = TauParam::new(c, tau.clone()).unwrap();
            let t2 = TauParam::new(c, g.mul(&tau).mul(&g.inv().unwrap())).unwrap();
            assert_eq!(t1.is_cyclic(), t2.is_cyclic());
        }
    }

    #[test]
    fn charpoly_of_companion_recovers_coefficients() {
        let c = ctx(5, 2);
        let t = companion(c, &[3, 7, 11]).unwrap();
        assert_eq!(t.charpoly, vec![3, 7, 11, 1]);
    }

    #[test]
    fn stability_examples() {
        let c = ctx(2, 1);
        let comp = companion(c, &[-1, 0, 0]).unwrap();
        assert_eq!(charpoly_mod(&comp.tau_h()), vec![0, 0, 1]);
        assert_eq!(resultant_mod(&comp.charpoly, &[0, 0, 1], 2), 1);
        assert!(is_stable(&comp).unwrap());
        let zero = TauParam::new(c, ResMat::zero(3, 2, 1)).unwrap();
        assert!(!is_stable(&zero).unwrap());
        assert!(is_stable(&theta_matrix(c, 1).unwrap()).is_err());
    }

    #[test]
    fn resultant_matches_root_product() {
        // Res((x-1)(x-2), x-5) = (5-1)(5-2) up to sign conventions for these degrees.
        let r = resultant_mod(&[2, -3, 1], &[-5, 1], 1000);
        assert_eq!(r, 12);
    }

    /// Size of the submodule generated by v under addition and x ↦ a·x.
    fn generated_size(a: &ResMat, v: &[i64]) -> usize {
        let mut set: HashSet<Vec<i64>> = HashSet::new();
        let zero = vec![0i64; a.n];
        set.insert(zero);
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

    #[test]
    fn stability_agrees_with_generation_criterion() {
        for m in [1u32, 2] {
            let c = ctx(2, m);
            let md = ipow(2, m);
            let full = (md * md) as usize;
            for_each_tuple(&vec![md; 4], |a| {
                let tau = ResMat::from_vec(2, 2, m, a.iter().map(|x| *x as i64).collect());
                let t = TauParam::new(c, tau.clone()).unwrap();
                let e = [0, 1];
                let gen_e = generated_size(&tau, &e) == full;
                let gen_dual = generated_size(&tau.transpose(), &e) == full;
                assert_eq!(is_stable(&t).unwrap(), gen_e && gen_dual, "{}", tau);
            });
        }
    }

    #[test]
    fn uniform_examples() {
        let c = ctx(3, 1);
        assert!(is_uniform(&companion(c, &[-1, 0, 0]).unwrap()));
        let theta = theta_matrix(c, 3).unwrap();
        assert!(!is_uniform(&theta));
        for alpha in [1i64, 2] {
            let shifted = theta.tau.add(&ResMat::identity(3, 3, 1).scale(alpha));
            assert!(is_uniform(&TauParam::new(c, shifted).unwrap()));
        }
    }

    #[test]
    fn standard_cyclic_conjugation() {
        let c = ctx(2, 2);
        let comp = companion(c, &[1, 1, 3]).unwrap();
        let (g, _) = conjugate_to_standard_cyclic(&comp).unwrap();
        assert!(g.is_identity());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let std = ResMat::identity(3, 2, 2);
        for _ in 0..100 {
            let h = res_k(&mut rng, 3, 2, 2);
            let t = TauParam::new(c, h.mul(&comp.tau).mul(&h.inv().unwrap())).unwrap();
            let (g, conj) = conjugate_to_standard_cyclic(&t).unwrap();
            assert_eq!(g.mul(&t.tau).mul(&g.inv().unwrap()), conj);
            assert!(is_cyclic_wrt(&conj, &std));
            assert_eq!(upper_left_res(&conj, 2), theta_matrix(c, 2).unwrap().tau);
        }
        assert!(conjugate_to_standard_cyclic(&TauParam::new(c, ResMat::zero(3, 2, 2)).unwrap()).is_err());
    }

    #[test]
    fn standard_cyclic_conjugation_exhaustive() {
        let c = ctx(2, 1);
        let std = ResMat::identity(3, 2, 1);
        let mut cyclic = 0;
        for_each_tuple(&vec![2; 9], |a| {
            let tau = ResMat::from_vec(3, 2, 1, a.iter().map(|x| *x as i64).collect());
            let t = TauParam::new(c, tau).unwrap();
            if t.is_cyclic() {
                cyclic += 1;
                let (g, conj) = conjugate_to_standard_cyclic(&t).unwrap();
                assert!(is_cyclic_wrt(&conj, &std));
                assert_eq!(g.mul(&t.tau).mul(&g.inv().unwrap()), conj);
            }
        });
        // Count of matrices in M_3(F_2) whose commutant has exactly 8 elements.
        assert_eq!(cyclic, 412);
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

    #[test]
    fn nf_conjugate_makes_cyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, p, m) in [(3usize, 2u64, 1u32), (3, 3, 2), (4, 2, 2)] {
            let b = res_k(&mut rng, n, p, m);
            let flag = DecoratedFlag::new(b.clone()).unwrap();
            for _ in 0..50 {
                let tau = b.mul(&random_subcyclic(&mut rng, n, p, m)).mul(&b.inv().unwrap());
                let v = unique_nf_conjugate_cyclic(&tau, &flag).unwrap();
                assert!(flag.stabilizer_contains(&v));
                assert!(is_cyclic_wrt(&v.mul(&tau).mul(&v.inv().unwrap()), &b));
            }
        }
        let std = DecoratedFlag::standard(3, 2, 1);
        let comp = companion(ctx(2, 1), &[1, 0, 1]).unwrap();
        assert!(unique_nf_conjugate_cyclic(&comp.tau, &std).unwrap().is_identity());
        let bad = ResMat::zero(3, 2, 1);
        assert!(unique_nf_conjugate_cyclic(&bad, &std).is_err());
    }

    #[test]
    fn nf_conjugate_is_unique_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let flag = DecoratedFlag::standard(3, 2, 1);
        for _ in 0..20 {
            let tau = random_subcyclic(&mut rng, 3, 2, 1);
            let mut hits = Vec::new();
            for_each_tuple(&[2, 2, 2], |a| {
                let v = ResMat::from_vec(3, 2, 1, vec![1, a[0] as i64, a[1] as i64, 0, 1, a[2] as i64, 0, 0, 1]);
                if is_cyclic_wrt(&v.mul(&tau).mul(&v.inv().unwrap()), &flag.basis) {
                    hits.push(v);
                }
            });
            assert_eq!(hits.len(), 1);
            assert_eq!(hits[0], unique_nf_conjugate_cyclic(&tau, &flag).unwrap());
        }
    }

    #[test]
    fn factor_subcyclic_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, p, m) in [(3usize, 2u64, 1u32), (3, 3, 2), (4, 2, 2)] {
            let flag = DecoratedFlag::standard(n, p, m);
            for _ in 0..30 {
                let tau = random_subcyclic(&mut rng, n, p, m);
                let t = TauParam::new(ctx(p, m), tau.clone()).unwrap();
                let cent = centralizer(&t);
                let c0 = &cent[rng.gen_range(0..cent.len())];
                let v0 = random_upper(&mut rng, n, p, m);
                let g = v0.mul(c0);
                let (v, c) = factor_subcyclic(&tau, &g, &flag).unwrap();
                assert!(v.is_upper_unipotent());
                assert_eq!(c.mul(&tau), tau.mul(&c));
                assert_eq!(v.mul(&c), g);
            }
            let tau = random_subcyclic(&mut rng, n, p, m);
            let id = ResMat::identity(n, p, m);
            let (v, c) = factor_subcyclic(&tau, &id, &flag).unwrap();
            assert!(v.is_identity() && c.is_identity());
        }
    }

    #[test]
    fn factor_subcyclic_rejects_bad_input() {
        let tau = ResMat::parse("0,0;1,0", 2, 1).unwrap();
        let g = ResMat::parse("0,1;1,0", 2, 1).unwrap();
        assert!(factor_subcyclic(&tau, &g, &DecoratedFlag::standard(2, 2, 1)).is_err());
    }

    #[test]
    fn cyclic_bases_joined_by_unique_centralizer_element() {
        let c = ctx(3, 1);
        let t = companion(c, &[1, 1, 2]).unwrap();
        let b1 = ResMat::identity(3, 3, 1);
        let b2 = krylov(&t.tau, &[1, 2, 0]);
        assert!(is_cyclic_wrt(&t.tau, &b2));
        let hits: Vec<_> = centralizer(&t).into_iter().filter(|x| x.mul(&b1) == b2).collect();
        assert_eq!(hits.len(), 1);
    }

    #[test]
    fn centralizer_of_cyclic_matches_scan() {
        let c = ctx(2, 1);
        let t = companion(c, &[1, 1]).unwrap();
        let fast = centralizer(&t);
        let mut slow = Vec::new();
        for_each_tuple(&[2; 4], |a| {
            let x = ResMat::from_vec(2, 2, 1, a.iter().map(|v| *v as i64).collect());
            if x.det_is_unit() && x.mul(&t.tau) == t.tau.mul(&x) {
                slow.push(x);
            }
        });
        let mut fast_sorted = fast.clone();
        fast_sorted.sort();
        slow.sort();
        assert_eq!(fast_sorted, slow);
        assert_eq!(fast.len(), 3);
    }
}
