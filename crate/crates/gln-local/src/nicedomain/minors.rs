use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::arith::{abs_p, Q};
use crate::error::{Error, Result};
use crate::group::{iwasawa_nak, minor_norm_m, random_k, random_upper_unipotent, MatG};
use crate::rslocal::eclass::diag_vals;

/// Failures of the minor identities for one g = w_G·u·a·k with Iwasawa form n·a′·k′.
#[derive(Clone, Debug, Default)]
pub struct MinorCheck {
    /// M_l(g) ≠ M_l(a′·n′) for n′ = a′⁻¹·n·a′.
    pub identity: usize,
    /// M_{l+1}(g) > M_l(g)·max|g_ij|.
    pub laplace: usize,
    /// −v(a′_i) > 2m·d.
    pub bound: usize,
    pub max_exponent: i64,
}

impl MinorCheck {
    pub fn ok(&self) -> bool {
        self.identity == 0 && self.laplace == 0 && self.bound == 0
    }
}

/// Checks one instance. `d` is the degree with |u_ij| ≤ T^{d1}, |a^α| ≤ T^{d2}, d = d1 + (n−1)d2.
pub fn iwasawa_minor_bound_check(u: &MatG, a: &[i64], k: &MatG, m: u32, d: i64) -> Result<MinorCheck> {
    let (n, p) = (u.n, u.p);
    if a.len() != n || !u.is_upper_unipotent() {
        return Err(Error::Precondition("u must be upper unipotent of matching rank".into()));
    }
    let g = MatG::w_g(n, p).mul(u).mul(&MatG::diag_pow(p, a)).mul(k);
    let nak = iwasawa_nak(&g)?;
    let np = nak.a.inv()?.mul(&nak.n).mul(&nak.a);
    let an = nak.a.mul(&np);
    let gmax = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| abs_p(&g.get(i, j), p)).max().unwrap_or_else(|| Q::from_integer(0));
    let mut out = MinorCheck::default();
    let mut prev = None;
    for l in 1..=n {
        let ml = minor_norm_m(&g, l)?;
        if ml != minor_norm_m(&an, l)? {
            out.identity += 1;
        }
        if let Some(pm) = prev {
            if ml > pm * gmax {
                out.laplace += 1;
            }
        }
        prev = Some(ml);
    }
    for v in diag_vals(&nak.a)? {
        out.max_exponent = out.max_exponent.max(-v);
        if -v > 2 * m as i64 * d {
            out.bound += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct MinorScanReport {
    pub p: u64,
    pub n: usize,
    pub m: u32,
    pub samples: usize,
    pub identity_failures: usize,
    pub laplace_failures: usize,
    pub bound_failures: usize,
    /// Largest −v(a′_i) seen, against the bound 2m·d of its own sample.
    pub max_exponent: i64,
}

impl MinorScanReport {
    pub fn passed(&self) -> bool {
        self.samples > 0 && self.identity_failures == 0 && self.laplace_failures == 0 && self.bound_failures == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p, "n": self.n, "m": self.m,
            "samples": self.samples,
            "identity_failures": self.identity_failures,
            "laplace_failures": self.laplace_failures,
            "bound_failures": self.bound_failures,
            "max_exponent": self.max_exponent,
            "passed": self.passed(),
        })
    }
}

/// Seeded samples with d1, d2 ∈ {0, 1, 2}, u entries of valuation ≥ −2m·d1, a_n = 0 and
/// v(a_i) − v(a_{i+1}) ∈ [−2m·d2, 2m·d2].
pub fn minor_scan(p: u64, n: usize, m: u32, samples: usize, seed: u64) -> Result<MinorScanReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = MinorScanReport { p, n, m, ..Default::default() };
    let t = 2 * m as i64;
    for _ in 0..samples {
        let d1 = rng.gen_range(0..=2i64);
        let d2 = rng.gen_range(0..=2i64);
        let u = random_upper_unipotent(&mut rng, n, p, -t * d1, (t * d1) as u32 + 2);
        let mut a = vec![0i64; n];
        for i in (0..n - 1).rev() {
            a[i] = a[i + 1] + rng.gen_range(-t * d2..=t * d2);
        }
        let k = random_k(&mut rng, n, p, 3);
        let c = iwasawa_minor_bound_check(&u, &a, &k, m, d1 + (n as i64 - 1) * d2)?;
        rep.samples += 1;
        rep.identity_failures += c.identity;
        rep.laplace_failures += c.laplace;
        rep.bound_failures += c.bound;
        rep.max_exponent = rep.max_exponent.max(c.max_exponent);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_instance() {
        let u = MatG::identity(3, 2);
        let c = iwasawa_minor_bound_check(&u, &[0, 0, 0], &MatG::identity(3, 2), 1, 0).unwrap();
        assert!(c.ok());
        assert_eq!(c.max_exponent, 0);
    }

    #[test]
    fn gl2_closed_form() {
        // w·(1 x; 0 1) has a′ = diag(1/x, x) up to units when |x| > 1.
        let u = MatG::parse("1,1/8;0,1", 2).unwrap();
        let c = iwasawa_minor_bound_check(&u, &[0, 0], &MatG::identity(2, 2), 1, 2).unwrap();
        assert!(c.ok());
        assert_eq!(c.max_exponent, 3);
    }

    #[test]
    fn sampled_minor_identities() {
        for (p, n, m) in [(2u64, 2usize, 1u32), (2, 3, 1), (3, 2, 1), (2, 2, 2)] {
            let r = minor_scan(p, n, m, 1000, 11).unwrap();
            assert!(r.passed(), "{}", r.to_json());
        }
    }
}
