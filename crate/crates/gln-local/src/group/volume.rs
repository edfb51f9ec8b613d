use num_traits::One;

use super::cosets::SubgroupSpec;
use crate::arith::{ipow, p_pow, Q};
use crate::error::Result;

/// |GL_n(F_p)|.
pub fn gl_order_residue(n: usize, p: u64) -> i128 {
    let pn = ipow(p, n as u32);
    (0..n as u32).map(|i| pn - ipow(p, i)).product()
}

/// |GL_n(Z/p^e)|; level 0 gives 1.
pub fn gl_order(n: usize, p: u64, e: u32) -> i128 {
    if e == 0 {
        return 1;
    }
    ipow(p, (e - 1) * (n * n) as u32) * gl_order_residue(n, p)
}

/// |(Z/p^e)^×|.
pub fn unit_count(p: u64, e: u32) -> i128 {
    if e == 0 {
        1
    } else {
        (p as i128 - 1) * ipow(p, e - 1)
    }
}

/// |B(Z/p^e)| for either Borel subgroup.
pub fn borel_order(n: usize, p: u64, e: u32) -> i128 {
    unit_count(p, e).pow(n as u32) * ipow(p, e * (n * (n - 1) / 2) as u32)
}

/// Haar volume in the ambient group of the subgroup type, with K, N(o), U(o),
/// K_A and the integral lower Borel all of volume 1.
pub fn haar_volume(spec: SubgroupSpec, n: usize, p: u64) -> Result<Q> {
    let d = (n * (n - 1) / 2) as i64;
    Ok(match spec {
        SubgroupSpec::K | SubgroupSpec::Principal(0) => Q::one(),
        SubgroupSpec::Principal(e) => Q::new(1, gl_order(n, p, e)),
        SubgroupSpec::Upper(e) | SubgroupSpec::Lower(e) => p_pow(p, -(e as i64) * d),
        SubgroupSpec::Torus(e) => Q::new(1, unit_count(p, e).pow(n as u32)),
        SubgroupSpec::LowerBorel(e) => Q::new(1, unit_count(p, e).pow(n as u32)) * p_pow(p, -(e as i64) * d),
    })
}

/// The constant c₀ with dg = c₀·du·da·dn on K(p^e), e ≥ 1: the proportion of
/// GL_n(F_p) lying in the open cell.
pub fn big_cell_constant(n: usize, p: u64) -> Q {
    Q::new(borel_order(n, p, 1) * ipow(p, (n * (n - 1) / 2) as u32), gl_order_residue(n, p))
}
