use num_traits::Zero;
use rand::Rng;

use super::matrix::MatG;
use crate::arith::{ipow, p_pow, Q};

/// A random rational of the form p^v·t/u with |v| ≤ spread and small t, u prime to p.
pub fn random_scalar<R: Rng>(rng: &mut R, p: u64, spread: i64) -> Q {
    if rng.gen_bool(0.15) {
        return Q::zero();
    }
    let v = rng.gen_range(-spread..=spread);
    let mut t: i128 = rng.gen_range(1..50);
    while t % p as i128 == 0 {
        t += 1;
    }
    let mut u: i128 = rng.gen_range(1..8);
    while u % p as i128 == 0 {
        u += 1;
    }
    let s = if rng.gen_bool(0.5) { 1 } else { -1 };
    p_pow(p, v) * Q::new(s * t, u)
}

pub fn random_gl<R: Rng>(rng: &mut R, n: usize, p: u64, spread: i64) -> MatG {
    loop {
        let e = (0..n * n).map(|_| random_scalar(rng, p, spread)).collect();
        let g = MatG { n, p, e };
        if !g.det().is_zero() {
            return g;
        }
    }
}

/// Random integer residue in [0, p^k).
pub fn random_residue<R: Rng>(rng: &mut R, p: u64, k: u32) -> i128 {
    rng.gen_range(0..ipow(p, k))
}

/// I + p^e·x with x random modulo p^{l−e}.
pub fn random_principal<R: Rng>(rng: &mut R, n: usize, p: u64, e: u32, l: u32) -> MatG {
    let mut g = MatG::identity(n, p);
    for x in g.e.iter_mut() {
        *x += Q::from_integer(ipow(p, e) * random_residue(rng, p, l - e));
    }
    g
}

/// Random element of K with entries reduced modulo p^l.
pub fn random_k<R: Rng>(rng: &mut R, n: usize, p: u64, l: u32) -> MatG {
    loop {
        let e = (0..n * n).map(|_| Q::from_integer(random_residue(rng, p, l))).collect();
        let g = MatG { n, p, e };
        if g.in_k() {
            return g;
        }
    }
}

/// Random upper unipotent with entry (i,j) of valuation at least lo.
pub fn random_upper_unipotent<R: Rng>(rng: &mut R, n: usize, p: u64, lo: i64, width: u32) -> MatG {
    let mut g = MatG::identity(n, p);
    for i in 0..n {
        for j in i + 1..n {
            g.set(i, j, p_pow(p, lo) * Q::from_integer(random_residue(rng, p, width)));
        }
    }
    g
}

pub fn random_diag_pow<R: Rng>(rng: &mut R, n: usize, p: u64, spread: i64) -> MatG {
    let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-spread..=spread)).collect();
    MatG::diag_pow(p, &v)
}
