use num_traits::One;

use super::matrix::MatG;
use super::resmat::ResMat;
use super::volume::{gl_order, unit_count};
use crate::arith::{ipow, Q};
use crate::error::{Error, Result};

/// Compact open subgroups used as integration domains. Levels are exponents of p:
/// `Principal(e)` is K(p^e), `Upper(e)` is K_N(p^e) = N ∩ K(p^e) (N(o) for e = 0), etc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubgroupSpec {
    K,
    Principal(u32),
    Upper(u32),
    Lower(u32),
    Torus(u32),
    LowerBorel(u32),
}

impl SubgroupSpec {
    pub fn level(&self) -> u32 {
        match *self {
            SubgroupSpec::K => 0,
            SubgroupSpec::Principal(e)
            | SubgroupSpec::Upper(e)
            | SubgroupSpec::Lower(e)
            | SubgroupSpec::Torus(e)
            | SubgroupSpec::LowerBorel(e) => e,
        }
    }

    pub fn contains(&self, g: &MatG) -> bool {
        match *self {
            SubgroupSpec::K | SubgroupSpec::Principal(0) => g.in_k(),
            SubgroupSpec::Principal(e) => g.in_principal(e),
            SubgroupSpec::Upper(e) => g.is_upper_unipotent() && g.is_integral() && g.in_principal(e),
            SubgroupSpec::Lower(e) => g.is_lower_unipotent() && g.is_integral() && g.in_principal(e),
            SubgroupSpec::Torus(e) => g.is_diagonal() && g.in_k() && g.in_principal(e),
            SubgroupSpec::LowerBorel(e) => g.is_lower_triangular() && g.in_k() && g.in_principal(e),
        }
    }

    /// Index of the level-l principal part inside the subgroup.
    pub fn index(&self, n: usize, p: u64, l: u32) -> Result<u128> {
        let e = self.level();
        if l < e {
            return Err(Error::Precondition(format!("finer level {l} below subgroup level {e}")));
        }
        let d = (n * (n - 1) / 2) as u32;
        let pw = |k: u32| ipow(p, k) as u128;
        Ok(match *self {
            SubgroupSpec::K | SubgroupSpec::Principal(0) => gl_order(n, p, l) as u128,
            SubgroupSpec::Principal(_) => pw((l - e) * (n * n) as u32),
            SubgroupSpec::Upper(_) | SubgroupSpec::Lower(_) => pw((l - e) * d),
            SubgroupSpec::Torus(_) => torus_index(p, e, l).pow(n as u32),
            SubgroupSpec::LowerBorel(_) => torus_index(p, e, l).pow(n as u32) * pw((l - e) * d),
        })
    }
}

fn torus_index(p: u64, e: u32, l: u32) -> u128 {
    if e == 0 {
        unit_count(p, l) as u128
    } else {
        ipow(p, l - e) as u128
    }
}

/// Calls `f` for every tuple in the mixed-radix range, last coordinate fastest.
pub fn for_each_tuple(radices: &[i128], mut f: impl FnMut(&[i128])) {
    let mut t = vec![0i128; radices.len()];
    if radices.iter().any(|r| *r <= 0) {
        return;
    }
    loop {
        f(&t);
        let mut i = radices.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < radices[i] {
                break;
            }
            t[i] = 0;
        }
    }
}

/// Positions (i, j) that vary in each subgroup type, row-major.
fn free_positions(spec: &SubgroupSpec, n: usize) -> Vec<(usize, usize)> {
    let all = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
    match spec {
        SubgroupSpec::K | SubgroupSpec::Principal(_) => all.collect(),
        SubgroupSpec::Upper(_) => all.filter(|(i, j)| i < j).collect(),
        SubgroupSpec::Lower(_) => all.filter(|(i, j)| i > j).collect(),
        SubgroupSpec::Torus(_) => all.filter(|(i, j)| i == j).collect(),
        SubgroupSpec::LowerBorel(_) => all.filter(|(i, j)| i >= j).collect(),
    }
}

/// Visits coset representatives of `spec` modulo its level-l principal part, in
/// lexicographic order of entry residues.
pub fn for_each_coset(spec: SubgroupSpec, n: usize, p: u64, l: u32, mut f: impl FnMut(&MatG)) -> Result<()> {
    let e = spec.level();
    if l < e {
        return Err(Error::Precondition(format!("finer level {l} below subgroup level {e}")));
    }
    if matches!(spec, SubgroupSpec::K | SubgroupSpec::Principal(0)) {
        let radices = vec![ipow(p, l); n * n];
        for_each_tuple(&radices, |t| {
            let r = ResMat::from_vec(n, p, l, t.iter().map(|x| *x as i64).collect());
            if r.det_is_unit() {
                f(&r.lift());
            }
        });
        return Ok(());
    }
    let pos = free_positions(&spec, n);
    let pe = ipow(p, e);
    let radices: Vec<i128> = pos.iter().map(|_| ipow(p, l - e) * if e == 0 { pe } else { 1 }).collect();
    let mut g = MatG::identity(n, p);
    for_each_tuple(&radices, |t| {
        for ((i, j), x) in pos.iter().zip(t) {
            let base = if i == j { Q::one() } else { Q::from_integer(0) };
            let v = if e == 0 { Q::from_integer(*x) } else { base + Q::from_integer(pe * x) };
            g.set(*i, *j, v);
        }
        if e == 0 && pos.iter().any(|(i, j)| i == j && g.get(*i, *j).numer() % p as i128 == 0) {
            return;
        }
        f(&g);
    });
    Ok(())
}

pub fn enumerate_cosets(spec: SubgroupSpec, n: usize, p: u64, l: u32) -> Result<Vec<MatG>> {
    let mut out = Vec::new();
    for_each_coset(spec, n, p, l, |g| out.push(g.clone()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn principal_coset_count() {
        let reps = enumerate_cosets(SubgroupSpec::Principal(1), 2, 2, 2).unwrap();
        assert_eq!(reps.len(), 16);
        assert_eq!(SubgroupSpec::Principal(1).index(2, 2, 2).unwrap(), 16);
        let reps = enumerate_cosets(SubgroupSpec::Upper(1), 2, 2, 2).unwrap();
        assert_eq!(reps.len(), 2);
    }

    #[test]
    fn level_below_subgroup_rejected() {
        assert!(enumerate_cosets(SubgroupSpec::Principal(2), 2, 2, 1).is_err());
    }

    #[test]
    fn cosets_are_distinct_members_with_index_count() {
        let specs = [
            SubgroupSpec::K,
            SubgroupSpec::Principal(1),
            SubgroupSpec::Upper(0),
            SubgroupSpec::Upper(1),
            SubgroupSpec::Lower(1),
            SubgroupSpec::Torus(0),
            SubgroupSpec::Torus(1),
            SubgroupSpec::LowerBorel(1),
        ];
        for p in [2u64, 3] {
            for spec in specs {
                let l = spec.level() + 1;
                let reps = enumerate_cosets(spec, 2, p, l).unwrap();
                assert_eq!(reps.len() as u128, spec.index(2, p, l).unwrap(), "{spec:?} p={p}");
                let mut seen = HashSet::new();
                for g in &reps {
                    assert!(spec.contains(g), "{spec:?} {g}");
                    assert!(seen.insert(g.residues(l).unwrap()));
                }
            }
        }
    }

    #[test]
    fn k_cosets_classify_all_residue_matrices() {
        for p in [2u64, 3] {
            let mut count = 0;
            for_each_tuple(&vec![p as i128; 4], |t| {
                let r = ResMat::from_vec(2, p, 1, t.iter().map(|x| *x as i64).collect());
                if r.det_is_unit() {
                    count += 1;
                }
            });
            assert_eq!(count, enumerate_cosets(SubgroupSpec::K, 2, p, 1).unwrap().len());
        }
    }
}
