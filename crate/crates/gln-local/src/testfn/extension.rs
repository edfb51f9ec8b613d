use super::explicit::f_explicit;
use crate::arith::DepthContext;
use crate::error::Result;
use crate::group::MatG;
use crate::params::{extension_from_function, theta_matrix, ExtensionTable, JQuotient};

/// J_θ together with the extension χ̃_θ(g) := f(g), checked to be multiplicative and to
/// restrict to χ_θ on K(q).
pub fn extend_chi_theta(ctx: DepthContext, n: usize) -> Result<(JQuotient, ExtensionTable)> {
    let jq = JQuotient::new(theta_matrix(ctx, n)?)?;
    let table = extension_from_function(&jq, |g| f_explicit(&ctx, g))?;
    Ok((jq, table))
}

pub fn j_tau_membership(jq: &JQuotient, k: &MatG) -> bool {
    jq.contains(k)
}
