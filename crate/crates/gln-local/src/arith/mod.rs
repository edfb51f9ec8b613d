pub mod cyclo;
pub mod mellin;
pub mod rational;

pub use cyclo::{cyc_add, cyc_eq, cyc_is_zero, cyc_mul, psi, psi_t, CycValue, RootCounter};
pub use mellin::{exact_sqrt, mono_mul, MellinMonomial, MellinSum, SqrtRational};
pub use rational::{
    abs_p, fmt_q, fmt_q_short, frac_part, int_valuation, ipow, is_integral, is_prime, is_unit, mod_inverse, mod_inverse_i64, p_pow,
    parse_q, q, qr, residue,
    val_or_inf, valuation, DepthContext, PadicScalar, Q,
};
