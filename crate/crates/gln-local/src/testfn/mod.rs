pub mod convolution;
pub mod explicit;
pub mod extension;

pub use convolution::{agreement_grid, agreement_scan, f_convolution, f_convolution_at_level, f_convolution_brute, AgreementReport};
pub use explicit::{
    delta_u_of, f0_explicit, f_dual, f_explicit, f_on_k, j_open_cell, l2_norm_sq, l2_norm_sq_by_enumeration,
    l2_norm_sq_over_c0, l2_report, mellin_component, rho_check_valuations, superdiagonal_sum, translate_for_h,
    TranslatedTestFunction, Twist,
};
pub use extension::{extend_chi_theta, j_tau_membership};
