pub mod eclass;
pub mod integral;
pub mod transform;

pub use eclass::{ClassCertificate, EClassElement, EClassKind};
pub use integral::{
    c_grid, d_p, d_p_half_exponent, denominator_scan, det_matching_scan, norm_sq_by_iwasawa, q_phi_f_c, qp_nonvanishing_check,
    wsupport_scan, DenominatorReport, QEntry, QScanReport, QValue, RSIntegralConfig, SupportReport,
};
pub use transform::{k_orbits, w_fcg_oracle, Transform, WfcgReport, WfcgValue};
