pub mod chi;
pub mod omega;
pub mod tau;

pub use chi::{
    check_extension, enumerate_extensions, extension_from_function, extension_report, wrap_phase, CharChiTau,
    ExtensionReport, ExtensionTable, JQuotient,
};
pub use omega::{build_omega, vol_j, CentralCharacter, OmegaIdempotent};
pub use tau::{
    centralizer, charpoly_mod, companion, conjugate_to_standard_cyclic, factor_subcyclic, find_cyclic_vector,
    is_cyclic_wrt, is_stable, is_subcyclic_wrt, is_uniform, krylov, resultant_mod, theta_matrix,
    unique_nf_conjugate_cyclic, DecoratedFlag, TauParam,
};
