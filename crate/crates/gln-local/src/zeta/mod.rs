pub mod integral;
pub mod volumes;

pub use integral::{
    c_squared_across_tau, jacquet_truncated, vol_conjugated_kn, whittaker_transform_at_a_t, zeta_direct, zeta_direct_at,
    zeta_explicit, Route, ZetaResult,
};
pub use volumes::{volume_lemma_suite, VolumeItem, VolumeReport};
