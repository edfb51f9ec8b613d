pub mod cosets;
pub mod decomp;
pub mod matrix;
pub mod resmat;
pub mod sample;
pub mod volume;

pub use cosets::{enumerate_cosets, for_each_coset, for_each_tuple, SubgroupSpec};
pub use decomp::{
    bruhat_open_cell, delta_n_exponent, is_unit_diagonal, iwahori_factor, iwasawa_nak, iwasawa_uak,
    leading_minors, minor_norm_m, modular_delta, BruhatLDU, DeltaSide, IwasawaNAK, IwasawaUAK,
};
pub use matrix::MatG;
pub use resmat::{int_det, ResMat};
pub use sample::{random_diag_pow, random_gl, random_k, random_principal, random_residue, random_scalar, random_upper_unipotent};
pub use volume::{big_cell_constant, borel_order, gl_order, gl_order_residue, haar_volume, unit_count};
