pub mod concentration;
pub mod whittaker;

pub use concentration::{concentration_check, find_witness, integral_scan, subcyclic_params, witness_scan, ConcentrationReport};
pub use whittaker::{a_t, a_t_h, vol_x, CosetWitness, WValue, WhittakerOnH};
