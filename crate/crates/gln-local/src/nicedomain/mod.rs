pub mod congruence;
pub mod domain;
pub mod minors;
pub mod vanishing;

pub use congruence::{pivot_character_sum, q1_q2_bijection, q1_q2_construct, q1_q2_properties, q1_q2_threshold, BijectionReport, Q1Q2};
pub use domain::{a_rho, classify, conj_a, decompose_region, domains_of_slope, upper_positions, NiceDomain, RegionDecomposition};
pub use minors::{iwasawa_minor_bound_check, minor_scan, MinorCheck, MinorScanReport};
pub use vanishing::{
    domain_outcome, mechanism_check, mechanism_threshold, scan_domains, summarize, vanishing_check, vanishing_scan, DomainOutcome, InducedVector,
    MechanismReport, VanishingScanConfig, VanishingScanReport, VanishingValue,
};
