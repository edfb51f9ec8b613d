use serde_json::{json, Value};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    TestfnAgreement,
    Zeta,
    Concentration,
    RsSupport,
    NicedomainVanishing,
    ParamsExhaustive,
    Volumes,
    Decompositions,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::TestfnAgreement => "testfn-agreement",
            Suite::Zeta => "zeta",
            Suite::Concentration => "concentration",
            Suite::RsSupport => "rs-support",
            Suite::NicedomainVanishing => "nicedomain-vanishing",
            Suite::ParamsExhaustive => "params-exhaustive",
            Suite::Volumes => "volumes",
            Suite::Decompositions => "decompositions",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("p = {0} is not prime")]
    NotPrime(u64),
    #[error("depth m must be at least 1")]
    Depth,
    #[error("rank {0} is out of range for this suite")]
    Rank(usize),
    #[error("pair rank {0} is unsupported; the pair is GL(n) x GL(n-1)")]
    PairRank(usize),
    #[error("--jobs must be at least 1")]
    Jobs,
    #[error("--box must be nonnegative")]
    Box,
}

/// Everything that determines a report. `jobs` only changes how the work is scheduled.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub suite: Suite,
    pub p: u64,
    pub m: u32,
    pub rank: usize,
    pub pair_rank: Option<usize>,
    pub slope_max: Option<u32>,
    pub box_size: Option<i64>,
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(suite: Suite, p: u64, m: u32, rank: usize) -> Self {
        Self { suite, p, m, rank, pair_rank: None, slope_max: None, box_size: None, jobs: 1 }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !gln_local::arith::is_prime(self.p) {
            return Err(ConfigError::NotPrime(self.p));
        }
        if self.m == 0 {
            return Err(ConfigError::Depth);
        }
        if self.jobs == 0 {
            return Err(ConfigError::Jobs);
        }
        if self.box_size.is_some_and(|b| b < 0) {
            return Err(ConfigError::Box);
        }
        if !(2..=4).contains(&self.rank) {
            return Err(ConfigError::Rank(self.rank));
        }
        if let Some(r) = self.pair_rank {
            if r + 1 != self.rank {
                return Err(ConfigError::PairRank(r));
            }
        }
        Ok(())
    }

    pub fn params_json(&self) -> Value {
        json!({
            "p": self.p,
            "m": self.m,
            "rank": self.rank,
            "pair_rank": self.pair_rank.unwrap_or(self.rank - 1),
            "slope_max": self.slope_max,
            "box": self.box_size,
        })
    }
}
