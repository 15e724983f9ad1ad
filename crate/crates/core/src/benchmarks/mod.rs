//! Builders for the benchmark models.

use std::fmt;
use std::str::FromStr;

use crate::model::{DmcModel, ModelError};

mod coin;
mod dining;
mod itai_rodeh;

pub use coin::coin_game;
pub use dining::{dining_philosophers, fraction_spec, quota_for, quota_spec, DiningParams};
pub use itai_rodeh::{itai_rodeh, leader_spec, ItaiRodehParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    CoinGame,
    ItaiRodeh,
    DiningPhilosophers,
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Family, String> {
        match s {
            "coin" | "coin-game" => Ok(Family::CoinGame),
            "itai-rodeh" | "ir" => Ok(Family::ItaiRodeh),
            "dining" | "dining-philosophers" => Ok(Family::DiningPhilosophers),
            other => Err(format!("unknown benchmark family `{other}`")),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::CoinGame => "coin-game",
            Family::ItaiRodeh => "itai-rodeh",
            Family::DiningPhilosophers => "dining-philosophers",
        })
    }
}

/// Uniform parameter record for all families. Fields a family does not use
/// are ignored; `id_range` defaults to `n` for Itai–Rodeh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkParams {
    pub family: Family,
    pub n: u32,
    pub id_range: Option<u32>,
    pub channel_capacity: u32,
    pub quota: Option<u32>,
}

impl BenchmarkParams {
    pub fn new(family: Family, n: u32) -> BenchmarkParams {
        BenchmarkParams {
            family,
            n,
            id_range: None,
            channel_capacity: 1,
            quota: None,
        }
    }

    pub fn itai_rodeh(&self) -> ItaiRodehParams {
        ItaiRodehParams {
            n: self.n,
            id_range: self.id_range.unwrap_or(self.n),
            channel_capacity: self.channel_capacity,
        }
    }

    pub fn dining(&self) -> DiningParams {
        DiningParams {
            n: self.n,
            quota: self.quota,
        }
    }

    pub fn build(&self) -> Result<DmcModel, ModelError> {
        match self.family {
            Family::CoinGame => Ok(coin_game()),
            Family::ItaiRodeh => itai_rodeh(self.itai_rodeh()),
            Family::DiningPhilosophers => dining_philosophers(self.dining()),
        }
    }
}
