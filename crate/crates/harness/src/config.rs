//! Experiment configuration and deterministic seed expansion.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use torpid_core::glauber::{replica_rng, ChainKind, ChainSpec};
use torpid_core::{Coloring, Parity, Rho, Torus};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Even,
    Odd,
    Random,
}

impl FromStr for Start {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" => Ok(Start::Even),
            "odd" => Ok(Start::Odd),
            "random" => Ok(Start::Random),
            _ => Err(CliError::InvalidParams(format!("unknown start {s:?}, expected even, odd or random"))),
        }
    }
}

/// `metropolis` or `block:k`.
pub fn parse_chain(s: &str) -> Result<ChainKind, CliError> {
    if s == "metropolis" {
        return Ok(ChainKind::Metropolis);
    }
    s.strip_prefix("block:")
        .and_then(|k| k.parse().ok())
        .map(|block_size| ChainKind::RhoLocalBlock { block_size })
        .ok_or_else(|| CliError::InvalidParams(format!("unknown chain {s:?}, expected metropolis or block:<k>")))
}

/// Accepts integers and scientific notation such as `1e7`.
pub fn parse_count(s: &str) -> Result<u64, CliError> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(CliError::InvalidParams(format!("expected a nonnegative integer, got {s:?}"))),
    }
}

/// `a..b` (inclusive) or a single dimension.
pub fn parse_dims(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::InvalidParams(format!("expected a dimension range a..b, got {s:?}"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.parse().map_err(|_| bad())?, b.trim_start_matches('=').parse().map_err(|_| bad())?),
        None => {
            let d = s.parse().map_err(|_| bad())?;
            (d, d)
        }
    };
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(rename = "L")]
    pub side: usize,
    pub dims: Vec<usize>,
    pub rho: Rho,
    pub chain: ChainKind,
    pub replicas: u64,
    pub steps: u64,
    pub stride: u64,
    pub seed_root: u64,
    pub start: Start,
}

impl ExperimentConfig {
    /// Rejects configurations no instance could run.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::InvalidParams(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.dims.is_empty() {
            return Err(CliError::InvalidParams("no dimensions".into()));
        }
        if self.replicas == 0 {
            return Err(CliError::InvalidParams("replicas must be positive".into()));
        }
        if self.stride == 0 {
            return Err(CliError::InvalidParams("stride must be positive".into()));
        }
        for &d in &self.dims {
            let torus = Torus::new(self.side, d)?;
            torpid_core::glauber::validate_spec(&torus, &self.chain_spec(d, 0))?;
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<ExperimentConfig, CliError> {
        let c: ExperimentConfig = serde_json::from_str(s).map_err(|e| CliError::InvalidParams(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Seed for every replica of dimension `d`: the first eight bytes of
    /// `sha256("torpid/<seed_root>/<L>/<d>")`. Replica `k` is stream `k`.
    pub fn instance_seed(&self, d: usize) -> u64 {
        let digest = Sha256::digest(format!("torpid/{}/{}/{}", self.seed_root, self.side, d).as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }

    pub fn chain_spec(&self, d: usize, replica: u64) -> ChainSpec {
        ChainSpec {
            kind: self.chain,
            rho: self.rho,
            seed: self.instance_seed(d),
            stream: replica,
            steps: self.steps,
            stride: self.stride,
        }
    }

    pub fn start_state(&self, torus: &Torus, replica: u64) -> Coloring {
        match self.start {
            Start::Even => Coloring::ground_state(torus, Parity::Even),
            Start::Odd => Coloring::ground_state(torus, Parity::Odd),
            Start::Random => random_start(torus, self.instance_seed(torus.dim()), replica),
        }
    }
}

/// Even vertices uniform in `{0, 1}`, then each odd vertex uniform among the
/// colors its neighbors leave free; proper because at most two colors are
/// ever blocked. Drawn from a stream disjoint from the chain's.
pub fn random_start(torus: &Torus, seed: u64, replica: u64) -> Coloring {
    let mut rng = replica_rng(seed ^ 0x5eed_5eed_5eed_5eed, replica);
    let mut raw = vec![0u8; torus.len()];
    for v in (0..torus.len()).filter(|&v| torus.is_even(v)) {
        raw[v] = rng.gen_range(0..2);
    }
    for v in (0..torus.len()).filter(|&v| !torus.is_even(v)) {
        let free: Vec<u8> = (0..3).filter(|&c| torus.neighbors(v).all(|u| raw[u] != c)).collect();
        raw[v] = free[rng.gen_range(0..free.len())];
    }
    Coloring::from_bytes(torus, &raw).expect("construction is proper")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            side: 4,
            dims: vec![2, 3],
            rho: "0.22".parse().unwrap(),
            chain: ChainKind::Metropolis,
            replicas: 4,
            steps: 10,
            stride: 1,
            seed_root: 7,
            start: Start::Even,
        }
    }

    #[test]
    fn parses_counts_and_ranges() {
        assert_eq!(parse_count("1e7").unwrap(), 10_000_000);
        assert_eq!(parse_count("100000").unwrap(), 100_000);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert_eq!(parse_dims("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_dims("3").unwrap(), vec![3]);
        assert!(parse_dims("4..2").is_err());
        assert!(parse_dims("0..2").is_err());
    }

    #[test]
    fn parses_chains() {
        assert_eq!(parse_chain("metropolis").unwrap(), ChainKind::Metropolis);
        assert_eq!(parse_chain("block:3").unwrap(), ChainKind::RhoLocalBlock { block_size: 3 });
        assert!(parse_chain("gibbs").is_err());
    }

    #[test]
    fn config_round_trips() {
        let c = config();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&s).unwrap(), c);
        assert!(s.contains("\"schema_version\":1"));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = config();
        c.side = 3;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let mut c = config();
        c.schema_version = 99;
        assert!(c.validate().is_err());
    }

    #[test]
    fn seeds_are_deterministic_and_distinct() {
        let c = config();
        assert_eq!(c.instance_seed(2), config().instance_seed(2));
        assert_ne!(c.instance_seed(2), c.instance_seed(3));
        assert_eq!(c.chain_spec(3, 5).stream, 5);
    }

    #[test]
    fn random_starts_are_proper_and_reproducible() {
        let t = Torus::new(4, 3).unwrap();
        let a = random_start(&t, 11, 0);
        assert_eq!(a, random_start(&t, 11, 0));
        assert_ne!(a, random_start(&t, 11, 1));
    }
}
