//! Seeded sampling of detection events and chi-square goodness of fit.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`; independent runs use distinct stream ids on the
//! same seed. Each draw takes one `next_u64()` value `x` and selects the
//! first row, in table order, whose cumulative probability `P` satisfies
//! `x < ceil(P * 2^64)`. The comparison is done in exact integer
//! arithmetic, so counts are reproducible bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::amplitude::Rational;
use crate::engine::OutcomeTable;
use crate::state::PairKey;

/// Seed used by the CLI and the regression tests.
pub const DEFAULT_SEED: u64 = 0x5EED_2006;

/// Upper-tail chi-square critical values for df = 1..=8.
const CRITICAL_95: [f64; 8] = [3.841, 5.991, 7.815, 9.488, 11.070, 12.592, 14.067, 15.507];
const CRITICAL_99: [f64; 8] = [6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonteCarloError {
    #[error("outcome table has no rows")]
    EmptyTable,
    #[error("sample size must be at least 1")]
    NoSamples,
    #[error("{0} degrees of freedom is outside the tabulated range 1..=8")]
    DegreesOfFreedomOutOfRange(usize),
    #[error("count for ({0},{1}) has no row in the outcome table")]
    UnknownOutcome(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub pass_95: bool,
    pub pass_99: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub stream: u64,
    pub n: u64,
    /// One entry per table row, in table order; unobserved rows count 0.
    pub counts: BTreeMap<PairKey, u64>,
    pub expected: BTreeMap<PairKey, Rational>,
    pub chi_square: f64,
    pub df: usize,
    pub pass_95: bool,
}

/// `n` draws from `table` on stream 0 of `seed`.
pub fn sample(table: &OutcomeTable, n: u64, seed: u64) -> Result<RunRecord, MonteCarloError> {
    sample_stream(table, n, seed, 0)
}

pub fn sample_stream(
    table: &OutcomeTable,
    n: u64,
    seed: u64,
    stream: u64,
) -> Result<RunRecord, MonteCarloError> {
    if table.rows().is_empty() {
        return Err(MonteCarloError::EmptyTable);
    }
    if n == 0 {
        return Err(MonteCarloError::NoSamples);
    }
    let keys: Vec<&PairKey> = table.rows().keys().collect();
    let thresholds = thresholds(table);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut hits = vec![0u64; keys.len()];
    for _ in 0..n {
        let x = u128::from(rng.next_u64());
        let idx = thresholds
            .iter()
            .position(|&t| x < t)
            .unwrap_or(keys.len() - 1);
        hits[idx] += 1;
    }
    let counts: BTreeMap<PairKey, u64> = keys.iter().map(|k| (*k).clone()).zip(hits).collect();
    let chi = chi_square_test(&counts, table)?;
    let expected = table
        .rows()
        .iter()
        .map(|(k, p)| (k.clone(), p * Rational::from_integer(BigInt::from(n))))
        .collect();
    Ok(RunRecord {
        seed,
        stream,
        n,
        counts,
        expected,
        chi_square: chi.statistic,
        df: chi.df,
        pass_95: chi.pass_95,
    })
}

/// `ceil(P_i * 2^64)` for each cumulative probability `P_i`.
fn thresholds(table: &OutcomeTable) -> Vec<u128> {
    let scale = BigInt::from(1u8) << 64;
    let mut cumulative = Rational::zero();
    table
        .rows()
        .values()
        .map(|p| {
            cumulative += p;
            let num = cumulative.numer() * &scale;
            let den = cumulative.denom();
            let ceil: BigInt = (num + den - BigInt::from(1u8)) / den;
            ceil.to_u128().unwrap_or(u128::MAX)
        })
        .collect()
}

/// Pearson statistic of `counts` against `table` scaled to the total count.
/// A single-row table has zero degrees of freedom and always passes.
pub fn chi_square_test(
    counts: &BTreeMap<PairKey, u64>,
    table: &OutcomeTable,
) -> Result<ChiSquare, MonteCarloError> {
    for (p, m) in counts.keys() {
        if !table.rows().contains_key(&(p.clone(), m.clone())) {
            return Err(MonteCarloError::UnknownOutcome(
                p.to_string(),
                m.to_string(),
            ));
        }
    }
    let rows = table.rows().len();
    if rows == 0 {
        return Err(MonteCarloError::EmptyTable);
    }
    let df = rows - 1;
    if df > CRITICAL_95.len() {
        return Err(MonteCarloError::DegreesOfFreedomOutOfRange(df));
    }
    let n: u64 = counts.values().sum();
    let n = Rational::from_integer(BigInt::from(n));
    let mut statistic = Rational::zero();
    for (key, p) in table.rows() {
        let observed = Rational::from_integer(BigInt::from(counts.get(key).copied().unwrap_or(0)));
        let expected = p * &n;
        if expected.is_zero() {
            continue;
        }
        let diff = &observed - &expected;
        statistic += &diff * &diff / expected;
    }
    let statistic = statistic.to_f64().unwrap_or(f64::INFINITY);
    let (pass_95, pass_99) = match df {
        0 => (true, true),
        d => (
            statistic <= CRITICAL_95[d - 1],
            statistic <= CRITICAL_99[d - 1],
        ),
    };
    Ok(ChiSquare {
        statistic,
        df,
        pass_95,
        pass_99,
    })
}

impl RunRecord {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome_plus,outcome_minus,count,expected\n");
        for ((p, m), count) in &self.counts {
            let expected = self.expected[&(p.clone(), m.clone())]
                .to_f64()
                .unwrap_or(f64::NAN);
            writeln!(out, "{},{},{count},{expected}", p.name(), m.name()).expect("string write");
        }
        writeln!(
            out,
            "# n={} seed={} stream={} chi_square={} df={} pass_95={}",
            self.n, self.seed, self.stream, self.chi_square, self.df, self.pass_95
        )
        .expect("string write");
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Row {
            plus: String,
            minus: String,
            count: u64,
            expected: f64,
        }
        #[derive(Serialize)]
        struct Doc {
            seed: u64,
            stream: u64,
            n: u64,
            counts: Vec<Row>,
            chi_square: f64,
            df: usize,
            pass_95: bool,
        }
        let doc = Doc {
            seed: self.seed,
            stream: self.stream,
            n: self.n,
            counts: self
                .counts
                .iter()
                .map(|((p, m), &count)| Row {
                    plus: p.name().to_string(),
                    minus: m.name().to_string(),
                    count,
                    expected: self.expected[&(p.clone(), m.clone())]
                        .to_f64()
                        .unwrap_or(f64::NAN),
                })
                .collect(),
            chi_square: self.chi_square,
            df: self.df,
            pass_95: self.pass_95,
        };
        serde_json::to_string(&doc).expect("record serializes")
    }
}
