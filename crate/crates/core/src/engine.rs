//! Evolution through a circuit, post-selection and exact Born weights.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::amplitude::{format_rational, AmplitudeError, RadicalComplex, Rational};
use crate::circuit::{Circuit, Stage};
use crate::optics::OpticsError;
use crate::state::{Arm, ModeLabel, PairKey, TwoPhotonState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
    #[error("cannot renormalize the zero state")]
    ZeroState,
    #[error("conditioning event {0} has probability zero")]
    ZeroConditioningEvent(ModeLabel),
}

/// Pushes `state` through `stages` in order.
pub fn evolve_stages(
    state: &TwoPhotonState,
    stages: &[Stage],
) -> Result<TwoPhotonState, EngineError> {
    stages
        .iter()
        .try_fold(state.clone(), |s, stage| Ok(stage.transform()?.apply(&s)))
}

/// Source state after every stage, without post-selection.
pub fn evolve(circuit: &Circuit) -> Result<TwoPhotonState, EngineError> {
    evolve_stages(circuit.source(), circuit.stages())
}

/// Drops every term touching a discarded mode. Returns the survivor and
/// its (unnormalized) weight.
pub fn postselect(
    state: &TwoPhotonState,
    discard: &BTreeSet<ModeLabel>,
) -> Result<(TwoPhotonState, Rational), EngineError> {
    let kept = state.filter(|(p, m)| !discard.contains(p) && !discard.contains(m));
    let weight = kept.norm_sq().as_rational()?;
    Ok((kept, weight))
}

/// Rescales to unit norm.
pub fn renormalize(state: &TwoPhotonState) -> Result<TwoPhotonState, EngineError> {
    let norm = state.norm_sq().as_rational()?;
    if norm.is_zero() {
        return Err(EngineError::ZeroState);
    }
    if norm.is_one() {
        return Ok(state.clone());
    }
    let factor = RadicalComplex::one().div_sqrt(&norm)?;
    Ok(state.scale(&factor))
}

/// Born weights of a state plus the post-selection success probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeTable {
    rows: BTreeMap<PairKey, Rational>,
    kept_weight: Rational,
}

impl OutcomeTable {
    /// Builds a table from explicit rows; zero rows are dropped.
    pub fn new(rows: impl IntoIterator<Item = (PairKey, Rational)>, kept_weight: Rational) -> Self {
        Self {
            rows: rows.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
            kept_weight,
        }
    }

    pub fn rows(&self) -> &BTreeMap<PairKey, Rational> {
        &self.rows
    }

    pub fn kept_weight(&self) -> &Rational {
        &self.kept_weight
    }

    pub fn probability(&self, plus: &ModeLabel, minus: &ModeLabel) -> Rational {
        self.rows
            .get(&(plus.clone(), minus.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.rows.values().fold(Rational::zero(), |a, p| a + p)
    }

    /// Marginal distribution of the labels on `arm`.
    pub fn marginal(&self, arm: Arm) -> BTreeMap<ModeLabel, Rational> {
        let mut out: BTreeMap<ModeLabel, Rational> = BTreeMap::new();
        for ((p, m), prob) in &self.rows {
            let label = match arm {
                Arm::Plus => p,
                Arm::Minus => m,
            };
            *out.entry(label.clone()).or_insert_with(Rational::zero) += prob;
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Row {
            plus: String,
            minus: String,
            p: String,
        }
        #[derive(Serialize)]
        struct Doc {
            kept_weight: String,
            rows: Vec<Row>,
        }
        let doc = Doc {
            kept_weight: format_rational(&self.kept_weight),
            rows: self
                .rows
                .iter()
                .map(|((plus, minus), p)| Row {
                    plus: plus.name().to_string(),
                    minus: minus.name().to_string(),
                    p: format_rational(p),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("table serializes")
    }
}

/// Born weight of every term. `kept_weight` is set to the total weight.
pub fn probabilities(state: &TwoPhotonState) -> Result<OutcomeTable, EngineError> {
    let mut rows = BTreeMap::new();
    let mut total = Rational::zero();
    for (key, amp) in state.iter() {
        let p = amp.norm_sq().as_rational()?;
        total += &p;
        rows.insert(key.clone(), p);
    }
    Ok(OutcomeTable::new(rows, total))
}

/// Distribution of the opposite-arm label given that `given` was found.
/// Labels with zero conditional probability are absent.
pub fn conditional(
    state: &TwoPhotonState,
    given: &ModeLabel,
) -> Result<BTreeMap<ModeLabel, Rational>, EngineError> {
    let mut weights: BTreeMap<ModeLabel, Rational> = BTreeMap::new();
    for ((p, m), amp) in state.iter() {
        let (own, other) = match given.arm() {
            Arm::Plus => (p, m),
            Arm::Minus => (m, p),
        };
        if own == given {
            *weights.entry(other.clone()).or_insert_with(Rational::zero) +=
                amp.norm_sq().as_rational()?;
        }
    }
    let marginal = weights.values().fold(Rational::zero(), |a, w| a + w);
    if marginal.is_zero() {
        return Err(EngineError::ZeroConditioningEvent(given.clone()));
    }
    Ok(weights
        .into_iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(l, w)| (l, w / &marginal))
        .collect())
}

/// Fully evolved, post-selected, renormalized state, with its kept weight.
pub fn detected_state(circuit: &Circuit) -> Result<(TwoPhotonState, Rational), EngineError> {
    let evolved = evolve(circuit)?;
    let (kept, weight) = postselect(&evolved, circuit.discard())?;
    Ok((renormalize(&kept)?, weight))
}

/// Renormalized detection statistics of a circuit.
pub fn outcome_table(circuit: &Circuit) -> Result<OutcomeTable, EngineError> {
    let (state, weight) = detected_state(circuit)?;
    let table = probabilities(&state)?;
    Ok(OutcomeTable::new(table.rows, weight))
}
