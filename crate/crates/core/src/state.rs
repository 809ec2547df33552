//! Mode labels and sparse two-photon path states.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::RadicalComplex;

/// Which photon a mode belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    Plus,
    Minus,
}

impl Arm {
    pub fn other(self) -> Arm {
        match self {
            Arm::Plus => Arm::Minus,
            Arm::Minus => Arm::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Arm::Plus => '+',
            Arm::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Arm> {
        match c {
            '+' => Some(Arm::Plus),
            '-' => Some(Arm::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("invalid mode name {0:?}")]
    InvalidName(String),
    #[error("invalid mode label {0:?}")]
    InvalidLabel(String),
    #[error("pair ({0}, {1}) does not join one plus-arm and one minus-arm mode")]
    ArmMismatch(ModeLabel, ModeLabel),
}

/// Returns true for names matching `[a-z][a-z0-9_]*`.
pub fn is_valid_mode_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// A spatial mode on one arm, written `u+` or `c-`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    name: String,
    arm: Arm,
}

impl ModeLabel {
    pub fn new(name: impl Into<String>, arm: Arm) -> Result<Self, StateError> {
        let name = name.into();
        if !is_valid_mode_name(&name) {
            return Err(StateError::InvalidName(name));
        }
        Ok(Self { name, arm })
    }

    /// Panicking constructor for literals known to be valid.
    pub fn plus(name: &str) -> Self {
        Self::new(name, Arm::Plus).expect("valid mode name")
    }

    pub fn minus(name: &str) -> Self {
        Self::new(name, Arm::Minus).expect("valid mode name")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arm(&self) -> Arm {
        self.arm
    }

    /// Same name on the given arm.
    pub fn with_arm(&self, arm: Arm) -> Self {
        Self {
            name: self.name.clone(),
            arm,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, self.arm)
    }
}

impl FromStr for ModeLabel {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let arm = s
            .chars()
            .last()
            .and_then(Arm::from_symbol)
            .ok_or_else(|| StateError::InvalidLabel(s.to_string()))?;
        ModeLabel::new(&s[..s.len() - 1], arm).map_err(|_| StateError::InvalidLabel(s.to_string()))
    }
}

/// Ordered `(plus-arm, minus-arm)` mode pair.
pub type PairKey = (ModeLabel, ModeLabel);

/// Sparse superposition of two-photon path pairs. Zero amplitudes are never
/// stored, so derived equality is exact state equality.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TwoPhotonState {
    terms: BTreeMap<PairKey, RadicalComplex>,
}

impl TwoPhotonState {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a canonical state; duplicate keys are summed and zero terms
    /// dropped. Pairs may be given in either arm order.
    pub fn from_entries<I>(entries: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (PairKey, RadicalComplex)>,
    {
        let mut state = Self::empty();
        for ((x, y), amp) in entries {
            let key = match (x.arm(), y.arm()) {
                (Arm::Plus, Arm::Minus) => (x, y),
                (Arm::Minus, Arm::Plus) => (y, x),
                _ => return Err(StateError::ArmMismatch(x, y)),
            };
            state.accumulate(key, &amp);
        }
        Ok(state)
    }

    /// Adds `amp` to the term at `key`, which must be `(plus, minus)`.
    pub(crate) fn accumulate(&mut self, key: PairKey, amp: &RadicalComplex) {
        debug_assert!(key.0.arm() == Arm::Plus && key.1.arm() == Arm::Minus);
        if amp.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(amp.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                let sum = slot.get() + amp;
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairKey, &RadicalComplex)> {
        self.terms.iter()
    }

    /// Amplitude of `(plus, minus)`, zero when absent.
    pub fn amplitude(&self, plus: &ModeLabel, minus: &ModeLabel) -> RadicalComplex {
        self.terms
            .get(&(plus.clone(), minus.clone()))
            .cloned()
            .unwrap_or_default()
    }

    /// Total Born weight `Σ |amp|²`.
    pub fn norm_sq(&self) -> RadicalComplex {
        self.terms
            .values()
            .fold(RadicalComplex::zero(), |acc, a| acc + a.norm_sq())
    }

    pub fn scale(&self, k: &RadicalComplex) -> Self {
        let mut out = Self::empty();
        for (key, amp) in &self.terms {
            out.accumulate(key.clone(), &(amp * k));
        }
        out
    }

    /// Exact sum of two states.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (key, amp) in &other.terms {
            out.accumulate(key.clone(), amp);
        }
        out
    }

    /// Labels on `arm` that appear in at least one term.
    pub fn support(&self, arm: Arm) -> BTreeSet<ModeLabel> {
        self.terms
            .keys()
            .map(|(p, m)| match arm {
                Arm::Plus => p.clone(),
                Arm::Minus => m.clone(),
            })
            .collect()
    }

    /// Keeps only the terms for which `keep` holds.
    pub fn filter(&self, mut keep: impl FnMut(&PairKey) -> bool) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = StateJson {
            terms: self
                .terms
                .iter()
                .map(|((p, m), amp)| TermJson {
                    plus: p.name().to_string(),
                    minus: m.name().to_string(),
                    amp: amp.to_string(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("state serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: StateJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut entries = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let plus = ModeLabel::new(t.plus, Arm::Plus).map_err(|e| e.to_string())?;
            let minus = ModeLabel::new(t.minus, Arm::Minus).map_err(|e| e.to_string())?;
            let amp: RadicalComplex = t.amp.parse().map_err(|e| format!("{e}"))?;
            entries.push(((plus, minus), amp));
        }
        Self::from_entries(entries).map_err(|e| e.to_string())
    }
}

impl fmt::Display for TwoPhotonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, ((p, m), amp)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "[{amp}]|{p},{m}>")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    plus: String,
    minus: String,
    amp: String,
}
