//! Optical elements as exact linear maps on the modes of one arm.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::amplitude::{format_rational, rat, AmplitudeError, RadicalComplex, Rational};
use crate::state::{Arm, ModeLabel, TwoPhotonState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpticsError {
    #[error("transmissivity {0} must lie strictly between 0 and 1")]
    TransmissivityOutOfRange(String),
    #[error("transmissivity {0}: {1}")]
    UnsupportedRadical(String, AmplitudeError),
    #[error("modes {0} and {1} are on different arms")]
    ArmMismatch(ModeLabel, ModeLabel),
    #[error("mode {0} is not on the {1} arm")]
    WrongArm(ModeLabel, Arm),
    #[error("mode {0} is used more than once by one element")]
    RepeatedMode(ModeLabel),
}

/// One column of a transform: the image of a single input mode.
pub type Column = Vec<(ModeLabel, RadicalComplex)>;

/// Linear map from input modes to superpositions of output modes on a
/// single arm. Modes outside the input set pass through untouched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeTransform {
    arm: Arm,
    columns: BTreeMap<ModeLabel, Column>,
    in_place: bool,
}

impl ModeTransform {
    /// Builds a transform from explicit columns. Zero entries are dropped.
    pub fn from_columns(
        arm: Arm,
        columns: impl IntoIterator<Item = (ModeLabel, Column)>,
        in_place: bool,
    ) -> Result<Self, OpticsError> {
        let mut out = BTreeMap::new();
        for (input, column) in columns {
            check_arm(arm, &input)?;
            let mut merged: BTreeMap<ModeLabel, RadicalComplex> = BTreeMap::new();
            for (label, amp) in column {
                check_arm(arm, &label)?;
                let slot = merged.entry(label).or_default();
                *slot = &*slot + &amp;
            }
            let column: Column = merged.into_iter().filter(|(_, a)| !a.is_zero()).collect();
            if out.insert(input.clone(), column).is_some() {
                return Err(OpticsError::RepeatedMode(input));
            }
        }
        Ok(Self {
            arm,
            columns: out,
            in_place,
        })
    }

    pub fn arm(&self) -> Arm {
        self.arm
    }

    pub fn is_in_place(&self) -> bool {
        self.in_place
    }

    pub fn columns(&self) -> &BTreeMap<ModeLabel, Column> {
        &self.columns
    }

    pub fn column(&self, input: &ModeLabel) -> Option<&Column> {
        self.columns.get(input)
    }

    pub fn inputs(&self) -> BTreeSet<ModeLabel> {
        self.columns.keys().cloned().collect()
    }

    pub fn outputs(&self) -> BTreeSet<ModeLabel> {
        self.columns
            .values()
            .flat_map(|c| c.iter().map(|(l, _)| l.clone()))
            .collect()
    }

    /// Exact check that columns are unit vectors and mutually orthogonal.
    pub fn is_isometry(&self) -> bool {
        let cols: Vec<&Column> = self.columns.values().collect();
        for (n, a) in cols.iter().enumerate() {
            if inner(a, a) != RadicalComplex::one() {
                return false;
            }
            if cols[n + 1..].iter().any(|b| !inner(a, b).is_zero()) {
                return false;
            }
        }
        true
    }

    /// Substitutes every column into the matching arm of `state`.
    pub fn apply(&self, state: &TwoPhotonState) -> TwoPhotonState {
        let mut out = TwoPhotonState::empty();
        for ((plus, minus), amp) in state.iter() {
            let own = match self.arm {
                Arm::Plus => plus,
                Arm::Minus => minus,
            };
            match self.columns.get(own) {
                None => out.accumulate((plus.clone(), minus.clone()), amp),
                Some(column) => {
                    for (label, coeff) in column {
                        let key = match self.arm {
                            Arm::Plus => (label.clone(), minus.clone()),
                            Arm::Minus => (plus.clone(), label.clone()),
                        };
                        out.accumulate(key, &(amp * coeff));
                    }
                }
            }
        }
        out
    }
}

/// `⟨a|b⟩` for two columns.
fn inner(a: &Column, b: &Column) -> RadicalComplex {
    let b: BTreeMap<&ModeLabel, &RadicalComplex> = b.iter().map(|(l, v)| (l, v)).collect();
    a.iter()
        .filter_map(|(l, x)| b.get(l).map(|y| &x.conj() * *y))
        .fold(RadicalComplex::zero(), |acc, t| acc + t)
}

fn check_arm(arm: Arm, label: &ModeLabel) -> Result<(), OpticsError> {
    if label.arm() == arm {
        Ok(())
    } else {
        Err(OpticsError::WrongArm(label.clone(), arm))
    }
}

/// Substitutes `transform` into `state`.
pub fn apply_transform(state: &TwoPhotonState, transform: &ModeTransform) -> TwoPhotonState {
    transform.apply(state)
}

/// Lossless beam splitter with intensity transmissivity `t`: the transmitted
/// amplitude is real, the reflected one carries a factor `i`.
///
/// `in1 ↦ √t·out1 + i√(1−t)·out2`, `in2 ↦ √t·out2 + i√(1−t)·out1`.
pub fn beamsplitter(
    t: &Rational,
    in1: &ModeLabel,
    in2: &ModeLabel,
    out1: &ModeLabel,
    out2: &ModeLabel,
) -> Result<ModeTransform, OpticsError> {
    if *t <= Rational::zero() || *t >= Rational::one() {
        return Err(OpticsError::TransmissivityOutOfRange(format_rational(t)));
    }
    let unsupported = |e| OpticsError::UnsupportedRadical(format_rational(t), e);
    let trans = RadicalComplex::sqrt_rational(t).map_err(unsupported)?;
    let refl = &RadicalComplex::i()
        * &RadicalComplex::sqrt_rational(&(Rational::one() - t)).map_err(unsupported)?;

    let arm = in1.arm();
    for l in [in2, out1, out2] {
        if l.arm() != arm {
            return Err(OpticsError::ArmMismatch(in1.clone(), l.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for l in [in1, in2, out1, out2] {
        if !seen.insert(l) {
            return Err(OpticsError::RepeatedMode(l.clone()));
        }
    }
    ModeTransform::from_columns(
        arm,
        [
            (
                in1.clone(),
                vec![(out1.clone(), trans.clone()), (out2.clone(), refl.clone())],
            ),
            (
                in2.clone(),
                vec![(out2.clone(), trans), (out1.clone(), refl)],
            ),
        ],
        false,
    )
}

/// In-place phase `i^quarter_turns` on a single mode.
pub fn phase_shift(quarter_turns: i64, mode: &ModeLabel) -> ModeTransform {
    ModeTransform::from_columns(
        mode.arm(),
        [(
            mode.clone(),
            vec![(mode.clone(), RadicalComplex::i_pow(quarter_turns))],
        )],
        true,
    )
    .expect("single-mode column is well formed")
}

/// Fixed composite transforms of the two-photon interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Preset {
    /// Unbalanced splitters, mirrors and balanced splitters of the source
    /// region, mapping `a, b` onto `v, u, g, f`.
    Preparation,
    /// Balanced output splitters mapping `u, v` onto `c, d`.
    Detection,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::Preparation, Preset::Detection];

    /// Keyword used in circuit files.
    pub fn keyword(self) -> &'static str {
        match self {
            Preset::Preparation => "preset_eq2",
            Preset::Detection => "preset_eq5",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Preset> {
        Self::ALL.into_iter().find(|p| p.keyword() == word)
    }

    fn input_names(self) -> &'static [&'static str] {
        match self {
            Preset::Preparation => &["a", "b"],
            Preset::Detection => &["u", "v"],
        }
    }

    fn output_names(self) -> &'static [&'static str] {
        match self {
            Preset::Preparation => &["v", "u", "g", "f"],
            Preset::Detection => &["c", "d"],
        }
    }

    pub fn inputs(self, arm: Arm) -> Vec<ModeLabel> {
        labels(self.input_names(), arm)
    }

    pub fn outputs(self, arm: Arm) -> Vec<ModeLabel> {
        labels(self.output_names(), arm)
    }

    pub fn transform(self, arm: Arm) -> ModeTransform {
        match self {
            Preset::Preparation => preparation_preset(arm),
            Preset::Detection => detection_preset(arm),
        }
    }
}

fn labels(names: &[&str], arm: Arm) -> Vec<ModeLabel> {
    names
        .iter()
        .map(|n| ModeLabel::new(*n, arm).expect("literal"))
        .collect()
}

/// `a ↦ (v + i·u − g)/√3`, `b ↦ (f − u + i·g)/√3`.
pub fn preparation_preset(arm: Arm) -> ModeTransform {
    let k = RadicalComplex::inv_sqrt(3).expect("1/sqrt(3) is in the basis");
    let i = RadicalComplex::i();
    let l = |n: &str| ModeLabel::new(n, arm).expect("literal");
    ModeTransform::from_columns(
        arm,
        [
            (
                l("a"),
                vec![(l("v"), k.clone()), (l("u"), &i * &k), (l("g"), -&k)],
            ),
            (
                l("b"),
                vec![(l("f"), k.clone()), (l("u"), -&k), (l("g"), &i * &k)],
            ),
        ],
        false,
    )
    .expect("preset is well formed")
}

/// `u ↦ (c + i·d)/√2`, `v ↦ (d + i·c)/√2`.
pub fn detection_preset(arm: Arm) -> ModeTransform {
    let l = |n: &str| ModeLabel::new(n, arm).expect("literal");
    beamsplitter(&rat(1, 2), &l("u"), &l("v"), &l("c"), &l("d")).expect("balanced splitter")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PairKey;
    use proptest::prelude::*;

    fn inv_sqrt(n: i64) -> RadicalComplex {
        RadicalComplex::inv_sqrt(n).unwrap()
    }

    fn pair(p: &str, m: &str) -> PairKey {
        (ModeLabel::plus(p), ModeLabel::minus(m))
    }

    fn amp_on(column: &Column, label: &ModeLabel) -> RadicalComplex {
        column
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, a)| a.clone())
            .unwrap_or_default()
    }

    #[test]
    fn balanced_splitter_column() {
        let bs = beamsplitter(
            &rat(1, 2),
            &ModeLabel::plus("u"),
            &ModeLabel::plus("v"),
            &ModeLabel::plus("c"),
            &ModeLabel::plus("d"),
        )
        .unwrap();
        let col = bs.column(&ModeLabel::plus("u")).unwrap();
        assert_eq!(amp_on(col, &ModeLabel::plus("c")), inv_sqrt(2));
        assert_eq!(
            amp_on(col, &ModeLabel::plus("d")),
            &RadicalComplex::i() * &inv_sqrt(2)
        );
        assert!(bs.is_isometry());
    }

    #[test]
    fn balanced_splitter_twice_is_i_swap() {
        let (a, b, c, d) = (
            ModeLabel::plus("a"),
            ModeLabel::plus("b"),
            ModeLabel::plus("c"),
            ModeLabel::plus("d"),
        );
        let first = beamsplitter(&rat(1, 2), &a, &b, &c, &d).unwrap();
        let second = beamsplitter(&rat(1, 2), &c, &d, &a, &b).unwrap();
        for (input, target) in [(&a, &b), (&b, &a)] {
            let s = TwoPhotonState::from_entries([(
                (input.clone(), ModeLabel::minus("x")),
                RadicalComplex::one(),
            )])
            .unwrap();
            let out = second.apply(&first.apply(&s));
            let expect = TwoPhotonState::from_entries([(
                (target.clone(), ModeLabel::minus("x")),
                RadicalComplex::i(),
            )])
            .unwrap();
            assert_eq!(out, expect);
        }
    }

    #[test]
    fn splitter_rejects_unrepresentable_t() {
        let l = ModeLabel::plus;
        let err = beamsplitter(&rat(1, 5), &l("a"), &l("b"), &l("c"), &l("d")).unwrap_err();
        assert!(matches!(err, OpticsError::UnsupportedRadical(_, _)));
        let err = beamsplitter(&rat(1, 1), &l("a"), &l("b"), &l("c"), &l("d")).unwrap_err();
        assert!(matches!(err, OpticsError::TransmissivityOutOfRange(_)));
        let err = beamsplitter(&rat(1, 2), &l("a"), &l("a"), &l("c"), &l("d")).unwrap_err();
        assert!(matches!(err, OpticsError::RepeatedMode(_)));
        let err = beamsplitter(
            &rat(1, 2),
            &l("a"),
            &ModeLabel::minus("b"),
            &l("c"),
            &l("d"),
        )
        .unwrap_err();
        assert!(matches!(err, OpticsError::ArmMismatch(_, _)));
    }

    #[test]
    fn third_transmissivity_is_isometric() {
        let l = ModeLabel::minus;
        for t in [rat(1, 3), rat(2, 3), rat(1, 4), rat(8, 9)] {
            let bs = beamsplitter(&t, &l("a"), &l("b"), &l("c"), &l("d")).unwrap();
            assert!(bs.is_isometry(), "t = {t}");
        }
    }

    #[test]
    fn phase_examples() {
        let g = ModeLabel::plus("g");
        let col = phase_shift(3, &g);
        assert_eq!(col.column(&g).unwrap()[0].1, -RadicalComplex::i());
        assert!(col.is_in_place());
        let s = TwoPhotonState::from_entries([((g.clone(), ModeLabel::minus("x")), inv_sqrt(2))])
            .unwrap();
        assert_eq!(phase_shift(0, &g).apply(&s), s);
        assert_eq!(
            phase_shift(2, &g).apply(&s),
            s.scale(&RadicalComplex::from_integer(-1))
        );
    }

    #[test]
    fn preparation_preset_columns() {
        let p = preparation_preset(Arm::Plus);
        let col = p.column(&ModeLabel::plus("a")).unwrap();
        let k = inv_sqrt(3);
        assert_eq!(amp_on(col, &ModeLabel::plus("v")), k);
        assert_eq!(
            amp_on(col, &ModeLabel::plus("u")),
            &RadicalComplex::i() * &k
        );
        assert_eq!(amp_on(col, &ModeLabel::plus("g")), -&k);
        let a = p.column(&ModeLabel::plus("a")).unwrap();
        let b = p.column(&ModeLabel::plus("b")).unwrap();
        assert!(inner(a, b).is_zero());
        assert_eq!(inner(a, a), RadicalComplex::one());
        assert!(p.is_isometry());
        assert!(preparation_preset(Arm::Minus).is_isometry());
    }

    #[test]
    fn detection_preset_columns() {
        let p = detection_preset(Arm::Minus);
        let col = p.column(&ModeLabel::minus("v")).unwrap();
        assert_eq!(amp_on(col, &ModeLabel::minus("d")), inv_sqrt(2));
        assert_eq!(
            amp_on(col, &ModeLabel::minus("c")),
            &RadicalComplex::i() * &inv_sqrt(2)
        );
        assert!(p.is_isometry());
        let l = ModeLabel::minus;
        let bs = beamsplitter(&rat(1, 2), &l("u"), &l("v"), &l("c"), &l("d")).unwrap();
        assert_eq!(p, bs);
    }

    #[test]
    fn preset_keywords() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_keyword(p.keyword()), Some(p));
            assert_eq!(
                p.transform(Arm::Plus).inputs(),
                p.inputs(Arm::Plus).into_iter().collect()
            );
            assert_eq!(
                p.transform(Arm::Plus).outputs(),
                p.outputs(Arm::Plus).into_iter().collect()
            );
        }
        assert_eq!(Preset::from_keyword("preset_eq3"), None);
    }

    #[test]
    fn detection_on_plus_arm_of_post_selected_state() {
        let k = inv_sqrt(3);
        let i = RadicalComplex::i();
        let s = TwoPhotonState::from_entries([
            (pair("v", "v"), k.clone()),
            (pair("v", "u"), &i * &k),
            (pair("u", "v"), &i * &k),
        ])
        .unwrap();
        let out = apply_transform(&s, &detection_preset(Arm::Plus));
        let k6 = inv_sqrt(6);
        let expect = TwoPhotonState::from_entries([
            (
                pair("c", "v"),
                &(&RadicalComplex::from_integer(2) * &i) * &k6,
            ),
            (pair("d", "u"), &i * &k6),
            (pair("c", "u"), -&k6),
        ])
        .unwrap();
        assert_eq!(out, expect);
        assert!(apply_transform(&TwoPhotonState::empty(), &detection_preset(Arm::Plus)).is_empty());
    }

    fn arb_amp() -> impl Strategy<Value = RadicalComplex> {
        (-3i64..=3, -3i64..=3, 1i64..=2).prop_map(|(re, im, d)| {
            (RadicalComplex::from_integer(re)
                + RadicalComplex::i() * RadicalComplex::from_integer(im))
            .scale(&rat(1, d))
        })
    }

    fn arb_state_over(plus: Vec<&'static str>) -> impl Strategy<Value = TwoPhotonState> {
        let p = prop::sample::select(plus);
        let m = prop::sample::select(vec!["x", "y"]);
        prop::collection::vec((p, m, arb_amp()), 0..6).prop_map(|v| {
            TwoPhotonState::from_entries(v.into_iter().map(|(p, m, a)| (pair(p, m), a))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn isometries_conserve_norm(s in arb_state_over(vec!["a", "b"]), t in prop::sample::select(vec![(1i64, 2i64), (1, 3), (2, 3), (1, 4), (3, 4), (1, 9)])) {
            let l = ModeLabel::plus;
            let bs = beamsplitter(&rat(t.0, t.1), &l("a"), &l("b"), &l("c"), &l("d")).unwrap();
            prop_assert_eq!(bs.apply(&s).norm_sq(), s.norm_sq());
            let prep = preparation_preset(Arm::Plus);
            prop_assert_eq!(prep.apply(&s).norm_sq(), s.norm_sq());
        }

        #[test]
        fn transforms_are_linear(s1 in arb_state_over(vec!["u", "v"]), s2 in arb_state_over(vec!["u", "v"]), k in arb_amp()) {
            let x = detection_preset(Arm::Plus);
            let lhs = x.apply(&s1.scale(&k).add(&s2));
            let rhs = x.apply(&s1).scale(&k).add(&x.apply(&s2));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn opposite_arm_transforms_commute(s in arb_state_over(vec!["u", "v"])) {
            let s = s.add(&TwoPhotonState::from_entries([(pair("u", "u"), RadicalComplex::one())]).unwrap());
            let p = detection_preset(Arm::Plus);
            let m = detection_preset(Arm::Minus);
            prop_assert_eq!(m.apply(&p.apply(&s)), p.apply(&m.apply(&s)));
        }
    }
}
