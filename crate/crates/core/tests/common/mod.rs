#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use hardy_core::circuit::{parse, Circuit};
use hardy_core::state::{ModeLabel, PairKey, TwoPhotonState};
use hardy_core::RadicalComplex;
use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("circuits")
        .join(name)
}

pub fn corpus_text(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).expect("corpus file")
}

pub fn corpus(name: &str) -> Circuit {
    parse(&corpus_text(name)).expect("corpus circuit parses")
}

pub fn inv_sqrt(n: i64) -> RadicalComplex {
    RadicalComplex::inv_sqrt(n).unwrap()
}

pub fn i() -> RadicalComplex {
    RadicalComplex::i()
}

pub fn int(n: i64) -> RadicalComplex {
    RadicalComplex::from_integer(n)
}

pub fn pair(p: &str, m: &str) -> PairKey {
    (ModeLabel::plus(p), ModeLabel::minus(m))
}

pub fn state(terms: &[(&str, &str, RadicalComplex)]) -> TwoPhotonState {
    TwoPhotonState::from_entries(terms.iter().map(|(p, m, a)| (pair(p, m), a.clone()))).unwrap()
}

/// `3^{-1/2}(v+v- + i v+u- + i u+v-)`
pub fn post_selected() -> TwoPhotonState {
    let k = inv_sqrt(3);
    state(&[
        ("v", "v", k.clone()),
        ("v", "u", &i() * &k),
        ("u", "v", &i() * &k),
    ])
}

/// `6^{-1/2}(2i c+v- + i d+u- - c+u-)`
pub fn plus_side_detected() -> TwoPhotonState {
    let k = inv_sqrt(6);
    state(&[
        ("c", "v", &(&int(2) * &i()) * &k),
        ("d", "u", &i() * &k),
        ("c", "u", -&k),
    ])
}

/// `6^{-1/2}(2i v+c- + i u+d- - u+c-)`
pub fn minus_side_detected() -> TwoPhotonState {
    let k = inv_sqrt(6);
    state(&[
        ("v", "c", &(&int(2) * &i()) * &k),
        ("u", "d", &i() * &k),
        ("u", "c", -&k),
    ])
}

/// `12^{-1/2}(-3 c+c- + i c+d- + i d+c- - d+d-)`
pub fn fully_detected() -> TwoPhotonState {
    let k = inv_sqrt(12);
    state(&[
        ("c", "c", &int(-3) * &k),
        ("c", "d", &i() * &k),
        ("d", "c", &i() * &k),
        ("d", "d", -&k),
    ])
}

/// `2^{-1/2} i (c+d- + d+c-)`
pub fn reduced_detected() -> TwoPhotonState {
    let k = &i() * &inv_sqrt(2);
    state(&[("c", "d", k.clone()), ("d", "c", k)])
}

// ---------------------------------------------------------------------------
// Floating-point oracle. Written directly from the optics formulas with
// complex doubles and string mode names; it shares no code with the exact
// simulator.

pub type FloatState = BTreeMap<(String, String), Complex64>;

/// Column images of a single-arm linear map, by mode name.
pub type FloatMap = Vec<(&'static str, Vec<(&'static str, Complex64)>)>;

pub fn float_preparation() -> FloatMap {
    let k = 1.0 / 3f64.sqrt();
    let c = |re: f64, im: f64| Complex64::new(re * k, im * k);
    vec![
        (
            "a",
            vec![("v", c(1.0, 0.0)), ("u", c(0.0, 1.0)), ("g", c(-1.0, 0.0))],
        ),
        (
            "b",
            vec![("f", c(1.0, 0.0)), ("u", c(-1.0, 0.0)), ("g", c(0.0, 1.0))],
        ),
    ]
}

pub fn float_detection() -> FloatMap {
    let k = 1.0 / 2f64.sqrt();
    vec![
        (
            "u",
            vec![("c", Complex64::new(k, 0.0)), ("d", Complex64::new(0.0, k))],
        ),
        (
            "v",
            vec![("d", Complex64::new(k, 0.0)), ("c", Complex64::new(0.0, k))],
        ),
    ]
}

pub fn float_apply(state: &FloatState, map: &FloatMap, plus_arm: bool) -> FloatState {
    let mut out = FloatState::new();
    for ((p, m), amp) in state {
        let own = if plus_arm { p } else { m };
        match map.iter().find(|(input, _)| input == own) {
            None => *out.entry((p.clone(), m.clone())).or_default() += amp,
            Some((_, column)) => {
                for (label, coeff) in column {
                    let key = if plus_arm {
                        (label.to_string(), m.clone())
                    } else {
                        (p.clone(), label.to_string())
                    };
                    *out.entry(key).or_default() += amp * coeff;
                }
            }
        }
    }
    out
}

pub fn float_source() -> FloatState {
    let k = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
    [(("a".into(), "a".into()), k), (("b".into(), "b".into()), k)].into()
}

pub fn float_norm(state: &FloatState) -> f64 {
    state.values().map(|a| a.norm_sqr()).sum()
}

pub fn float_keep_uv(state: &FloatState) -> FloatState {
    let uv = |s: &str| s == "u" || s == "v" || s == "c" || s == "d";
    state
        .iter()
        .filter(|((p, m), _)| uv(p) && uv(m))
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

/// Source state through the preparation map on both arms.
pub fn float_prepared_full() -> FloatState {
    let s = float_apply(&float_source(), &float_preparation(), true);
    float_apply(&s, &float_preparation(), false)
}

/// Compares an exact state against the float oracle, term by term.
pub fn close_to_float(exact: &TwoPhotonState, oracle: &FloatState, tol: f64) -> bool {
    let mut keys: Vec<(String, String)> = oracle
        .iter()
        .filter(|(_, a)| a.norm() > tol)
        .map(|(k, _)| k.clone())
        .collect();
    keys.extend(
        exact
            .iter()
            .map(|((p, m), _)| (p.name().to_string(), m.name().to_string())),
    );
    keys.sort();
    keys.dedup();
    keys.iter().all(|(p, m)| {
        let (re, im) = exact
            .amplitude(&ModeLabel::plus(p), &ModeLabel::minus(m))
            .to_f64_pair();
        let o = oracle
            .get(&(p.clone(), m.clone()))
            .copied()
            .unwrap_or_default();
        (re - o.re).abs() <= tol && (im - o.im).abs() <= tol
    })
}

// ---------------------------------------------------------------------------
// Random circuits over at most six modes per arm.

const NAMES: [&str; 6] = ["m0", "m1", "m2", "m3", "m4", "m5"];
const TRANSMISSIVITIES: [&str; 7] = ["1/2", "1/3", "2/3", "1/4", "3/4", "1/9", "8/9"];
const AMPLITUDES: [&str; 8] = [
    "1",
    "-1",
    "i",
    "1/sqrt(2)",
    "i/sqrt(3)",
    "(1/2)-i",
    "sqrt(6)/4",
    "2*sqrt(3)",
];

/// Text of a random valid circuit: random source over two live modes per
/// arm, then up to five splitters and phases.
pub fn random_circuit_text<R: Rng>(rng: &mut R) -> String {
    let mut text = format!("modes + {}\nmodes - {}\n", NAMES.join(" "), NAMES.join(" "));
    let mut live: [Vec<&str>; 2] = [vec!["m0", "m1"], vec!["m0", "m1"]];
    let mut keys = Vec::new();
    for p in ["m0", "m1"] {
        for m in ["m0", "m1"] {
            keys.push((p, m));
        }
    }
    // Every initial mode appears in at least one term.
    let mut entries = vec![
        format!("(m0+,m1-) {}", AMPLITUDES.choose(rng).unwrap()),
        format!("(m1+,m0-) {}", AMPLITUDES.choose(rng).unwrap()),
    ];
    for (p, m) in keys {
        if rng.random_bool(0.5) && !(p == "m0" && m == "m1") && !(p == "m1" && m == "m0") {
            entries.push(format!("({p}+,{m}-) {}", AMPLITUDES.choose(rng).unwrap()));
        }
    }
    text.push_str(&format!("source {}\n", entries.join("; ")));
    for _ in 0..rng.random_range(1..=5) {
        let arm = rng.random_range(0..2);
        let symbol = if arm == 0 { "+" } else { "-" };
        let dead: Vec<&str> = NAMES
            .iter()
            .copied()
            .filter(|n| !live[arm].contains(n))
            .collect();
        if rng.random_bool(0.7) && live[arm].len() >= 2 && dead.len() >= 2 {
            let ins: Vec<&str> = live[arm].choose_multiple(rng, 2).copied().collect();
            let outs: Vec<&str> = dead.choose_multiple(rng, 2).copied().collect();
            let t = TRANSMISSIVITIES.choose(rng).unwrap();
            text.push_str(&format!(
                "stage bs {t} {} {} -> {} {} {symbol}\n",
                ins[0], ins[1], outs[0], outs[1]
            ));
            live[arm].retain(|n| !ins.contains(n));
            live[arm].extend(outs);
        } else {
            let mode = live[arm].choose(rng).unwrap();
            text.push_str(&format!(
                "stage phase {} {mode}{symbol}\n",
                rng.random_range(0..4)
            ));
        }
    }
    text
}

/// Random state over the given plus/minus mode names.
pub fn random_state<R: Rng>(rng: &mut R, plus: &[&str], minus: &[&str]) -> TwoPhotonState {
    let mut entries = Vec::new();
    for _ in 0..rng.random_range(1..6) {
        let p = plus.choose(rng).unwrap();
        let m = minus.choose(rng).unwrap();
        let amp: RadicalComplex = AMPLITUDES.choose(rng).unwrap().parse().unwrap();
        entries.push((pair(p, m), amp));
    }
    TwoPhotonState::from_entries(entries).unwrap()
}

/// Random value with small rational coefficients on all eight components.
pub fn random_amplitude<R: Rng>(rng: &mut R) -> RadicalComplex {
    let mut coeff = || hardy_core::rat(rng.random_range(-9..=9), rng.random_range(1..=6));
    let re = [coeff(), coeff(), coeff(), coeff()];
    let im = [coeff(), coeff(), coeff(), coeff()];
    RadicalComplex::from_parts(re, im)
}
