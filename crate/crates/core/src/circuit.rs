//! Line-oriented circuit description language.
//!
//! ```text
//! # comment
//! modes + a b u v g f c d
//! modes - a b u v g f c d
//! source (a+,a-) (1/1)/sqrt(2); (b+,b-) (1/1)/sqrt(2)
//! stage preset_eq2 +
//! stage bs 1/2 u v -> c d -
//! stage phase 3 g+
//! discard g+ g- f+ f-
//! detect c+ d+ c- d-
//! ```
//!
//! Mode liveness is checked statically: a stage may only consume modes
//! produced by the source or an earlier stage and not consumed since.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::amplitude::{format_rational, parse_rational, RadicalComplex, Rational};
use crate::optics::{beamsplitter, phase_shift, ModeTransform, OpticsError, Preset};
use crate::state::{is_valid_mode_name, Arm, ModeLabel, PairKey, TwoPhotonState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax { expected: String },
    DuplicateDeclaration(String),
    UndeclaredMode(String),
    DeadMode(String),
    DoubleConsume(String),
    ModeClash(String),
    DiscardDetectOverlap(String),
    InvalidElement(String),
}

impl DiagnosticKind {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            DiagnosticKind::Syntax { .. } => "syntax-error",
            DiagnosticKind::DuplicateDeclaration(_) => "duplicate-declaration",
            DiagnosticKind::UndeclaredMode(_) => "undeclared-mode",
            DiagnosticKind::DeadMode(_) => "dead-mode",
            DiagnosticKind::DoubleConsume(_) => "double-consume",
            DiagnosticKind::ModeClash(_) => "mode-clash",
            DiagnosticKind::DiscardDetectOverlap(_) => "discard-detect-overlap",
            DiagnosticKind::InvalidElement(_) => "invalid-element",
        }
    }

    fn message(&self) -> String {
        match self {
            DiagnosticKind::Syntax { expected } => format!("expected {expected}"),
            DiagnosticKind::DuplicateDeclaration(m)
            | DiagnosticKind::UndeclaredMode(m)
            | DiagnosticKind::DeadMode(m)
            | DiagnosticKind::DoubleConsume(m)
            | DiagnosticKind::ModeClash(m)
            | DiagnosticKind::DiscardDetectOverlap(m)
            | DiagnosticKind::InvalidElement(m) => m.clone(),
        }
    }
}

/// A parse or validation failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {}: {}", kind.code(), kind.message())]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    /// `file:line:col: code: message`
    pub fn with_file(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stage {
    BeamSplitter {
        t: Rational,
        in1: ModeLabel,
        in2: ModeLabel,
        out1: ModeLabel,
        out2: ModeLabel,
    },
    /// Phase of `quarter_turns` (kept in `0..4`) quarter turns.
    Phase {
        quarter_turns: u8,
        mode: ModeLabel,
    },
    Preset {
        preset: Preset,
        arm: Arm,
    },
}

impl Stage {
    pub fn arm(&self) -> Arm {
        match self {
            Stage::BeamSplitter { in1, .. } => in1.arm(),
            Stage::Phase { mode, .. } => mode.arm(),
            Stage::Preset { arm, .. } => *arm,
        }
    }

    pub fn transform(&self) -> Result<ModeTransform, OpticsError> {
        match self {
            Stage::BeamSplitter {
                t,
                in1,
                in2,
                out1,
                out2,
            } => beamsplitter(t, in1, in2, out1, out2),
            Stage::Phase {
                quarter_turns,
                mode,
            } => Ok(phase_shift(i64::from(*quarter_turns), mode)),
            Stage::Preset { preset, arm } => Ok(preset.transform(*arm)),
        }
    }

    pub fn inputs(&self) -> Vec<ModeLabel> {
        match self {
            Stage::BeamSplitter { in1, in2, .. } => vec![in1.clone(), in2.clone()],
            Stage::Phase { mode, .. } => vec![mode.clone()],
            Stage::Preset { preset, arm } => preset.inputs(*arm),
        }
    }

    pub fn outputs(&self) -> Vec<ModeLabel> {
        match self {
            Stage::BeamSplitter { out1, out2, .. } => vec![out1.clone(), out2.clone()],
            Stage::Phase { mode, .. } => vec![mode.clone()],
            Stage::Preset { preset, arm } => preset.outputs(*arm),
        }
    }

    pub fn is_in_place(&self) -> bool {
        matches!(self, Stage::Phase { .. })
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::BeamSplitter {
                t,
                in1,
                in2,
                out1,
                out2,
            } => write!(
                f,
                "stage bs {} {} {} -> {} {} {}",
                format_rational(t),
                in1.name(),
                in2.name(),
                out1.name(),
                out2.name(),
                in1.arm()
            ),
            Stage::Phase {
                quarter_turns,
                mode,
            } => write!(f, "stage phase {quarter_turns} {mode}"),
            Stage::Preset { preset, arm } => write!(f, "stage {} {arm}", preset.keyword()),
        }
    }
}

/// A validated interferometer description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    modes_plus: Vec<String>,
    modes_minus: Vec<String>,
    source: TwoPhotonState,
    stages: Vec<Stage>,
    discard: BTreeSet<ModeLabel>,
    detectors: BTreeSet<ModeLabel>,
}

impl Circuit {
    pub fn modes(&self, arm: Arm) -> &[String] {
        match arm {
            Arm::Plus => &self.modes_plus,
            Arm::Minus => &self.modes_minus,
        }
    }

    pub fn source(&self) -> &TwoPhotonState {
        &self.source
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn discard(&self) -> &BTreeSet<ModeLabel> {
        &self.discard
    }

    pub fn detectors(&self) -> &BTreeSet<ModeLabel> {
        &self.detectors
    }

    pub fn detectors_on(&self, arm: Arm) -> BTreeSet<ModeLabel> {
        self.detectors
            .iter()
            .filter(|l| l.arm() == arm)
            .cloned()
            .collect()
    }

    /// Number of leading stages that make up the preparation region: every
    /// stage up to and including the last one that feeds a discarded mode.
    pub fn preparation_len(&self) -> usize {
        self.stages
            .iter()
            .rposition(|s| s.outputs().iter().any(|l| self.discard.contains(l)))
            .map_or(0, |n| n + 1)
    }

    /// Copy of this circuit with a different stage list. Used to derive
    /// sub-circuits; validity of the result is the caller's concern.
    pub fn with_stages(&self, stages: Vec<Stage>) -> Circuit {
        Circuit {
            stages,
            ..self.clone()
        }
    }
}

/// Canonical text of a circuit; `parse(&render(c)) == Ok(c)`.
pub fn render(circuit: &Circuit) -> String {
    let mut out = String::new();
    for arm in [Arm::Plus, Arm::Minus] {
        let modes = circuit.modes(arm);
        if !modes.is_empty() {
            out.push_str(&format!("modes {arm} {}\n", modes.join(" ")));
        }
    }
    let entries: Vec<String> = circuit
        .source
        .iter()
        .map(|((p, m), amp)| format!("({p},{m}) {amp}"))
        .collect();
    if entries.is_empty() {
        out.push_str("source\n");
    } else {
        out.push_str(&format!("source {}\n", entries.join("; ")));
    }
    for stage in &circuit.stages {
        out.push_str(&format!("{stage}\n"));
    }
    for (keyword, set) in [
        ("discard", &circuit.discard),
        ("detect", &circuit.detectors),
    ] {
        if !set.is_empty() {
            let labels: Vec<String> = set.iter().map(ToString::to_string).collect();
            out.push_str(&format!("{keyword} {}\n", labels.join(" ")));
        }
    }
    out
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

#[derive(Clone, Copy)]
struct Token<'a> {
    col: usize,
    text: &'a str,
}

fn column_of(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push(Token {
                    col: column_of(line, s),
                    text: &line[s..i],
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            col: column_of(line, s),
            text: &line[s..],
        });
    }
    tokens
}

struct Located<T> {
    line: usize,
    col: usize,
    value: T,
}

struct StageItem {
    line: usize,
    /// Column of each input then each output label, in `Stage::inputs` /
    /// `Stage::outputs` order.
    input_cols: Vec<usize>,
    output_cols: Vec<usize>,
    stage: Stage,
}

/// Source terms with their positions, and the line they appeared on.
type RawSource = (usize, Vec<(Located<PairKey>, RadicalComplex)>);

#[derive(Default)]
struct Raw {
    modes: Vec<Located<ModeLabel>>,
    source: Option<RawSource>,
    stages: Vec<StageItem>,
    discard: Vec<Located<ModeLabel>>,
    detect: Vec<Located<ModeLabel>>,
}

fn syntax(line: usize, col: usize, expected: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line,
        column: col,
        kind: DiagnosticKind::Syntax {
            expected: expected.into(),
        },
    }
}

fn parse_label(line: usize, tok: Token<'_>) -> Result<ModeLabel, Diagnostic> {
    tok.text.parse().map_err(|_| {
        syntax(
            line,
            tok.col,
            format!("a mode label such as u+, found {:?}", tok.text),
        )
    })
}

fn parse_arm(line: usize, tok: Token<'_>) -> Result<Arm, Diagnostic> {
    match tok.text {
        "+" => Ok(Arm::Plus),
        "-" => Ok(Arm::Minus),
        other => Err(syntax(
            line,
            tok.col,
            format!("arm '+' or '-', found {other:?}"),
        )),
    }
}

fn end_of_line(line_text: &str) -> usize {
    line_text.chars().count() + 1
}

/// Parses and validates a circuit description.
pub fn parse(text: &str) -> Result<Circuit, Diagnostic> {
    let mut raw = Raw::default();
    for (idx, full_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = full_line.strip_suffix('\r').unwrap_or(full_line);
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        let tokens = tokenize(line);
        let Some(head) = tokens.first().copied() else {
            continue;
        };
        match head.text {
            "modes" => parse_modes(line_no, line, &tokens, &mut raw)?,
            "source" => {
                if raw.source.is_some() {
                    return Err(syntax(line_no, head.col, "a single source line"));
                }
                let body_start = line.find("source").expect("head token") + "source".len();
                let entries = parse_source(line_no, line, body_start)?;
                raw.source = Some((line_no, entries));
            }
            "stage" => raw.stages.push(parse_stage(line_no, line, &tokens)?),
            "discard" | "detect" => {
                let target = if head.text == "discard" {
                    &mut raw.discard
                } else {
                    &mut raw.detect
                };
                for tok in &tokens[1..] {
                    target.push(Located {
                        line: line_no,
                        col: tok.col,
                        value: parse_label(line_no, *tok)?,
                    });
                }
            }
            other => {
                return Err(syntax(
                    line_no,
                    head.col,
                    format!("one of modes, source, stage, discard, detect; found {other:?}"),
                ))
            }
        }
    }
    validate(raw, text)
}

fn parse_modes(
    line_no: usize,
    line: &str,
    tokens: &[Token<'_>],
    raw: &mut Raw,
) -> Result<(), Diagnostic> {
    let arm_tok = tokens
        .get(1)
        .copied()
        .ok_or_else(|| syntax(line_no, end_of_line(line), "arm '+' or '-'"))?;
    let arm = parse_arm(line_no, arm_tok)?;
    for tok in &tokens[2..] {
        if !is_valid_mode_name(tok.text) {
            return Err(syntax(
                line_no,
                tok.col,
                format!("a mode name matching [a-z][a-z0-9_]*, found {:?}", tok.text),
            ));
        }
        raw.modes.push(Located {
            line: line_no,
            col: tok.col,
            value: ModeLabel::new(tok.text, arm).expect("validated name"),
        });
    }
    Ok(())
}

fn parse_source(
    line_no: usize,
    line: &str,
    body_start: usize,
) -> Result<Vec<(Located<PairKey>, RadicalComplex)>, Diagnostic> {
    let body = &line[body_start..];
    let mut entries = Vec::new();
    if body.trim().is_empty() {
        return Ok(entries);
    }
    let mut offset = body_start;
    for chunk in body.split(';') {
        let chunk_start = offset;
        offset += chunk.len() + 1;
        let lead = chunk.len() - chunk.trim_start().len();
        let entry = chunk.trim();
        let entry_start = chunk_start + lead;
        if !entry.starts_with('(') {
            return Err(syntax(
                line_no,
                column_of(line, entry_start),
                "'(' opening a mode pair",
            ));
        }
        let close = entry
            .find(')')
            .ok_or_else(|| syntax(line_no, column_of(line, entry_start + entry.len()), "')'"))?;
        let inside = &entry[1..close];
        let (first, second) = inside.split_once(',').ok_or_else(|| {
            syntax(
                line_no,
                column_of(line, entry_start + close),
                "',' between two mode labels",
            )
        })?;
        let first_start = entry_start + 1 + (first.len() - first.trim_start().len());
        let second_start =
            entry_start + 1 + first.len() + 1 + (second.len() - second.trim_start().len());
        let a = parse_label(
            line_no,
            Token {
                col: column_of(line, first_start),
                text: first.trim(),
            },
        )?;
        let b = parse_label(
            line_no,
            Token {
                col: column_of(line, second_start),
                text: second.trim(),
            },
        )?;
        let pair_col = column_of(line, entry_start);
        let key = match (a.arm(), b.arm()) {
            (Arm::Plus, Arm::Minus) => (a, b),
            (Arm::Minus, Arm::Plus) => (b, a),
            _ => {
                return Err(syntax(
                    line_no,
                    pair_col,
                    "a pair joining one plus-arm and one minus-arm mode",
                ))
            }
        };
        let amp_text = &entry[close + 1..];
        let amp_start = entry_start + close + 1;
        if amp_text.trim().is_empty() {
            return Err(syntax(
                line_no,
                column_of(line, amp_start + amp_text.len()),
                "an amplitude",
            ));
        }
        let amp: RadicalComplex =
            amp_text
                .parse()
                .map_err(|e: crate::amplitude::ParseAmplitudeError| {
                    syntax(line_no, column_of(line, amp_start + e.offset), e.expected)
                })?;
        entries.push((
            Located {
                line: line_no,
                col: pair_col,
                value: key,
            },
            amp,
        ));
    }
    Ok(entries)
}

fn parse_stage(line_no: usize, line: &str, tokens: &[Token<'_>]) -> Result<StageItem, Diagnostic> {
    let kind = tokens.get(1).copied().ok_or_else(|| {
        syntax(
            line_no,
            end_of_line(line),
            "stage element: bs, phase or a preset",
        )
    })?;
    let need = |n: usize, what: &str| -> Result<Token<'_>, Diagnostic> {
        tokens
            .get(n)
            .copied()
            .ok_or_else(|| syntax(line_no, end_of_line(line), what.to_string()))
    };
    let extra = |n: usize| -> Result<(), Diagnostic> {
        match tokens.get(n) {
            Some(t) => Err(syntax(line_no, t.col, "end of line")),
            None => Ok(()),
        }
    };
    match kind.text {
        "bs" => {
            let t_tok = need(2, "transmissivity such as 1/2")?;
            let t = parse_rational(t_tok.text)
                .ok_or_else(|| syntax(line_no, t_tok.col, "transmissivity such as 1/2"))?;
            let names = [need(3, "input mode")?, need(4, "input mode")?];
            let arrow = need(5, "'->'")?;
            if arrow.text != "->" {
                return Err(syntax(line_no, arrow.col, "'->'"));
            }
            let outs = [need(6, "output mode")?, need(7, "output mode")?];
            let arm = match tokens.get(8) {
                Some(tok) => Some(parse_arm(line_no, *tok)?),
                None => None,
            };
            extra(9)?;
            let resolve = |tok: Token<'_>| -> Result<ModeLabel, Diagnostic> {
                match (tok.text.parse::<ModeLabel>(), arm) {
                    (Ok(l), None) => Ok(l),
                    (Ok(l), Some(a)) if l.arm() == a => Ok(l),
                    (Ok(_), Some(_)) => Err(syntax(line_no, tok.col, "a mode on the stage's arm")),
                    (Err(_), Some(a)) if is_valid_mode_name(tok.text) => {
                        Ok(ModeLabel::new(tok.text, a).expect("validated name"))
                    }
                    (Err(_), _) => Err(syntax(
                        line_no,
                        tok.col,
                        format!("a mode label such as u+, found {:?}", tok.text),
                    )),
                }
            };
            let labels = [
                resolve(names[0])?,
                resolve(names[1])?,
                resolve(outs[0])?,
                resolve(outs[1])?,
            ];
            let stage = Stage::BeamSplitter {
                t,
                in1: labels[0].clone(),
                in2: labels[1].clone(),
                out1: labels[2].clone(),
                out2: labels[3].clone(),
            };
            if let Err(e) = stage.transform() {
                let col = match e {
                    OpticsError::TransmissivityOutOfRange(_)
                    | OpticsError::UnsupportedRadical(..) => t_tok.col,
                    _ => names[0].col,
                };
                return Err(Diagnostic {
                    line: line_no,
                    column: col,
                    kind: DiagnosticKind::InvalidElement(e.to_string()),
                });
            }
            Ok(StageItem {
                line: line_no,
                input_cols: vec![names[0].col, names[1].col],
                output_cols: vec![outs[0].col, outs[1].col],
                stage,
            })
        }
        "phase" => {
            let k_tok = need(2, "quarter-turn count")?;
            let k: i64 = k_tok
                .text
                .parse()
                .map_err(|_| syntax(line_no, k_tok.col, "integer quarter-turn count"))?;
            let mode_tok = need(3, "mode label")?;
            let mode = parse_label(line_no, mode_tok)?;
            extra(4)?;
            Ok(StageItem {
                line: line_no,
                input_cols: vec![mode_tok.col],
                output_cols: vec![mode_tok.col],
                stage: Stage::Phase {
                    quarter_turns: k.rem_euclid(4) as u8,
                    mode,
                },
            })
        }
        word => match Preset::from_keyword(word) {
            Some(preset) => {
                let arm = parse_arm(line_no, need(2, "arm '+' or '-'")?)?;
                extra(3)?;
                let stage = Stage::Preset { preset, arm };
                Ok(StageItem {
                    line: line_no,
                    input_cols: vec![kind.col; stage.inputs().len()],
                    output_cols: vec![kind.col; stage.outputs().len()],
                    stage,
                })
            }
            None => Err(syntax(
                line_no,
                kind.col,
                format!("stage element bs, phase, preset_eq2 or preset_eq5; found {word:?}"),
            )),
        },
    }
}

fn validate(raw: Raw, text: &str) -> Result<Circuit, Diagnostic> {
    let err = |line, column, kind| Diagnostic { line, column, kind };

    let mut declared = BTreeSet::new();
    let mut modes_plus = Vec::new();
    let mut modes_minus = Vec::new();
    for m in &raw.modes {
        if !declared.insert(m.value.clone()) {
            return Err(err(
                m.line,
                m.col,
                DiagnosticKind::DuplicateDeclaration(m.value.to_string()),
            ));
        }
        match m.value.arm() {
            Arm::Plus => modes_plus.push(m.value.name().to_string()),
            Arm::Minus => modes_minus.push(m.value.name().to_string()),
        }
    }
    let check_declared = |line: usize, col: usize, label: &ModeLabel| {
        if declared.contains(label) {
            Ok(())
        } else {
            Err(err(
                line,
                col,
                DiagnosticKind::UndeclaredMode(label.to_string()),
            ))
        }
    };

    let Some((_, entries)) = raw.source else {
        let last = text.split('\n').count();
        return Err(syntax(last, 1, "a source line"));
    };
    let mut live = BTreeSet::new();
    let mut source_entries = Vec::with_capacity(entries.len());
    for (key, amp) in entries {
        for label in [&key.value.0, &key.value.1] {
            check_declared(key.line, key.col, label)?;
            live.insert(label.clone());
        }
        source_entries.push((key.value, amp));
    }
    let source = TwoPhotonState::from_entries(source_entries).expect("pairs validated");
    // Modes that cancelled out of the source are still considered produced.

    let mut consumed = BTreeSet::new();
    for item in &raw.stages {
        let stage = &item.stage;
        let inputs = stage.inputs();
        let outputs = stage.outputs();
        for (label, col) in inputs.iter().zip(&item.input_cols) {
            check_declared(item.line, *col, label)?;
        }
        for (label, col) in outputs.iter().zip(&item.output_cols) {
            check_declared(item.line, *col, label)?;
        }
        for (label, col) in inputs.iter().zip(&item.input_cols) {
            if !live.contains(label) {
                let kind = if consumed.contains(label) {
                    DiagnosticKind::DoubleConsume(label.to_string())
                } else {
                    DiagnosticKind::DeadMode(label.to_string())
                };
                return Err(err(item.line, *col, kind));
            }
        }
        if !stage.is_in_place() {
            for label in &inputs {
                live.remove(label);
                consumed.insert(label.clone());
            }
            for (label, col) in outputs.iter().zip(&item.output_cols) {
                if !live.insert(label.clone()) {
                    return Err(err(
                        item.line,
                        *col,
                        DiagnosticKind::ModeClash(format!("{label} is already live")),
                    ));
                }
                consumed.remove(label);
            }
        }
    }

    let mut discard = BTreeSet::new();
    for m in &raw.discard {
        check_declared(m.line, m.col, &m.value)?;
        if !live.contains(&m.value) {
            return Err(err(
                m.line,
                m.col,
                DiagnosticKind::DeadMode(m.value.to_string()),
            ));
        }
        discard.insert(m.value.clone());
    }
    let mut detectors = BTreeSet::new();
    for m in &raw.detect {
        check_declared(m.line, m.col, &m.value)?;
        if !live.contains(&m.value) {
            return Err(err(
                m.line,
                m.col,
                DiagnosticKind::DeadMode(m.value.to_string()),
            ));
        }
        if discard.contains(&m.value) {
            return Err(err(
                m.line,
                m.col,
                DiagnosticKind::DiscardDetectOverlap(m.value.to_string()),
            ));
        }
        detectors.insert(m.value.clone());
    }

    Ok(Circuit {
        modes_plus,
        modes_minus,
        source,
        stages: raw.stages.into_iter().map(|s| s.stage).collect(),
        discard,
        detectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::rat;

    const HEADER: &str = "modes + a b c d\nmodes - a b c d\nsource (a+,a-) 1\n";

    fn diag(text: &str) -> Diagnostic {
        parse(text).unwrap_err()
    }

    #[test]
    fn parses_single_splitter() {
        let c = parse(
            "modes + a b c d\nmodes - a\nsource (a+,a-) 1; (b+,a-) 1\nstage bs 1/2 a b -> c d +\ndetect c+ d+\n",
        )
        .unwrap();
        assert_eq!(c.stages().len(), 1);
        assert_eq!(
            c.stages()[0],
            Stage::BeamSplitter {
                t: rat(1, 2),
                in1: ModeLabel::plus("a"),
                in2: ModeLabel::plus("b"),
                out1: ModeLabel::plus("c"),
                out2: ModeLabel::plus("d"),
            }
        );
        let text = render(&c);
        assert_eq!(
            text.lines().filter(|l| l.starts_with("stage bs")).count(),
            1
        );
        assert_eq!(parse(&text).unwrap(), c);
    }

    #[test]
    fn suffixed_and_bare_labels_agree() {
        let a = parse(&format!("{HEADER}source\nstage bs 1/3 a- b- -> c- d-\n"));
        assert!(a.is_err(), "duplicate source line");
        let a = parse(&format!("{HEADER}stage bs 1/3 a- b- -> c- d-\n"));
        let b = parse(&format!("{HEADER}stage bs 1/3 a b -> c d -\n"));
        // b- is never produced by the source
        assert_eq!(a.unwrap_err().kind, DiagnosticKind::DeadMode("b-".into()));
        assert_eq!(b.unwrap_err().kind, DiagnosticKind::DeadMode("b-".into()));
    }

    #[test]
    fn undeclared_mode_position() {
        let d = diag(&format!("{HEADER}stage bs 1/2 q a -> c d +\n"));
        assert_eq!((d.line, d.column), (4, 14));
        assert_eq!(d.kind, DiagnosticKind::UndeclaredMode("q+".into()));
        assert_eq!(d.kind.code(), "undeclared-mode");
        assert_eq!(d.with_file("x.circ"), "x.circ:4:14: undeclared-mode: q+");
    }

    #[test]
    fn liveness_errors() {
        let src = "modes + a b c d e f\nmodes - a b\nsource (a+,a-) 1; (b+,b-) 1\n";
        let d = diag(&format!(
            "{src}stage bs 1/2 a b -> c d +\nstage bs 1/2 a e -> f b +\n"
        ));
        assert_eq!(d.kind, DiagnosticKind::DoubleConsume("a+".into()));
        assert_eq!((d.line, d.column), (5, 14));
        let d = diag(&format!("{src}stage bs 1/2 e a -> c d +\n"));
        assert_eq!(d.kind, DiagnosticKind::DeadMode("e+".into()));
        let d = diag(&format!(
            "{src}stage bs 1/2 a b -> c d +\nstage bs 1/2 c d -> e c +\n"
        ));
        assert_eq!(d.kind.code(), "invalid-element");
        let d = diag("modes + a b c d\nmodes - a\nsource (a+,a-) 1; (b+,a-) 1; (c+,a-) 1\nstage bs 1/2 a b -> c d +\n");
        assert_eq!(
            d.kind,
            DiagnosticKind::ModeClash("c+ is already live".into())
        );
        assert_eq!((d.line, d.column), (4, 21));
        let d = diag(&format!("{src}stage bs 1/2 a b -> c d +\ndetect a+\n"));
        assert_eq!(d.kind, DiagnosticKind::DeadMode("a+".into()));
        let d = diag(&format!("{src}discard a- b-\ndetect b-\n"));
        assert_eq!(d.kind, DiagnosticKind::DiscardDetectOverlap("b-".into()));
        assert_eq!((d.line, d.column), (5, 8));
    }

    #[test]
    fn phase_is_in_place_and_reduced_mod_four() {
        let c = parse(&format!("{HEADER}stage phase 7 a+\nstage phase -1 a+\n")).unwrap();
        assert_eq!(
            c.stages()[0],
            Stage::Phase {
                quarter_turns: 3,
                mode: ModeLabel::plus("a")
            }
        );
        assert_eq!(c.stages()[0], c.stages()[1]);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let d = diag("modes * a\n");
        assert_eq!((d.line, d.column, d.kind.code()), (1, 7, "syntax-error"));
        let d = diag("modes + a\nmodes - a\nsource (a+,a-) sqrt(5)\n");
        assert_eq!((d.line, d.column), (3, 21));
        let d = diag("modes + a\nmodes - a\nsource (a+,a+) 1\n");
        assert_eq!((d.line, d.column), (3, 8));
        let d = diag(&format!("{HEADER}stage bs 1/2 a b => c d +\n"));
        assert_eq!((d.line, d.column), (4, 18));
        let d = diag(&format!("{HEADER}stage mirror a+\n"));
        assert_eq!((d.line, d.column), (4, 7));
        let d = diag(&format!("{HEADER}stage bs 1/5 a b -> c d +\n"));
        assert_eq!(
            (d.line, d.column, d.kind.code()),
            (4, 10, "invalid-element")
        );
        let d = diag("modes + a\nmodes - a\n");
        assert_eq!(d.kind.code(), "syntax-error");
        let d = diag("modes + a a\n");
        assert_eq!(d.kind, DiagnosticKind::DuplicateDeclaration("a+".into()));
        let d = diag("flip a\n");
        assert_eq!((d.line, d.column), (1, 1));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let c = parse(
            "# header\n\nmodes + a # trailing\nmodes - a\n   \nsource (a-,a+) 1 # swapped order\n",
        )
        .unwrap();
        assert_eq!(c.source().len(), 1);
        assert!(c.stages().is_empty());
        assert_eq!(c.preparation_len(), 0);
    }
}
