//! Rendering of results as aligned text, JSON or CSV.

use std::fmt::Write as _;

use hardy_core::amplitude::format_rational;
use hardy_core::circuit::Circuit;
use hardy_core::engine::OutcomeTable;
use hardy_core::montecarlo::RunRecord;
use hardy_core::paradox::{ParadoxReport, Verdict};
use hardy_core::TwoPhotonState;
use serde_json::json;

use crate::Format;

/// Left-aligned columns separated by two spaces.
fn columns(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(String::len)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).expect("string write");
    }
    out
}

fn csv(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| r.join(",") + "\n").collect()
}

pub fn check(c: &Circuit, format: Format) -> String {
    let detectors: Vec<String> = c.detectors().iter().map(ToString::to_string).collect();
    match format {
        Format::Table => format!(
            "ok: {} stages, {} discarded modes, detectors {}\n",
            c.stages().len(),
            c.discard().len(),
            detectors.join(" ")
        ),
        Format::Json => {
            let doc = json!({
                "ok": true,
                "stages": c.stages().len(),
                "discard": c.discard().iter().map(ToString::to_string).collect::<Vec<_>>(),
                "detectors": detectors,
            });
            format!("{doc}\n")
        }
        Format::Csv => format!("ok,stages\ntrue,{}\n", c.stages().len()),
    }
}

pub fn state(s: &TwoPhotonState, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", s.to_json()),
        Format::Table | Format::Csv => {
            let mut rows = vec![vec!["plus".into(), "minus".into(), "amplitude".into()]];
            rows.extend(
                s.iter()
                    .map(|((p, m), a)| vec![p.to_string(), m.to_string(), a.to_string()]),
            );
            if format == Format::Table {
                columns(&rows)
            } else {
                csv(&rows)
            }
        }
    }
}

pub fn table(t: &OutcomeTable, format: Format) -> String {
    let rows = || {
        t.rows().iter().map(|((p, m), prob)| {
            vec![
                p.name().to_string(),
                m.name().to_string(),
                format_rational(prob),
            ]
        })
    };
    match format {
        Format::Json => format!("{}\n", t.to_json()),
        Format::Table => {
            let mut lines = vec![vec!["plus".into(), "minus".into(), "p".into()]];
            lines.extend(rows());
            format!(
                "kept_weight {}\n{}",
                format_rational(t.kept_weight()),
                columns(&lines)
            )
        }
        Format::Csv => {
            let mut lines = vec![vec![
                "outcome_plus".into(),
                "outcome_minus".into(),
                "p".into(),
            ]];
            lines.extend(rows());
            format!(
                "{}# kept_weight={}\n",
                csv(&lines),
                format_rational(t.kept_weight())
            )
        }
    }
}

pub fn paradox(r: &ParadoxReport, format: Format) -> String {
    let rows: Vec<Vec<String>> = r
        .outcomes
        .iter()
        .map(|o| {
            vec![
                o.outcome.0.to_string(),
                o.outcome.1.to_string(),
                format_rational(&o.qm_probability),
                o.feasible.len().to_string(),
                o.verdict.to_string(),
            ]
        })
        .collect();
    match format {
        Format::Json => format!("{}\n", r.to_json()),
        Format::Csv => {
            let mut lines = vec![[
                "outcome_plus",
                "outcome_minus",
                "qm_p",
                "feasible",
                "verdict",
            ]
            .map(String::from)
            .to_vec()];
            lines.extend(rows);
            csv(&lines)
        }
        Format::Table => {
            let mut out = format!("rules {}, {} assignments\n", r.rules, r.assignment_count);
            let mut lines = vec![["plus", "minus", "qm_p", "feasible", "verdict"]
                .map(String::from)
                .to_vec()];
            lines.extend(rows);
            out.push_str(&columns(&lines));
            for verdict in [
                Verdict::ForbiddenButPredicted,
                Verdict::AllowedButImpossible,
            ] {
                for o in r.outcomes.iter().filter(|o| o.verdict == verdict) {
                    writeln!(out, "{verdict}: ({},{})", o.outcome.0, o.outcome.1)
                        .expect("string write");
                    for (a, reasons) in &o.rejected {
                        for reason in reasons {
                            writeln!(out, "  {a}: {reason}").expect("string write");
                        }
                    }
                }
            }
            out
        }
    }
}

pub fn record(r: &RunRecord, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", r.to_json()),
        Format::Csv => r.to_csv(),
        Format::Table => {
            let mut lines = vec![["plus", "minus", "count", "expected"]
                .map(String::from)
                .to_vec()];
            lines.extend(r.counts.iter().map(|((p, m), count)| {
                vec![
                    p.name().to_string(),
                    m.name().to_string(),
                    count.to_string(),
                    format_rational(&r.expected[&(p.clone(), m.clone())]),
                ]
            }));
            format!(
                "n {} seed {} stream {}\n{}chi_square {:.4} df {} {}\n",
                r.n,
                r.seed,
                r.stream,
                columns(&lines),
                r.chi_square,
                r.df,
                if r.pass_95 {
                    "pass at 95%"
                } else {
                    "fail at 95%"
                }
            )
        }
    }
}
