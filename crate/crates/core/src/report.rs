//! Report rendering: JSON, CSV and fixed-width tables.
//!
//! Tables show scores to four decimals. JSON carries the raw `f64` values
//! alongside a four-decimal `display` copy.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{ConfigDelta, SystemReport};
use crate::rouge::{EvalConfig, Metric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Table,
}

/// Results for one metric: the ranked systems and, when a lemma-vs-native
/// comparison was run, the per-system deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSection {
    pub metric: Metric,
    pub reports: Vec<SystemReport>,
    /// `base` is native (surface) matching, `variant` is lemma matching.
    pub comparison: Option<Vec<ConfigDelta>>,
}

pub fn display(value: f64) -> String {
    format!("{value:.4}")
}

#[derive(Serialize, Deserialize)]
struct Display4 {
    precision: String,
    recall: String,
    f_measure: String,
}

#[derive(Serialize, Deserialize)]
struct JsonTopic {
    topic: String,
    precision: f64,
    recall: f64,
    f_measure: f64,
    match_count: usize,
    candidate_total: usize,
    reference_total: usize,
    reference_count: usize,
}

#[derive(Serialize, Deserialize)]
struct JsonSystem {
    system: String,
    precision: f64,
    recall: f64,
    f_measure: f64,
    display: Display4,
    topics: Vec<JsonTopic>,
}

#[derive(Serialize, Deserialize)]
struct JsonDelta {
    system: String,
    lemma_f: f64,
    native_f: f64,
    delta: f64,
    display: JsonDeltaDisplay,
}

#[derive(Serialize, Deserialize)]
struct JsonDeltaDisplay {
    lemma_f: String,
    native_f: String,
    delta: String,
}

#[derive(Serialize, Deserialize)]
struct JsonSection {
    metric: String,
    config: Option<EvalConfig>,
    systems: Vec<JsonSystem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Vec<JsonDelta>>,
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    metrics: Vec<JsonSection>,
}

fn json_section(section: &MetricSection) -> JsonSection {
    JsonSection {
        metric: section.metric.label(),
        config: section.reports.first().map(|r| r.config),
        systems: section
            .reports
            .iter()
            .map(|r| JsonSystem {
                system: r.system.clone(),
                precision: r.precision,
                recall: r.recall,
                f_measure: r.f_measure,
                display: Display4 {
                    precision: display(r.precision),
                    recall: display(r.recall),
                    f_measure: display(r.f_measure),
                },
                topics: r
                    .topics
                    .iter()
                    .map(|t| JsonTopic {
                        topic: t.topic.clone(),
                        precision: t.score.precision,
                        recall: t.score.recall,
                        f_measure: t.score.f_measure,
                        match_count: t.score.match_count,
                        candidate_total: t.score.candidate_total,
                        reference_total: t.score.reference_total,
                        reference_count: t.score.reference_count,
                    })
                    .collect(),
            })
            .collect(),
        comparison: section.comparison.as_ref().map(|deltas| {
            deltas
                .iter()
                .map(|d| JsonDelta {
                    system: d.system.clone(),
                    lemma_f: d.variant_f,
                    native_f: d.base_f,
                    delta: d.delta,
                    display: JsonDeltaDisplay {
                        lemma_f: display(d.variant_f),
                        native_f: display(d.base_f),
                        delta: display(d.delta),
                    },
                })
                .collect()
        }),
    }
}

fn render_json(sections: &[MetricSection]) -> String {
    let report = JsonReport {
        metrics: sections.iter().map(json_section).collect(),
    };
    let mut out = serde_json::to_string_pretty(&report).expect("report serializes");
    out.push('\n');
    out
}

fn render_csv(sections: &[MetricSection]) -> String {
    let compare = sections.iter().any(|s| s.comparison.is_some());
    let mut writer = csv::Writer::from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, record: &[String]| {
        w.write_record(record).expect("in-memory csv write");
    };
    if compare {
        write(
            &mut writer,
            &["system", "metric", "lemma_f", "native_f", "delta"].map(String::from),
        );
    } else {
        write(
            &mut writer,
            &["system", "metric", "precision", "recall", "f"].map(String::from),
        );
    }
    for section in sections {
        let label = section.metric.label();
        match (&section.comparison, compare) {
            (Some(deltas), true) => {
                for d in deltas {
                    write(
                        &mut writer,
                        &[
                            d.system.clone(),
                            label.clone(),
                            d.variant_f.to_string(),
                            d.base_f.to_string(),
                            d.delta.to_string(),
                        ],
                    );
                }
            }
            _ => {
                for r in &section.reports {
                    write(
                        &mut writer,
                        &[
                            r.system.clone(),
                            label.clone(),
                            r.precision.to_string(),
                            r.recall.to_string(),
                            r.f_measure.to_string(),
                        ],
                    );
                }
            }
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

/// First column left-aligned, the rest right-aligned, two spaces apart.
fn render_grid(headers: &[String], rows: &[Vec<String>]) -> String {
    let width = |s: &str| s.chars().count();
    let mut widths: Vec<usize> = headers.iter().map(|h| width(h)).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(width(cell));
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let mut text = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            let pad = " ".repeat(w - width(cell));
            if i == 0 {
                text.push_str(cell);
                text.push_str(&pad);
            } else {
                text.push_str("  ");
                text.push_str(&pad);
                text.push_str(cell);
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(headers);
    for row in rows {
        line(row);
    }
    out
}

fn render_table(sections: &[MetricSection]) -> String {
    let mut out = String::new();
    for (i, section) in sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let name = section.metric.display_name();
        match &section.comparison {
            Some(deltas) => {
                let headers = vec![
                    "System".to_owned(),
                    format!("Lemma Based {name} F-Measure"),
                    format!("Native {name} F-Measure"),
                    "Delta".to_owned(),
                ];
                let rows: Vec<Vec<String>> = deltas
                    .iter()
                    .map(|d| {
                        vec![
                            d.system.clone(),
                            display(d.variant_f),
                            display(d.base_f),
                            format!("{:+.4}", d.delta),
                        ]
                    })
                    .collect();
                out.push_str(&render_grid(&headers, &rows));
            }
            None => {
                let _ = writeln!(out, "{name}");
                let headers = ["System", "Precision", "Recall", "F-Measure"].map(String::from);
                let rows: Vec<Vec<String>> = section
                    .reports
                    .iter()
                    .map(|r| {
                        vec![
                            r.system.clone(),
                            display(r.precision),
                            display(r.recall),
                            display(r.f_measure),
                        ]
                    })
                    .collect();
                out.push_str(&render_grid(&headers, &rows));
            }
        }
    }
    out
}

pub fn render(sections: &[MetricSection], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => render_json(sections),
        OutputFormat::Csv => render_csv(sections),
        OutputFormat::Table => render_table(sections),
    }
}

/// Renders ranked reports, one section per metric in order of first
/// appearance.
pub fn emit_report(reports: &[SystemReport], format: OutputFormat) -> String {
    let mut sections: Vec<MetricSection> = Vec::new();
    for report in reports {
        match sections
            .iter_mut()
            .find(|s| s.metric == report.config.metric)
        {
            Some(section) => section.reports.push(report.clone()),
            None => sections.push(MetricSection {
                metric: report.config.metric,
                reports: vec![report.clone()],
                comparison: None,
            }),
        }
    }
    render(&sections, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Aggregation, TopicScore};
    use crate::rouge::RougeScore;

    fn report(system: &str, f: f64) -> SystemReport {
        let score = RougeScore {
            match_count: 1,
            candidate_total: 3,
            reference_total: 3,
            reference_count: 1,
            precision: f,
            recall: f,
            f_measure: f,
        };
        SystemReport {
            system: system.to_owned(),
            metric: "rouge2".to_owned(),
            precision: f,
            recall: f,
            f_measure: f,
            topics: vec![TopicScore {
                topic: "t1".to_owned(),
                score,
            }],
            config: EvalConfig::rouge_n(2),
            aggregation: Aggregation::Macro,
        }
    }

    fn table3() -> Vec<SystemReport> {
        vec![
            report("CLASSY1", 0.1529),
            report("TALN_UPF1", 0.1326),
            report("CIST1", 0.1279),
            report("UoEssex1", 0.1165),
            report("UBSummarizer1", 0.0915),
        ]
    }

    #[test]
    fn csv_single_report() {
        let out = emit_report(&[report("A", 1.0 / 3.0)], OutputFormat::Csv);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "system,metric,precision,recall,f");
        assert!(lines[1].starts_with("A,rouge2,0.3333333333333333,"));
    }

    #[test]
    fn csv_quotes_awkward_ids() {
        let out = emit_report(&[report("a,b", 0.5)], OutputFormat::Csv);
        assert!(out.lines().nth(1).unwrap().starts_with("\"a,b\",rouge2"));
    }

    #[test]
    fn json_round_trips_scores() {
        let reports = vec![report("A", 1.0 / 3.0), report("B", 0.1)];
        let out = emit_report(&reports, OutputFormat::Json);
        let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
        let systems = parsed["metrics"][0]["systems"].as_array().unwrap();
        assert_eq!(systems[0]["f_measure"].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(systems[0]["display"]["f_measure"], "0.3333");
        assert_eq!(systems[1]["precision"].as_f64().unwrap(), 0.1);
        assert_eq!(parsed["metrics"][0]["metric"], "rouge2");
        let keys: Vec<&String> = systems[0].as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            [
                "system",
                "precision",
                "recall",
                "f_measure",
                "display",
                "topics"
            ]
        );
    }

    #[test]
    fn table_ranks_like_the_input() {
        let out = emit_report(&table3(), OutputFormat::Table);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "Rouge2");
        assert!(lines[1].starts_with("System"));
        assert_eq!(lines.len(), 7);
        assert!(lines[2].starts_with("CLASSY1") && lines[2].ends_with("0.1529"));
        assert!(lines[6].starts_with("UBSummarizer1") && lines[6].ends_with("0.0915"));
        let widths: Vec<usize> = lines[1..].iter().map(|l| l.chars().count()).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "{widths:?}");
    }

    #[test]
    fn comparison_table_headers() {
        let section = MetricSection {
            metric: Metric::RougeN { n: 2 },
            reports: table3(),
            comparison: Some(vec![ConfigDelta {
                system: "CLASSY1".to_owned(),
                base_f: 0.1442,
                variant_f: 0.1529,
                delta: 0.1529 - 0.1442,
            }]),
        };
        let out = render(std::slice::from_ref(&section), OutputFormat::Table);
        let header = out.lines().next().unwrap();
        assert!(header.contains("Lemma Based Rouge2 F-Measure"));
        assert!(header.contains("Native Rouge2 F-Measure"));
        let row: Vec<&str> = out.lines().nth(1).unwrap().split_whitespace().collect();
        assert_eq!(row, ["CLASSY1", "0.1529", "0.1442", "+0.0087"]);

        let csv = render(std::slice::from_ref(&section), OutputFormat::Csv);
        assert_eq!(
            csv.lines().next().unwrap(),
            "system,metric,lemma_f,native_f,delta"
        );
    }

    #[test]
    fn formats_agree_on_values() {
        let reports = table3();
        let table = emit_report(&reports, OutputFormat::Table);
        let csv = emit_report(&reports, OutputFormat::Csv);
        let json: serde_json::Value =
            serde_json::from_str(&emit_report(&reports, OutputFormat::Json)).unwrap();
        for (i, r) in reports.iter().enumerate() {
            let shown = display(r.f_measure);
            assert!(table.lines().nth(i + 2).unwrap().ends_with(&shown));
            let csv_f: f64 = csv
                .lines()
                .nth(i + 1)
                .unwrap()
                .rsplit(',')
                .next()
                .unwrap()
                .parse()
                .unwrap();
            assert_eq!(display(csv_f), shown);
            assert_eq!(
                json["metrics"][0]["systems"][i]["display"]["f_measure"],
                shown.as_str()
            );
        }
    }
}
