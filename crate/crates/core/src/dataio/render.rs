use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::TopicEntry;
use crate::agreement::{AgreementRecord, AgreementTable, Averages, Score};
use crate::evalmetrics::{PrecisionReport, Variant};
use crate::reliability::{CleaningReport, DropReason, EvalReport, FilterReport, StudyReport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::invalid(format!("unknown format {other:?}"))),
        }
    }
}

/// Rounds half away from zero. Values within 1e-6 of a half step (in units
/// of the last kept decimal) count as the half step, so binary noise such as
/// `0.54499999999` still rounds to `0.55`.
pub fn round_half_away(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = x * scale;
    let snapped = (scaled * 1e6).round() / 1e6;
    snapped.round() / scale
}

/// Table-style number: rounded, without a leading zero (`.525`, `-.003`).
pub fn display_decimal(x: f64, decimals: u32) -> String {
    let rounded = round_half_away(x, decimals);
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    let text = format!("{rounded:.prec$}", prec = decimals as usize);
    if let Some(rest) = text.strip_prefix("0.") {
        format!(".{rest}")
    } else if let Some(rest) = text.strip_prefix("-0.") {
        format!("-.{rest}")
    } else {
        text
    }
}

const UNDEFINED: &str = "n/a";

fn score_cell(score: Score, decimals: u32) -> String {
    score
        .value()
        .map_or_else(|| UNDEFINED.to_owned(), |v| display_decimal(v, decimals))
}

fn opt_cell(value: Option<f64>, decimals: u32) -> String {
    value.map_or_else(String::new, |v| display_decimal(v, decimals))
}

fn machine(value: f64) -> String {
    value.to_string()
}

fn machine_score(score: Score) -> String {
    match score {
        Score::Defined(v) => machine(v),
        Score::Undefined(r) => r.code().to_owned(),
    }
}

/// One line of the long-format CSV shared by every report.
#[derive(Debug, Default, Serialize)]
pub struct CsvRow {
    pub section: &'static str,
    pub session: String,
    pub topic: String,
    pub assessor: String,
    pub service: String,
    pub variant: String,
    pub field: String,
    pub value: String,
}

fn table_row(out: &mut String, cells: &[String]) {
    out.push('|');
    for c in cells {
        let _ = write!(out, " {c} |");
    }
    out.push('\n');
}

/// `align` holds one `l` or `r` per leading column; the rest are right-aligned.
fn table_header(out: &mut String, cells: &[String], align: &str) {
    table_row(out, cells);
    out.push('|');
    for i in 0..cells.len() {
        out.push_str(if align.as_bytes().get(i) == Some(&b'l') {
            "---|"
        } else {
            "---:|"
        });
    }
    out.push('\n');
}

/// Markdown and long-format CSV renderings. JSON goes through serde.
pub trait Render {
    fn markdown(&self) -> String;
    fn csv_rows(&self, rows: &mut Vec<CsvRow>);
}

pub fn write_report<T: Render + Serialize>(
    value: &T,
    format: Format,
    out: &mut dyn Write,
) -> Result<()> {
    let io = |source| Error::Io {
        path: "<output>".into(),
        source,
    };
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(value)?;
            writeln!(out, "{text}").map_err(io)?;
        }
        Format::Markdown => out.write_all(value.markdown().as_bytes()).map_err(io)?,
        Format::Csv => {
            let mut rows = Vec::new();
            value.csv_rows(&mut rows);
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                writer
                    .serialize(row)
                    .map_err(|e| Error::invalid(format!("csv: {e}")))?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| Error::invalid(format!("csv: {e}")))?;
            if rows.is_empty() {
                writeln!(
                    out,
                    "section,session,topic,assessor,service,variant,field,value"
                )
                .map_err(io)?;
            }
            out.write_all(&bytes).map_err(io)?;
        }
    }
    Ok(())
}

impl Render for CleaningReport {
    fn markdown(&self) -> String {
        let mut out = String::from("## Assessor cleaning\n\n");
        let _ = writeln!(
            out,
            "Maximum missing rate {}, pool depth {}. {} assessor(s) dropped, {} set(s) emptied.\n",
            machine(self.max_missing_rate),
            self.pool_depth,
            self.dropped_assessors.len(),
            self.emptied_sets.len()
        );
        if !self.dropped_assessors.is_empty() {
            table_header(
                &mut out,
                &["Session", "Topic", "Assessor", "Missing", "Pool", "Rate"].map(String::from),
                "lll",
            );
            for d in &self.dropped_assessors {
                table_row(
                    &mut out,
                    &[
                        d.session.to_string(),
                        d.topic.to_string(),
                        d.assessor.to_string(),
                        d.missing.to_string(),
                        d.pool_size.to_string(),
                        display_decimal(d.missing_rate, 3),
                    ],
                );
            }
            out.push('\n');
        }
        if !self.emptied_sets.is_empty() {
            out.push_str("Emptied sets:");
            for key in &self.emptied_sets {
                let _ = write!(out, " {}/{}", key.session, key.topic);
            }
            out.push_str("\n\n");
        }
        out
    }

    fn csv_rows(&self, rows: &mut Vec<CsvRow>) {
        for p in &self.pools {
            rows.push(CsvRow {
                section: "pool",
                session: p.session.to_string(),
                topic: p.topic.to_string(),
                field: "documents".into(),
                value: p.documents.to_string(),
                ..Default::default()
            });
        }
        for d in &self.dropped_assessors {
            rows.push(CsvRow {
                section: "dropped-assessor",
                session: d.session.to_string(),
                topic: d.topic.to_string(),
                assessor: d.assessor.to_string(),
                field: "missing_rate".into(),
                value: machine(d.missing_rate),
                ..Default::default()
            });
        }
        for key in &self.emptied_sets {
            rows.push(CsvRow {
                section: "emptied-set",
                session: key.session.to_string(),
                topic: key.topic.to_string(),
                field: "assessors".into(),
                value: "0".into(),
                ..Default::default()
            });
        }
    }
}

fn averages_cells(a: Option<&Averages>) -> [String; 3] {
    match a {
        Some(a) => [
            opt_cell(a.assessors, 1),
            opt_cell(a.alpha, 3),
            opt_cell(a.kappa, 3),
        ],
        None => Default::default(),
    }
}

fn record_fields(r: &AgreementRecord) -> Vec<(&'static str, String)> {
    let mut fields = vec![
        ("assessors", r.assessor_count.to_string()),
        ("kappa", machine_score(r.kappa)),
        ("alpha", machine_score(r.alpha)),
    ];
    if let Some(s) = r.percent_agreement {
        fields.push(("percent_agreement", machine_score(s)));
    }
    if let Some(s) = r.jaccard_mean {
        fields.push(("jaccard_mean", machine_score(s)));
    }
    if let Some(v) = r.observed_disagreement {
        fields.push(("observed_disagreement", machine(v)));
    }
    if let Some(v) = r.expected_disagreement {
        fields.push(("expected_disagreement", machine(v)));
    }
    if let Some(v) = r.fleiss_excluded_documents {
        fields.push(("fleiss_excluded_documents", v.to_string()));
    }
    if let Some(b) = r.kappa_bands {
        fields.push(("kappa_landis_koch", b.landis_koch.to_string()));
        fields.push(("kappa_greve_wentura", b.greve_wentura.to_string()));
    }
    if let Some(b) = r.alpha_band {
        fields.push(("alpha_band", b.to_string()));
    }
    fields
}

impl Render for AgreementTable {
    fn markdown(&self) -> String {
        let mut out = String::from("## Inter-assessor agreement\n\n");
        let mut header = vec!["Topic".to_owned()];
        for s in &self.sessions {
            header.extend([format!("{s} n"), format!("{s} α"), format!("{s} κ")]);
        }
        header.extend(["avg. n", "avg. α", "avg. κ"].map(String::from));
        table_header(&mut out, &header, "l");
        for (topic, avg) in self.topics.iter().zip(&self.topic_averages) {
            let mut row = vec![topic.to_string()];
            for s in &self.sessions {
                match self.record(s, topic) {
                    Some(r) => row.extend([
                        r.assessor_count.to_string(),
                        score_cell(r.alpha, 3),
                        score_cell(r.kappa, 3),
                    ]),
                    None => row.extend([String::new(), String::new(), String::new()]),
                }
            }
            row.extend(averages_cells(Some(avg)));
            table_row(&mut out, &row);
        }
        let mut row = vec!["avg.".to_owned()];
        for avg in &self.session_averages {
            row.extend(averages_cells(Some(avg)));
        }
        row.extend(averages_cells(Some(&self.overall)));
        table_row(&mut out, &row);

        out.push_str("\n### Pearson correlation of α and κ\n\n");
        table_header(&mut out, &["Scope", "Pairs", "r"].map(String::from), "l");
        for c in &self.correlations {
            table_row(
                &mut out,
                &[c.scope.clone(), c.pairs.to_string(), score_cell(c.value, 3)],
            );
        }

        out.push_str("\n### Per-set detail\n\n");
        table_header(
            &mut out,
            &[
                "Session",
                "Topic",
                "n",
                "κ",
                "Landis–Koch",
                "Greve–Wentura",
                "α",
                "α band",
                "% agree",
                "Jaccard",
                "D_o",
                "D_e",
                "Excluded docs",
            ]
            .map(String::from),
            "llrrllrl",
        );
        for r in &self.records {
            let opt_score = |s: Option<Score>| s.map_or_else(String::new, |s| score_cell(s, 3));
            table_row(
                &mut out,
                &[
                    r.session.to_string(),
                    r.topic.to_string(),
                    r.assessor_count.to_string(),
                    score_cell(r.kappa, 3),
                    r.kappa_bands
                        .map_or_else(String::new, |b| b.landis_koch.to_string()),
                    r.kappa_bands
                        .map_or_else(String::new, |b| b.greve_wentura.to_string()),
                    score_cell(r.alpha, 3),
                    r.alpha_band.map_or_else(String::new, |b| b.to_string()),
                    opt_score(r.percent_agreement),
                    opt_score(r.jaccard_mean),
                    opt_cell(r.observed_disagreement, 3),
                    opt_cell(r.expected_disagreement, 3),
                    r.fleiss_excluded_documents
                        .map_or_else(String::new, |n| n.to_string()),
                ],
            );
        }
        out.push('\n');
        out
    }

    fn csv_rows(&self, rows: &mut Vec<CsvRow>) {
        for r in &self.records {
            for (field, value) in record_fields(r) {
                rows.push(CsvRow {
                    section: "agreement",
                    session: r.session.to_string(),
                    topic: r.topic.to_string(),
                    field: field.into(),
                    value,
                    ..Default::default()
                });
            }
        }
        let mut push_avg = |section: &'static str, session: String, topic: String, a: &Averages| {
            for (field, value) in [
                ("assessors", a.assessors),
                ("alpha", a.alpha),
                ("kappa", a.kappa),
            ] {
                rows.push(CsvRow {
                    section,
                    session: session.clone(),
                    topic: topic.clone(),
                    field: field.into(),
                    value: value.map(machine).unwrap_or_default(),
                    ..Default::default()
                });
            }
        };
        for a in &self.session_averages {
            push_avg("session-average", a.key.clone(), String::new(), a);
        }
        for a in &self.topic_averages {
            push_avg("topic-average", String::new(), a.key.clone(), a);
        }
        push_avg(
            "overall-average",
            String::new(),
            String::new(),
            &self.overall,
        );
        for c in &self.correlations {
            rows.push(CsvRow {
                section: "correlation",
                session: c.scope.clone(),
                field: "pearson_alpha_kappa".into(),
                value: machine_score(c.value),
                ..Default::default()
            });
        }
    }
}

fn reason_code(reason: DropReason) -> &'static str {
    match reason {
        DropReason::BelowThreshold => "below-threshold",
        DropReason::UndefinedScore => "undefined-score",
    }
}

impl Render for FilterReport {
    fn markdown(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            let _ = writeln!(
                out,
                "## Filter: {} ≥ {}\n\n{} set(s) kept, {} dropped.\n",
                o.measure.name(),
                machine(o.threshold),
                o.kept_count(),
                o.dropped_count()
            );
            if o.dropped_sets.is_empty() {
                continue;
            }
            table_header(
                &mut out,
                &["Session", "Topic", "Score", "Reason"].map(String::from),
                "llrl",
            );
            for d in &o.dropped_sets {
                table_row(
                    &mut out,
                    &[
                        d.session.to_string(),
                        d.topic.to_string(),
                        d.score
                            .map_or_else(|| UNDEFINED.to_owned(), |v| display_decimal(v, 3)),
                        reason_code(d.reason).to_owned(),
                    ],
                );
            }
            out.push('\n');
        }
        out
    }

    fn csv_rows(&self, rows: &mut Vec<CsvRow>) {
        for o in &self.outcomes {
            rows.push(CsvRow {
                section: "threshold",
                variant: o.measure.name().into(),
                field: "min".into(),
                value: machine(o.threshold),
                ..Default::default()
            });
            for k in &o.kept_sets {
                rows.push(CsvRow {
                    section: "filter",
                    session: k.session.to_string(),
                    topic: k.topic.to_string(),
                    variant: o.measure.name().into(),
                    field: "decision".into(),
                    value: "kept".into(),
                    ..Default::default()
                });
            }
            for d in &o.dropped_sets {
                rows.push(CsvRow {
                    section: "filter",
                    session: d.session.to_string(),
                    topic: d.topic.to_string(),
                    variant: o.measure.name().into(),
                    field: "decision".into(),
                    value: reason_code(d.reason).into(),
                    ..Default::default()
                });
            }
        }
    }
}

fn variant_tag(v: Variant) -> &'static str {
    match v {
        Variant::Unfiltered => "o",
        Variant::KappaFiltered => "κ",
        Variant::AlphaFiltered => "α",
    }
}

impl Render for EvalReport {
    fn markdown(&self) -> String {
        let mut out = format!("## Precision@{}\n\n", self.k);
        if self.reports.is_empty() {
            return out;
        }
        let legend: Vec<String> = self
            .reports
            .iter()
            .map(|r| format!("({}) {}", variant_tag(r.variant), r.variant))
            .collect();
        let _ = writeln!(out, "Columns: {}.\n", legend.join(", "));
        let mut header = vec!["Topic".to_owned()];
        for r in &self.reports {
            header.extend(
                r.services
                    .iter()
                    .map(|s| format!("{s} ({})", variant_tag(r.variant))),
            );
        }
        table_header(&mut out, &header, "l");
        let topics = &self.reports[0].topics;
        for topic in topics {
            let mut row = vec![topic.to_string()];
            for r in &self.reports {
                row.extend(r.services.iter().map(|s| opt_cell(r.cell(topic, s), 2)));
            }
            table_row(&mut out, &row);
        }
        let mut row = vec!["avg. prec.".to_owned()];
        for r in &self.reports {
            row.extend(r.services.iter().map(|s| opt_cell(r.mean(s), 2)));
        }
        table_row(&mut out, &row);
        if self
            .reports
            .iter()
            .any(|r| r.rms_error_vs_original.is_some())
        {
            let mut row = vec!["RMSerr(o,f)".to_owned()];
            for r in &self.reports {
                row.extend(r.services.iter().map(|s| opt_cell(r.rms(s), 2)));
            }
            table_row(&mut out, &row);
        }
        out.push('\n');
        out
    }

    fn csv_rows(&self, rows: &mut Vec<CsvRow>) {
        for r in &self.reports {
            precision_rows(r, rows);
        }
    }
}

fn precision_rows(r: &PrecisionReport, rows: &mut Vec<CsvRow>) {
    let field = format!("p@{}", r.k);
    for c in &r.cells {
        rows.push(CsvRow {
            section: "precision",
            topic: c.topic.to_string(),
            service: c.service.clone(),
            variant: r.variant.to_string(),
            field: field.clone(),
            value: machine(c.value),
            ..Default::default()
        });
    }
    for m in &r.per_service_mean {
        rows.push(CsvRow {
            section: "precision-mean",
            service: m.service.clone(),
            variant: r.variant.to_string(),
            field: field.clone(),
            value: m.value.map(machine).unwrap_or_default(),
            ..Default::default()
        });
    }
    for m in r.rms_error_vs_original.iter().flatten() {
        rows.push(CsvRow {
            section: "rms-error",
            service: m.service.clone(),
            variant: r.variant.to_string(),
            field: field.clone(),
            value: m.value.map(machine).unwrap_or_default(),
            ..Default::default()
        });
    }
}

fn topics_markdown(topics: &[TopicEntry]) -> String {
    let mut out = String::from("## Topics\n\n");
    table_header(&mut out, &["Topic", "Title"].map(String::from), "ll");
    for t in topics {
        table_row(&mut out, &[t.id.to_string(), t.title.clone()]);
    }
    out.push('\n');
    out
}

impl Render for StudyReport {
    fn markdown(&self) -> String {
        let t = &self.thresholds;
        let mut out = String::from("# Assessment reliability study\n\n");
        let _ = writeln!(
            out,
            "Thresholds: κ ≥ {}, α ≥ {}, missing rate ≤ {}, pool depth {}, precision@{}.\n",
            machine(t.kappa_min),
            machine(t.alpha_min),
            machine(t.max_missing_rate),
            t.pool_depth,
            self.k
        );
        if !self.topics.is_empty() {
            out.push_str(&topics_markdown(&self.topics));
        }
        if let Some(c) = &self.cleaning {
            out.push_str(&c.markdown());
        }
        out.push_str(&self.agreement.markdown());
        out.push_str(&self.filters.markdown());
        if let Some(p) = &self.precision {
            out.push_str(&p.markdown());
        }
        out
    }

    fn csv_rows(&self, rows: &mut Vec<CsvRow>) {
        let t = &self.thresholds;
        for (field, value) in [
            ("kappa_min", machine(t.kappa_min)),
            ("alpha_min", machine(t.alpha_min)),
            ("max_missing_rate", machine(t.max_missing_rate)),
            ("pool_depth", t.pool_depth.to_string()),
            ("k", self.k.to_string()),
        ] {
            rows.push(CsvRow {
                section: "setting",
                field: field.into(),
                value,
                ..Default::default()
            });
        }
        if let Some(c) = &self.cleaning {
            c.csv_rows(rows);
        }
        self.agreement.csv_rows(rows);
        self.filters.csv_rows(rows);
        if let Some(p) = &self.precision {
            p.csv_rows(rows);
        }
    }
}
