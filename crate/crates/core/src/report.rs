//! Plain-text summaries and plot tables. Fractions are printed with four
//! decimals; meters, radians, m/s and seconds with two.

use std::fmt::Write;

use crate::detection::{DetectionMetrics, StudyRow};
use crate::model::TpMetric;
use crate::tracking::TrackingMetrics;

fn is_fraction(metric: TpMetric) -> bool {
    matches!(metric, TpMetric::Ase | TpMetric::Aae)
}

fn tp_cell(metric: TpMetric, value: Option<f64>) -> String {
    match value {
        None => "N/A".to_string(),
        Some(v) if is_fraction(metric) => format!("{v:.4}"),
        Some(v) => format!("{v:.2}"),
    }
}

fn join_classes<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

pub fn detection_table(m: &DetectionMetrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "matcher: {}", m.matcher);
    let _ = writeln!(out, "mAP:  {:.4}", m.mean_ap);
    for metric in TpMetric::ALL {
        let v = m.mean_tp.get(&metric).copied();
        let _ = writeln!(out, "m{}: {}", metric.label(), tp_cell(metric, v));
    }
    let _ = writeln!(out, "NDS:  {:.4}", m.nds);
    let _ = writeln!(out);
    let _ = write!(out, "{:<22}{:>8}", "Object Class", "AP");
    for metric in TpMetric::ALL {
        let _ = write!(out, "{:>8}", metric.label());
    }
    let _ = writeln!(out);
    for (class, row) in &m.per_category {
        let _ = write!(out, "{:<22}{:>8.4}", class.as_str(), row.mean_ap);
        for metric in TpMetric::ALL {
            let v = row.tp_errors.get(&metric).copied().flatten();
            let _ = write!(out, "{:>8}", tp_cell(metric, v));
        }
        let _ = writeln!(out);
    }
    if !m.skipped_categories.is_empty() {
        let _ = writeln!(out, "\nno ground truth: {}", join_classes(&m.skipped_categories));
    }
    out
}

pub fn tracking_table(m: &TrackingMetrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "AMOTA: {:.4}", m.amota);
    let _ = writeln!(out, "AMOTP: {:.2} m", m.amotp);
    let _ = writeln!(out, "MOTA:  {:.4}", m.mota);
    let _ = writeln!(out, "MOTP:  {:.2} m", m.motp);
    let _ = writeln!(out, "FAF:   {:.4}", m.faf);
    let _ = writeln!(out, "TID:   {:.2} s", m.tid);
    let _ = writeln!(out, "LGD:   {:.2} s", m.lgd);
    let _ = writeln!(
        out,
        "MT {}  ML {}  FP {}  FN {}  IDS {}  FRAG {}",
        m.mt, m.ml, m.fp, m.fn_, m.ids, m.frag
    );
    let _ = writeln!(out);
    let header = [
        "AMOTA", "AMOTP", "MOTA", "MOTP", "FAF", "MT", "ML", "FP", "FN", "IDS", "FRAG", "TID", "LGD",
    ];
    let _ = write!(out, "{:<14}", "Object Class");
    for h in header {
        let _ = write!(out, "{h:>8}");
    }
    let _ = writeln!(out);
    let mut unachieved = Vec::new();
    for (class, c) in &m.per_category {
        let b = &c.best;
        let _ = writeln!(
            out,
            "{:<14}{:>8.4}{:>8.2}{:>8.4}{:>8.2}{:>8.4}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8.2}{:>8.2}",
            class.as_str(),
            c.amota,
            c.amotp,
            b.mota,
            b.motp,
            b.faf,
            b.mt,
            b.ml,
            b.fp,
            b.fn_,
            b.ids,
            b.frag,
            b.tid,
            b.lgd
        );
        if !b.achieved {
            unachieved.push(*class);
        }
    }
    if !unachieved.is_empty() {
        let _ = writeln!(out, "\nno recall target reached: {}", join_classes(&unachieved));
    }
    if !m.skipped_categories.is_empty() {
        let _ = writeln!(out, "no ground truth: {}", join_classes(&m.skipped_categories));
    }
    out
}

/// `category,matcher,threshold,ap` rows; numbers in shortest round-trip form.
pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("category,matcher,threshold,ap\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.category, r.matcher, r.threshold, r.ap);
    }
    out
}
