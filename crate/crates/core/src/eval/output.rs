use std::fmt::Write;

use super::{Ablation, CurvePoint, EvalReport, ExperimentResult, FieldScore};

fn width(report: &EvalReport) -> usize {
    report.fields.names().iter().map(String::len).max().unwrap_or(0).max(5)
}

fn score_line(out: &mut String, label: &str, s: &FieldScore, w: usize) {
    let _ = writeln!(out, "{label:<w$}  {:>6.3}  {:>6.3}  {:>6.3}", s.precision, s.recall, s.f1);
}

/// Aligned per-field table with a closing macro-average row.
pub fn report_table(report: &EvalReport) -> String {
    let w = width(report);
    let mut out = String::new();
    let _ = writeln!(out, "{:<w$}  {:>6}  {:>6}  {:>6}", "field", "P", "R", "F1");
    for (name, s) in report.fields.names().iter().zip(&report.per_field) {
        score_line(&mut out, name, s, w);
    }
    score_line(&mut out, "macro", &report.macro_avg, w);
    out
}

/// Per-run rows followed by the mean over runs.
pub fn report_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("field,precision,recall,f1,run\n");
    let mut rows = |r: &EvalReport, run: &str| {
        for (name, s) in r.fields.names().iter().zip(&r.per_field) {
            let _ = writeln!(out, "{name},{},{},{},{run}", s.precision, s.recall, s.f1);
        }
        let m = &r.macro_avg;
        let _ = writeln!(out, "macro,{},{},{},{run}", m.precision, m.recall, m.f1);
    };
    for (i, run) in result.runs.iter().enumerate() {
        rows(&run.report, &i.to_string());
    }
    rows(&result.average, "mean");
    out
}

pub fn counts_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("field,run,produced,correct,total\n");
    for (i, run) in result.runs.iter().enumerate() {
        let r = &run.report;
        for (name, s) in r.fields.names().iter().zip(&r.per_field) {
            let c = s.counts;
            let _ = writeln!(out, "{name},{i},{},{},{}", c.produced, c.correct, c.total);
        }
    }
    out
}

/// One row per ablation with F1 per field.
pub fn ablation_table(rows: &[(Ablation, ExperimentResult)]) -> String {
    let mut out = String::new();
    let Some((_, first)) = rows.first() else { return out };
    let names = first.average.fields.names();
    let fw = names.iter().map(String::len).max().unwrap_or(0).max(6);
    let _ = write!(out, "{:<12}", "model");
    for n in names {
        let _ = write!(out, "  {n:>fw$}");
    }
    let _ = writeln!(out, "  {:>fw$}", "macro");
    for (a, r) in rows {
        let _ = write!(out, "{:<12}", a.label());
        for s in &r.average.per_field {
            let _ = write!(out, "  {:>fw$.3}", s.f1);
        }
        let _ = writeln!(out, "  {:>fw$.3}", r.average.macro_avg.f1);
    }
    out
}

pub fn ablation_csv(rows: &[(Ablation, ExperimentResult)]) -> String {
    let mut out = String::from("ablation,field,precision,recall,f1\n");
    for (a, r) in rows {
        let avg = &r.average;
        for (name, s) in avg.fields.names().iter().zip(&avg.per_field) {
            let _ = writeln!(out, "{},{name},{},{},{}", a.label(), s.precision, s.recall, s.f1);
        }
        let m = &avg.macro_avg;
        let _ = writeln!(out, "{},macro,{},{},{}", a.label(), m.precision, m.recall, m.f1);
    }
    out
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("fraction,precision,recall,f1\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.fraction, p.precision, p.recall, p.f1);
    }
    out
}
