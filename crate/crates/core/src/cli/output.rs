use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{mean_std, MetricRow};

pub const METRICS_HEADER: &str = "index,phase,step,sim_time_ms,pse,squared_error,baseline_pse,predicted,label,labeled,update_events,spike_counts";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn joined(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

pub fn format_metrics_csv(rows: &[MetricRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.phase,
            r.step,
            r.sim_time_ms,
            opt(r.pse),
            opt(r.squared_error),
            opt(r.baseline_pse),
            opt(r.predicted),
            opt(r.label),
            u8::from(r.labeled),
            joined(&r.update_events),
            joined(&r.spike_counts),
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Metrics CSV with a header row; multi-layer counters are `;`-separated.
pub fn write_metrics_csv(rows: &[MetricRow], path: &Path) -> Result<()> {
    fs::write(path, format_metrics_csv(rows))?;
    Ok(())
}

/// One row per vector: `label,c_1,...,c_n`.
pub fn export_embeddings(vectors: &[Vec<f64>], labels: &[usize], path: &Path) -> Result<()> {
    if vectors.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            context: "embedding labels",
            expected: vectors.len(),
            found: labels.len(),
        });
    }
    let dim = vectors.first().map_or(0, Vec::len);
    let mut out = String::from("label");
    for i in 1..=dim {
        write!(out, ",c_{i}").unwrap();
    }
    out.push('\n');
    for (v, y) in vectors.iter().zip(labels) {
        out.push_str(&y.to_string());
        for c in v {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// `metric,mean,std,trials,values` with per-trial values `;`-separated.
pub fn write_summary(per_trial: &[Vec<(String, f64)>], path: &Path) -> Result<()> {
    let mut out = String::from("metric,mean,std,trials,values\n");
    if let Some(first) = per_trial.first() {
        for (k, (name, _)) in first.iter().enumerate() {
            let values: Vec<f64> = per_trial.iter().map(|t| t[k].1).collect();
            let (mean, std) = mean_std(&values);
            let listed = values.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            writeln!(out, "{name},{mean},{std},{},{listed}", values.len()).unwrap();
        }
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: usize) -> MetricRow {
        MetricRow {
            index: i,
            step: 10 * i as u64,
            sim_time_ms: 2.5 * i as f64,
            phase: "train",
            pse: Some(0.5),
            squared_error: Some(0.25),
            baseline_pse: None,
            predicted: Some(1),
            label: None,
            labeled: false,
            update_events: vec![3, 1],
            spike_counts: vec![10, 4],
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(format_metrics_csv(&[]), format!("{METRICS_HEADER}\n"));
    }

    #[test]
    fn row_layout() {
        let text = format_metrics_csv(&[row(1)]);
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line, "1,train,10,2.5,0.5,0.25,,1,,0,3;1,10;4");
        assert_eq!(
            line.split(',').count(),
            METRICS_HEADER.split(',').count()
        );
    }

    #[test]
    fn embeddings_have_label_plus_dim_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        export_embeddings(&[vec![0.1, 0.2, 0.3], vec![0.0, 0.0, 1.0]], &[4, 7], &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), 4);
        }
        assert!(export_embeddings(&[vec![1.0]], &[], &p).is_err());
    }

    #[test]
    fn unwritable_path_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("missing").join("m.csv");
        assert!(write_metrics_csv(&[], &p).is_err());
    }

    #[test]
    fn summary_statistics() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let trials = vec![
            vec![("acc".to_string(), 1.0)],
            vec![("acc".to_string(), 0.5)],
        ];
        write_summary(&trials, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("acc,0.75,0.35355"));
    }
}
