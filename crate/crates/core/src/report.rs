//! CSV / JSON writers for run artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::calibration::{CalibrationResult, CellScore};
use crate::data_ingest::{Day, ReferenceSeries};
use crate::engine::{EnsembleResult, EventReport, SensitivityRow};
use crate::market::Fill;
use crate::metrics::MetricPoint;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn create(path: &Path) -> Result<BufWriter<File>, ReportError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, ReportError> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn metric_record(label: &str, p: &MetricPoint) -> [String; 5] {
    [
        label.to_string(),
        p.gini.to_string(),
        p.one_minus_nse.to_string(),
        p.whale_share.to_string(),
        p.n_agents.to_string(),
    ]
}

/// `t,gini,one_minus_nse,whale_share,n_agents`; the pre-trade snapshot is
/// labelled `<t_start>_pre`.
pub fn write_metrics_csv(
    path: &Path,
    pre_trade: &MetricPoint,
    series: &[MetricPoint],
) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "gini", "one_minus_nse", "whale_share", "n_agents"])?;
    w.write_record(metric_record(&format!("{}_pre", pre_trade.t), pre_trade))?;
    for p in series {
        w.write_record(metric_record(&p.t.to_string(), p))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_ensemble_csv(path: &Path, ens: &EnsembleResult) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "t",
        "gini_mean",
        "gini_std",
        "nse_mean",
        "nse_std",
        "whale_mean",
        "whale_std",
        "n_agents_mean",
    ])?;
    let pre = format!("{}_pre", ens.pre_trade.t);
    let rows =
        std::iter::once((pre, &ens.pre_trade)).chain(ens.days.iter().map(|d| (d.t.to_string(), d)));
    for (label, d) in rows {
        w.write_record([
            label,
            d.gini_mean.to_string(),
            d.gini_std.to_string(),
            d.nse_mean.to_string(),
            d.nse_std.to_string(),
            d.whale_mean.to_string(),
            d.whale_std.to_string(),
            d.n_agents_mean.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Final whale counts per replicate:
/// `replicate,t,whales,holders,n_agents,whale_share`.
pub fn write_whales_csv(path: &Path, ens: &EnsembleResult) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "replicate",
        "t",
        "whales",
        "holders",
        "n_agents",
        "whale_share",
    ])?;
    for r in &ens.replicates {
        let p = r.final_point();
        w.write_record([
            r.replicate.to_string(),
            p.t.to_string(),
            p.whales.k.to_string(),
            p.whales.n.to_string(),
            p.n_agents.to_string(),
            p.whale_share.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_fills_csv(path: &Path, t: Day, fills: &[Fill]) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "buyer", "seller", "tokens", "fiat", "price"])?;
    for f in fills {
        w.write_record([
            t.to_string(),
            f.buyer.to_string(),
            f.seller.to_string(),
            f.tokens.to_string(),
            f.fiat.to_string(),
            f.price.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn score_record(s: &CellScore) -> Vec<String> {
    let c = &s.cell;
    vec![
        c.th_h.to_string(),
        c.th_l.to_string(),
        c.p_t_fgi_e.to_string(),
        c.p_t_w_h.to_string(),
        c.p_t_fgi_n.to_string(),
        c.p_t_w_l.to_string(),
        c.dh_share.to_string(),
        c.p_dh_buy.to_string(),
        s.rmse.to_string(),
        s.mape.to_string(),
        s.mape_skipped.to_string(),
        s.mean_std.to_string(),
        s.replicates.to_string(),
    ]
}

pub fn write_calibration_table(path: &Path, result: &CalibrationResult) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "th_h",
        "th_l",
        "p_t_fgi_e",
        "p_t_w_h",
        "p_t_fgi_n",
        "p_t_w_l",
        "dh_share",
        "p_dh_buy",
        "rmse",
        "mape",
        "mape_skipped",
        "mean_std",
        "replicates",
    ])?;
    for s in &result.table {
        w.write_record(score_record(s))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_event_csv(path: &Path, report: &EventReport) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "whale_share_simulated", "whale_share_reference"])?;
    for r in &report.rows {
        w.write_record([
            r.t.to_string(),
            r.simulated.to_string(),
            r.reference.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_sensitivity_csv(path: &Path, rows: &[SensitivityRow]) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "dh_share",
        "t",
        "gini_simulated",
        "gini_reference",
        "delta_gini",
        "delta_gini_pct",
        "nse_simulated",
        "nse_reference",
        "delta_nse",
        "delta_nse_pct",
    ])?;
    for r in rows {
        w.write_record([
            r.dh_share.to_string(),
            r.t.to_string(),
            r.gini_simulated.to_string(),
            r.gini_reference.to_string(),
            r.delta_gini.to_string(),
            r.delta_gini_pct.to_string(),
            r.nse_simulated.to_string(),
            opt(r.nse_reference),
            opt(r.delta_nse),
            opt(r.delta_nse_pct),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Which ensemble statistic a figure series plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureMetric {
    Gini,
    Nse,
}

/// One column per labelled ensemble (mean and std) plus an optional
/// observed column, one row per day.
pub fn write_figure_csv(
    path: &Path,
    metric: FigureMetric,
    series: &[(String, &EnsembleResult)],
    reference: Option<&ReferenceSeries>,
) -> Result<(), ReportError> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    for (label, _) in series {
        header.push(format!("{label}_mean"));
        header.push(format!("{label}_std"));
    }
    if reference.is_some() {
        header.push("reference".into());
    }
    w.write_record(&header)?;
    let Some((_, first)) = series.first() else {
        w.flush().map_err(csv::Error::from)?;
        return Ok(());
    };
    for (i, day) in first.days.iter().enumerate() {
        let mut row = vec![day.t.to_string()];
        for (_, ens) in series {
            let d = &ens.days[i];
            let (m, s) = match metric {
                FigureMetric::Gini => (d.gini_mean, d.gini_std),
                FigureMetric::Nse => (d.nse_mean, d.nse_std),
            };
            row.push(m.to_string());
            row.push(s.to_string());
        }
        if let Some(r) = reference {
            let v = r.get(day.t).and_then(|p| match metric {
                FigureMetric::Gini => Some(p.gini),
                FigureMetric::Nse => p.one_minus_nse,
            });
            row.push(opt(v));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
