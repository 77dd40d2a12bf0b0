//! Plot-ready data series, one CSV per figure.
//!
//! Series that need columns missing from the table (custom schemas) are
//! skipped rather than failing the whole report.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::Metrics;
use crate::rank::FeatureScore;
use crate::stats::{
    column_profile, correlation_matrix, correlation_matrix_encoded, crosstab, group_mean,
    histogram, pair_mean, value_counts, CorrelationMatrix,
};
use crate::table::{ColumnKind, DatasetStats, Table};
use crate::transform::{
    apply_transforms, skewness, standardize, Encoder, TransformKind, TransformSpec,
};

pub const HISTOGRAM_BINS: usize = 30;
const TIME_BINS: usize = 20;

/// A named CSV document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FigureFile {
    pub name: String,
    pub csv: String,
}

fn render(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Everything a report needs besides the cleaned table.
#[derive(Clone, Debug, Default)]
pub struct ReportInputs<'a> {
    pub raw_stats: Option<&'a DatasetStats>,
    pub clean_stats: Option<&'a DatasetStats>,
    pub transforms: Option<&'a TransformSpec>,
    pub encoders: &'a [Encoder],
    pub scores: Option<&'a [FeatureScore]>,
    /// Cross-validated metrics of each feature used alone.
    pub per_feature: &'a [(String, Metrics)],
    pub correlation: Option<&'a CorrelationMatrix>,
}

/// Non-target columns that can enter a default correlation matrix: numeric
/// and non-constant.
pub fn default_correlation_columns(t: &Table) -> Vec<String> {
    t.schema()
        .columns()
        .iter()
        .filter(|c| c.kind == ColumnKind::Numeric)
        .filter(|c| {
            let x = t.numeric(&c.name).expect("numeric column");
            x.len() >= 2 && x.windows(2).any(|w| w[0] != w[1])
        })
        .map(|c| c.name.clone())
        .collect()
}

/// Correlation matrix over the default columns, or over every non-target
/// column with categoricals label-encoded when `encode_categoricals` is set.
pub fn default_correlation(t: &Table, encode_categoricals: bool) -> Result<CorrelationMatrix> {
    if encode_categoricals {
        let names: Vec<String> = t
            .schema()
            .names()
            .filter(|n| Some(*n) != t.schema().target())
            .filter(|n| {
                let c = t.column(n).expect("column exists");
                (0..c.len().saturating_sub(1)).any(|r| c.cell_text(r) != c.cell_text(r + 1))
            })
            .map(str::to_owned)
            .collect();
        correlation_matrix_encoded(t, &names)
    } else {
        correlation_matrix(t, &default_correlation_columns(t))
    }
}

type Builder = fn(&Table, &Table, &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>>;

/// Builds every figure series from the cleaned (untransformed) table.
pub fn figure_series(clean: &Table, inputs: &ReportInputs<'_>) -> Result<Vec<FigureFile>> {
    let transformed = match inputs.transforms {
        Some(spec) => apply_transforms(clean, spec)?,
        None => clean.clone(),
    };
    let builders: [Builder; 17] = [
        fig2, fig3, fig4, fig5, fig6, fig7, fig8, counts_fig, fig11, fig12, fig13, fig14, fig15,
        fig16, fig17, fig18, fig19,
    ];
    let mut out = Vec::new();
    for b in builders {
        match b(clean, &transformed, inputs) {
            Ok(Some(files)) => out.extend(files),
            Ok(None) => {}
            Err(Error::UnknownColumn(c)) => log::debug!("figure skipped: no column {c:?}"),
            Err(Error::ColumnKind { column, .. }) => {
                log::debug!("figure skipped: column {column:?} has the wrong kind")
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn one(name: &str, csv: String) -> Result<Option<Vec<FigureFile>>> {
    Ok(Some(vec![FigureFile {
        name: name.to_owned(),
        csv,
    }]))
}

fn fig2(_: &Table, _: &Table, inp: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let rows: Vec<Vec<String>> = [("raw", inp.raw_stats), ("clean", inp.clean_stats)]
        .into_iter()
        .filter_map(|(stage, s)| {
            s.map(|s| {
                vec![
                    stage.to_owned(),
                    s.row_count.to_string(),
                    s.column_count.to_string(),
                    s.duplicate_rows.to_string(),
                    fmt(s.duplicate_fraction),
                    s.missing_cells.to_string(),
                ]
            })
        })
        .collect();
    if rows.is_empty() {
        return Ok(None);
    }
    one(
        "fig2_stats.csv",
        render(
            &[
                "stage",
                "rows",
                "columns",
                "duplicate_rows",
                "duplicate_fraction",
                "missing_cells",
            ],
            rows,
        )?,
    )
}

fn fig3(clean: &Table, tr: &Table, inp: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let Some(spec) = inp.transforms else {
        return Ok(None);
    };
    let mut rows = Vec::new();
    for (name, kind) in spec {
        let (label, lambda) = match kind {
            TransformKind::Identity => ("identity", None),
            TransformKind::Log1p => ("log1p", None),
            TransformKind::Sqrt => ("sqrt", None),
            TransformKind::YeoJohnson { lambda } => ("yeo_johnson", Some(*lambda)),
        };
        rows.push(vec![
            name.clone(),
            label.to_owned(),
            opt(lambda),
            opt(skewness(clean.numeric(name)?).ok()),
            opt(skewness(tr.numeric(name)?).ok()),
        ]);
    }
    one(
        "fig3_skewness.csv",
        render(
            &[
                "column",
                "transform",
                "lambda",
                "skewness_before",
                "skewness_after",
            ],
            rows,
        )?,
    )
}

fn numeric_names(t: &Table) -> Vec<String> {
    t.schema()
        .columns()
        .iter()
        .filter(|c| c.kind == ColumnKind::Numeric)
        .map(|c| c.name.clone())
        .collect()
}

fn fig4(_: &Table, tr: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    if tr.row_count() < 2 {
        return Ok(None);
    }
    let mut files = Vec::new();
    let mut profiles = Vec::new();
    for name in numeric_names(tr) {
        let x = tr.numeric(&name)?;
        let h = histogram(x, HISTOGRAM_BINS)?;
        let rows = h
            .counts
            .iter()
            .enumerate()
            .map(|(i, c)| vec![fmt(h.edges[i]), fmt(h.edges[i + 1]), c.to_string()])
            .collect();
        files.push(FigureFile {
            name: format!("fig4_{}.csv", name.to_lowercase()),
            csv: render(&["bin_lo", "bin_hi", "count"], rows)?,
        });
        let p = column_profile(x)?;
        profiles.push(vec![
            name,
            fmt(p.mean),
            fmt(p.sample_sd),
            fmt(p.median),
            fmt(p.min),
            fmt(p.max),
            opt(p.skewness),
            fmt(p.one_sd_band.0),
            fmt(p.one_sd_band.1),
            fmt(p.within_band_fraction),
        ]);
    }
    files.push(FigureFile {
        name: "fig4_profiles.csv".into(),
        csv: render(
            &[
                "column",
                "mean",
                "sample_sd",
                "median",
                "min",
                "max",
                "skewness",
                "band_lo",
                "band_hi",
                "within_band_fraction",
            ],
            profiles,
        )?,
    });
    Ok(Some(files))
}

fn fig5(_: &Table, tr: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let mut rows = Vec::new();
    for name in numeric_names(tr) {
        let Ok(z) = standardize(tr.numeric(&name)?) else {
            continue;
        };
        let h = histogram(&z, HISTOGRAM_BINS)?;
        for (i, c) in h.counts.iter().enumerate() {
            rows.push(vec![
                name.clone(),
                fmt(h.edges[i]),
                fmt(h.edges[i + 1]),
                c.to_string(),
            ]);
        }
    }
    if rows.is_empty() {
        return Ok(None);
    }
    one(
        "fig5_standardized.csv",
        render(&["column", "bin_lo", "bin_hi", "count"], rows)?,
    )
}

fn fig6(_: &Table, _: &Table, inp: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    if inp.encoders.is_empty() {
        return Ok(None);
    }
    let rows = inp
        .encoders
        .iter()
        .flat_map(|e| {
            e.mapping
                .iter()
                .map(|(cat, code)| vec![e.column.clone(), cat.clone(), code.to_string()])
        })
        .collect();
    one(
        "fig6_encoding.csv",
        render(&["column", "category", "code"], rows)?,
    )
}

fn fig7(_: &Table, _: &Table, inp: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let Some(scores) = inp.scores else {
        return Ok(None);
    };
    let rows = scores
        .iter()
        .map(|s| vec![s.feature.clone(), fmt(s.gini_importance)])
        .collect();
    one(
        "fig7_gini_importance.csv",
        render(&["feature", "gini_importance"], rows)?,
    )
}

fn fig8(_: &Table, _: &Table, inp: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    if inp.per_feature.is_empty() {
        return Ok(None);
    }
    let rows = inp
        .per_feature
        .iter()
        .map(|(f, m)| {
            let mi = inp
                .scores
                .and_then(|s| s.iter().find(|s| &s.feature == f))
                .map(|s| 100.0 * s.mi_normalized);
            vec![
                f.clone(),
                opt(mi),
                fmt(m.accuracy),
                fmt(m.macro_precision),
                fmt(m.macro_recall),
                fmt(m.macro_f1),
            ]
        })
        .collect();
    one(
        "fig8_metrics.csv",
        render(
            &[
                "feature",
                "mi_score_percent",
                "accuracy",
                "precision",
                "recall",
                "f1",
            ],
            rows,
        )?,
    )
}

fn counts_fig(clean: &Table, _: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let mut files = Vec::new();
    for (file, col) in [
        ("fig9_family_counts.csv", "Family"),
        ("fig10_threat_counts.csv", "Threats"),
    ] {
        let Ok(counts) = value_counts(clean, col) else {
            continue;
        };
        let rows = counts
            .into_iter()
            .map(|(k, c)| vec![k, c.to_string()])
            .collect();
        files.push(FigureFile {
            name: file.into(),
            csv: render(&["category", "count"], rows)?,
        });
    }
    Ok(Some(files))
}

fn crosstab_fig(t: &Table, file: &str, a: &str, b: &str) -> Result<Option<Vec<FigureFile>>> {
    let rows = crosstab(t, a, b)?
        .into_iter()
        .map(|((x, y), c)| vec![x, y, c.to_string()])
        .collect();
    one(
        file,
        render(&[&a.to_lowercase(), &b.to_lowercase(), "count"], rows)?,
    )
}

fn fig11(clean: &Table, _: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let target = clean.schema().target().ok_or(Error::NoTarget);
    match target {
        Ok(y) => crosstab_fig(clean, "fig11_threat_prediction.csv", "Threats", y),
        Err(_) => Ok(None),
    }
}

fn group_fig(
    t: &Table,
    file: &str,
    g: &str,
    v: &str,
    label: &str,
) -> Result<Option<Vec<FigureFile>>> {
    let rows = group_mean(t, g, v)?
        .into_iter()
        .map(|s| vec![s.group, fmt(s.mean), s.count.to_string()])
        .collect();
    one(file, render(&[&g.to_lowercase(), label, "count"], rows)?)
}

fn fig12(clean: &Table, _: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    group_fig(
        clean,
        "fig12_threat_time.csv",
        "Threats",
        "Time",
        "mean_time",
    )
}

fn fig13(clean: &Table, _: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    crosstab_fig(clean, "fig13_family_threat.csv", "Family", "Threats")
}

fn fig14(clean: &Table, _: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    group_fig(clean, "fig14_family_fee.csv", "Family", "BTC", "mean_btc")
}

fn fig15(_: &Table, tr: &Table, inp: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let m = match inp.correlation {
        Some(m) => m.clone(),
        None => {
            if tr.row_count() < 2 {
                return Ok(None);
            }
            default_correlation(tr, false)?
        }
    };
    one("fig15_corr.csv", m.to_csv())
}

fn fig16(_: &Table, tr: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let time = tr.numeric("Time")?;
    let usd = tr.numeric("USD")?;
    let btc = tr.numeric("BTC")?;
    let nf = tr.numeric("NetflowBytes")?;
    let rows = (0..tr.row_count())
        .map(|r| vec![fmt(time[r]), fmt(usd[r]), fmt(btc[r]), fmt(nf[r])])
        .collect();
    one(
        "fig16_time_series.csv",
        render(&["time", "usd", "btc", "netflow_bytes"], rows)?,
    )
}

fn fig17(_: &Table, tr: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let Some(target) = tr.schema().target() else {
        return Ok(None);
    };
    let time = tr.numeric("Time")?;
    let usd = tr.numeric("USD")?;
    let btc = tr.numeric("BTC")?;
    let nf = tr.numeric("NetflowBytes")?;
    let pred = tr.categorical(target)?;
    if time.is_empty() {
        return Ok(None);
    }
    let h = histogram(time, TIME_BINS)?;
    let bins = h.counts.len();
    let lo = h.edges[0];
    let width = (h.edges[bins] - lo) / bins as f64;
    let mut acc: std::collections::BTreeMap<(usize, &str), [f64; 4]> = Default::default();
    for r in 0..tr.row_count() {
        let b = if bins == 1 {
            0
        } else {
            crate::stats::equal_width_bin(time[r], lo, width, bins)
        };
        let e = acc.entry((b, pred[r].as_str())).or_insert([0.0; 4]);
        e[0] += 1.0;
        e[1] += usd[r];
        e[2] += btc[r];
        e[3] += nf[r];
    }
    let rows = acc
        .into_iter()
        .map(|((b, p), [c, u, bt, n])| {
            vec![
                fmt(h.edges[b]),
                fmt(h.edges[b + 1]),
                p.to_owned(),
                (c as usize).to_string(),
                fmt(u / c),
                fmt(bt / c),
                fmt(n / c),
            ]
        })
        .collect();
    one(
        "fig17_time_prediction.csv",
        render(
            &[
                "time_lo",
                "time_hi",
                "prediction",
                "count",
                "mean_usd",
                "mean_btc",
                "mean_netflow_bytes",
            ],
            rows,
        )?,
    )
}

fn fig18(clean: &Table, _: &Table, _: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let mut rows = Vec::new();
    for (a, b) in [
        ("Family", "Protocol"),
        ("Family", "Port"),
        ("Threats", "Protocol"),
        ("Threats", "Port"),
    ] {
        for s in pair_mean(clean, a, b, "USD")? {
            rows.push(vec![
                format!("{a}:{b}"),
                s.first,
                s.second,
                fmt(s.mean),
                s.count.to_string(),
            ]);
        }
    }
    one(
        "fig18_usd_pairs.csv",
        render(&["pairing", "first", "second", "mean_usd", "count"], rows)?,
    )
}

fn fig19(_: &Table, _: &Table, inp: &ReportInputs<'_>) -> Result<Option<Vec<FigureFile>>> {
    let Some(scores) = inp.scores else {
        return Ok(None);
    };
    let rows = scores
        .iter()
        .map(|s| {
            vec![
                s.feature.clone(),
                fmt(s.gini_importance),
                fmt(s.mi_normalized),
            ]
        })
        .collect();
    one(
        "fig19_gini_mi.csv",
        render(&["feature", "gini_importance", "mi_normalized"], rows)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SignalSpec};
    use crate::table::dataset_stats;
    use crate::transform::{default_plan, fit_transforms};

    #[test]
    fn full_report_on_synthetic_table() {
        let t = generate(&SignalSpec {
            n_rows: 400,
            seed: 11,
            ..SignalSpec::default()
        })
        .unwrap();
        let stats = dataset_stats(&t);
        let spec = fit_transforms(&t, &default_plan()).unwrap();
        let inputs = ReportInputs {
            raw_stats: Some(&stats),
            clean_stats: Some(&stats),
            transforms: Some(&spec),
            ..Default::default()
        };
        let files = figure_series(&t, &inputs).unwrap();
        let names: Vec<&str> = files.iter().map(|f| f.name.as_str()).collect();
        for expected in [
            "fig2_stats.csv",
            "fig3_skewness.csv",
            "fig4_btc.csv",
            "fig4_usd.csv",
            "fig4_profiles.csv",
            "fig5_standardized.csv",
            "fig9_family_counts.csv",
            "fig11_threat_prediction.csv",
            "fig14_family_fee.csv",
            "fig15_corr.csv",
            "fig16_time_series.csv",
            "fig17_time_prediction.csv",
            "fig18_usd_pairs.csv",
        ] {
            assert!(names.contains(&expected), "missing {expected}");
        }
        let fee = files
            .iter()
            .find(|f| f.name == "fig14_family_fee.csv")
            .unwrap();
        assert!(fee.csv.starts_with("family,mean_btc,count\n"));
        let fig4 = files.iter().find(|f| f.name == "fig4_btc.csv").unwrap();
        let total: usize = fig4
            .csv
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(total, 400);
    }

    #[test]
    fn custom_schema_skips_missing_columns() {
        use crate::table::{Column, ColumnDef, Schema};
        let schema = Schema::new(
            vec![
                ColumnDef::new("x", ColumnKind::Numeric),
                ColumnDef::new("y", ColumnKind::Categorical),
            ],
            Some("y".into()),
        )
        .unwrap();
        let t = Table::new(
            schema,
            vec![
                Column::Numeric(vec![1.0, 2.0, 3.0]),
                Column::Categorical(vec!["a".into(), "b".into(), "a".into()]),
            ],
        )
        .unwrap();
        let files = figure_series(&t, &ReportInputs::default()).unwrap();
        let names: Vec<&str> = files.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "fig4_x.csv",
                "fig4_profiles.csv",
                "fig5_standardized.csv",
                "fig15_corr.csv"
            ]
        );
    }
}
