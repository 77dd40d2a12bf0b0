use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rfsa::eval::{cross_validate, CvReport, Metrics};
use rfsa::figures::{default_correlation, figure_series, ReportInputs};
use rfsa::rank::{rfsa_score, root_split_decreases, select_top_k_by, FeatureScore};
use rfsa::stats::{
    column_profile, group_mean, histogram, ColumnProfile, CorrelationMatrix, GroupStat, Histogram,
};
use rfsa::synth::{generate, SignalSpec};
use rfsa::table::{
    dataset_stats, deduplicate, load_csv_with, save_csv, split_features_target, ColumnKind,
    DatasetStats, Table,
};
use rfsa::transform::{
    apply_transforms, default_plan, encode_table, fit_transforms, TransformSpec,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{create_dir, write_json, write_text, Incomplete, ScoreRow};

pub fn load(cfg: &RunConfig) -> Result<Table, CliError> {
    let path = cfg.input()?;
    let t = load_csv_with(path, &cfg.schema()?, cfg.header)?;
    log::info!("loaded {} rows from {}", t.row_count(), path.display());
    Ok(t)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CleanStats {
    pub raw: DatasetStats,
    pub clean: DatasetStats,
    pub removed_duplicates: usize,
}

#[derive(Debug, Serialize)]
pub struct NamedProfile {
    pub column: String,
    #[serde(flatten)]
    pub profile: ColumnProfile,
}

#[derive(Debug, Serialize)]
pub struct NamedHistogram {
    pub column: String,
    #[serde(flatten)]
    pub histogram: Histogram,
}

fn numeric_names(t: &Table) -> Vec<String> {
    t.schema()
        .columns()
        .iter()
        .filter(|c| c.kind == ColumnKind::Numeric)
        .map(|c| c.name.clone())
        .collect()
}

fn profiles(t: &Table) -> Result<(Vec<NamedProfile>, Vec<NamedHistogram>), CliError> {
    let mut profiles = Vec::new();
    let mut histograms = Vec::new();
    if t.row_count() < 2 {
        return Ok((profiles, histograms));
    }
    for name in numeric_names(t) {
        let x = t.numeric(&name)?;
        profiles.push(NamedProfile {
            column: name.clone(),
            profile: column_profile(x)?,
        });
        histograms.push(NamedHistogram {
            column: name,
            histogram: histogram(x, rfsa::figures::HISTOGRAM_BINS)?,
        });
    }
    Ok((profiles, histograms))
}

pub fn profile(cfg: &RunConfig) -> Result<(), CliError> {
    let t = load(cfg)?;
    let (p, h) = profiles(&t)?;
    write_json(&cfg.out.join("stats.json"), &dataset_stats(&t))?;
    write_json(&cfg.out.join("profiles.json"), &p)?;
    write_json(&cfg.out.join("histograms.json"), &h)
}

fn clean_table(t: &Table) -> (Table, CleanStats) {
    let raw = dataset_stats(t);
    let (clean, removed) = deduplicate(t);
    log::info!("removed {removed} duplicate rows");
    let stats = CleanStats {
        raw,
        clean: dataset_stats(&clean),
        removed_duplicates: removed,
    };
    (clean, stats)
}

pub fn clean(cfg: &RunConfig) -> Result<(), CliError> {
    let (clean, stats) = clean_table(&load(cfg)?);
    create_dir(&cfg.out)?;
    save_csv(&clean, &cfg.out.join("clean.csv"), true)?;
    write_json(&cfg.out.join("stats.json"), &stats)
}

fn read_spec(path: &Path) -> Result<TransformSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|source| rfsa::Error::Read {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn resolve_spec(cfg: &RunConfig, t: &Table) -> Result<TransformSpec, CliError> {
    match &cfg.transforms {
        Some(p) => read_spec(p),
        None => Ok(fit_transforms(t, &default_plan())?),
    }
}

/// Fits the default plan (or replays `apply`) and writes the transformed
/// table.
pub fn transform(cfg: &RunConfig, apply: Option<&Path>) -> Result<(), CliError> {
    let t = load(cfg)?;
    let spec = match apply {
        Some(p) => read_spec(p)?,
        None => {
            let spec = fit_transforms(&t, &default_plan())?;
            write_json(&cfg.out.join("transforms.json"), &spec)?;
            spec
        }
    };
    let out = apply_transforms(&t, &spec)?;
    create_dir(&cfg.out)?;
    save_csv(&out, &cfg.out.join("transformed.csv"), true)?;
    Ok(())
}

fn score_rows(cfg: &RunConfig, t: &Table) -> Result<(Vec<FeatureScore>, Vec<ScoreRow>), CliError> {
    let (features, target) = split_features_target(t)?;
    let scores = rfsa_score(&features, &target, cfg.binning, cfg.score_tree)?;
    let ordered = select_top_k_by(&scores, scores.len(), cfg.score);
    let mut rows: Vec<ScoreRow> = ordered
        .ordered_features
        .iter()
        .enumerate()
        .map(|(i, s)| ScoreRow::new(i + 1, s))
        .collect();
    if cfg.literal_eq5 {
        let roots = root_split_decreases(&features, &target)?;
        for row in &mut rows {
            let (_, w, l) = roots
                .iter()
                .find(|(name, ..)| *name == row.feature)
                .expect("every scored feature has a root split entry");
            row.root_decrease = *w;
            row.root_decrease_literal = *l;
        }
    }
    Ok((scores, rows))
}

pub fn select(cfg: &RunConfig) -> Result<(), CliError> {
    let t = load(cfg)?;
    let (_, mut rows) = score_rows(cfg, &t)?;
    rows.truncate(cfg.k);
    write_json(&cfg.out.join("scores.json"), &rows)
}

/// Cross-validated metrics of a tree trained on each feature alone.
fn per_feature_metrics(
    cfg: &RunConfig,
    t: &Table,
    names: &[String],
) -> Result<Vec<(String, Metrics)>, CliError> {
    names
        .iter()
        .map(|f| {
            let r = cross_validate(t, std::slice::from_ref(f), cfg.cv, cfg.eval_tree)?;
            Ok((f.clone(), r.mean))
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct EvalOutput {
    #[serde(flatten)]
    pub report: CvReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<ScoreRow>>,
}

/// `features` is either a comma-separated list or the path of a `select`
/// output.
pub fn evaluate(cfg: &RunConfig, features: &str) -> Result<(), CliError> {
    let t = load(cfg)?;
    let (names, scores) = if Path::new(features).is_file() {
        let text = fs::read_to_string(features).map_err(|source| rfsa::Error::Read {
            path: features.into(),
            source,
        })?;
        let rows: Vec<ScoreRow> =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{features}: {e}")))?;
        (rows.iter().map(|r| r.feature.clone()).collect(), Some(rows))
    } else {
        let names: Vec<String> = features
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect();
        (names, None)
    };
    let report = cross_validate(&t, &names, cfg.cv, cfg.eval_tree)?;
    let scores = match scores {
        Some(rows) => {
            let per = per_feature_metrics(cfg, &t, &names)?;
            Some(
                rows.into_iter()
                    .zip(&per)
                    .map(|(r, (_, m))| r.with_metrics(m))
                    .collect(),
            )
        }
        None => None,
    };
    write_json(
        &cfg.out.join("metrics.json"),
        &EvalOutput { report, scores },
    )
}

#[derive(Debug, Serialize)]
pub struct ReportFragments {
    pub profiles: Vec<NamedProfile>,
    pub histograms: Vec<NamedHistogram>,
    pub correlation: Option<CorrelationMatrix>,
    pub groups: BTreeMap<String, Vec<GroupStat>>,
}

fn groups(t: &Table) -> BTreeMap<String, Vec<GroupStat>> {
    let mut out = BTreeMap::new();
    for (g, v) in [("Family", "BTC"), ("Family", "USD"), ("Threats", "Time")] {
        if let Ok(stats) = group_mean(t, g, v) {
            out.insert(format!("{g}:{v}"), stats);
        }
    }
    out
}

fn correlation(cfg: &RunConfig, t: &Table) -> Option<CorrelationMatrix> {
    if t.row_count() < 2 {
        return None;
    }
    default_correlation(t, cfg.encode_correlation)
        .map_err(|e| log::warn!("correlation matrix skipped: {e}"))
        .ok()
}

fn write_figures(dir: &Path, clean: &Table, inputs: &ReportInputs<'_>) -> Result<(), CliError> {
    let dir = dir.join("figures");
    create_dir(&dir)?;
    for f in figure_series(clean, inputs)? {
        write_text(&dir.join(&f.name), &f.csv)?;
    }
    Ok(())
}

/// Profiles, correlation and group tables of the deduplicated, transformed
/// table, plus the figure series when `figures` is set.
pub fn report(cfg: &RunConfig, figures: bool) -> Result<(), CliError> {
    let (clean, stats) = clean_table(&load(cfg)?);
    let spec = resolve_spec(cfg, &clean)?;
    let transformed = apply_transforms(&clean, &spec)?;
    let (profiles, histograms) = profiles(&transformed)?;
    let corr = correlation(cfg, &transformed);
    let fragments = ReportFragments {
        profiles,
        histograms,
        correlation: corr.clone(),
        groups: groups(&clean),
    };
    write_json(&cfg.out.join("report.json"), &fragments)?;
    if figures {
        let scores = score_rows(cfg, &transformed).ok().map(|(s, _)| s);
        let (_, encoders) = encode_table(&transformed)?;
        let inputs = ReportInputs {
            raw_stats: Some(&stats.raw),
            clean_stats: Some(&stats.clean),
            transforms: Some(&spec),
            encoders: &encoders,
            scores: scores.as_deref(),
            per_feature: &[],
            correlation: corr.as_ref(),
        };
        write_figures(&cfg.out, &clean, &inputs)?;
    }
    Ok(())
}

/// Clean, transform, encode, score, select and evaluate in one run.
pub fn pipeline(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = &cfg.out;
    create_dir(dir)?;
    let marker = Incomplete::begin(dir)?;
    write_json(&dir.join("run_config.json"), cfg)?;

    let (clean, stats) = clean_table(&load(cfg)?);
    write_json(&dir.join("stats.json"), &stats)?;

    let spec = resolve_spec(cfg, &clean)?;
    write_json(&dir.join("transforms.json"), &spec)?;
    let transformed = apply_transforms(&clean, &spec)?;

    let (_, encoders) = encode_table(&transformed)?;
    write_json(&dir.join("encoders.json"), &encoders)?;

    let (scores, rows) = score_rows(cfg, &transformed)?;
    let selected: Vec<String> = rows.iter().take(cfg.k).map(|r| r.feature.clone()).collect();
    log::info!("selected {selected:?}");

    let report = cross_validate(&transformed, &selected, cfg.cv, cfg.eval_tree)?;
    write_json(&dir.join("metrics.json"), &report)?;

    let names: Vec<String> = rows.iter().map(|r| r.feature.clone()).collect();
    let per = per_feature_metrics(cfg, &transformed, &names)?;
    let table: Vec<ScoreRow> = rows
        .into_iter()
        .zip(&per)
        .map(|(r, (_, m))| r.with_metrics(m))
        .collect();
    write_json(&dir.join("scores.json"), &table)?;

    let corr = correlation(cfg, &transformed);
    if let Some(c) = &corr {
        write_text(&dir.join("corr.csv"), &c.to_csv())?;
    }
    let inputs = ReportInputs {
        raw_stats: Some(&stats.raw),
        clean_stats: Some(&stats.clean),
        transforms: Some(&spec),
        encoders: &encoders,
        scores: Some(&scores),
        per_feature: &per,
        correlation: corr.as_ref(),
    };
    write_figures(dir, &clean, &inputs)?;
    marker.finish()
}

pub fn synth(spec: &SignalSpec, out: &Path) -> Result<(), CliError> {
    let t = generate(spec)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    save_csv(&t, out, true)?;
    Ok(())
}
