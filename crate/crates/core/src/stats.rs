//! Descriptive profiles, Pearson correlation, histograms and group
//! aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Column, Table};
use crate::transform::{encode_categorical, mean, skewness};

/// Descriptive statistics of a numeric column.
///
/// `sample_sd` uses the n-1 denominator; `skewness` is the moment estimator
/// with n-denominator central moments and is `None` for fewer than three
/// points or constant data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub n: usize,
    pub mean: f64,
    pub sample_sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub skewness: Option<f64>,
    pub one_sd_band: (f64, f64),
    pub within_band_fraction: f64,
}

pub fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn column_profile(x: &[f64]) -> Result<ColumnProfile> {
    if x.len() < 2 {
        return Err(Error::TooFewValues {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len();
    let m = mean(x);
    let sd = (x.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (m - sd, m + sd);
    let inside = x.iter().filter(|&&v| v >= lo && v <= hi).count();
    Ok(ColumnProfile {
        n,
        mean: m,
        sample_sd: sd,
        median: median_of_sorted(&sorted),
        min: sorted[0],
        max: sorted[n - 1],
        skewness: skewness(x).ok(),
        one_sd_band: (lo, hi),
        within_band_fraction: inside as f64 / n as f64,
    })
}

/// Pearson correlation, clamped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewValues {
            needed: 2,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Dense, row-major.
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.values) {
            out.push_str(l);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn build_matrix(labels: Vec<String>, cols: Vec<Vec<f64>>) -> Result<CorrelationMatrix> {
    let k = cols.len();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        values[i][i] = 1.0;
        for j in i + 1..k {
            let r = pearson(&cols[i], &cols[j])?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { labels, values })
}

fn check_non_constant(name: &str, x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::TooFewValues {
            needed: 2,
            got: x.len(),
        });
    }
    if x.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::ConstantColumn(name.to_owned()));
    }
    Ok(())
}

/// Pairwise Pearson matrix over numeric columns.
pub fn correlation_matrix<S: AsRef<str>>(t: &Table, columns: &[S]) -> Result<CorrelationMatrix> {
    let mut cols = Vec::with_capacity(columns.len());
    for name in columns {
        let x = t.numeric(name.as_ref())?;
        check_non_constant(name.as_ref(), x)?;
        cols.push(x.to_vec());
    }
    build_matrix(
        columns.iter().map(|c| c.as_ref().to_owned()).collect(),
        cols,
    )
}

/// Like [`correlation_matrix`], but categorical columns are replaced by
/// their lexicographic label codes first. Code order is arbitrary, so
/// entries involving categorical columns carry no ordinal meaning.
pub fn correlation_matrix_encoded<S: AsRef<str>>(
    t: &Table,
    columns: &[S],
) -> Result<CorrelationMatrix> {
    let mut cols = Vec::with_capacity(columns.len());
    for name in columns {
        let name = name.as_ref();
        let x = match t.column(name)? {
            Column::Numeric(v) => v.clone(),
            Column::Categorical(v) => encode_categorical(v)
                .0
                .into_iter()
                .map(|c| c as f64)
                .collect(),
        };
        check_non_constant(name, &x)?;
        cols.push(x);
    }
    build_matrix(
        columns.iter().map(|c| c.as_ref().to_owned()).collect(),
        cols,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width bin index for `v` over `[lo, lo + bins * width]`; the maximum
/// lands in the last bin.
pub(crate) fn equal_width_bin(v: f64, lo: f64, width: f64, bins: usize) -> usize {
    (((v - lo) / width).floor() as usize).min(bins - 1)
}

/// Equal-width histogram over `[min, max]`. A constant column yields one bin
/// of width 1 centered on the value.
pub fn histogram(x: &[f64], bins: usize) -> Result<Histogram> {
    if x.is_empty() {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(Histogram {
            edges: vec![lo - 0.5, lo + 0.5],
            counts: vec![x.len()],
        });
    }
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);
    let mut counts = vec![0; bins];
    for &v in x {
        counts[equal_width_bin(v, lo, width, bins)] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub group: String,
    pub mean: f64,
    pub count: usize,
}

/// Mean of a numeric column per category, groups in lexicographic order.
pub fn group_mean(t: &Table, group_col: &str, value_col: &str) -> Result<Vec<GroupStat>> {
    let keys = t.categorical(group_col)?;
    let values = t.numeric(value_col)?;
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (k, &v) in keys.iter().zip(values) {
        let e = acc.entry(k.as_str()).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(g, (s, c))| GroupStat {
            group: g.to_owned(),
            mean: s / c as f64,
            count: c,
        })
        .collect())
}

/// Key text of a column cell; numeric keys print as they do in CSV.
fn key_column(t: &Table, name: &str) -> Result<Vec<String>> {
    let col = t.column(name)?;
    Ok((0..t.row_count()).map(|r| col.cell_text(r)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStat {
    pub first: String,
    pub second: String,
    pub mean: f64,
    pub count: usize,
}

/// Mean of `value_col` per `(first, second)` key pair. Key columns may be of
/// either kind; pairs are sorted lexicographically by key text.
pub fn pair_mean(t: &Table, first: &str, second: &str, value_col: &str) -> Result<Vec<PairStat>> {
    let a = key_column(t, first)?;
    let b = key_column(t, second)?;
    let values = t.numeric(value_col)?;
    let mut acc: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
    for ((x, y), &v) in a.iter().zip(&b).zip(values) {
        let e = acc.entry((x.as_str(), y.as_str())).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|((x, y), (s, c))| PairStat {
            first: x.to_owned(),
            second: y.to_owned(),
            mean: s / c as f64,
            count: c,
        })
        .collect())
}

/// Contingency counts of two columns, keys sorted lexicographically.
pub fn crosstab(t: &Table, rows: &str, cols: &str) -> Result<BTreeMap<(String, String), usize>> {
    let a = key_column(t, rows)?;
    let b = key_column(t, cols)?;
    let mut out = BTreeMap::new();
    for (x, y) in a.into_iter().zip(b) {
        *out.entry((x, y)).or_insert(0) += 1;
    }
    Ok(out)
}

/// Occurrence count per category, sorted lexicographically.
pub fn value_counts(t: &Table, name: &str) -> Result<BTreeMap<String, usize>> {
    let mut out = BTreeMap::new();
    for k in key_column(t, name)? {
        *out.entry(k).or_insert(0) += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{ColumnDef, ColumnKind, Schema};

    #[test]
    fn profile_of_one_two_three() {
        let p = column_profile(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((p.mean, p.sample_sd, p.median), (2.0, 1.0, 2.0));
        assert_eq!(p.one_sd_band, (1.0, 3.0));
        assert_eq!(p.within_band_fraction, 1.0);
        assert_eq!(p.skewness, Some(0.0));
        assert!(column_profile(&[1.0]).is_err());
        let p = column_profile(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(p.median, 2.5);
        assert_eq!((p.min, p.max), (1.0, 4.0));
    }

    #[test]
    fn pearson_linear_and_errors() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.37).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let z: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &z).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(
            pearson(&x, &y[..3]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(pearson(&x, &[1.0; 20]), Err(Error::ZeroVariance)));
    }

    fn table() -> Table {
        let schema = Schema::new(
            vec![
                ColumnDef::new("g", ColumnKind::Categorical),
                ColumnDef::new("v", ColumnKind::Numeric),
                ColumnDef::new("w", ColumnKind::Numeric),
                ColumnDef::new("c", ColumnKind::Numeric),
            ],
            None,
        )
        .unwrap();
        Table::new(
            schema,
            vec![
                Column::Categorical(vec!["a".into(), "b".into(), "a".into()]),
                Column::Numeric(vec![1.0, 2.0, 3.0]),
                Column::Numeric(vec![1.0, 2.0, 3.0]),
                Column::Numeric(vec![5.0, 5.0, 5.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn matrix_cases() {
        let t = table();
        let m = correlation_matrix(&t, &["v"]).unwrap();
        assert_eq!(m.values, vec![vec![1.0]]);
        let m = correlation_matrix(&t, &["v", "w"]).unwrap();
        assert_eq!(m.values[0][1], 1.0);
        assert!(matches!(
            correlation_matrix(&t, &["v", "c"]),
            Err(Error::ConstantColumn(c)) if c == "c"
        ));
        assert!(matches!(
            correlation_matrix(&t, &["nope"]),
            Err(Error::UnknownColumn(_))
        ));
        assert!(matches!(
            correlation_matrix(&t, &["g"]),
            Err(Error::ColumnKind { .. })
        ));
        let m = correlation_matrix_encoded(&t, &["g", "v"]).unwrap();
        assert_eq!(m.labels, vec!["g", "v"]);
        assert_eq!(m.get("g", "g"), Some(1.0));
        assert!(m.to_csv().starts_with("feature,g,v\ng,1,"));
    }

    #[test]
    fn histogram_cases() {
        let h = histogram(&[0.0, 1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.edges, vec![0.0, 1.5, 3.0]);
        let h = histogram(&[7.0; 5], 4).unwrap();
        assert_eq!(h.counts, vec![5]);
        assert!(histogram(&[], 3).is_err());
    }

    #[test]
    fn group_means() {
        let t = table();
        let g = group_mean(&t, "g", "v").unwrap();
        assert_eq!(
            g,
            vec![
                GroupStat {
                    group: "a".into(),
                    mean: 2.0,
                    count: 2
                },
                GroupStat {
                    group: "b".into(),
                    mean: 2.0,
                    count: 1
                },
            ]
        );
        assert!(group_mean(&t, "v", "v").is_err());
        assert!(group_mean(&t, "g", "g").is_err());
        let p = pair_mean(&t, "g", "c", "v").unwrap();
        assert_eq!(p[0].first, "a");
        assert_eq!(p[0].second, "5");
        let x = crosstab(&t, "g", "c").unwrap();
        assert_eq!(x[&("a".to_owned(), "5".to_owned())], 2);
        assert_eq!(value_counts(&t, "g").unwrap()["b"], 1);
    }
}
