//! Skew correction and categorical encoding.
//!
//! Every numeric transform here is elementwise and strictly increasing on its
//! domain, so row rankings (and therefore quantile bins and tree partitions)
//! survive the transform unchanged.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Column, ColumnKind, Table};

/// Lower and upper bound of the Yeo-Johnson lambda search.
pub const LAMBDA_RANGE: (f64, f64) = (-5.0, 5.0);
const COARSE_STEP: f64 = 0.1;
const LAMBDA_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind {
    Identity,
    Log1p,
    Sqrt,
    YeoJohnson { lambda: f64 },
}

impl TransformKind {
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match *self {
            TransformKind::Identity => Ok(x.to_vec()),
            TransformKind::Log1p => log1p_transform(x),
            TransformKind::Sqrt => sqrt_transform(x),
            TransformKind::YeoJohnson { lambda } => yeo_johnson(x, lambda),
        }
    }
}

fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Moment skewness `m3 / m2^1.5` with n-denominator central moments.
pub fn skewness(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::TooFewValues {
            needed: 3,
            got: x.len(),
        });
    }
    if is_constant(x) {
        return Err(Error::ZeroVariance);
    }
    let n = x.len() as f64;
    let m = mean(x);
    let (mut m2, mut m3) = (0.0, 0.0);
    for &v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
    }
    m2 /= n;
    m3 /= n;
    Ok(m3 / m2.powf(1.5))
}

pub fn log1p_transform(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > -1.0 {
                Ok(v.ln_1p())
            } else {
                Err(Error::Domain {
                    transform: "log1p",
                    index: i,
                    value: v,
                })
            }
        })
        .collect()
}

pub fn sqrt_transform(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v >= 0.0 {
                Ok(v.sqrt())
            } else {
                Err(Error::Domain {
                    transform: "sqrt",
                    index: i,
                    value: v,
                })
            }
        })
        .collect()
}

/// Yeo-Johnson map of a single value.
///
/// Uses `expm1`/`ln_1p` so the power branches stay accurate as lambda
/// approaches the logarithmic cases. Lambda 1 is the identity.
pub fn yeo_johnson_value(x: f64, lambda: f64) -> f64 {
    if lambda == 1.0 {
        return x;
    }
    if x >= 0.0 {
        if lambda == 0.0 {
            x.ln_1p()
        } else {
            (lambda * x.ln_1p()).exp_m1() / lambda
        }
    } else if lambda == 2.0 {
        -(-x).ln_1p()
    } else {
        let p = 2.0 - lambda;
        -(p * (-x).ln_1p()).exp_m1() / p
    }
}

pub fn yeo_johnson(x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !lambda.is_finite() {
        return Err(Error::Config(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v.is_finite() {
                Ok(yeo_johnson_value(v, lambda))
            } else {
                Err(Error::NonFinite(i))
            }
        })
        .collect()
}

/// Gaussian profile log-likelihood of the transformed data, including the
/// Jacobian of the map. Returns `-inf` where the transformed sample is
/// degenerate or overflows.
pub fn yeo_johnson_log_likelihood(x: &[f64], lambda: f64) -> f64 {
    let n = x.len() as f64;
    let y: Vec<f64> = x.iter().map(|&v| yeo_johnson_value(v, lambda)).collect();
    let m = mean(&y);
    let var = y.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / n;
    if !var.is_finite() || var <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let jacobian: f64 = x.iter().map(|&v| v.signum() * v.abs().ln_1p()).sum();
    -0.5 * n * var.ln() + (lambda - 1.0) * jacobian
}

/// Maximum-likelihood Yeo-Johnson lambda in `[-5, 5]`.
///
/// A 0.1-step grid brackets the maximum, then golden-section search refines
/// it to within 1e-4.
pub fn fit_yeo_johnson(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::TooFewValues {
            needed: 3,
            got: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if is_constant(x) {
        return Err(Error::ZeroVariance);
    }
    let (lo, hi) = LAMBDA_RANGE;
    let f = |l: f64| yeo_johnson_log_likelihood(x, l);

    let steps = ((hi - lo) / COARSE_STEP).round() as usize;
    let (mut best_l, mut best_v) = (lo, f(lo));
    for i in 1..=steps {
        let l = lo + i as f64 * COARSE_STEP;
        let v = f(l);
        if v > best_v {
            best_l = l;
            best_v = v;
        }
    }

    let (mut a, mut b) = (
        (best_l - COARSE_STEP).max(lo),
        (best_l + COARSE_STEP).min(hi),
    );
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > LAMBDA_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let refined = 0.5 * (a + b);
    Ok(if f(refined) >= best_v {
        refined
    } else {
        best_l
    })
}

/// `(x - mean) / sample_sd`.
pub fn standardize(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::TooFewValues {
            needed: 2,
            got: x.len(),
        });
    }
    if is_constant(x) {
        return Err(Error::ZeroVariance);
    }
    let m = mean(x);
    let sd = (x.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt();
    Ok(x.iter().map(|&v| (v - m) / sd).collect())
}

/// Label encoder: categories map to `0..distinct` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoder {
    pub column: String,
    pub mapping: BTreeMap<String, usize>,
}

impl Encoder {
    pub fn fit<S: AsRef<str>>(column: &str, values: &[S]) -> Self {
        let mut cats: Vec<&str> = values.iter().map(AsRef::as_ref).collect();
        cats.sort_unstable();
        cats.dedup();
        let mapping = cats
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c.to_owned(), i))
            .collect();
        Self {
            column: column.to_owned(),
            mapping,
        }
    }

    pub fn code(&self, category: &str) -> Option<usize> {
        self.mapping.get(category).copied()
    }

    /// Categories indexed by code.
    pub fn categories(&self) -> Vec<&str> {
        // BTreeMap iterates in key order, which is code order.
        self.mapping.keys().map(String::as_str).collect()
    }

    pub fn encode<S: AsRef<str>>(&self, values: &[S]) -> Option<Vec<usize>> {
        values.iter().map(|v| self.code(v.as_ref())).collect()
    }

    pub fn decode(&self, codes: &[usize]) -> Option<Vec<String>> {
        let cats = self.categories();
        codes
            .iter()
            .map(|&c| cats.get(c).map(|s| (*s).to_owned()))
            .collect()
    }
}

pub fn encode_categorical<S: AsRef<str>>(column: &[S]) -> (Vec<usize>, Encoder) {
    let enc = Encoder::fit("", column);
    let codes = enc
        .encode(column)
        .expect("encoder fitted on the same values");
    (codes, enc)
}

/// Per-column transform assignment, serialized as the transform spec file.
pub type TransformSpec = BTreeMap<String, TransformKind>;

/// What to do with a column when fitting a transform spec.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformPlan {
    Identity,
    Log1p,
    Sqrt,
    /// Fit lambda on the data.
    YeoJohnson,
    /// Use a fixed lambda.
    YeoJohnsonFixed(f64),
}

/// NetflowBytes → log1p, USD → sqrt, BTC and Time → fitted Yeo-Johnson.
pub fn default_plan() -> BTreeMap<String, TransformPlan> {
    [
        ("NetflowBytes", TransformPlan::Log1p),
        ("USD", TransformPlan::Sqrt),
        ("BTC", TransformPlan::YeoJohnson),
        ("Time", TransformPlan::YeoJohnson),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v))
    .collect()
}

/// Resolves a plan against a table, fitting lambdas where requested.
/// Columns named in the plan but absent from the table are skipped.
pub fn fit_transforms(t: &Table, plan: &BTreeMap<String, TransformPlan>) -> Result<TransformSpec> {
    let mut spec = TransformSpec::new();
    for (name, p) in plan {
        if t.schema().index_of(name).is_none() {
            log::warn!("transform plan names absent column {name:?}; skipped");
            continue;
        }
        let x = t.numeric(name)?;
        let kind = match *p {
            TransformPlan::Identity => TransformKind::Identity,
            TransformPlan::Log1p => TransformKind::Log1p,
            TransformPlan::Sqrt => TransformKind::Sqrt,
            TransformPlan::YeoJohnsonFixed(lambda) => TransformKind::YeoJohnson { lambda },
            TransformPlan::YeoJohnson => TransformKind::YeoJohnson {
                lambda: fit_yeo_johnson(x)?,
            },
        };
        spec.insert(name.clone(), kind);
    }
    Ok(spec)
}

pub fn apply_transforms(t: &Table, spec: &TransformSpec) -> Result<Table> {
    let mut out = t.clone();
    for (name, kind) in spec {
        let y = kind.apply(t.numeric(name)?)?;
        out = out.with_column(name, Column::Numeric(y))?;
    }
    Ok(out)
}

/// Replaces every categorical column except the target with its integer
/// codes. Returns the encoders in column order.
pub fn encode_table(t: &Table) -> Result<(Table, Vec<Encoder>)> {
    let mut out = t.clone();
    let mut encoders = Vec::new();
    for def in t.schema().columns() {
        if def.kind != ColumnKind::Categorical || Some(def.name.as_str()) == t.schema().target() {
            continue;
        }
        let values = t.categorical(&def.name)?;
        let enc = Encoder::fit(&def.name, values);
        let codes = enc
            .encode(values)
            .expect("encoder fitted on the same values");
        out = out.with_column(
            &def.name,
            Column::Numeric(codes.into_iter().map(|c| c as f64).collect()),
        )?;
        encoders.push(enc);
    }
    Ok((out, encoders))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skewness_edge_cases() {
        assert_eq!(skewness(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(matches!(
            skewness(&[1.0, 2.0]),
            Err(Error::TooFewValues { .. })
        ));
        assert!(matches!(skewness(&[0.1; 5]), Err(Error::ZeroVariance)));
        assert!(skewness(&[1.0, 1.0, 1.0, 10.0]).unwrap() > 0.0);
    }

    #[test]
    fn log_and_sqrt() {
        let y = log1p_transform(&[0.0, std::f64::consts::E - 1.0]).unwrap();
        assert_eq!(y[0], 0.0);
        assert!((y[1] - 1.0).abs() < 1e-15);
        assert!(log1p_transform(&[-1.0]).is_err());
        assert_eq!(
            sqrt_transform(&[0.0, 4.0, 2.25]).unwrap(),
            vec![0.0, 2.0, 1.5]
        );
        assert!(matches!(
            sqrt_transform(&[1.0, -0.5]),
            Err(Error::Domain { index: 1, .. })
        ));
    }

    #[test]
    fn yeo_johnson_branches() {
        let x = [-3.0, -0.5, 0.0, 0.7, 12.0];
        assert_eq!(yeo_johnson(&x, 1.0).unwrap(), x.to_vec());
        let pos = [0.0, 0.7, 12.0];
        assert_eq!(
            yeo_johnson(&pos, 0.0).unwrap(),
            log1p_transform(&pos).unwrap()
        );
        assert_eq!(yeo_johnson_value(-3.0, 2.0), -(4f64.ln()));
        let y = yeo_johnson_value(3.0, 0.5);
        assert!((y - (4f64.sqrt() - 1.0) / 0.5).abs() < 1e-14);
        let y = yeo_johnson_value(-3.0, 0.5);
        assert!((y + (4f64.powf(1.5) - 1.0) / 1.5).abs() < 1e-14);
        assert!(yeo_johnson(&[f64::NAN], 0.5).is_err());
        assert!(yeo_johnson(&[1.0], f64::INFINITY).is_err());
    }

    #[test]
    fn fit_rejects_constant() {
        assert!(matches!(
            fit_yeo_johnson(&[2.0; 10]),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn encoding_is_lexicographic() {
        let col = ["TCP", "UDP", "TCP", "ICMP"];
        let (codes, enc) = encode_categorical(&col);
        assert_eq!(codes, vec![1, 2, 1, 0]);
        assert_eq!(enc.categories(), vec!["ICMP", "TCP", "UDP"]);
        assert_eq!(enc.decode(&codes).unwrap(), col.to_vec());
        let (codes, _) = encode_categorical(&["x", "x"]);
        assert_eq!(codes, vec![0, 0]);
    }

    #[test]
    fn standardize_small() {
        assert_eq!(standardize(&[1.0, 2.0, 3.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(standardize(&[3.0, 3.0]).is_err());
    }

    #[test]
    fn transform_spec_json_shape() {
        let mut spec = TransformSpec::new();
        spec.insert("BTC".into(), TransformKind::YeoJohnson { lambda: 0.25 });
        spec.insert("USD".into(), TransformKind::Sqrt);
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            json,
            r#"{"BTC":{"kind":"yeo_johnson","lambda":0.25},"USD":{"kind":"sqrt"}}"#
        );
        let back: TransformSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
