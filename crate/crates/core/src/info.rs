//! Discretization and plug-in information measures (in nats).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::equal_width_bin;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinStrategy {
    Quantile,
    #[serde(alias = "equal")]
    EqualWidth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub bins: usize,
    pub strategy: BinStrategy,
}

impl Default for BinningSpec {
    fn default() -> Self {
        Self {
            bins: 16,
            strategy: BinStrategy::Quantile,
        }
    }
}

/// Maps arbitrary codes onto `0..distinct`, preserving their order.
pub fn compress_codes(codes: &[usize]) -> (Vec<usize>, usize) {
    let mut uniq = codes.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    let out = codes
        .iter()
        .map(|c| uniq.binary_search(c).expect("code present"))
        .collect();
    (out, uniq.len())
}

/// A cut between sorted positions, equivalent to a linearly interpolated
/// quantile but decided by comparisons against observed values only.
#[derive(Clone, Copy)]
struct Cut {
    value: f64,
    strict: bool,
}

impl Cut {
    fn passes(&self, x: f64) -> bool {
        if self.strict {
            x > self.value
        } else {
            x >= self.value
        }
    }
}

fn quantile_cuts(x: &[f64], bins: usize) -> Vec<Cut> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    (1..bins)
        .map(|j| {
            // position (n-1) * j / bins, split into integer part and remainder
            let num = (n - 1) * j;
            let k = num / bins;
            let interpolated = num % bins != 0 && sorted[k] != sorted[k + 1];
            Cut {
                value: sorted[k],
                strict: interpolated,
            }
        })
        .collect()
}

/// Discretizes a numeric column into dense codes `0..effective_bins`.
///
/// Quantile bins cut at the `j / bins` quantiles (linear interpolation
/// between order statistics); coincident cuts merge. Because cuts are
/// decided by rank, any strictly increasing transform of `x` yields the same
/// codes. Equal-width bins follow [`crate::stats::histogram`]. Empty bins are
/// dropped from the code range in both strategies.
pub fn discretize(x: &[f64], spec: BinningSpec) -> Vec<usize> {
    if x.is_empty() {
        return Vec::new();
    }
    let bins = spec.bins.max(1);
    let raw: Vec<usize> = match spec.strategy {
        BinStrategy::Quantile => {
            let cuts = quantile_cuts(x, bins);
            x.iter()
                .map(|&v| cuts.iter().filter(|c| c.passes(v)).count())
                .collect()
        }
        BinStrategy::EqualWidth => {
            let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                vec![0; x.len()]
            } else {
                let width = (hi - lo) / bins as f64;
                x.iter()
                    .map(|&v| equal_width_bin(v, lo, width, bins))
                    .collect()
            }
        }
    };
    compress_codes(&raw).0
}

fn counts(codes: &[usize]) -> Vec<usize> {
    let k = codes.iter().copied().max().map_or(0, |m| m + 1);
    let mut c = vec![0; k];
    for &v in codes {
        c[v] += 1;
    }
    c
}

pub(crate) fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Shannon entropy of the empirical distribution of `codes`.
pub fn entropy(codes: &[usize]) -> Result<f64> {
    if codes.is_empty() {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    let (dense, _) = compress_codes(codes);
    Ok(entropy_of_counts(&counts(&dense), codes.len()).max(0.0))
}

/// Plug-in mutual information over the empirical joint distribution.
pub fn mutual_information(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    let (xd, kx) = compress_codes(x);
    let (yd, ky) = compress_codes(y);
    let mut joint = vec![0usize; kx * ky];
    for (&a, &b) in xd.iter().zip(&yd) {
        joint[a * ky + b] += 1;
    }
    let cx = counts(&xd);
    let cy = counts(&yd);
    let n = x.len() as f64;
    let mut mi = 0.0;
    for a in 0..kx {
        for b in 0..ky {
            let c = joint[a * ky + b];
            if c == 0 {
                continue;
            }
            let c = c as f64;
            mi += c / n * (c * n / (cx[a] as f64 * cy[b] as f64)).ln();
        }
    }
    Ok(mi.max(0.0))
}
