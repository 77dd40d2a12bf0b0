//! Seeded generator of UGRansome-shaped tables with planted feature–target
//! dependence.
//!
//! Randomness comes from ChaCha8 with one stream per column: the target uses
//! stream 0 and the column at canonical position `i` uses stream `i + 1`, all
//! keyed by the same seed. A column's values therefore depend only on the
//! seed, the target draw and its own signal strength.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Column, Schema, Table, UGRANSOME_COLUMNS};

/// Target classes in code order.
pub const CLASSES: [&str; 3] = ["A", "S", "SS"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub n_rows: usize,
    pub seed: u64,
    /// `(column, strength)` pairs; strength 0 means no dependence.
    pub signal_features: Vec<(String, f64)>,
    /// Probabilities of A, S and SS.
    pub class_weights: [f64; 3],
}

impl Default for SignalSpec {
    fn default() -> Self {
        Self {
            n_rows: 1000,
            seed: 0,
            signal_features: Vec::new(),
            class_weights: [1.0 / 3.0; 3],
        }
    }
}

enum Shape {
    /// Lognormal with log-space location and scale; `offset` is added and
    /// `integer` rounds the draw.
    LogNormal {
        mu: f64,
        sigma: f64,
        offset: f64,
        integer: bool,
    },
    Categories(&'static [&'static str]),
}

fn shape(column: &str) -> Shape {
    use Shape::*;
    match column {
        "Time" => LogNormal {
            mu: 3.4,
            sigma: 0.5,
            offset: 0.0,
            integer: false,
        },
        "Clusters" => LogNormal {
            mu: 1.0,
            sigma: 0.6,
            offset: 0.0,
            integer: true,
        },
        "BTC" => LogNormal {
            mu: 2.5,
            sigma: 1.2,
            offset: 0.0,
            integer: false,
        },
        "USD" => LogNormal {
            mu: 8.0,
            sigma: 1.5,
            offset: 0.0,
            integer: false,
        },
        "NetflowBytes" => LogNormal {
            mu: 6.0,
            sigma: 1.8,
            offset: 0.0,
            integer: false,
        },
        "Port" => LogNormal {
            mu: 0.5,
            sigma: 0.7,
            offset: 5060.0,
            integer: true,
        },
        "Protocol" => Categories(&["ICMP", "TCP", "UDP"]),
        "Flag" => Categories(&[
            "A", "AF", "AP", "APF", "APRS", "APRSF", "APS", "APSF", "AR", "AS", "F", "FR", "P",
            "R", "RS", "S",
        ]),
        "Family" => Categories(&[
            "APT",
            "CryptXXX",
            "CryptoLocker",
            "CryptoLocker2015",
            "Cryptohitman",
            "DMALocker",
            "EDA2",
            "Flyper",
            "Globe",
            "Globev3",
            "JigSaw",
            "Locky",
            "NoobCrypt",
            "Razy",
            "SamSam",
            "TowerWeb",
            "WannaCry",
        ]),
        "SeedAddress" => Categories(&[
            "17dcMo4V", "18e372GN", "1AEoiHYZ", "1BonusSr", "1DA11mPS", "1GZkujBR", "1KZkcvx4",
            "1LC7xTpP", "1NKi9AK5", "1SYSTEMQ",
        ]),
        "ExpAddress" => Categories(&[
            "1DA11mPS", "1GZkujBR", "1KZkcvx4", "1LC7xTpP", "1NKi9AK5", "1SYSTEMQ", "17dcMo4V",
            "18e372GN", "1AEoiHYZ", "1BonusSr",
        ]),
        "IPAddress" => Categories(&["A", "B", "C", "D"]),
        "Threats" => Categories(&[
            "Blacklist",
            "Bonet",
            "Botnet",
            "DoS",
            "NerisBonet",
            "Port Scanning",
            "SSH",
            "Scan",
            "Spam",
        ]),
        "Prediction" => Categories(&CLASSES),
        other => unreachable!("no generator for column {other}"),
    }
}

fn column_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn validate(spec: &SignalSpec) -> Result<()> {
    for (name, eps) in &spec.signal_features {
        let known = UGRANSOME_COLUMNS
            .iter()
            .any(|(n, _)| n == name && *n != "Prediction");
        if !known {
            return Err(Error::UnknownColumn(name.clone()));
        }
        if !(0.0..=1.0).contains(eps) {
            return Err(Error::Config(format!(
                "signal strength for {name} must be in [0, 1], got {eps}"
            )));
        }
    }
    let w = &spec.class_weights;
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
        return Err(Error::Config(format!(
            "class weights must be non-negative and sum to 1, got {w:?}"
        )));
    }
    Ok(())
}

/// Draws a table following `spec`. Identical specs give identical tables.
///
/// Numeric signal columns shift their log-space location by
/// `strength * class_index` standard deviations; categorical signal columns
/// pick the class's own category with probability `strength` and a uniform
/// category otherwise.
pub fn generate(spec: &SignalSpec) -> Result<Table> {
    validate(spec)?;
    let n = spec.n_rows;
    let schema = Schema::ugransome();
    let mut trng = column_rng(spec.seed, 0);
    let weights = WeightedIndex::new(spec.class_weights)
        .map_err(|e| Error::Config(format!("class weights: {e}")))?;
    let target: Vec<usize> = (0..n).map(|_| weights.sample(&mut trng)).collect();

    let mut columns = Vec::with_capacity(schema.len());
    for (i, (name, _)) in UGRANSOME_COLUMNS.iter().enumerate() {
        if *name == "Prediction" {
            columns.push(Column::Categorical(
                target.iter().map(|&c| CLASSES[c].to_owned()).collect(),
            ));
            continue;
        }
        let eps = spec
            .signal_features
            .iter()
            .filter(|(s, _)| s == name)
            .map(|(_, e)| *e)
            .next_back()
            .unwrap_or(0.0);
        let mut rng = column_rng(spec.seed, i as u64 + 1);
        let col = match shape(name) {
            Shape::LogNormal {
                mu,
                sigma,
                offset,
                integer,
            } => Column::Numeric(
                target
                    .iter()
                    .map(|&c| {
                        let z: f64 = rng.sample(StandardNormal);
                        let v = offset + (mu + sigma * (z + eps * c as f64)).exp();
                        if integer {
                            v.round()
                        } else {
                            v
                        }
                    })
                    .collect(),
            ),
            Shape::Categories(cats) => Column::Categorical(
                target
                    .iter()
                    .map(|&c| {
                        // both draws happen on every row so the stream stays
                        // aligned whatever the strength
                        let planted = rng.random::<f64>() < eps;
                        let uniform = rng.random_range(0..cats.len());
                        let k = if planted { c % cats.len() } else { uniform };
                        cats[k].to_owned()
                    })
                    .collect(),
            ),
        };
        columns.push(col);
    }
    Table::new(schema, columns)
}

/// Permutes the target column with a seeded shuffle, leaving every feature
/// untouched.
pub fn shuffle_target(t: &Table, seed: u64) -> Result<Table> {
    let target = t.schema().target().ok_or(Error::NoTarget)?;
    let mut values = t.categorical(target)?.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values.shuffle(&mut rng);
    t.with_column(target, Column::Categorical(values))
}
