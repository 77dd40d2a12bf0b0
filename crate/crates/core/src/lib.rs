//! Feature selection for ransomware-detection tables.
//!
//! The crate loads a UGRansome-style CSV into a typed [`Table`], cleans and
//! transforms it, scores every feature by mutual information and Gini
//! importance against the target, and evaluates the selected subset with a
//! cross-validated Gini decision tree.
//!
//! ```
//! use rfsa::synth::{generate, SignalSpec};
//! use rfsa::table::split_features_target;
//! use rfsa::rank::{rfsa_score, select_top_k};
//!
//! let t = generate(&SignalSpec {
//!     n_rows: 600,
//!     seed: 1,
//!     signal_features: vec![("BTC".into(), 1.0)],
//!     ..SignalSpec::default()
//! })?;
//! let (features, target) = split_features_target(&t)?;
//! let scores = rfsa_score(&features, &target, Default::default(), Default::default())?;
//! assert_eq!(select_top_k(&scores, 1).names(), ["BTC"]);
//! # Ok::<(), rfsa::Error>(())
//! ```

pub mod error;
pub mod eval;
pub mod figures;
pub mod gini;
pub mod info;
pub mod rank;
pub mod stats;
pub mod synth;
pub mod table;
pub mod transform;
pub mod tree;

pub use error::{Error, Result};
pub use table::Table;

#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $file:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            mod $name {}
        };
    }
    chapter!(introduction, "introduction.md");
    chapter!(tables, "tables.md");
    chapter!(transforms, "transforms.md");
    chapter!(information, "information.md");
    chapter!(trees, "trees.md");
    chapter!(ranking, "ranking.md");
    chapter!(evaluation, "evaluation.md");
    chapter!(synth, "synth.md");
    chapter!(cli, "cli.md");
}
