//! Time-series normalization front-ends for k-means clustering.
//!
//! Two representations are provided for a raw series:
//!
//! * [`znorm::z_normalize`], the classic zero-mean / unit-variance rescaling;
//! * [`npfree::convert`], a streaming representation that repeatedly trains a
//!   tiny LSTM on the three most recent points, predicts the next one, and
//!   emits the RMSE over the last three predictions, retraining whenever the
//!   error exceeds an adaptive `mean + 3 * std` threshold.
//!
//! Either representation feeds [`kmeans::kmeans`], and clusterings are scored
//! with [`silhouette::silhouette_overall`] on the *raw* series so that the two
//! front-ends are compared on equal footing. [`experiment`] wires the whole
//! protocol together, including per-series timing and CSV/SVG reporting.
//!
//! Data-parallel loops (per-series conversion, pairwise distances, k-means
//! assignment) run on rayon when the `parallel` feature is enabled and fall
//! back to plain iterators otherwise. Results never depend on the thread count.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod kmeans;
pub mod lstm;
pub mod npfree;
pub mod parallel;
mod plot;
pub mod silhouette;
pub mod znorm;

pub use dataset::{load_dataset, parse_record, Dataset, LabeledRecord};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, Method};
pub use kmeans::{kmeans, ClusteringConfig, ClusteringResult};
pub use lstm::{LstmHyperparams, LstmModel};
pub use npfree::{convert, NpFreeState, RmseSeries};
pub use parallel::Execution;
pub use silhouette::{silhouette_overall, SilhouetteReport};
pub use znorm::{z_normalize, ZNormedSeries};
