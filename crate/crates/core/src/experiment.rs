//! End-to-end comparison of the two front-ends on one dataset.
//!
//! 1. Every raw series is converted both to its RMSE series and to its
//!    z-normalized form; each conversion is timed on its own.
//! 2. For every `k`, one set of initial member indices is drawn from
//!    `(n, k, seed)` and both representations are clustered from it.
//! 3. Both clusterings are scored by silhouette on the raw series.
//!
//! Per-series conversions fan out over the worker pool; everything is merged
//! in series order, so the numbers in `report.csv` never depend on the thread
//! count. Timings obviously do, which is why they can be left out of the CSV.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::dataset::{load_dataset, render_record, Dataset, LabeledRecord};
use crate::error::{Error, Result};
use crate::kmeans::{
    kmeans, select_initial_centroids, ClusteringConfig, ClusteringResult, DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
};
use crate::lstm::LstmHyperparams;
use crate::npfree::{self, RmseSeries, DEFAULT_HISTORY_WINDOW};
use crate::parallel::{current_threads, with_threads, Execution};
use crate::plot;
use crate::silhouette::{silhouette_from_distances, DistanceMatrix, SilhouetteReport};
use crate::znorm::{mean_std, z_normalize};

/// Header of `report.csv`.
pub const REPORT_HEADER: &str =
    "method,k,silhouette,inertia,iterations,preprocess_mean_s,preprocess_std_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    NpFree,
    ZNorm,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::NpFree, Method::ZNorm];

    pub fn name(self) -> &'static str {
        match self {
            Method::NpFree => "npfree",
            Method::ZNorm => "znorm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "npfree" => Ok(Method::NpFree),
            "znorm" => Ok(Method::ZNorm),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub input: PathBuf,
    pub class_filter: Option<i64>,
    pub k_list: Vec<usize>,
    pub seed: u64,
    pub w: usize,
    pub lstm: LstmHyperparams,
    pub output_dir: PathBuf,
    /// Worker threads; 0 means the global pool default.
    pub threads: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl ExperimentConfig {
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            class_filter: None,
            k_list: vec![13, 14, 15, 17, 19, 20, 21, 22, 26, 28, 29, 33],
            seed: 1,
            w: DEFAULT_HISTORY_WINDOW,
            lstm: LstmHyperparams::default(),
            output_dir: output_dir.into(),
            threads: 0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k_list.is_empty() {
            return Err(Error::InvalidConfig("k list is empty".into()));
        }
        if let Some(&k) = self.k_list.iter().find(|&&k| k == 0 || k > n) {
            return Err(Error::KTooLarge { k, n });
        }
        self.lstm.validate()
    }
}

/// Mean and population standard deviation of per-series wall-clock seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStats {
    pub mean_s: f64,
    pub std_s: f64,
    pub samples: usize,
}

impl TimingStats {
    pub fn from_samples(seconds: &[f64]) -> Self {
        let (mean_s, std_s) = if seconds.is_empty() {
            (0.0, 0.0)
        } else {
            mean_std(seconds)
        };
        Self {
            mean_s,
            std_s,
            samples: seconds.len(),
        }
    }
}

/// Output of one front-end over a whole dataset.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub method: Method,
    pub series: Vec<Vec<f64>>,
    pub seconds: Vec<f64>,
    pub timing: TimingStats,
}

/// Converts every series with `method`, timing each conversion on its own.
pub fn time_preprocessing(
    dataset: &Dataset,
    method: Method,
    lstm: LstmHyperparams,
    w: usize,
    exec: Execution,
) -> Result<Preprocessed> {
    if dataset.is_empty() {
        return Err(Error::EmptySelection);
    }
    let results = exec.map(&dataset.records, |_, rec| {
        let start = Instant::now();
        let out = match method {
            Method::NpFree => npfree::convert(&rec.values, lstm, w),
            Method::ZNorm => z_normalize(&rec.values),
        };
        out.map(|v| (v, start.elapsed().as_secs_f64()))
    });
    let (series, seconds): (Vec<_>, Vec<_>) = results
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(Preprocessed {
        method,
        timing: TimingStats::from_samples(&seconds),
        series,
        seconds,
    })
}

#[derive(Debug, Clone)]
pub struct ClusteringRun {
    pub method: Method,
    pub k: usize,
    pub init_indices: Vec<usize>,
    pub clustering: ClusteringResult,
    pub silhouette: SilhouetteReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub dataset: Dataset,
    pub npfree: Preprocessed,
    pub znorm: Preprocessed,
    /// Sorted by method, then k.
    pub runs: Vec<ClusteringRun>,
    pub threads: usize,
}

impl ExperimentReport {
    pub fn preprocessed(&self, method: Method) -> &Preprocessed {
        match method {
            Method::NpFree => &self.npfree,
            Method::ZNorm => &self.znorm,
        }
    }

    pub fn run(&self, method: Method, k: usize) -> Option<&ClusteringRun> {
        self.runs.iter().find(|r| r.method == method && r.k == k)
    }

    pub fn rmse_series(&self) -> Vec<RmseSeries> {
        self.npfree
            .series
            .iter()
            .enumerate()
            .map(|(i, v)| RmseSeries {
                values: v.clone(),
                source_index: i,
            })
            .collect()
    }

    /// Contents of `report.csv`. With `include_timing == false` the two
    /// timing cells are left empty, making the file a pure function of the
    /// inputs.
    pub fn to_csv(&self, include_timing: bool) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.runs {
            let t = self.preprocessed(r.method).timing;
            let _ = write!(
                out,
                "{},{},{:.6},{:.6},{},",
                r.method, r.k, r.silhouette.overall, r.clustering.inertia, r.clustering.iterations
            );
            if include_timing {
                let _ = writeln!(out, "{:.6},{:.6}", t.mean_s, t.std_s);
            } else {
                out.push_str(",\n");
            }
        }
        out
    }
}

/// Runs the protocol on an already loaded dataset.
pub fn run_experiment_on(dataset: Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate(dataset.len())?;
    with_threads(cfg.threads, |exec| {
        let threads = match exec {
            Execution::Sequential => 1,
            Execution::Parallel => current_threads(),
        };
        let npfree = time_preprocessing(&dataset, Method::NpFree, cfg.lstm, cfg.w, exec)?;
        let znorm = time_preprocessing(&dataset, Method::ZNorm, cfg.lstm, cfg.w, exec)?;
        let raw = dataset.series();
        let dist = DistanceMatrix::euclidean(&raw, exec)?;

        let mut ks = cfg.k_list.clone();
        ks.sort_unstable();
        ks.dedup();
        let mut runs = Vec::with_capacity(2 * ks.len());
        for method in Method::ALL {
            let repr = match method {
                Method::NpFree => &npfree.series,
                Method::ZNorm => &znorm.series,
            };
            for &k in &ks {
                let init_indices = select_initial_centroids(raw.len(), k, cfg.seed)?;
                let ccfg = ClusteringConfig {
                    max_iterations: cfg.max_iterations,
                    tolerance: cfg.tolerance,
                    ..ClusteringConfig::new(init_indices.clone())
                };
                let clustering = kmeans(repr, &ccfg, exec)?;
                let silhouette = if k == 1 {
                    // a single cluster has no silhouette; report 0 like the singleton case
                    SilhouetteReport {
                        per_series: vec![0.0; raw.len()],
                        overall: 0.0,
                    }
                } else {
                    silhouette_from_distances(&clustering.labels, &dist, exec)?
                };
                runs.push(ClusteringRun {
                    method,
                    k,
                    init_indices,
                    clustering,
                    silhouette,
                });
            }
        }
        Ok(ExperimentReport {
            dataset,
            npfree,
            znorm,
            runs,
            threads,
        })
    })
}

/// Loads `cfg.input` and runs the protocol.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let dataset = load_dataset(&cfg.input, cfg.class_filter)?;
    run_experiment_on(dataset, cfg)
}

/// Which files [`emit_report`] writes besides `report.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitOptions {
    pub include_timing: bool,
    /// Per-series `t,rmse` dumps, labels and per-series silhouettes.
    pub details: bool,
    pub plot: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            include_timing: true,
            details: true,
            plot: false,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::ReportWriteFailure {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::ReportWriteFailure {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes `report.csv` and friends under `dir`, returning the written paths.
///
/// Layout:
///
/// ```text
/// report.csv                     one row per (method, k)
/// run_info.txt                   thread count, dataset shape
/// rmse/series_NNN.csv            t,rmse per series            (details)
/// labels/<method>_k<k>.csv       series_no,cluster_id         (details)
/// silhouette/<method>_k<k>.csv   per-series silhouettes       (details)
/// silhouette_vs_k.svg                                         (plot)
/// clusters_<method>_k<k>.svg     representation | raw panels  (plot)
/// ```
pub fn emit_report(
    report: &ExperimentReport,
    dir: &Path,
    opts: EmitOptions,
) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    let mut put = |path: PathBuf, contents: &str| -> Result<()> {
        write_file(&path, contents)?;
        written.push(path);
        Ok(())
    };

    put(dir.join("report.csv"), &report.to_csv(opts.include_timing))?;
    put(
        dir.join("run_info.txt"),
        &format!(
            "threads={}\nseries={}\nseries_length={}\nnpfree_series_length={}\n",
            report.threads,
            report.dataset.len(),
            report.dataset.series_length,
            report
                .dataset
                .series_length
                .saturating_sub(npfree::FIRST_EMISSION),
        ),
    )?;

    if opts.details {
        for sub in ["rmse", "labels", "silhouette"] {
            create_dir(&dir.join(sub))?;
        }
        for rmse in report.rmse_series() {
            put(
                dir.join("rmse")
                    .join(format!("series_{:03}.csv", rmse.source_index + 1)),
                &rmse.to_csv(),
            )?;
        }
        for run in &report.runs {
            let stem = format!("{}_k{}.csv", run.method, run.k);
            put(dir.join("labels").join(&stem), &run.clustering.labels_csv())?;
            put(
                dir.join("silhouette").join(&stem),
                &run.silhouette.to_csv(&run.clustering.labels),
            )?;
        }
    }

    if opts.plot {
        let lines: Vec<(&str, Vec<(usize, f64)>)> = Method::ALL
            .iter()
            .map(|&m| {
                let pts = report
                    .runs
                    .iter()
                    .filter(|r| r.method == m)
                    .map(|r| (r.k, r.silhouette.overall))
                    .collect();
                (m.name(), pts)
            })
            .collect();
        put(
            dir.join("silhouette_vs_k.svg"),
            &plot::silhouette_vs_k(&lines),
        )?;
        let raw = report.dataset.series();
        for run in &report.runs {
            let svg = plot::cluster_panels(
                &format!("{} clusters, k = {}", run.method, run.k),
                &report.preprocessed(run.method).series,
                &raw,
                &run.clustering.labels,
                run.k,
            );
            put(
                dir.join(format!("clusters_{}_k{}.svg", run.method, run.k)),
                &svg,
            )?;
        }
    }
    Ok(written)
}

/// Converts every series of `dataset` with `method` and writes the result
/// under `dir` as `<method>.txt` in the same label-first text format as the
/// input. For `npfree` the per-series `t,rmse` dumps are written as well.
pub fn convert_dataset(
    dataset: &Dataset,
    method: Method,
    lstm: LstmHyperparams,
    w: usize,
    threads: usize,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let pre = with_threads(threads, |exec| {
        time_preprocessing(dataset, method, lstm, w, exec)
    })?;
    create_dir(dir)?;
    let mut written = Vec::new();
    let mut text = String::new();
    for (rec, values) in dataset.records.iter().zip(&pre.series) {
        text.push_str(&render_record(&LabeledRecord {
            label: rec.label,
            values: values.clone(),
        }));
        text.push('\n');
    }
    let path = dir.join(format!("{method}.txt"));
    write_file(&path, &text)?;
    written.push(path);
    if method == Method::NpFree {
        create_dir(&dir.join("rmse"))?;
        for (i, values) in pre.series.iter().enumerate() {
            let rmse = RmseSeries {
                values: values.clone(),
                source_index: i,
            };
            let path = dir.join("rmse").join(format!("series_{:03}.csv", i + 1));
            write_file(&path, &rmse.to_csv())?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let records = (0..6)
            .map(|i| LabeledRecord {
                label: 2,
                values: (0..12)
                    .map(|t| ((t + i) as f64 * 0.5).sin() * (1.0 + i as f64))
                    .collect(),
            })
            .collect();
        Dataset::new(records).unwrap()
    }

    fn cfg(k_list: Vec<usize>) -> ExperimentConfig {
        ExperimentConfig {
            k_list,
            w: 10,
            lstm: LstmHyperparams {
                epochs: 5,
                ..LstmHyperparams::default()
            },
            threads: 1,
            ..ExperimentConfig::new("unused", "unused")
        }
    }

    #[test]
    fn row_count_and_order() {
        let rep = run_experiment_on(toy(), &cfg(vec![3, 2, 4])).unwrap();
        let csv = rep.to_csv(true);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], REPORT_HEADER);
        assert_eq!(lines.len(), 7);
        let keys: Vec<(&str, &str)> = lines[1..]
            .iter()
            .map(|l| {
                let mut f = l.split(',');
                (f.next().unwrap(), f.next().unwrap())
            })
            .collect();
        assert_eq!(
            keys,
            vec![
                ("npfree", "2"),
                ("npfree", "3"),
                ("npfree", "4"),
                ("znorm", "2"),
                ("znorm", "3"),
                ("znorm", "4")
            ]
        );
        assert_eq!(rep.npfree.timing.samples, 6);
        assert_eq!(rep.npfree.series[0].len(), 7);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 7));
    }

    #[test]
    fn shared_init_indices() {
        let rep = run_experiment_on(toy(), &cfg(vec![2, 3])).unwrap();
        for k in [2, 3] {
            assert_eq!(
                rep.run(Method::NpFree, k).unwrap().init_indices,
                rep.run(Method::ZNorm, k).unwrap().init_indices
            );
        }
    }

    #[test]
    fn k_equal_n_scores_zero() {
        let rep = run_experiment_on(toy(), &cfg(vec![6])).unwrap();
        for m in Method::ALL {
            let r = rep.run(m, 6).unwrap();
            assert_eq!(r.silhouette.overall, 0.0);
            assert_eq!(r.clustering.inertia, 0.0);
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(
            run_experiment_on(toy(), &cfg(vec![])),
            Err(Error::InvalidConfig(_))
        ));
        assert_eq!(
            run_experiment_on(toy(), &cfg(vec![7])).unwrap_err(),
            Error::KTooLarge { k: 7, n: 6 }
        );
        assert_eq!(
            run_experiment_on(toy(), &cfg(vec![0])).unwrap_err(),
            Error::KTooLarge { k: 0, n: 6 }
        );
    }

    #[test]
    fn timing_columns_can_be_omitted() {
        let rep = run_experiment_on(toy(), &cfg(vec![2])).unwrap();
        for line in rep.to_csv(false).lines().skip(1) {
            assert!(line.ends_with(",,"), "{line}");
        }
    }

    #[test]
    fn emit_writes_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let rep = run_experiment_on(toy(), &cfg(vec![2, 3])).unwrap();
        let files = emit_report(
            &rep,
            dir.path(),
            EmitOptions {
                plot: true,
                ..EmitOptions::default()
            },
        )
        .unwrap();
        for rel in [
            "report.csv",
            "run_info.txt",
            "rmse/series_001.csv",
            "rmse/series_006.csv",
            "labels/znorm_k3.csv",
            "silhouette/npfree_k2.csv",
            "silhouette_vs_k.svg",
            "clusters_npfree_k3.svg",
        ] {
            assert!(dir.path().join(rel).is_file(), "missing {rel}");
        }
        assert_eq!(files.len(), 2 + 6 + 8 + 1 + 4);
    }

    #[test]
    fn unwritable_directory_fails() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let rep = run_experiment_on(toy(), &cfg(vec![2])).unwrap();
        assert!(matches!(
            emit_report(&rep, &blocker.join("out"), EmitOptions::default()),
            Err(Error::ReportWriteFailure { .. })
        ));
    }

    #[test]
    fn convert_dataset_round_trips_through_loader() {
        let dir = tempfile::tempdir().unwrap();
        let ds = toy();
        convert_dataset(
            &ds,
            Method::ZNorm,
            LstmHyperparams::default(),
            150,
            2,
            dir.path(),
        )
        .unwrap();
        let back = load_dataset(dir.path().join("znorm.txt"), None).unwrap();
        assert_eq!(back.len(), 6);
        assert_eq!(
            back.records[1].values,
            z_normalize(&ds.records[1].values).unwrap()
        );
        let lstm = LstmHyperparams {
            epochs: 3,
            ..LstmHyperparams::default()
        };
        let files = convert_dataset(&ds, Method::NpFree, lstm, 150, 2, dir.path()).unwrap();
        assert_eq!(files.len(), 7);
        assert_eq!(
            load_dataset(dir.path().join("npfree.txt"), Some(2))
                .unwrap()
                .series_length,
            7
        );
    }
}
