//! Streaming conversion of a raw series into an RMSE series.
//!
//! Each incoming point `c_t` advances a small state machine:
//!
//! * `t < 2`: the point is only recorded.
//! * `2 <= t < 5`: a model is trained on `c[t-2..=t]` and predicts `c[t+1]`.
//! * `5 <= t < 7`: `RMSE_t` over the last three (observed, predicted) pairs is
//!   emitted unconditionally, then the model is retrained and predicts ahead.
//! * `t >= 7`: the current model predicts `c[t]` from `c[t-3..t]`; `RMSE_t`
//!   is compared against `mean + 3 * std` of the recent RMSE history. When the
//!   error is too large the model is retrained on `c[t-3..t]` and the
//!   prediction redone, either immediately (flag set) or on the next step
//!   (flag cleared). Every step from `t = 5` on emits exactly one value.
//!
//! A retrained model that passes the threshold always replaces the current
//! model, in both the flag-set and the flag-cleared branch.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{ensure_finite, Error, Result};
use crate::lstm::{predict_next, train, LstmHyperparams, LstmModel, WINDOW};
use crate::znorm::mean_std;

/// First time point that emits an RMSE value.
pub const FIRST_EMISSION: usize = 5;
/// First time point that evaluates the adaptive threshold.
pub const FIRST_THRESHOLD: usize = 7;
/// Shortest series that yields a non-empty RMSE series.
pub const MIN_SERIES_LEN: usize = FIRST_EMISSION + 1;
/// Default cap on the RMSE history used by the threshold.
pub const DEFAULT_HISTORY_WINDOW: usize = 150;

/// `sqrt(sum((observed - predicted)^2) / 3)` over an aligned triple.
pub fn rmse_window(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    for w in [observed, predicted] {
        if w.len() != WINDOW {
            return Err(Error::WindowSize {
                expected: WINDOW,
                found: w.len(),
            });
        }
        ensure_finite(w)?;
    }
    let sq: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(c, p)| (c - p) * (c - p))
        .sum();
    Ok((sq / WINDOW as f64).sqrt())
}

/// Adaptive threshold `mean + 3 * std` at time `t`.
///
/// `history[0]` is `RMSE_5`, so `RMSE_5 ..= RMSE_t` occupy `history[..t - 4]`.
/// While `t < w + 4` all of them are used; afterwards only the latest `w`.
/// The deviation is the population one.
pub fn threshold(history: &[f64], t: usize, w: usize) -> Result<f64> {
    let needed = t.saturating_sub(FIRST_EMISSION - 1);
    if t < FIRST_THRESHOLD || history.len() < needed {
        return Err(Error::InsufficientHistory {
            t,
            needed: needed.max(FIRST_THRESHOLD - FIRST_EMISSION + 1),
            have: history.len(),
        });
    }
    if w == 0 {
        return Err(Error::InvalidConfig(
            "history window w must be positive".into(),
        ));
    }
    let upto = &history[..needed];
    let used = if t < w + 4 { upto } else { &upto[needed - w..] };
    let (mean, std) = mean_std(used);
    Ok(mean + 3.0 * std)
}

/// The RMSE representation of one raw series: `RMSE_5 ..= RMSE_{L-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseSeries {
    pub values: Vec<f64>,
    pub source_index: usize,
}

impl RmseSeries {
    /// CSV with header `t,rmse`, one row per emission, 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,rmse\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{:.8e}", i + FIRST_EMISSION, v);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::ReportWriteFailure {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Per-series state of the converter.
#[derive(Debug, Clone)]
pub struct NpFreeState {
    hp: LstmHyperparams,
    w: usize,
    t: usize,
    flag: bool,
    model: Option<LstmModel>,
    observed: Vec<f64>,
    predicted: Vec<Option<f64>>,
    rmse_history: Vec<f64>,
    trainings: usize,
}

impl NpFreeState {
    pub fn new(hp: LstmHyperparams, w: usize) -> Result<Self> {
        hp.validate()?;
        if w == 0 {
            return Err(Error::InvalidConfig(
                "history window w must be positive".into(),
            ));
        }
        Ok(Self {
            hp,
            w,
            t: 0,
            flag: true,
            model: None,
            observed: Vec::new(),
            predicted: Vec::new(),
            rmse_history: Vec::new(),
            trainings: 0,
        })
    }

    /// Time point the next call to [`step`](Self::step) will process.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn flag(&self) -> bool {
        self.flag
    }

    pub fn model(&self) -> Option<&LstmModel> {
        self.model.as_ref()
    }

    pub fn rmse_history(&self) -> &[f64] {
        &self.rmse_history
    }

    /// Prediction currently stored for time point `z`.
    pub fn prediction(&self, z: usize) -> Option<f64> {
        self.predicted.get(z).copied().flatten()
    }

    /// Number of models trained so far.
    pub fn trainings(&self) -> usize {
        self.trainings
    }

    fn set_prediction(&mut self, z: usize, value: f64) {
        if self.predicted.len() <= z {
            self.predicted.resize(z + 1, None);
        }
        self.predicted[z] = Some(value);
    }

    fn train_on(&mut self, from: usize) -> Result<LstmModel> {
        self.trainings += 1;
        train(&self.observed[from..from + WINDOW], self.hp)
    }

    /// Trains on `c[t-2..=t]` and predicts `c[t+1]` with the new model.
    fn train_and_predict_ahead(&mut self, t: usize) -> Result<()> {
        let m = self.train_on(t - 2)?;
        let next = predict_next(&m, &self.observed[t - 2..=t])?;
        self.set_prediction(t + 1, next);
        self.model = Some(m);
        Ok(())
    }

    /// Predicts `c[t]` from `c[t-3..t]` with `model`.
    fn predict_current(&mut self, model: &LstmModel, t: usize) -> Result<()> {
        let p = predict_next(model, &self.observed[t - 3..t])?;
        self.set_prediction(t, p);
        Ok(())
    }

    fn current_rmse(&self, t: usize) -> Result<f64> {
        let predicted: Vec<f64> = (t - 2..=t)
            .map(|z| self.prediction(z).ok_or(Error::NonFiniteInput))
            .collect::<Result<_>>()?;
        rmse_window(&self.observed[t - 2..=t], &predicted)
    }

    /// Computes `RMSE_t`, stores it as the history entry for `t` (replacing
    /// any earlier value for the same `t`) and returns it with the threshold.
    fn score(&mut self, t: usize) -> Result<(f64, f64)> {
        let rmse = self.current_rmse(t)?;
        let slot = t - FIRST_EMISSION;
        self.rmse_history.truncate(slot);
        self.rmse_history.push(rmse);
        let thd = threshold(&self.rmse_history, t, self.w)?;
        Ok((rmse, thd))
    }

    /// Feeds the next observation; returns the value emitted at this step.
    pub fn step(&mut self, value: f64) -> Result<Option<f64>> {
        if !value.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        let t = self.t;
        self.observed.push(value);

        let emitted = if t < 2 {
            None
        } else if t < FIRST_EMISSION {
            self.train_and_predict_ahead(t)?;
            None
        } else if t < FIRST_THRESHOLD {
            let rmse = self.current_rmse(t)?;
            self.rmse_history.push(rmse);
            self.train_and_predict_ahead(t)?;
            Some(rmse)
        } else if self.flag {
            if t != FIRST_THRESHOLD {
                let m = self.model.take().expect("model exists after warm-up");
                let r = self.predict_current(&m, t);
                self.model = Some(m);
                r?;
            }
            let (rmse, thd) = self.score(t)?;
            if rmse <= thd {
                Some(rmse)
            } else {
                let fresh = self.train_on(t - 3)?;
                self.predict_current(&fresh, t)?;
                let (rmse, thd) = self.score(t)?;
                if rmse <= thd {
                    self.model = Some(fresh);
                } else {
                    self.flag = false;
                }
                Some(rmse)
            }
        } else {
            let fresh = self.train_on(t - 3)?;
            self.predict_current(&fresh, t)?;
            let (rmse, thd) = self.score(t)?;
            if rmse <= thd {
                self.model = Some(fresh);
                self.flag = true;
            }
            Some(rmse)
        };

        self.t += 1;
        Ok(emitted)
    }
}

/// Converts a whole series. The output has `series.len() - 5` values.
pub fn convert(series: &[f64], hp: LstmHyperparams, w: usize) -> Result<Vec<f64>> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: MIN_SERIES_LEN,
        });
    }
    ensure_finite(series)?;
    let mut state = NpFreeState::new(hp, w)?;
    let mut out = Vec::with_capacity(series.len() - FIRST_EMISSION);
    for &c in series {
        if let Some(r) = state.step(c)? {
            out.push(r);
        }
    }
    debug_assert_eq!(out.len(), series.len() - FIRST_EMISSION);
    Ok(out)
}

/// [`convert`] tagged with the index of the source series.
pub fn convert_indexed(
    series: &[f64],
    source_index: usize,
    hp: LstmHyperparams,
    w: usize,
) -> Result<RmseSeries> {
    Ok(RmseSeries {
        values: convert(series, hp, w)?,
        source_index,
    })
}
