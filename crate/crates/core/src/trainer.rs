//! Fixed-increment training, prediction and initial-weight sweeps.
//!
//! Each iteration runs a forward pass over every district with one shared
//! [`WeightState`], records the mean error per variable and each district's
//! output sigmoid, and then adds the configured increment to every weight. Since
//! inputs and weights are non-negative, `zt` grows with every update and each
//! district eventually saturates to `zs == 1.0`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dataset::{Dataset, VARIABLE_COUNT};
use crate::network::{forward, ForwardTrace, WeightState};
use crate::scalar::ordered_sum;
use crate::{Error, Result, Scalar};

pub const DEFAULT_THRESHOLD: f64 = 1e-9;
pub const DEFAULT_INITIAL_WEIGHT: f64 = 0.76;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig<T> {
    pub threshold: T,
    pub increment: T,
    pub initial_weight: T,
    pub bias: T,
    pub max_iterations: usize,
    /// Stop only when every error is exactly zero; otherwise stop once every
    /// error is at most `threshold`.
    pub strict_zero: bool,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            threshold: T::lit(DEFAULT_THRESHOLD),
            increment: T::lit(crate::network::DEFAULT_INCREMENT),
            initial_weight: T::lit(DEFAULT_INITIAL_WEIGHT),
            bias: T::lit(crate::network::DEFAULT_BIAS),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            strict_zero: true,
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    pub fn with_initial_weight(mut self, w0: T) -> Self {
        self.initial_weight = w0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.threshold > T::zero() && self.threshold.is_finite()) {
            return bad(format!(
                "threshold must be positive, got {}",
                self.threshold
            ));
        }
        if !(self.increment > T::zero() && self.increment.is_finite()) {
            return bad(format!(
                "increment must be positive, got {}",
                self.increment
            ));
        }
        if !(self.initial_weight >= T::zero() && self.initial_weight <= T::one()) {
            return bad(format!(
                "initial weight must lie in [0, 1], got {}",
                self.initial_weight
            ));
        }
        if !self.bias.is_finite() {
            return bad(format!("bias must be finite, got {}", self.bias));
        }
        if self.max_iterations == 0 {
            return bad("max iterations must be at least 1".into());
        }
        Ok(())
    }

    pub fn initial_weights(&self) -> WeightState<T> {
        WeightState::uniform(self.initial_weight, self.bias, self.increment)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    AllErrorsZero,
    ThresholdMet,
    MaxIterations,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::AllErrorsZero => "all-errors-zero",
            StopReason::ThresholdMet => "threshold-met",
            StopReason::MaxIterations => "max-iterations",
        }
    }

    pub fn converged(self) -> bool {
        self != StopReason::MaxIterations
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-errors-zero" => Ok(StopReason::AllErrorsZero),
            "threshold-met" => Ok(StopReason::ThresholdMet),
            "max-iterations" => Ok(StopReason::MaxIterations),
            other => Err(Error::Domain(format!("unknown stop reason {other:?}"))),
        }
    }
}

/// What one iteration looked like, across all districts.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord<T> {
    /// 1-based; iteration `n` ran with `n - 1` weight updates applied.
    pub iteration: usize,
    /// Mean over districts of each variable's relative error.
    pub mean_error: [T; VARIABLE_COUNT],
    /// Output sigmoid per district, in dataset order.
    pub zs: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport<T> {
    pub districts: Vec<String>,
    pub config: TrainConfig<T>,
    pub iterations: usize,
    pub per_iteration: Vec<IterationRecord<T>>,
    /// First iteration at which each district's `zs` was exactly one.
    pub convergence_iteration: Vec<Option<usize>>,
    /// Weights used by the last recorded iteration.
    pub final_weights: WeightState<T>,
    pub stop_reason: StopReason,
}

impl<T: Scalar> TrainReport<T> {
    pub fn final_zs(&self) -> &[T] {
        self.per_iteration.last().map_or(&[], |it| it.zs.as_slice())
    }

    pub fn converged(&self) -> bool {
        self.stop_reason.converged()
    }

    pub fn convergence_of(&self, district: &str) -> Option<usize> {
        let i = self.districts.iter().position(|d| d == district)?;
        self.convergence_iteration[i]
    }
}

/// Adds `cfg.increment` to every weight in both layers. Bias is left alone.
pub fn update_weights<T: Scalar>(ws: &WeightState<T>, cfg: &TrainConfig<T>) -> WeightState<T> {
    let inc = cfg.increment;
    WeightState {
        input: ws.input.map(|row| row.map(|w| w + inc)),
        output: ws.output.map(|w| w + inc),
        bias: ws.bias,
        increment: ws.increment,
    }
}

fn forward_all<T: Scalar>(d: &Dataset<T>, ws: &WeightState<T>) -> Result<Vec<ForwardTrace<T>>> {
    d.records.iter().map(|r| forward(r, ws)).collect()
}

fn mean_errors<T: Scalar>(traces: &[ForwardTrace<T>]) -> [T; VARIABLE_COUNT] {
    let n = T::from(traces.len()).expect("district count fits the scalar type");
    let mut out = [T::zero(); VARIABLE_COUNT];
    for (v, slot) in out.iter_mut().enumerate() {
        *slot = ordered_sum(traces.iter().map(|t| t.errors[v])) / n;
    }
    out
}

/// Runs the training loop on a preprocessed, non-empty dataset.
pub fn train<T: Scalar>(d: &Dataset<T>, cfg: &TrainConfig<T>) -> Result<TrainReport<T>> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::Domain("cannot train on an empty dataset".into()));
    }
    d.ensure_preprocessed()?;

    let mut ws = cfg.initial_weights();
    let mut per_iteration = Vec::new();
    let mut convergence_iteration = vec![None; d.len()];

    for iteration in 1..=cfg.max_iterations {
        let traces = forward_all(d, &ws)?;
        for (slot, t) in convergence_iteration.iter_mut().zip(&traces) {
            if slot.is_none() && t.is_exact() {
                *slot = Some(iteration);
            }
        }
        per_iteration.push(IterationRecord {
            iteration,
            mean_error: mean_errors(&traces),
            zs: traces.iter().map(|t| t.zs).collect(),
        });

        let mut errors = traces.iter().flat_map(|t| t.errors.iter().copied());
        let stop = if cfg.strict_zero {
            errors
                .all(|e| e == T::zero())
                .then_some(StopReason::AllErrorsZero)
        } else {
            errors
                .all(|e| e.abs() <= cfg.threshold)
                .then_some(StopReason::ThresholdMet)
        };
        let stop = stop.or((iteration == cfg.max_iterations).then_some(StopReason::MaxIterations));

        if let Some(stop_reason) = stop {
            return Ok(TrainReport {
                districts: d.names(),
                config: cfg.clone(),
                iterations: iteration,
                per_iteration,
                convergence_iteration,
                final_weights: ws,
                stop_reason,
            });
        }
        ws = update_weights(&ws, cfg);
    }
    unreachable!("loop returns at max_iterations")
}

/// One forward pass per district with frozen weights; returns the outputs only.
pub fn predict<T: Scalar>(d: &Dataset<T>, ws: &WeightState<T>) -> Result<Vec<[T; VARIABLE_COUNT]>> {
    d.ensure_preprocessed()?;
    ws.validate()?;
    Ok(forward_all(d, ws)?.into_iter().map(|t| t.outputs).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint<T> {
    pub initial_weight: T,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub convergence_iteration: Vec<Option<usize>>,
}

/// Trains once per grid value of the shared initial weight. Points run in
/// parallel; results come back in grid order.
pub fn sweep<T: Scalar>(
    d: &Dataset<T>,
    grid: &[T],
    cfg: &TrainConfig<T>,
) -> Result<Vec<SweepPoint<T>>> {
    if grid.is_empty() {
        return Err(Error::Domain("sweep grid is empty".into()));
    }
    if let Some(w) = grid.iter().find(|w| !(**w >= T::zero() && **w <= T::one())) {
        return Err(Error::Domain(format!("grid value {w} outside [0, 1]")));
    }
    grid.par_iter()
        .map(|&w0| {
            let report = train(d, &cfg.clone().with_initial_weight(w0))?;
            Ok(SweepPoint {
                initial_weight: w0,
                iterations: report.iterations,
                stop_reason: report.stop_reason,
                convergence_iteration: report.convergence_iteration,
            })
        })
        .collect()
}

/// Grid `from, from + step, ...` up to `to` inclusive. Each point is computed
/// from its index so errors do not accumulate along the grid; when `step` is the
/// reciprocal of an integer (0.01, 0.05, ...) points are `from + i / n`, which
/// lands on the nearest double to the decimal value.
pub fn weight_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "grid step must be positive, got {step}"
        )));
    }
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    if !in_unit(from) || !in_unit(to) || from > to {
        return Err(Error::InvalidConfig(format!(
            "grid bounds must satisfy 0 <= from <= to <= 1, got {from}..{to}"
        )));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize;
    let per_unit = (1.0 / step).round();
    let point = |i: usize| {
        if per_unit > 0.0 && (per_unit * step - 1.0).abs() < 1e-12 {
            from + i as f64 / per_unit
        } else {
            from + i as f64 * step
        }
    };
    Ok((0..=count).map(|i| point(i).min(to)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DistrictRecord;

    fn single_large() -> Dataset<f64> {
        Dataset::new("one", vec![DistrictRecord::new("big", [1e3; 6])])
            .unwrap()
            .preprocess()
    }

    #[test]
    fn update_adds_increment_everywhere() {
        let cfg = TrainConfig::default();
        let ws = update_weights(&WeightState::with_initial(0.5_f64), &cfg);
        assert!(ws.weights().all(|w| w == 0.51));
        assert_eq!(ws.bias, 1.0);

        let zero = TrainConfig {
            increment: 0.0,
            ..cfg.clone()
        };
        assert_eq!(update_weights(&ws, &zero), ws);

        let mut w = WeightState::with_initial(0.3_f64);
        for _ in 0..17 {
            w = update_weights(&w, &cfg);
        }
        assert!(w.weights().all(|v| (v - 0.47).abs() < 1e-12));
    }

    #[test]
    fn single_district_converges_at_iteration_two() {
        let cfg = TrainConfig::default().with_initial_weight(0.93);
        let r = train(&single_large(), &cfg).unwrap();
        assert_eq!(r.iterations, 2);
        assert_eq!(r.convergence_iteration, vec![Some(2)]);
        assert_eq!(r.stop_reason, StopReason::AllErrorsZero);
        assert!(r.per_iteration[0].zs[0] < 1.0);
        assert!((r.final_weights.output[0] - 0.94).abs() < 1e-12);
    }

    #[test]
    fn immediate_convergence_takes_one_iteration() {
        let r = train(
            &single_large(),
            &TrainConfig::default().with_initial_weight(1.0),
        )
        .unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.per_iteration[0].mean_error, [0.0; 6]);
        assert_eq!(
            r.final_weights,
            TrainConfig::default()
                .with_initial_weight(1.0)
                .initial_weights()
        );
    }

    #[test]
    fn max_iterations_stops_the_loop() {
        let cfg = TrainConfig {
            max_iterations: 1,
            ..TrainConfig::default().with_initial_weight(0.1)
        };
        let r = train(&single_large(), &cfg).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.stop_reason, StopReason::MaxIterations);
        assert_eq!(r.convergence_iteration, vec![None]);
    }

    #[test]
    fn threshold_mode_stops_before_saturation() {
        let cfg = TrainConfig {
            strict_zero: false,
            threshold: 1e-9,
            ..TrainConfig::default().with_initial_weight(0.5)
        };
        let threshold = train(&single_large(), &cfg).unwrap();
        let strict = train(
            &single_large(),
            &TrainConfig::default().with_initial_weight(0.5),
        )
        .unwrap();
        assert_eq!(threshold.stop_reason, StopReason::ThresholdMet);
        assert!(threshold.iterations <= strict.iterations);
        let last = threshold.per_iteration.last().unwrap();
        assert!(last.mean_error.iter().all(|e| *e <= 1e-9));
    }

    #[test]
    fn rejects_bad_inputs() {
        let empty = Dataset::<f64>::new("e", vec![]).unwrap().preprocess();
        assert!(matches!(
            train(&empty, &TrainConfig::default()),
            Err(Error::Domain(_))
        ));

        let raw = Dataset::new("r", vec![DistrictRecord::new("a", [1.0; 6])]).unwrap();
        assert!(matches!(
            train(&raw, &TrainConfig::default()),
            Err(Error::Precondition(_))
        ));

        let bad = TrainConfig {
            increment: -0.5,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train(&single_large(), &bad),
            Err(Error::InvalidConfig(_))
        ));
        assert!(TrainConfig::<f64>::default()
            .with_initial_weight(1.5)
            .validate()
            .is_err());
        assert!(TrainConfig::<f64> {
            threshold: 0.0,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn predict_with_zero_output_weights_halves_inputs() {
        let d = single_large();
        let ws = WeightState::with_initial(0.5).with_output(0.0);
        assert_eq!(predict(&d, &ws).unwrap(), vec![[500.0; 6]]);
    }

    #[test]
    fn sweep_examples() {
        let d = single_large();
        let cfg = TrainConfig::default();
        let pts = sweep(&d, &[0.93, 1.0], &cfg).unwrap();
        assert_eq!(pts[0].iterations, 2);
        assert_eq!(pts[1].iterations, 1);
        assert!(matches!(sweep(&d, &[], &cfg), Err(Error::Domain(_))));
        assert!(matches!(sweep(&d, &[1.2], &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn grid_arithmetic() {
        let g = weight_grid(0.0, 1.0, 0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert_eq!(g[95], 0.95);
        assert_eq!(g[7], 0.07);
        assert_eq!(
            weight_grid(0.0, 1.0, 0.3).unwrap(),
            vec![0.0, 0.3, 0.6, 0.8999999999999999]
        );
        assert_eq!(weight_grid(0.5, 0.5, 0.1).unwrap(), vec![0.5]);
        assert!(weight_grid(0.0, 1.0, 0.0).is_err());
        assert!(weight_grid(0.6, 0.5, 0.1).is_err());
        assert!(weight_grid(-0.1, 0.5, 0.1).is_err());
    }

    #[test]
    fn stop_reason_round_trips() {
        for s in [
            StopReason::AllErrorsZero,
            StopReason::ThresholdMet,
            StopReason::MaxIterations,
        ] {
            assert_eq!(s.as_str().parse::<StopReason>().unwrap(), s);
        }
    }
}
