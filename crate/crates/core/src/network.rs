//! One forward pass of the 6-6-1 network.
//!
//! ```text
//! raw[6] --sigmoid--> x[6] --w_in (6x6) + bias--> y[6] --* w_out--> z[6]
//!        --sum--> zt --sigmoid--> zs --* raw--> outputs[6]
//! ```
//!
//! `zs` is a single scalar per district, so the six relative errors of a district
//! all equal `1 - zs` up to rounding.

use crate::activation::logistic;
use crate::dataset::{DistrictRecord, VARIABLE_COUNT};
use crate::scalar::ordered_sum;
use crate::{Error, Result, Scalar};

/// Number of hidden nodes.
pub const HIDDEN_NODES: usize = 6;

pub const DEFAULT_BIAS: f64 = 1.0;
pub const DEFAULT_INCREMENT: f64 = 0.01;

/// Network weights. `input[i][j]` connects input `j` to hidden node `i`;
/// `output[i]` scales hidden node `i` into the output sum.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightState<T> {
    pub input: [[T; VARIABLE_COUNT]; HIDDEN_NODES],
    pub output: [T; HIDDEN_NODES],
    pub bias: T,
    pub increment: T,
}

impl<T: Scalar> WeightState<T> {
    /// Every weight in both layers set to `w0`.
    pub fn uniform(w0: T, bias: T, increment: T) -> Self {
        Self {
            input: [[w0; VARIABLE_COUNT]; HIDDEN_NODES],
            output: [w0; HIDDEN_NODES],
            bias,
            increment,
        }
    }

    /// Uniform weights with bias +1 and increment 0.01.
    pub fn with_initial(w0: T) -> Self {
        Self::uniform(w0, T::lit(DEFAULT_BIAS), T::lit(DEFAULT_INCREMENT))
    }

    pub fn with_output(mut self, w: T) -> Self {
        self.output = [w; HIDDEN_NODES];
        self
    }

    pub fn weights(&self) -> impl Iterator<Item = T> + '_ {
        self.input
            .iter()
            .flatten()
            .chain(self.output.iter())
            .copied()
    }

    /// Checks that every weight is finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.weights().find(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::Precondition(format!(
                "weights must be finite and non-negative, found {w}"
            )));
        }
        if !self.bias.is_finite() {
            return Err(Error::Precondition(format!(
                "non-finite bias {}",
                self.bias
            )));
        }
        Ok(())
    }
}

/// Intermediate values of the output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputStage<T> {
    pub z: [T; HIDDEN_NODES],
    pub zt: T,
    pub zs: T,
    pub outputs: [T; VARIABLE_COUNT],
    pub errors: [T; VARIABLE_COUNT],
}

/// Every intermediate value of one district's forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace<T> {
    pub x: [T; VARIABLE_COUNT],
    pub y: [T; HIDDEN_NODES],
    pub z: [T; HIDDEN_NODES],
    pub zt: T,
    pub zs: T,
    pub outputs: [T; VARIABLE_COUNT],
    pub errors: [T; VARIABLE_COUNT],
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn is_exact(&self) -> bool {
        self.zs == T::one()
    }
}

/// Sigmoid of each raw value, in variable order.
pub fn input_transform<T: Scalar>(r: &DistrictRecord<T>) -> Result<[T; VARIABLE_COUNT]> {
    r.ensure_no_zero()?;
    Ok(r.values.map(logistic))
}

/// `y[i] = sum_j x[j] * w_in[i][j] + bias`, summed left to right.
pub fn hidden_sum<T: Scalar>(x: &[T; VARIABLE_COUNT], ws: &WeightState<T>) -> [T; HIDDEN_NODES] {
    ws.input
        .map(|row| ordered_sum(x.iter().zip(row.iter()).map(|(a, w)| *a * *w)) + ws.bias)
}

/// Scales the hidden values into `zt`, squashes it into `zs` and rebuilds the
/// record as `zs * original`.
pub fn output_stage<T: Scalar>(
    y: &[T; HIDDEN_NODES],
    ws: &WeightState<T>,
    original: &DistrictRecord<T>,
) -> Result<OutputStage<T>> {
    original.ensure_no_zero()?;
    let mut z = [T::zero(); HIDDEN_NODES];
    for ((zi, yi), wi) in z.iter_mut().zip(y).zip(&ws.output) {
        *zi = *yi * *wi;
    }
    let zt = ordered_sum(z);
    let zs = logistic(zt);
    let outputs = original.values.map(|v| zs * v);
    let mut errors = [T::zero(); VARIABLE_COUNT];
    for ((e, o), v) in errors.iter_mut().zip(&outputs).zip(&original.values) {
        *e = (*v - *o) / *v;
    }
    Ok(OutputStage {
        z,
        zt,
        zs,
        outputs,
        errors,
    })
}

/// Full forward pass for one district.
pub fn forward<T: Scalar>(r: &DistrictRecord<T>, ws: &WeightState<T>) -> Result<ForwardTrace<T>> {
    let x = input_transform(r)?;
    let y = hidden_sum(&x, ws);
    let out = output_stage(&y, ws, r)?;
    Ok(ForwardTrace {
        x,
        y,
        z: out.z,
        zt: out.zt,
        zs: out.zs,
        outputs: out.outputs,
        errors: out.errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nilgiris() -> DistrictRecord<f64> {
        DistrictRecord::new("The-Nilgiris", [1015.0, 3565.0, 0.01, 0.01, 0.01, 0.01])
    }

    fn thanjavur() -> DistrictRecord<f64> {
        DistrictRecord::new(
            "Thanjavur",
            [27368.0, 90224.0, 130946.0, 350520.0, 3567.0, 11573.0],
        )
    }

    fn round4(v: f64) -> f64 {
        (v * 1e4).round() / 1e4
    }

    #[test]
    fn input_transform_examples() {
        let x = input_transform(&nilgiris()).unwrap();
        assert_eq!(x[0], 1.0);
        assert_eq!(x[1], 1.0);
        for v in &x[2..] {
            assert_eq!(round4(*v), 0.5025);
        }
        assert_eq!(input_transform(&thanjavur()).unwrap(), [1.0; 6]);

        let uniform = DistrictRecord::new("u", [0.01; 6]);
        assert_eq!(input_transform(&uniform).unwrap(), [logistic(0.01); 6]);
    }

    #[test]
    fn zero_cell_violates_precondition() {
        let r = DistrictRecord::new("z", [1.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(input_transform(&r), Err(Error::Precondition(_))));
        let ws = WeightState::with_initial(0.5);
        assert!(matches!(
            output_stage(&[1.0; 6], &ws, &r),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn hidden_sum_examples() {
        assert_eq!(
            hidden_sum(&[1.0; 6], &WeightState::with_initial(0.5)),
            [4.0; 6]
        );
        assert_eq!(
            hidden_sum(&[1.0; 6], &WeightState::with_initial(0.0)),
            [1.0; 6]
        );

        let s = logistic(0.01_f64);
        let y = hidden_sum(&[1.0, 1.0, s, s, s, s], &WeightState::with_initial(0.5));
        for v in y {
            assert!((v - 3.005).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn output_stage_examples() {
        let r = DistrictRecord::new("r", [10.0_f64, 20.0, 30.0, 40.0, 50.0, 60.0]);

        let out = output_stage(&[4.0; 6], &WeightState::with_initial(0.5), &r).unwrap();
        assert_eq!(out.z, [2.0; 6]);
        assert_eq!(out.zt, 12.0);
        assert!((out.zs - 0.999_993_855_825).abs() < 1e-10, "{}", out.zs);
        for e in out.errors {
            assert!((e - 6.144e-6).abs() < 1e-9, "{e}");
        }

        let out = output_stage(&[7.0; 6], &WeightState::with_initial(1.0), &r).unwrap();
        assert!(out.zt >= 37.0);
        assert_eq!(out.zs, 1.0);
        assert_eq!(out.outputs, r.values);
        assert_eq!(out.errors, [0.0; 6]);

        let ws = WeightState::with_initial(0.5).with_output(0.0);
        let out = output_stage(&[4.0; 6], &ws, &r).unwrap();
        assert_eq!(out.zt, 0.0);
        assert_eq!(out.zs, 0.5);
        assert_eq!(out.outputs, r.values.map(|v| v / 2.0));
        assert_eq!(out.errors, [0.5; 6]);
    }

    #[test]
    fn forward_composes_and_is_deterministic() {
        let ws = WeightState::with_initial(0.6);
        let a = forward(&thanjavur(), &ws).unwrap();
        let b = forward(&thanjavur(), &ws).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.zs, logistic(a.zt));

        let n = forward(&nilgiris(), &ws).unwrap();
        assert!(n.zt < a.zt);

        let saturating = WeightState::with_initial(1.2);
        let t = forward(&nilgiris(), &saturating).unwrap();
        assert!(t.zt >= 37.0);
        assert_eq!(t.outputs, nilgiris().values);
        assert!(t.is_exact());
    }

    #[test]
    fn validate_rejects_negative_weight() {
        let mut ws = WeightState::with_initial(0.5_f64);
        ws.input[2][3] = -0.1;
        assert!(ws.validate().is_err());
        WeightState::with_initial(0.0_f64).validate().unwrap();
    }
}
