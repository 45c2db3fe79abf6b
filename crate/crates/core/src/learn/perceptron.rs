use serde::{Deserialize, Serialize};

use super::{check_matrix, ClassWeights, LearnError};
use crate::features::Label;
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel<T = f64> {
    pub weights: Vec<T>,
    pub bias: T,
}

impl<T: Scalar> LinearModel<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![T::zero(); dim],
            bias: T::zero(),
        }
    }

    pub fn decision(&self, x: &[T]) -> Result<T, LearnError> {
        if x.len() != self.weights.len() {
            return Err(LearnError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(dot(&self.weights, x) + self.bias)
    }

    pub fn predict(&self, x: &[T]) -> Result<Label, LearnError> {
        self.decision(x).map(Label::from_sign)
    }
}

/// Mistake-driven training in the given sample order. Each mistake on sample
/// `i` moves the weights by `weight(y_i) * y_i * x_i`. Returns after
/// `max_epochs` passes or the first pass without mistakes.
pub fn perceptron_train<T: Scalar>(
    x: &[Vec<T>],
    y: &[Label],
    max_epochs: usize,
    weights: &ClassWeights<T>,
) -> Result<LinearModel<T>, LearnError> {
    if x.len() != y.len() {
        return Err(LearnError::LengthMismatch("inputs"));
    }
    if !y.contains(&Label::Positive) || !y.contains(&Label::Negative) {
        return Err(LearnError::SingleClass);
    }
    let d = check_matrix(x)?;
    let mut model = LinearModel::zeros(d);
    for _ in 0..max_epochs {
        let mut mistakes = 0usize;
        for (xi, &yi) in x.iter().zip(y) {
            let pred = Label::from_sign(dot(&model.weights, xi) + model.bias);
            if pred != yi {
                mistakes += 1;
                let step = weights.of(yi) * yi.value::<T>();
                for (w, &v) in model.weights.iter_mut().zip(xi) {
                    *w += step * v;
                }
                model.bias += step;
            }
        }
        if mistakes == 0 {
            break;
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accuracy(m: &LinearModel<f64>, x: &[Vec<f64>], y: &[Label]) -> f64 {
        let hits = x
            .iter()
            .zip(y)
            .filter(|(xi, yi)| m.predict(xi).unwrap() == **yi)
            .count();
        hits as f64 / x.len() as f64
    }

    #[test]
    fn separable_line() {
        let x: Vec<Vec<f64>> = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0].iter().map(|&v| vec![v]).collect();
        let y = [
            Label::Negative,
            Label::Negative,
            Label::Negative,
            Label::Positive,
            Label::Positive,
            Label::Positive,
        ];
        let m = perceptron_train(&x, &y, 100, &ClassWeights::uniform()).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
    }

    #[test]
    fn zero_epochs_predicts_positive() {
        let x = vec![vec![1.0, 2.0], vec![-1.0, 0.5]];
        let y = [Label::Positive, Label::Negative];
        let m = perceptron_train(&x, &y, 0, &ClassWeights::uniform()).unwrap();
        assert_eq!(m, LinearModel::zeros(2));
        assert_eq!(m.predict(&[-5.0, -5.0]).unwrap(), Label::Positive);
    }

    #[test]
    fn xor_never_fits() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = [Label::Positive, Label::Positive, Label::Negative, Label::Negative];
        for epochs in [1, 10, 100, 1000] {
            let m = perceptron_train(&x, &y, epochs, &ClassWeights::uniform()).unwrap();
            assert!(accuracy(&m, &x, &y) < 1.0);
        }
    }

    #[test]
    fn weights_scale_the_step() {
        let x = vec![vec![1.0], vec![-1.0]];
        let y = [Label::Negative, Label::Positive];
        let w = ClassWeights {
            positive: 3.0,
            negative: 0.5,
        };
        // first sample is misclassified by the zero model: w -= 0.5 * x
        let m = perceptron_train(&x, &y, 1, &w).unwrap();
        assert_eq!(m.weights, vec![-0.5]);
        assert_eq!(m.bias, -0.5);
    }

    #[test]
    fn errors() {
        let x = vec![vec![1.0]];
        assert!(matches!(
            perceptron_train(&x, &[Label::Positive], 5, &ClassWeights::uniform()),
            Err(LearnError::SingleClass)
        ));
        let m = LinearModel::<f64>::zeros(2);
        assert!(m.decision(&[1.0]).is_err());
    }
}
