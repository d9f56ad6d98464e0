use crate::error::{Error, Result};

/// A sequential forecaster for the online regression protocol.
///
/// Each round is `predict(x_t)` followed by `update(y_t)`. Calling either
/// twice in a row is a protocol error.
pub trait Forecaster: Send {
    fn predict(&mut self, x: &[f64]) -> Result<f64>;

    fn update(&mut self, y: f64) -> Result<()>;

    /// Number of rounds with a supplied label.
    fn rounds(&self) -> usize;

    /// Dictionary size for data-adaptive forecasters, 0 otherwise.
    fn dict_size(&self) -> usize {
        0
    }

    /// Count of numerical fallbacks taken so far (refactorizations).
    fn fallbacks(&self) -> usize {
        0
    }

    /// Floats held in the forecaster's growing state, 0 when not tracked.
    fn stored_floats(&self) -> usize {
        0
    }

    fn name(&self) -> &'static str;

    fn boxed_clone(&self) -> Box<dyn Forecaster>;

    /// Prediction the forecaster would make at `x` without advancing its state.
    fn peek(&self, x: &[f64]) -> Result<f64> {
        self.boxed_clone().predict(x)
    }
}

impl Clone for Box<dyn Forecaster> {
    fn clone(&self) -> Self {
        self.boxed_clone()
    }
}

/// Tracks whether a prediction is waiting for its label.
#[derive(Debug, Clone)]
pub(crate) struct Pending<T> {
    slot: Option<T>,
    round: usize,
}

impl<T> Default for Pending<T> {
    fn default() -> Self {
        Self {
            slot: None,
            round: 0,
        }
    }
}

impl<T> Pending<T> {
    pub fn ensure_idle(&self) -> Result<()> {
        if self.slot.is_some() {
            Err(Error::protocol(format!(
                "prediction for round {} is still waiting for its label",
                self.round + 1
            )))
        } else {
            Ok(())
        }
    }

    pub fn set(&mut self, value: T) {
        self.slot = Some(value);
    }

    pub fn take(&mut self) -> Result<T> {
        match self.slot.take() {
            Some(v) => {
                self.round += 1;
                Ok(v)
            }
            None => Err(Error::protocol(format!(
                "label supplied for round {} before any prediction",
                self.round + 1
            ))),
        }
    }

    pub fn rounds(&self) -> usize {
        self.round
    }
}

/// Validates a feature vector against the dimension fixed by the first input.
pub(crate) fn check_input(dim: &mut Option<usize>, x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::input("input must have dimension >= 1"));
    }
    crate::error::check_finite(x, "input")?;
    match *dim {
        Some(d) if d != x.len() => Err(Error::input(format!(
            "input has dimension {} but the stream started with {d}",
            x.len()
        ))),
        Some(_) => Ok(()),
        None => {
            *dim = Some(x.len());
            Ok(())
        }
    }
}

pub(crate) fn check_label(y: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("label must be finite, got {y}")))
    }
}
