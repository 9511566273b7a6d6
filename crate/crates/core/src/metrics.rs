//! Performance evaluators: Pearson correlation, RMSE, absolute error mean,
//! and wall-clock timing. Population denominators throughout.

use std::time::Instant;

use crate::error::{Error, Result};

/// A target series and a prediction of it, in raw sand-fraction units.
#[derive(Debug, Clone, Copy)]
pub struct PairedSeries<'a> {
    target: &'a [f64],
    predicted: &'a [f64],
}

impl<'a> PairedSeries<'a> {
    pub fn new(target: &'a [f64], predicted: &'a [f64]) -> Result<Self> {
        if target.len() != predicted.len() {
            return Err(Error::InvalidInput(format!(
                "series lengths differ: {} vs {}",
                target.len(),
                predicted.len()
            )));
        }
        if target.is_empty() {
            return Err(Error::InvalidInput("empty series".into()));
        }
        if !target.iter().chain(predicted).all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in series".into()));
        }
        Ok(Self { target, predicted })
    }

    pub fn target(&self) -> &[f64] {
        self.target
    }

    pub fn predicted(&self) -> &[f64] {
        self.predicted
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson correlation coefficient.
pub fn cc(p: &PairedSeries<'_>) -> Result<f64> {
    let mt = mean(p.target);
    let mp = mean(p.predicted);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&t, &y) in p.target.iter().zip(p.predicted) {
        let dt = t - mt;
        let dy = y - mp;
        sxy += dt * dy;
        sxx += dt * dt;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Root mean square error.
pub fn rmse(p: &PairedSeries<'_>) -> f64 {
    let ss: f64 = p
        .target
        .iter()
        .zip(p.predicted)
        .map(|(t, y)| (t - y) * (t - y))
        .sum();
    (ss / p.len() as f64).sqrt()
}

/// Absolute error mean.
pub fn aem(p: &PairedSeries<'_>) -> f64 {
    let s: f64 = p
        .target
        .iter()
        .zip(p.predicted)
        .map(|(t, y)| (t - y).abs())
        .sum();
    s / p.len() as f64
}

/// Runs `block` and returns its result with the elapsed monotonic wall time in seconds.
pub fn timed<T>(block: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = block();
    (out, start.elapsed().as_secs_f64())
}
