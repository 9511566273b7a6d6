//! Scaled conjugate gradient (Møller) for full-batch training.
//!
//! Each epoch is one SCG iteration: a finite-difference Hessian-vector
//! product along the search direction, a Levenberg-Marquardt damped step
//! length, and acceptance only when the comparison parameter is positive.
//! Directions restart every `5H + 1` iterations.

use std::time::Instant;

use super::{check_capacity, init_weights, loss_grad, n_params, Batch, MlpModel, StopReason, TrainConfig, TrainTrace};
use crate::error::{Error, Result};

/// Damping beyond which no step can make progress.
const LAMBDA_MAX: f64 = 1e100;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn numeric(epoch: usize, what: &str) -> Error {
    Error::NumericFailure {
        epoch,
        msg: format!("non-finite {what}"),
    }
}

/// Trains `model` on `batch` and returns the lowest-error iterate seen.
pub fn train_scg(model: &MlpModel, batch: &Batch, config: &TrainConfig) -> Result<(MlpModel, TrainTrace)> {
    config.validate()?;
    model.validate()?;
    if batch.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let h = model.hidden;
    if !check_capacity(h, batch.len()) {
        return Err(Error::Capacity {
            params: n_params(h),
            needed: super::CAPACITY_RATIO * n_params(h),
            available: batch.len(),
        });
    }

    let start = Instant::now();
    let n = model.n_params();
    let mut hid = Vec::with_capacity(h);
    let mut w = model.params();
    let mut grad = vec![0.0; n];
    let mut e = loss_grad(&w, h, batch, &mut grad, &mut hid);
    if !e.is_finite() || !grad.iter().all(|g| g.is_finite()) {
        return Err(numeric(0, "initial loss"));
    }
    let mut r: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut p = r.clone();
    let mut p_norm2 = dot(&p, &p);

    let mut lambda = config.scg_lambda0;
    let mut lambda_bar = 0.0;
    let mut success = true;
    let mut delta = 0.0;

    let mut w_try = vec![0.0; n];
    let mut g_try = vec![0.0; n];
    let mut best_w = w.clone();
    let mut best_e = e;
    let mut history = Vec::with_capacity(config.max_epoch.min(100_000));
    let mut stop_reason = StopReason::MaxEpoch;

    for epoch in 1..=config.max_epoch {
        if p_norm2 == 0.0 {
            stop_reason = StopReason::Converged;
            break;
        }
        if success {
            if dot(&p, &r) <= 0.0 {
                p.copy_from_slice(&r);
                p_norm2 = dot(&p, &p);
            }
            let sigma = config.scg_sigma / p_norm2.sqrt();
            for i in 0..n {
                w_try[i] = w[i] + sigma * p[i];
            }
            loss_grad(&w_try, h, batch, &mut g_try, &mut hid);
            // s = (E'(w + sigma p) - E'(w)) / sigma approximates H p
            delta = 0.0;
            for i in 0..n {
                delta += p[i] * (g_try[i] - grad[i]) / sigma;
            }
            if !delta.is_finite() {
                return Err(numeric(epoch, "curvature estimate"));
            }
        }

        delta += (lambda - lambda_bar) * p_norm2;
        if delta <= 0.0 {
            lambda_bar = 2.0 * (lambda - delta / p_norm2);
            delta = -delta + lambda * p_norm2;
            lambda = lambda_bar;
        }

        let mu = dot(&p, &r);
        let alpha = mu / delta;
        for i in 0..n {
            w_try[i] = w[i] + alpha * p[i];
        }
        let e_try = loss_grad(&w_try, h, batch, &mut g_try, &mut hid);
        if !e_try.is_finite() {
            return Err(numeric(epoch, "loss"));
        }
        let comparison = 2.0 * delta * (e - e_try) / (mu * mu);

        let p_norm2_old = p_norm2;
        if comparison > 0.0 {
            std::mem::swap(&mut w, &mut w_try);
            std::mem::swap(&mut grad, &mut g_try);
            e = e_try;
            let r_new: Vec<f64> = grad.iter().map(|g| -g).collect();
            lambda_bar = 0.0;
            success = true;
            if epoch % n == 0 {
                p.copy_from_slice(&r_new);
            } else {
                let beta = (dot(&r_new, &r_new) - dot(&r_new, &r)) / mu;
                for i in 0..n {
                    p[i] = r_new[i] + beta * p[i];
                }
            }
            r = r_new;
            p_norm2 = dot(&p, &p);
            if comparison >= 0.75 {
                lambda *= 0.25;
            }
            if e < best_e {
                best_e = e;
                best_w.copy_from_slice(&w);
            }
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if comparison < 0.25 {
            lambda += delta * (1.0 - comparison) / p_norm2_old;
        }
        if lambda.is_nan() {
            return Err(numeric(epoch, "damping parameter"));
        }

        let rmse = (2.0 * e).sqrt();
        history.push(rmse);
        if rmse <= config.err_min {
            stop_reason = StopReason::ErrMinReached;
            break;
        }
        // steps keep failing only once the error is flat to rounding
        if lambda >= LAMBDA_MAX {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let trace = TrainTrace {
        epochs_run: history.len(),
        rmse_history: history,
        stop_reason,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((MlpModel::from_params(h, &best_w), trace))
}

/// Outcome of a hidden-size search.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenSelection {
    pub hidden: usize,
    /// `(H, best training RMSE)` for every candidate that passed the capacity guard.
    pub evaluated: Vec<(usize, f64)>,
}

/// Relative slack within which a smaller network counts as good as the best.
const PARSIMONY: f64 = 0.01;

/// Trains each capacity-feasible candidate with the same seed and returns the
/// smallest hidden size whose training RMSE is within 1% of the best.
pub fn select_hidden(batch: &Batch, candidates: &[usize], config: &TrainConfig) -> Result<HiddenSelection> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no hidden-size candidates".into()));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut evaluated = Vec::new();
    for &hsize in sorted.iter().filter(|&&hs| check_capacity(hs, batch.len())) {
        let init = init_weights(hsize, config.seed)?;
        let (_, trace) = train_scg(&init, batch, config)?;
        let rmse = trace.best_rmse().unwrap_or(f64::INFINITY);
        evaluated.push((hsize, rmse));
    }
    let best = evaluated
        .iter()
        .map(|e| e.1)
        .reduce(f64::min)
        .ok_or(Error::NoFeasibleSize)?;
    let hidden = evaluated
        .iter()
        .find(|e| e.1 <= best * (1.0 + PARSIMONY))
        .map(|e| e.0)
        .expect("best candidate qualifies");
    Ok(HiddenSelection { hidden, evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_inputs(n: usize, seed: u64) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
            .collect()
    }

    fn config(max_epoch: usize) -> TrainConfig {
        TrainConfig {
            max_epoch,
            err_min: 0.0,
            seed: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn fits_a_constant() {
        let x = random_inputs(400, 1);
        let batch = Batch::new(x, vec![0.5; 400]).unwrap();
        let init = init_weights(2, 5).unwrap();
        let (m, trace) = train_scg(&init, &batch, &config(200)).unwrap();
        assert!(batch.rmse(&m) < 1e-3, "rmse {}", batch.rmse(&m));
        assert!(trace.epochs_run <= 200);
    }

    #[test]
    fn huge_err_min_stops_after_one_epoch() {
        let batch = Batch::new(random_inputs(200, 2), vec![0.3; 200]).unwrap();
        let cfg = TrainConfig {
            err_min: 1e9,
            ..config(100)
        };
        let (_, trace) = train_scg(&init_weights(2, 1).unwrap(), &batch, &cfg).unwrap();
        assert_eq!(trace.epochs_run, 1);
        assert_eq!(trace.stop_reason, StopReason::ErrMinReached);
    }

    #[test]
    fn epoch_limits() {
        let batch = Batch::new(random_inputs(200, 2), vec![0.3; 200]).unwrap();
        let init = init_weights(2, 1).unwrap();
        assert!(matches!(
            train_scg(&init, &batch, &config(0)),
            Err(Error::InvalidConfig(_))
        ));
        let (_, trace) = train_scg(&init, &batch, &config(1)).unwrap();
        assert_eq!(trace.epochs_run, 1);
        assert_eq!(trace.rmse_history.len(), 1);
        assert_eq!(trace.stop_reason, StopReason::MaxEpoch);
    }

    #[test]
    fn refuses_over_capacity() {
        let batch = Batch::new(random_inputs(500, 2), vec![0.3; 500]).unwrap();
        let r = train_scg(&init_weights(8, 1).unwrap(), &batch, &config(10));
        assert!(matches!(r, Err(Error::Capacity { params: 41, needed: 615, available: 500 })));
    }

    fn wavy_batch(n: usize) -> Batch {
        let x = random_inputs(n, 9);
        let y = x
            .iter()
            .map(|v| 0.5 + 0.25 * (1.5 * v[0]).sin() * (0.8 * v[1]).cos() + 0.05 * v[2])
            .collect();
        Batch::new(x, y).unwrap()
    }

    #[test]
    fn history_is_monotone_and_result_improves() {
        let batch = wavy_batch(600);
        let init = init_weights(4, 4).unwrap();
        let (m, trace) = train_scg(&init, &batch, &config(300)).unwrap();
        assert!(trace
            .rmse_history
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-15));
        assert!(batch.rmse(&m) <= batch.rmse(&init));
        assert_eq!(batch.rmse(&m), trace.best_rmse().unwrap());
    }

    #[test]
    fn training_is_deterministic() {
        let batch = wavy_batch(300);
        let init = init_weights(3, 4).unwrap();
        let a = train_scg(&init, &batch, &config(100)).unwrap();
        let b = train_scg(&init, &batch, &config(100)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn long_runs_stop_cleanly_at_rounding_floor() {
        let batch = Batch::new(random_inputs(400, 2), vec![0.5; 400]).unwrap();
        let init = init_weights(2, 6).unwrap();
        let (_, trace) = train_scg(&init, &batch, &config(20_000)).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Converged);
        assert!(trace.epochs_run < 20_000);
    }

    #[test]
    fn selection_handles_single_and_infeasible() {
        let batch = wavy_batch(400);
        let sel = select_hidden(&batch, &[4], &config(20)).unwrap();
        assert_eq!(sel.hidden, 4);
        let small = Batch::new(random_inputs(100, 1), vec![0.5; 100]).unwrap();
        assert!(matches!(
            select_hidden(&small, &[64], &config(20)),
            Err(Error::NoFeasibleSize)
        ));
    }
}
