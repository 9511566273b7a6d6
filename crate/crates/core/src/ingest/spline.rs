//! Not-a-knot cubic spline interpolation and uniform resampling.

use crate::error::{Error, Result};

/// Relative slack used when deciding whether a grid point lies inside a span.
const SPAN_EPS: f64 = 1e-9;

/// Interpolating cubic spline with not-a-knot end conditions.
///
/// Stored as knot positions, values, and second derivatives at the knots.
/// With at least four knots the not-a-knot spline reproduces any cubic
/// polynomial exactly.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::InvalidInput(format!(
                "spline knots and values differ in length: {} vs {}",
                n,
                y.len()
            )));
        }
        if n < 4 {
            return Err(Error::InsufficientData(format!(
                "cubic spline needs at least 4 points, got {n}"
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "spline knots must be strictly increasing".into(),
            ));
        }
        if !x.iter().chain(y).all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite spline input".into()));
        }

        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        // Unknowns are M_1..M_{n-2}; M_0 and M_{n-1} are eliminated with the
        // not-a-knot conditions (third derivative continuous at x_1 and x_{n-2}).
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for r in 0..k {
            let i = r + 1;
            sub[r] = h[i - 1];
            diag[r] = 2.0 * (h[i - 1] + h[i]);
            sup[r] = h[i];
            rhs[r] = 6.0 * (slope[i] - slope[i - 1]);
        }
        let (h0, h1) = (h[0], h[1]);
        diag[0] += h0 * (h0 + h1) / h1;
        sup[0] -= h0 * h0 / h1;
        let (ha, hb) = (h[n - 3], h[n - 2]);
        diag[k - 1] += hb * (hb + ha) / ha;
        sub[k - 1] -= hb * hb / ha;

        let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);

        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&inner);
        m[0] = ((h0 + h1) * m[1] - h0 * m[2]) / h1;
        m[n - 1] = ((ha + hb) * m[n - 2] - hb * m[n - 3]) / ha;

        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Evaluates the spline. Points marginally outside the knot span (by a
    /// relative `1e-9`) are clamped; anything further is an extrapolation error.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let seg = self.segment(t)?;
        Ok(self.eval_in(seg, t.clamp(self.x_min(), self.x_max())))
    }

    fn segment(&self, t: f64) -> Result<usize> {
        let (lo, hi) = (self.x_min(), self.x_max());
        let slack = SPAN_EPS * (hi - lo).abs().max(lo.abs()).max(1.0);
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Extrapolation(format!(
                "t = {t} outside [{lo}, {hi}]"
            )));
        }
        let idx = self.x.partition_point(|&k| k <= t);
        Ok(idx.saturating_sub(1).min(self.x.len() - 2))
    }

    fn eval_in(&self, i: usize, t: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let a = self.x[i + 1] - t;
        let b = t - self.x[i];
        self.m[i] * a * a * a / (6.0 * h)
            + self.m[i + 1] * b * b * b / (6.0 * h)
            + (self.y[i] / h - self.m[i] * h / 6.0) * a
            + (self.y[i + 1] / h - self.m[i + 1] * h / 6.0) * b
    }
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    out
}

/// Number of points `t_start + k*dt` (k = 0, 1, ...) that do not exceed `t_end`.
pub fn uniform_count(t_start: f64, t_end: f64, dt: f64) -> usize {
    ((t_end - t_start) / dt + SPAN_EPS).floor() as usize + 1
}

/// The uniform grid `t_start + k*dt` up to and including `t_end`.
pub fn uniform_grid(t_start: f64, t_end: f64, dt: f64) -> Vec<f64> {
    (0..uniform_count(t_start, t_end, dt))
        .map(|k| t_start + k as f64 * dt)
        .collect()
}

/// Resamples `(t, value)` pairs onto `t_start + k*dt`, `k` such that the
/// sample does not exceed `t_end`, through a not-a-knot cubic spline.
pub fn resample_uniform(
    t: &[f64],
    values: &[f64],
    t_start: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("resampling step must be positive, got {dt}")));
    }
    if t_end < t_start {
        return Err(Error::InvalidInput(format!(
            "empty resampling range [{t_start}, {t_end}]"
        )));
    }
    let spline = CubicSpline::not_a_knot(t, values)?;
    let grid = uniform_grid(t_start, t_end, dt);
    // Bounds are checked on the two ends; the walk below then never leaves the span.
    spline.segment(grid[0])?;
    spline.segment(grid[grid.len() - 1])?;

    let (lo, hi) = (spline.x_min(), spline.x_max());
    let mut seg = 0;
    let last = spline.x.len() - 2;
    Ok(grid
        .into_iter()
        .map(|q| {
            let q = q.clamp(lo, hi);
            while seg < last && spline.x[seg + 1] <= q {
                seg += 1;
            }
            spline.eval_in(seg, q)
        })
        .collect())
}
