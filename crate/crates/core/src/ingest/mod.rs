//! Well-log / seismic integration.
//!
//! Raw logs arrive in measured depth with missing samples flagged by the
//! LAS null value. They are cleaned, mapped to two-way time through the
//! well's checkshot, and fused with the three seismic attributes extracted
//! at the well location, everything resampled onto a common 0.10 ms grid.

pub mod formats;
pub mod seismic;
pub mod spline;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use seismic::{AttributeVolume, VolumeGeometry, ATTRIBUTE_NAMES, N_ATTRIBUTES};
pub use spline::{resample_uniform, uniform_count, uniform_grid, CubicSpline};

/// Null value marking a missing log sample.
pub const NULL_SENTINEL: f64 = -999.25;

/// Sampling interval of the integrated dataset, in ms.
pub const INTEGRATED_DT: f64 = 0.10;

/// Minimum number of valid samples a log needs to be splined.
pub const MIN_SPLINE_POINTS: usize = 4;

/// Shortest acceptable overlap between log and seismic trace, in ms.
pub const MIN_OVERLAP_MS: f64 = 1.0;

pub(crate) fn is_null(v: f64) -> bool {
    v == NULL_SENTINEL
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSample {
    /// Measured depth in meters.
    pub md: f64,
    /// `None` where the log carries the null value.
    pub sand_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawWellLog {
    pub well_id: String,
    pub samples: Vec<LogSample>,
}

impl RawWellLog {
    pub fn null_count(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| s.sand_fraction.is_none())
            .count()
    }
}

/// Measured depth to two-way time table for one well.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkshot {
    pub well_id: String,
    /// `(md in m, twt in ms)` pairs, both strictly increasing.
    pub pairs: Vec<(f64, f64)>,
}

impl Checkshot {
    pub fn new(well_id: impl Into<String>, pairs: Vec<(f64, f64)>) -> Result<Self> {
        let well_id = well_id.into();
        if pairs.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "checkshot for {well_id} needs at least 2 pairs"
            )));
        }
        if pairs.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return Err(Error::InvalidInput(format!(
                "checkshot for {well_id} must be strictly increasing in depth and time"
            )));
        }
        Ok(Self { well_id, pairs })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellLocation {
    pub well_id: String,
    pub inline: i64,
    pub xline: i64,
}

/// Times of the two tops bounding the three zones of a well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellTops {
    pub well_id: String,
    pub top1_t: f64,
    pub top2_t: f64,
}

/// Irregularly sampled `(t, value)` series in two-way time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn span(&self) -> Option<(f64, f64)> {
        Some((*self.t.first()?, *self.t.last()?))
    }
}

/// The three attribute series of one seismic trace, sharing a time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeTraces {
    pub t: Vec<f64>,
    pub series: [Vec<f64>; N_ATTRIBUTES],
}

/// A well log fused with seismic attributes on the uniform 0.10 ms grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WellLog {
    pub well_id: String,
    pub t: Vec<f64>,
    pub impedance: Vec<f64>,
    pub inst_amp: Vec<f64>,
    pub inst_freq: Vec<f64>,
    pub sand_fraction: Vec<f64>,
}

impl WellLog {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Predictor triple at sample `i`.
    pub fn predictors(&self, i: usize) -> [f64; N_ATTRIBUTES] {
        [self.impedance[i], self.inst_amp[i], self.inst_freq[i]]
    }

    pub(crate) fn check_lengths(&self) -> Result<()> {
        let n = self.t.len();
        if [
            self.impedance.len(),
            self.inst_amp.len(),
            self.inst_freq.len(),
            self.sand_fraction.len(),
        ]
        .iter()
        .any(|&l| l != n)
        {
            return Err(Error::InvalidInput(format!(
                "well {} has series of unequal length",
                self.well_id
            )));
        }
        Ok(())
    }
}

/// Removes every sample carrying the null value, preserving order.
pub fn drop_missing(log: &RawWellLog) -> Result<RawWellLog> {
    let samples: Vec<LogSample> = log
        .samples
        .iter()
        .filter(|s| s.sand_fraction.is_some())
        .copied()
        .collect();
    if samples.len() < MIN_SPLINE_POINTS {
        return Err(Error::InsufficientData(format!(
            "well {} keeps {} valid samples, need {}",
            log.well_id,
            samples.len(),
            MIN_SPLINE_POINTS
        )));
    }
    Ok(RawWellLog {
        well_id: log.well_id.clone(),
        samples,
    })
}

/// Piecewise-linear depth to time mapping through a checkshot. No extrapolation.
pub fn md_to_twt(cs: &Checkshot, md: f64) -> Result<f64> {
    let (first, last) = (cs.pairs[0], cs.pairs[cs.pairs.len() - 1]);
    if !(md >= first.0 && md <= last.0) {
        return Err(Error::Extrapolation(format!(
            "md {md} m outside checkshot range [{}, {}] of well {}",
            first.0, last.0, cs.well_id
        )));
    }
    let j = cs.pairs.partition_point(|p| p.0 <= md);
    if j == 0 {
        return Ok(first.1);
    }
    let (m0, t0) = cs.pairs[j - 1];
    if md == m0 || j == cs.pairs.len() {
        return Ok(t0);
    }
    let (m1, t1) = cs.pairs[j];
    Ok(t0 + (md - m0) * (t1 - t0) / (m1 - m0))
}

/// Converts a cleaned log from measured depth to two-way time.
pub fn depth_to_time(log: &RawWellLog, cs: &Checkshot) -> Result<TimeSeries> {
    let mut out = TimeSeries::default();
    for s in &log.samples {
        let sf = s.sand_fraction.ok_or_else(|| {
            Error::InvalidInput(format!(
                "well {} still carries missing samples; drop them first",
                log.well_id
            ))
        })?;
        out.t.push(md_to_twt(cs, s.md)?);
        out.values.push(sf);
    }
    if out.t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!(
            "time-converted log of {} is not strictly increasing",
            log.well_id
        )));
    }
    Ok(out)
}

/// The three attribute series of the trace at a well location.
pub fn extract_trace(volume: &AttributeVolume, loc: &WellLocation) -> Result<AttributeTraces> {
    let trace = volume.geometry.locate(loc.inline, loc.xline)?;
    let samples = volume.trace(trace);
    let series = std::array::from_fn(|a| samples.iter().map(|s| s[a]).collect());
    Ok(AttributeTraces {
        t: volume.geometry.times(),
        series,
    })
}

/// Fuses a time-domain log with its attribute traces on the common window,
/// sampled every [`INTEGRATED_DT`] ms.
pub fn integrate(
    well_id: &str,
    log: &TimeSeries,
    traces: &AttributeTraces,
) -> Result<WellLog> {
    let (log_start, log_end) = log
        .span()
        .ok_or_else(|| Error::InsufficientData(format!("well {well_id} has an empty log")))?;
    let (tr_start, tr_end) = match (traces.t.first(), traces.t.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InsufficientData("empty seismic trace".into())),
    };
    let start = log_start.max(tr_start);
    let end = log_end.min(tr_end);
    if !(end - start >= MIN_OVERLAP_MS) {
        return Err(Error::NoOverlap(format!(
            "well {well_id}: log [{log_start}, {log_end}] ms vs trace [{tr_start}, {tr_end}] ms"
        )));
    }

    let t = uniform_grid(start, end, INTEGRATED_DT);
    let resample = |values: &[f64], at: &[f64]| resample_uniform(at, values, start, end, INTEGRATED_DT);
    let [imp, amp, freq] = &traces.series;
    let mut sand_fraction = resample(&log.values, &log.t)?;
    for v in &mut sand_fraction {
        *v = v.clamp(0.0, 1.0);
    }
    let well = WellLog {
        well_id: well_id.to_string(),
        impedance: resample(imp, &traces.t)?,
        inst_amp: resample(amp, &traces.t)?,
        inst_freq: resample(freq, &traces.t)?,
        sand_fraction,
        t,
    };
    well.check_lengths()?;
    Ok(well)
}

/// The full per-well integration chain: clean, convert to time, extract, fuse.
pub fn integrate_well(
    raw: &RawWellLog,
    checkshot: &Checkshot,
    volume: &AttributeVolume,
    location: &WellLocation,
) -> Result<WellLog> {
    let clean = drop_missing(raw)?;
    let timed = depth_to_time(&clean, checkshot)?;
    let traces = extract_trace(volume, location)?;
    integrate(&raw.well_id, &timed, &traces)
}

/// Integrates every well that has a checkshot and a location.
///
/// Wells are processed in parallel; output order follows `raws`.
pub fn integrate_all(
    raws: &[RawWellLog],
    checkshots: &[Checkshot],
    locations: &[WellLocation],
    volume: &AttributeVolume,
) -> Result<Vec<WellLog>> {
    use rayon::prelude::*;
    raws.par_iter()
        .map(|raw| {
            let cs = checkshots
                .iter()
                .find(|c| c.well_id == raw.well_id)
                .ok_or_else(|| Error::UnknownWell(format!("{} (no checkshot)", raw.well_id)))?;
            let loc = locations
                .iter()
                .find(|l| l.well_id == raw.well_id)
                .ok_or_else(|| Error::UnknownWell(format!("{} (no location)", raw.well_id)))?;
            integrate_well(raw, cs, volume, loc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(n: usize, nulls: &[usize]) -> RawWellLog {
        RawWellLog {
            well_id: "W1".into(),
            samples: (0..n)
                .map(|i| LogSample {
                    md: 1000.0 + i as f64,
                    sand_fraction: if nulls.contains(&i) {
                        None
                    } else {
                        Some((i % 10) as f64 / 10.0)
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn drop_missing_filters_in_order() {
        let log = raw(100, &[]);
        assert_eq!(drop_missing(&log).unwrap(), log);

        let nulls = [3, 10, 11, 40, 41, 77, 99];
        let log = raw(100, &nulls);
        let out = drop_missing(&log).unwrap();
        assert_eq!(out.samples.len(), 93);
        assert_eq!(out.samples.len() + log.null_count(), log.samples.len());
        assert!(out.samples.windows(2).all(|w| w[0].md < w[1].md));

        let many: Vec<usize> = (0..98).collect();
        assert!(matches!(
            drop_missing(&raw(100, &many)),
            Err(Error::InsufficientData(_))
        ));
    }

    fn cs() -> Checkshot {
        Checkshot::new("W1", vec![(1000.0, 800.0), (2000.0, 1200.0)]).unwrap()
    }

    #[test]
    fn checkshot_interpolation() {
        assert_eq!(md_to_twt(&cs(), 1500.0).unwrap(), 1000.0);
        assert_eq!(md_to_twt(&cs(), 1000.0).unwrap(), 800.0);
        assert_eq!(md_to_twt(&cs(), 2000.0).unwrap(), 1200.0);
        assert!(matches!(
            md_to_twt(&cs(), 2500.0),
            Err(Error::Extrapolation(_))
        ));
        assert!(Checkshot::new("W", vec![(1.0, 1.0)]).is_err());
        assert!(Checkshot::new("W", vec![(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn depth_to_time_at_knots_and_monotone() {
        let multi = Checkshot::new(
            "W1",
            vec![(900.0, 700.0), (1030.0, 810.0), (1060.0, 830.0), (1200.0, 900.0)],
        )
        .unwrap();
        let log = drop_missing(&raw(100, &[5])).unwrap();
        let tt = depth_to_time(&log, &multi).unwrap();
        assert!(tt.t.windows(2).all(|w| w[0] < w[1]));
        let idx = log.samples.iter().position(|s| s.md == 1030.0).unwrap();
        assert_eq!(tt.t[idx], 810.0);
        assert!(depth_to_time(&raw(100, &[5]), &multi).is_err());
    }

    fn constant_traces(t0: f64, n: usize, v: [f64; 3]) -> AttributeTraces {
        AttributeTraces {
            t: (0..n).map(|k| t0 + 2.0 * k as f64).collect(),
            series: std::array::from_fn(|a| vec![v[a]; n]),
        }
    }

    #[test]
    fn integrate_window_arithmetic() {
        let log = TimeSeries {
            t: (0..=400).map(|k| 1000.0 + 0.5 * k as f64).collect(),
            values: vec![0.4; 401],
        };
        let traces = constant_traces(0.0, 1001, [5e6, 0.5, 30.0]);
        let w = integrate("W1", &log, &traces).unwrap();
        assert_eq!(w.len(), 2001);
        assert_eq!(w.t[0], 1000.0);
        assert!((w.t[2000] - 1200.0).abs() < 1e-9);
        assert!(w.t.windows(2).all(|p| (p[1] - p[0] - 0.1).abs() < 1e-12));
        assert!(w.sand_fraction.iter().all(|&v| (v - 0.4).abs() < 1e-12));
        assert!(w.impedance.iter().all(|&v| (v - 5e6).abs() < 1e-6));
        assert!(w.inst_freq.iter().all(|&v| (v - 30.0).abs() < 1e-12));
    }

    #[test]
    fn integrate_rejects_disjoint_spans() {
        let log = TimeSeries {
            t: vec![3000.0, 3001.0, 3002.0, 3003.0],
            values: vec![0.1; 4],
        };
        let traces = constant_traces(0.0, 100, [1.0, 1.0, 1.0]);
        assert!(matches!(
            integrate("W1", &log, &traces),
            Err(Error::NoOverlap(_))
        ));
    }

    #[test]
    fn integrate_clamps_overshoot() {
        // a step from 0 to 1 rings under a cubic spline
        let t: Vec<f64> = (0..20).map(|k| 100.0 + k as f64).collect();
        let values: Vec<f64> = (0..20).map(|k| if k < 10 { 0.0 } else { 1.0 }).collect();
        let log = TimeSeries { t, values };
        let traces = constant_traces(0.0, 200, [1.0, 1.0, 1.0]);
        let w = integrate("W1", &log, &traces).unwrap();
        assert!(w.sand_fraction.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn extract_trace_shape_and_missing() {
        let g = VolumeGeometry::new(vec![1, 2], vec![5, 6, 7], 0.0, 2.0, 500).unwrap();
        let data = (0..g.n_voxels()).map(|i| [i as f64, 0.0, 1.0]).collect();
        let vol = AttributeVolume::new(g, data).unwrap();
        let loc = WellLocation {
            well_id: "W".into(),
            inline: 2,
            xline: 6,
        };
        let tr = extract_trace(&vol, &loc).unwrap();
        assert_eq!(tr.t.len(), 500);
        assert!(tr.series.iter().all(|s| s.len() == 500));
        assert_eq!(tr.series[0][0], (4 * 500) as f64);
        let off = WellLocation {
            well_id: "W".into(),
            inline: 3,
            xline: 6,
        };
        assert!(matches!(
            extract_trace(&vol, &off),
            Err(Error::MissingTrace { .. })
        ));
    }
}
