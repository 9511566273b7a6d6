//! Normalization, zonation by well tops, and leave-one-well-out partitioning.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{WellLog, WellTops, N_ATTRIBUTES};

/// Lower bound of the normalized target range.
pub const TARGET_LOW: f64 = 0.2;
/// Upper bound of the normalized target range.
pub const TARGET_HIGH: f64 = 0.8;

/// One of the three intervals delimited by Top1 and Top2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    Z1,
    Z2,
    Z3,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Z1, Zone::Z2, Zone::Z3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Zone::Z1 => "Z1",
            Zone::Z2 => "Z2",
            Zone::Z3 => "Z3",
        }
    }

    /// Zone of time `t`: intervals are left-closed, so a sample sitting
    /// exactly on a top belongs to the zone below it.
    pub fn of(t: f64, top1_t: f64, top2_t: f64) -> Zone {
        if t < top1_t {
            Zone::Z1
        } else if t < top2_t {
            Zone::Z2
        } else {
            Zone::Z3
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Splits a well's samples into the three zone index ranges.
pub fn segment_zones(log: &WellLog, tops: &WellTops) -> Result<[Range<usize>; 3]> {
    let (first, last) = match (log.t.first(), log.t.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InsufficientData(format!("well {} is empty", log.well_id))),
    };
    if !(first < tops.top1_t && tops.top1_t < tops.top2_t && tops.top2_t < last) {
        return Err(Error::InvalidTops(format!(
            "well {}: need {first} < Top1 ({}) < Top2 ({}) < {last}",
            log.well_id, tops.top1_t, tops.top2_t
        )));
    }
    let i1 = log.t.partition_point(|&t| t < tops.top1_t);
    let i2 = log.t.partition_point(|&t| t < tops.top2_t);
    let ranges = [0..i1, i1..i2, i2..log.t.len()];
    for (zone, r) in Zone::ALL.iter().zip(&ranges) {
        if r.is_empty() {
            return Err(Error::EmptyZone(format!("{zone} of well {}", log.well_id)));
        }
    }
    Ok(ranges)
}

/// Per-predictor mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZScoreStats {
    pub mean: [f64; N_ATTRIBUTES],
    pub std: [f64; N_ATTRIBUTES],
}

impl ZScoreStats {
    pub fn apply(&self, x: &[f64; N_ATTRIBUTES]) -> [f64; N_ATTRIBUTES] {
        std::array::from_fn(|i| (x[i] - self.mean[i]) / self.std[i])
    }
}

pub fn fit_zscore(rows: &[[f64; N_ATTRIBUTES]]) -> Result<ZScoreStats> {
    if rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "z-score fit needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    let n = rows.len() as f64;
    let mut mean = [0.0; N_ATTRIBUTES];
    for r in rows {
        for i in 0..N_ATTRIBUTES {
            mean[i] += r[i];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; N_ATTRIBUTES];
    for r in rows {
        for i in 0..N_ATTRIBUTES {
            let d = r[i] - mean[i];
            var[i] += d * d;
        }
    }
    let std = var.map(|v| (v / n).sqrt());
    if let Some(i) = std.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::DegeneratePredictor(i));
    }
    Ok(ZScoreStats { mean, std })
}

pub fn apply_zscore(stats: &ZScoreStats, x: &[f64; N_ATTRIBUTES]) -> [f64; N_ATTRIBUTES] {
    stats.apply(x)
}

/// Affine map of the raw target range onto `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxStats {
    pub y_min: f64,
    pub y_max: f64,
    pub a: f64,
    pub b: f64,
}

impl MinMaxStats {
    pub fn new(y_min: f64, y_max: f64) -> Result<Self> {
        if !(y_max > y_min) {
            return Err(Error::DegenerateTarget);
        }
        Ok(Self {
            y_min,
            y_max,
            a: TARGET_LOW,
            b: TARGET_HIGH,
        })
    }

    pub fn apply(&self, y: f64) -> f64 {
        self.a + (self.b - self.a) * (y - self.y_min) / (self.y_max - self.y_min)
    }

    pub fn invert(&self, y_norm: f64) -> f64 {
        self.y_min + (y_norm - self.a) * (self.y_max - self.y_min) / (self.b - self.a)
    }

    /// Inverse map of a network output, clamped to the physical range `[0, 1]`.
    pub fn invert_output(&self, y_norm: f64) -> f64 {
        self.invert(y_norm).clamp(0.0, 1.0)
    }
}

pub fn fit_minmax(targets: &[f64]) -> Result<MinMaxStats> {
    if targets.is_empty() {
        return Err(Error::InsufficientData("min-max fit on no targets".into()));
    }
    let lo = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    MinMaxStats::new(lo, hi)
}

pub fn apply_minmax(stats: &MinMaxStats, y: f64) -> f64 {
    stats.apply(y)
}

pub fn invert_minmax(stats: &MinMaxStats, y_norm: f64) -> f64 {
    stats.invert(y_norm)
}

/// A normalized training or testing example.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub x: [f64; N_ATTRIBUTES],
    pub y: f64,
    pub well_id: Arc<str>,
    pub t: f64,
    pub zone: Zone,
}

/// A train/test split together with the normalizers fitted on its training half.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSet {
    pub train: Vec<Pattern>,
    pub test: Vec<Pattern>,
    pub zscore: ZScoreStats,
    pub minmax: MinMaxStats,
}

/// Leave-one-well-out split with one normalized set per zone.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonedDataset {
    pub blind_well_id: String,
    pub zones: [NormalizedSet; 3],
}

impl ZonedDataset {
    pub fn zone(&self, zone: Zone) -> &NormalizedSet {
        &self.zones[zone.index()]
    }

    pub fn n_train(&self) -> usize {
        self.zones.iter().map(|z| z.train.len()).sum()
    }
}

/// An integrated well and its tops.
#[derive(Debug, Clone, PartialEq)]
pub struct Well {
    pub log: WellLog,
    pub tops: WellTops,
}

impl Well {
    pub fn id(&self) -> &str {
        &self.log.well_id
    }
}

/// Joins integrated logs with their tops by well id, in log order.
pub fn pair_wells(logs: Vec<WellLog>, tops: &[WellTops]) -> Result<Vec<Well>> {
    logs.into_iter()
        .map(|log| {
            let t = tops
                .iter()
                .find(|t| t.well_id == log.well_id)
                .ok_or_else(|| Error::InvalidTops(format!("no tops for well {}", log.well_id)))?;
            Ok(Well {
                tops: t.clone(),
                log,
            })
        })
        .collect()
}

/// Raw (unnormalized) samples of one well, zone-tagged.
struct RawRows {
    x: Vec<[f64; N_ATTRIBUTES]>,
    y: Vec<f64>,
    t: Vec<f64>,
    zone: Vec<Zone>,
    well: Vec<Arc<str>>,
}

impl RawRows {
    fn new() -> Self {
        Self {
            x: Vec::new(),
            y: Vec::new(),
            t: Vec::new(),
            zone: Vec::new(),
            well: Vec::new(),
        }
    }

    fn extend(&mut self, well: &Well, zone: Zone, range: Range<usize>) {
        let id: Arc<str> = Arc::from(well.id());
        for i in range {
            self.x.push(well.log.predictors(i));
            self.y.push(well.log.sand_fraction[i]);
            self.t.push(well.log.t[i]);
            self.zone.push(zone);
            self.well.push(id.clone());
        }
    }

    fn normalize(&self, z: &ZScoreStats, m: &MinMaxStats) -> Vec<Pattern> {
        (0..self.x.len())
            .map(|i| Pattern {
                x: z.apply(&self.x[i]),
                y: m.apply(self.y[i]),
                well_id: self.well[i].clone(),
                t: self.t[i],
                zone: self.zone[i],
            })
            .collect()
    }
}

fn check_blind<'a>(wells: &'a [Well], blind_id: &str) -> Result<&'a Well> {
    if wells.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "leave-one-well-out needs at least 2 wells, got {}",
            wells.len()
        )));
    }
    wells
        .iter()
        .find(|w| w.id() == blind_id)
        .ok_or_else(|| Error::UnknownWell(blind_id.to_string()))
}

fn fit_set(train: RawRows, test: RawRows, what: &str) -> Result<NormalizedSet> {
    if train.x.is_empty() {
        return Err(Error::EmptyZone(format!("{what} (training)")));
    }
    let zscore = fit_zscore(&train.x)?;
    let minmax = fit_minmax(&train.y)?;
    Ok(NormalizedSet {
        train: train.normalize(&zscore, &minmax),
        test: test.normalize(&zscore, &minmax),
        zscore,
        minmax,
    })
}

/// Holds out `blind_id`, zone-tags every sample, and fits per-zone
/// normalizers on the training wells only.
pub fn partition_lowo(wells: &[Well], blind_id: &str) -> Result<ZonedDataset> {
    let blind = check_blind(wells, blind_id)?;
    let mut train: [RawRows; 3] = std::array::from_fn(|_| RawRows::new());
    let mut test: [RawRows; 3] = std::array::from_fn(|_| RawRows::new());
    for well in wells.iter().filter(|w| w.id() != blind_id) {
        let ranges = segment_zones(&well.log, &well.tops)?;
        for (zone, r) in Zone::ALL.into_iter().zip(ranges) {
            train[zone.index()].extend(well, zone, r);
        }
    }
    let ranges = segment_zones(&blind.log, &blind.tops)?;
    for (zone, r) in Zone::ALL.into_iter().zip(ranges) {
        test[zone.index()].extend(blind, zone, r);
    }
    let mut sets = Vec::with_capacity(3);
    for ((zone, tr), te) in Zone::ALL.into_iter().zip(train).zip(test) {
        sets.push(fit_set(tr, te, zone.name())?);
    }
    let zones: [NormalizedSet; 3] = sets.try_into().expect("three zones");
    Ok(ZonedDataset {
        blind_well_id: blind_id.to_string(),
        zones,
    })
}

/// Same split as [`partition_lowo`] but pooled across zones, with one set of
/// normalizers fitted on all training samples.
pub fn partition_pooled(wells: &[Well], blind_id: &str) -> Result<NormalizedSet> {
    let blind = check_blind(wells, blind_id)?;
    let mut train = RawRows::new();
    let mut test = RawRows::new();
    for well in wells.iter().filter(|w| w.id() != blind_id) {
        let ranges = segment_zones(&well.log, &well.tops)?;
        for (zone, r) in Zone::ALL.into_iter().zip(ranges) {
            train.extend(well, zone, r);
        }
    }
    let ranges = segment_zones(&blind.log, &blind.tops)?;
    for (zone, r) in Zone::ALL.into_iter().zip(ranges) {
        test.extend(blind, zone, r);
    }
    fit_set(train, test, "pooled")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn ramp_well(id: &str, n: usize, phase: f64) -> Well {
        let t: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let f = |k: usize, w: f64| ((k as f64) * w + phase).sin();
        Well {
            log: WellLog {
                well_id: id.into(),
                impedance: (0..n).map(|k| 6e6 + 1e6 * f(k, 0.11)).collect(),
                inst_amp: (0..n).map(|k| 0.5 + 0.3 * f(k, 0.07)).collect(),
                inst_freq: (0..n).map(|k| 30.0 + 10.0 * f(k, 0.05)).collect(),
                sand_fraction: (0..n).map(|k| 0.5 + 0.4 * f(k, 0.03)).collect(),
                t,
            },
            tops: WellTops {
                well_id: id.into(),
                top1_t: 30.0,
                top2_t: 70.0,
            },
        }
    }

    #[test]
    fn zones_partition_samples() {
        let w = ramp_well("W1", 101, 0.0);
        let r = segment_zones(&w.log, &w.tops).unwrap();
        assert_eq!(r[0].len() + r[1].len() + r[2].len(), 101);
        assert_eq!(r[0].end, r[1].start);
        assert_eq!(r[1].end, r[2].start);
        // t = 30 sits on Top1 and opens Z2
        assert_eq!(w.log.t[r[1].start], 30.0);
        assert_eq!(w.log.t[r[2].start], 70.0);
    }

    #[test]
    fn tops_outside_log_are_rejected() {
        let mut w = ramp_well("W1", 101, 0.0);
        w.tops.top1_t = -5.0;
        assert!(matches!(
            segment_zones(&w.log, &w.tops),
            Err(Error::InvalidTops(_))
        ));
    }

    #[test]
    fn zscore_worked_example() {
        let rows: Vec<[f64; 3]> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&v| [v, 2.0 * v, v * v])
            .collect();
        let s = fit_zscore(&rows).unwrap();
        assert_eq!(s.mean[0], 2.5);
        // population std of {1,2,3,4} is sqrt(5/4)
        assert!((s.std[0] - 1.25f64.sqrt()).abs() < 1e-15);
        assert!((s.std[0] - 1.1180).abs() < 1e-4);
        assert_eq!(s.apply(&s.mean), [0.0; 3]);
        let plus: [f64; 3] = std::array::from_fn(|i| s.mean[i] + s.std[i]);
        assert!(s.apply(&plus).iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn zscore_rejects_constant_column() {
        let rows = vec![[1.0, 5.0, 2.0], [2.0, 5.0, 3.0]];
        assert!(matches!(fit_zscore(&rows), Err(Error::DegeneratePredictor(1))));
        assert!(fit_zscore(&rows[..1]).is_err());
    }

    #[test]
    fn minmax_worked_examples() {
        let m = fit_minmax(&[0.1, 0.7, 0.4]).unwrap();
        assert!((m.apply(0.1) - 0.2).abs() < 1e-15);
        assert!((m.apply(0.7) - 0.8).abs() < 1e-15);
        assert!((m.apply(0.4) - 0.5).abs() < 1e-15);
        assert!(matches!(fit_minmax(&[0.3, 0.3]), Err(Error::DegenerateTarget)));
        assert_eq!(m.invert_output(5.0), 1.0);
        assert_eq!(m.invert_output(-5.0), 0.0);
    }

    fn eight_wells() -> Vec<Well> {
        (1..=8)
            .map(|i| ramp_well(&format!("W{i}"), 101, i as f64 * 0.7))
            .collect()
    }

    #[test]
    fn lowo_holds_out_one_well() {
        let wells = eight_wells();
        let ds = partition_lowo(&wells, "W6").unwrap();
        for set in &ds.zones {
            assert!(set.test.iter().all(|p| &*p.well_id == "W6"));
            assert!(set.train.iter().all(|p| &*p.well_id != "W6"));
            let mut ids: Vec<&str> = set.train.iter().map(|p| &*p.well_id).collect();
            ids.dedup();
            assert_eq!(ids, ["W1", "W2", "W3", "W4", "W5", "W7", "W8"]);
        }
        assert_eq!(ds.n_train(), 7 * 101);

        let two = partition_lowo(&wells[..2], "W2").unwrap();
        assert!(two.zones.iter().all(|z| z.train.iter().all(|p| &*p.well_id == "W1")));

        assert!(matches!(partition_lowo(&wells, "W99"), Err(Error::UnknownWell(_))));
        assert!(partition_lowo(&wells[..1], "W1").is_err());
    }

    #[test]
    fn stats_do_not_see_the_blind_well() {
        let wells = eight_wells();
        let with = partition_lowo(&wells, "W6").unwrap();
        // dropping the blind well and holding out another leaves W6 unused
        let without: Vec<Well> = wells.iter().filter(|w| w.id() != "W6").cloned().collect();
        let mut extra = without.clone();
        extra.push(ramp_well("W6", 101, 99.0));
        let alt = partition_lowo(&extra, "W6").unwrap();
        for z in 0..3 {
            assert_eq!(with.zones[z].zscore, alt.zones[z].zscore);
            assert_eq!(with.zones[z].minmax, alt.zones[z].minmax);
        }
    }

    #[test]
    fn normalized_training_set_is_standardized() {
        let ds = partition_lowo(&eight_wells(), "W3").unwrap();
        for set in &ds.zones {
            let n = set.train.len() as f64;
            for i in 0..3 {
                let mean = set.train.iter().map(|p| p.x[i]).sum::<f64>() / n;
                let var = set.train.iter().map(|p| (p.x[i] - mean).powi(2)).sum::<f64>() / n;
                assert!(mean.abs() < 1e-10);
                assert!((var.sqrt() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pooled_uses_all_zones() {
        let wells = eight_wells();
        let pooled = partition_pooled(&wells, "W6").unwrap();
        let zoned = partition_lowo(&wells, "W6").unwrap();
        assert_eq!(pooled.train.len(), zoned.n_train());
    }

    proptest! {
        #[test]
        fn minmax_round_trip(lo in -5.0f64..5.0, span in 0.01f64..10.0, u in 0.0f64..=1.0) {
            let m = MinMaxStats::new(lo, lo + span).unwrap();
            let y = lo + u * span;
            prop_assert!((m.invert(m.apply(y)) - y).abs() < 1e-12);
        }

        #[test]
        fn segmentation_is_exact_partition(top1 in 1.0f64..50.0, gap in 1.0f64..45.0) {
            let mut w = ramp_well("W1", 101, 0.0);
            w.tops.top1_t = top1;
            w.tops.top2_t = top1 + gap;
            let r = segment_zones(&w.log, &w.tops).unwrap();
            let mut all: Vec<usize> = r.iter().flat_map(|r| r.clone()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..101).collect::<Vec<_>>());
            for (zone, range) in Zone::ALL.iter().zip(&r) {
                for i in range.clone() {
                    prop_assert_eq!(Zone::of(w.log.t[i], w.tops.top1_t, w.tops.top2_t), *zone);
                }
            }
        }
    }
}
