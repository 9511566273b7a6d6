//! Zone-modular network: one small perceptron per zone, trained on the
//! training wells, with outputs concatenated in time order.
//!
//! Also holds the pooled single-network baseline, blind-well evaluation,
//! and model persistence.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::N_ATTRIBUTES;
use crate::metrics::{self, PairedSeries};
use crate::nn::{self, Batch, MlpModel, TrainConfig, TrainTrace};
use crate::preprocess::{segment_zones, MinMaxStats, NormalizedSet, Well, ZScoreStats, Zone, ZonedDataset};

pub const MANN_FORMAT: &str = "sandcast-mann-v1";
pub const ANN_FORMAT: &str = "sandcast-ann-v1";

/// Hidden sizes tried when the size is chosen automatically.
pub const DEFAULT_HIDDEN_CANDIDATES: [usize; 6] = [2, 4, 6, 8, 12, 16];

/// How hidden layer sizes are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HiddenSpec {
    /// One size for every network.
    Uniform(usize),
    /// One size per zone, `Z1, Z2, Z3`.
    PerZone([usize; 3]),
    /// Search over candidates with [`nn::select_hidden`].
    Auto(Vec<usize>),
}

impl Default for HiddenSpec {
    fn default() -> Self {
        HiddenSpec::Auto(DEFAULT_HIDDEN_CANDIDATES.to_vec())
    }
}

fn resolve_hidden(spec: &HiddenSpec, zone: usize, batch: &Batch, config: &TrainConfig) -> Result<usize> {
    match spec {
        HiddenSpec::Uniform(h) => Ok(*h),
        HiddenSpec::PerZone(hs) => Ok(hs[zone]),
        HiddenSpec::Auto(candidates) => Ok(nn::select_hidden(batch, candidates, config)?.hidden),
    }
}

/// A trained network together with the normalizers it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneModel {
    pub net: MlpModel,
    pub zscore: ZScoreStats,
    pub minmax: MinMaxStats,
    pub trace: TrainTrace,
}

impl ZoneModel {
    /// Raw attributes in, sand fraction in `[0, 1]` out.
    pub fn predict(&self, x: &[f64; N_ATTRIBUTES]) -> f64 {
        self.minmax.invert_output(self.net.forward(&self.zscore.apply(x)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MannModel {
    /// Networks for `Z1, Z2, Z3`.
    pub zones: [ZoneModel; 3],
    pub blind_well_id: String,
    pub seed: u64,
}

impl MannModel {
    pub fn zone(&self, zone: Zone) -> &ZoneModel {
        &self.zones[zone.index()]
    }

    pub fn hidden_sizes(&self) -> [usize; 3] {
        self.zones.each_ref().map(|z| z.net.hidden)
    }

    pub fn train_times(&self) -> [f64; 3] {
        self.zones.each_ref().map(|z| z.trace.wall_time)
    }

    pub fn predict(&self, zone: Zone, x: &[f64; N_ATTRIBUTES]) -> f64 {
        self.zone(zone).predict(x)
    }
}

fn train_network(set: &NormalizedSet, zone_idx: usize, spec: &HiddenSpec, config: &TrainConfig) -> Result<ZoneModel> {
    let batch = Batch::from_patterns(&set.train);
    let hidden = resolve_hidden(spec, zone_idx, &batch, config)?;
    let init = nn::init_weights(hidden, config.seed)?;
    let (net, trace) = nn::train_scg(&init, &batch, config)?;
    Ok(ZoneModel {
        net,
        zscore: set.zscore,
        minmax: set.minmax,
        trace,
    })
}

/// Trains the three zone networks independently. The network of zone index
/// `i` (0-based) is seeded with `seed + i + 1`.
pub fn train_mann(zoned: &ZonedDataset, config: &TrainConfig, hidden: &HiddenSpec) -> Result<MannModel> {
    config.validate()?;
    for (zone, set) in Zone::ALL.iter().zip(&zoned.zones) {
        if set.train.is_empty() {
            return Err(Error::EmptyZone(format!("{zone} (training)")));
        }
    }
    let models: Vec<ZoneModel> = Zone::ALL
        .par_iter()
        .map(|&zone| {
            let i = zone.index();
            let cfg = config.with_seed(config.seed.wrapping_add(i as u64 + 1));
            train_network(&zoned.zones[i], i, hidden, &cfg)
        })
        .collect::<Result<_>>()?;
    Ok(MannModel {
        zones: models.try_into().expect("three zones"),
        blind_well_id: zoned.blind_well_id.clone(),
        seed: config.seed,
    })
}

/// Zone of every sample time under the left-closed rule.
pub fn route(times: &[f64], top1_t: f64, top2_t: f64) -> Vec<Zone> {
    times.iter().map(|&t| Zone::of(t, top1_t, top2_t)).collect()
}

/// Predicted sand fraction along a whole well, one value per sample.
pub fn predict_well(model: &MannModel, well: &Well) -> Result<Vec<f64>> {
    segment_zones(&well.log, &well.tops)?;
    let zones = route(&well.log.t, well.tops.top1_t, well.tops.top2_t);
    Ok(zones
        .iter()
        .enumerate()
        .map(|(i, &z)| model.predict(z, &well.log.predictors(i)))
        .collect())
}

/// One network for the whole depth range, the comparison baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleAnn {
    pub model: ZoneModel,
    pub blind_well_id: String,
    pub seed: u64,
}

impl SingleAnn {
    pub fn predict(&self, x: &[f64; N_ATTRIBUTES]) -> f64 {
        self.model.predict(x)
    }

    pub fn predict_well(&self, well: &Well) -> Vec<f64> {
        (0..well.log.len())
            .map(|i| self.predict(&well.log.predictors(i)))
            .collect()
    }
}

/// Trains the baseline on the pooled training set (see [`crate::preprocess::partition_pooled`]).
pub fn train_single_ann(
    pooled: &NormalizedSet,
    blind_well_id: &str,
    config: &TrainConfig,
    hidden: &HiddenSpec,
) -> Result<SingleAnn> {
    config.validate()?;
    if pooled.train.is_empty() {
        return Err(Error::InsufficientData("empty pooled training set".into()));
    }
    let model = train_network(pooled, 0, hidden, config)?;
    Ok(SingleAnn {
        model,
        blind_well_id: blind_well_id.to_string(),
        seed: config.seed,
    })
}

/// Evaluators for one scope of the blind test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScopeMetrics {
    pub cc: f64,
    pub rmse: f64,
    pub aem: f64,
    pub n: usize,
    pub time_s: f64,
}

impl ScopeMetrics {
    /// Metrics of a prediction against its target. An undefined correlation is NaN.
    pub fn evaluate(target: &[f64], predicted: &[f64], time_s: f64) -> Result<Self> {
        let p = PairedSeries::new(target, predicted)?;
        let cc = match metrics::cc(&p) {
            Ok(v) => v,
            Err(Error::UndefinedCorrelation) => f64::NAN,
            Err(e) => return Err(e),
        };
        Ok(Self {
            cc,
            rmse: metrics::rmse(&p),
            aem: metrics::aem(&p),
            n: target.len(),
            time_s,
        })
    }
}

/// Blind-well comparison of the modular scheme against the single network.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindReport {
    pub well_id: String,
    pub zones: [ScopeMetrics; 3],
    /// Unweighted mean of the zone metrics; time is the sum of zone times.
    pub average: ScopeMetrics,
    /// Pattern-count-weighted mean of the zone metrics.
    pub weighted_average: ScopeMetrics,
    pub single_ann: ScopeMetrics,
}

impl BlindReport {
    pub const CSV_HEADER: &'static str = "scope,cc,rmse,aem,n,time_s";

    pub fn rows(&self) -> Vec<(&'static str, ScopeMetrics)> {
        vec![
            ("Z1", self.zones[0]),
            ("Z2", self.zones[1]),
            ("Z3", self.zones[2]),
            ("average", self.average),
            ("weighted_average", self.weighted_average),
            ("single_ann", self.single_ann),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (scope, m) in self.rows() {
            out.push_str(&format!(
                "{scope},{},{},{},{},{}\n",
                fmt_f64(m.cc),
                fmt_f64(m.rmse),
                fmt_f64(m.aem),
                m.n,
                fmt_f64(m.time_s)
            ));
        }
        out
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        v.to_string()
    }
}

fn combine(zones: &[ScopeMetrics; 3], weighted: bool) -> ScopeMetrics {
    let n: usize = zones.iter().map(|z| z.n).sum();
    let weight = |z: &ScopeMetrics| if weighted { z.n as f64 / n as f64 } else { 1.0 / 3.0 };
    let mean = |f: fn(&ScopeMetrics) -> f64| zones.iter().map(|z| weight(z) * f(z)).sum::<f64>();
    ScopeMetrics {
        cc: mean(|z| z.cc),
        rmse: mean(|z| z.rmse),
        aem: mean(|z| z.aem),
        n,
        time_s: zones.iter().map(|z| z.time_s).sum(),
    }
}

/// Evaluates both models on the blind well in raw sand-fraction units.
pub fn compare(mann: &MannModel, single: &SingleAnn, blind: &Well) -> Result<BlindReport> {
    if mann.blind_well_id != single.blind_well_id {
        return Err(Error::InconsistentComparison(format!(
            "modular model held out {}, single network held out {}",
            mann.blind_well_id, single.blind_well_id
        )));
    }
    if mann.blind_well_id != blind.id() {
        return Err(Error::InconsistentComparison(format!(
            "models held out {}, evaluating on {}",
            mann.blind_well_id,
            blind.id()
        )));
    }
    let ranges = segment_zones(&blind.log, &blind.tops)?;
    let predicted = predict_well(mann, blind)?;
    let target = &blind.log.sand_fraction;
    let times = mann.train_times();
    let mut zones = Vec::with_capacity(3);
    for (i, r) in ranges.iter().enumerate() {
        zones.push(ScopeMetrics::evaluate(
            &target[r.clone()],
            &predicted[r.clone()],
            times[i],
        )?);
    }
    let zones: [ScopeMetrics; 3] = zones.try_into().expect("three zones");
    let single_pred = single.predict_well(blind);
    Ok(BlindReport {
        well_id: blind.id().to_string(),
        average: combine(&zones, false),
        weighted_average: combine(&zones, true),
        single_ann: ScopeMetrics::evaluate(target, &single_pred, single.model.trace.wall_time)?,
        zones,
    })
}

// ---- persistence ----

#[derive(Debug, Serialize, Deserialize)]
struct NetworkEntry {
    hidden: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
    zscore: ZScoreStats,
    minmax: MinMaxStats,
    trace: TraceEntry,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceEntry {
    epochs_run: usize,
    stop_reason: nn::StopReason,
    final_rmse: Option<f64>,
    rmse_history: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ZoneEntry {
    zone: Zone,
    #[serde(flatten)]
    network: NetworkEntry,
}

#[derive(Debug, Serialize, Deserialize)]
struct MannFile {
    format: String,
    seed: u64,
    blind_well_id: String,
    normalization: String,
    zones: Vec<ZoneEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AnnFile {
    format: String,
    seed: u64,
    blind_well_id: String,
    normalization: String,
    #[serde(flatten)]
    network: NetworkEntry,
}

impl NetworkEntry {
    fn from_model(m: &ZoneModel) -> Self {
        Self {
            hidden: m.net.hidden,
            w1: m.net.w1.clone(),
            b1: m.net.b1.clone(),
            w2: m.net.w2.clone(),
            b2: m.net.b2,
            zscore: m.zscore,
            minmax: m.minmax,
            trace: TraceEntry {
                epochs_run: m.trace.epochs_run,
                stop_reason: m.trace.stop_reason,
                final_rmse: m.trace.final_rmse(),
                rmse_history: m.trace.rmse_history.clone(),
            },
        }
    }

    fn into_model(self, what: &str) -> Result<ZoneModel> {
        let net = MlpModel {
            hidden: self.hidden,
            w1: self.w1,
            b1: self.b1,
            w2: self.w2,
            b2: self.b2,
        };
        net.validate()
            .map_err(|e| Error::MalformedModel(format!("{what}: {e}")))?;
        if !(self.zscore.std.iter().all(|s| *s > 0.0) && self.minmax.y_max > self.minmax.y_min) {
            return Err(Error::MalformedModel(format!("{what}: degenerate normalizer")));
        }
        if self.trace.rmse_history.len() != self.trace.epochs_run {
            return Err(Error::MalformedModel(format!("{what}: trace length mismatch")));
        }
        Ok(ZoneModel {
            net,
            zscore: self.zscore,
            minmax: self.minmax,
            trace: TrainTrace {
                rmse_history: self.trace.rmse_history,
                epochs_run: self.trace.epochs_run,
                stop_reason: self.trace.stop_reason,
                wall_time: f64::NAN,
            },
        })
    }
}

fn check_format(text: &str, expected: &str) -> Result<()> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
    let found = value
        .get("format")
        .and_then(|f| f.as_str())
        .ok_or_else(|| Error::MalformedModel("missing 'format' field".into()))?;
    if found != expected {
        return Err(Error::VersionMismatch {
            found: found.to_string(),
            expected: expected.to_string(),
        });
    }
    Ok(())
}

const NORMALIZATION_PER_ZONE: &str = "per_zone_train_only";
const NORMALIZATION_POOLED: &str = "pooled_train_only";

pub fn mann_to_json(model: &MannModel) -> String {
    let file = MannFile {
        format: MANN_FORMAT.into(),
        seed: model.seed,
        blind_well_id: model.blind_well_id.clone(),
        normalization: NORMALIZATION_PER_ZONE.into(),
        zones: Zone::ALL
            .iter()
            .map(|&zone| ZoneEntry {
                zone,
                network: NetworkEntry::from_model(model.zone(zone)),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}

pub fn mann_from_json(text: &str) -> Result<MannModel> {
    check_format(text, MANN_FORMAT)?;
    let file: MannFile = serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
    if file.zones.len() != 3 {
        return Err(Error::MalformedModel(format!(
            "expected 3 zones, found {}",
            file.zones.len()
        )));
    }
    let mut zones = Vec::with_capacity(3);
    for (expected, entry) in Zone::ALL.iter().zip(file.zones) {
        if entry.zone != *expected {
            return Err(Error::MalformedModel(format!(
                "zone {} listed where {expected} was expected",
                entry.zone
            )));
        }
        zones.push(entry.network.into_model(expected.name())?);
    }
    Ok(MannModel {
        zones: zones.try_into().expect("three zones"),
        blind_well_id: file.blind_well_id,
        seed: file.seed,
    })
}

pub fn save_model(model: &MannModel, path: &Path) -> Result<()> {
    std::fs::write(path, mann_to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MannModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    mann_from_json(&text)
}

pub fn single_to_json(single: &SingleAnn) -> String {
    let file = AnnFile {
        format: ANN_FORMAT.into(),
        seed: single.seed,
        blind_well_id: single.blind_well_id.clone(),
        normalization: NORMALIZATION_POOLED.into(),
        network: NetworkEntry::from_model(&single.model),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}

pub fn single_from_json(text: &str) -> Result<SingleAnn> {
    check_format(text, ANN_FORMAT)?;
    let file: AnnFile = serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
    Ok(SingleAnn {
        model: file.network.into_model("single network")?,
        blind_well_id: file.blind_well_id,
        seed: file.seed,
    })
}

pub fn save_single(single: &SingleAnn, path: &Path) -> Result<()> {
    std::fs::write(path, single_to_json(single)).map_err(|e| Error::io(path, e))
}

pub fn load_single(path: &Path) -> Result<SingleAnn> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    single_from_json(&text)
}

/// Non-deterministic facts about a training run, kept beside the model file
/// (`<model>.meta.json`) so the model itself stays reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub created_unix_s: u64,
    pub wall_time_s: Vec<f64>,
}

pub fn metadata_path(model_path: &Path) -> std::path::PathBuf {
    let mut s = model_path.as_os_str().to_owned();
    s.push(".meta.json");
    s.into()
}

pub fn write_metadata(model_path: &Path, meta: &RunMetadata) -> Result<()> {
    let path = metadata_path(model_path);
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

/// Reads the sidecar if present; a missing sidecar is not an error.
pub fn read_metadata(model_path: &Path) -> Result<Option<RunMetadata>> {
    let path = metadata_path(model_path);
    match std::fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| Error::MalformedModel(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{WellLog, WellTops};
    use crate::nn::StopReason;

    fn const_zone(hidden: usize, b2: f64) -> ZoneModel {
        let mut net = MlpModel::zeros(hidden);
        net.b2 = b2;
        ZoneModel {
            net,
            zscore: ZScoreStats {
                mean: [0.0; 3],
                std: [1.0; 3],
            },
            minmax: MinMaxStats::new(0.0, 1.0).unwrap(),
            trace: TrainTrace {
                rmse_history: vec![0.1],
                epochs_run: 1,
                stop_reason: StopReason::MaxEpoch,
                wall_time: 1.0,
            },
        }
    }

    fn fixture_well(id: &str) -> Well {
        let n = 50;
        let t: Vec<f64> = (0..n).map(|k| 100.0 + k as f64).collect();
        Well {
            log: WellLog {
                well_id: id.into(),
                impedance: (0..n).map(|k| (k as f64 * 0.3).sin()).collect(),
                inst_amp: (0..n).map(|k| (k as f64 * 0.2).cos()).collect(),
                inst_freq: vec![1.0; n],
                sand_fraction: (0..n).map(|k| 0.5 + 0.3 * (k as f64 * 0.25).sin()).collect(),
                t,
            },
            tops: WellTops {
                well_id: id.into(),
                top1_t: 110.0,
                top2_t: 130.5,
            },
        }
    }

    #[test]
    fn routing_follows_left_closed_tops() {
        // zone networks output distinct constants so the route is visible in the output
        let outputs = [-1.0, 0.0, 1.0];
        let model = MannModel {
            zones: std::array::from_fn(|i| const_zone(1, outputs[i])),
            blind_well_id: "W".into(),
            seed: 0,
        };
        let well = fixture_well("W");
        let pred = predict_well(&model, &well).unwrap();
        assert_eq!(pred.len(), well.log.len());
        for (i, &t) in well.log.t.iter().enumerate() {
            let zone = if t < 110.0 {
                0
            } else if t < 130.5 {
                1
            } else {
                2
            };
            let expected = model.zones[zone].minmax.invert_output(nn::logsig(outputs[zone]));
            assert_eq!(pred[i], expected, "t = {t}");
        }
        assert_eq!(Zone::of(110.0, 110.0, 130.5), Zone::Z2);
    }

    #[test]
    fn zero_networks_predict_denormalized_half() {
        let mut zones: [ZoneModel; 3] = std::array::from_fn(|_| const_zone(2, 0.0));
        zones[1].minmax = MinMaxStats::new(0.1, 0.5).unwrap();
        let model = MannModel {
            zones,
            blind_well_id: "W".into(),
            seed: 0,
        };
        let well = fixture_well("W");
        let pred = predict_well(&model, &well).unwrap();
        let r = segment_zones(&well.log, &well.tops).unwrap();
        assert!(pred[r[0].clone()].iter().all(|&v| (v - 0.5).abs() < 1e-15));
        // 0.1 + (0.5 - 0.2) * 0.4 / 0.6
        assert!(pred[r[1].clone()].iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn duplicated_single_network_matches_average() {
        // a well whose three zones carry identical samples
        let base = fixture_well("W");
        let seg = 10;
        let mut log = base.log.clone();
        for series in [&mut log.impedance, &mut log.inst_amp, &mut log.inst_freq, &mut log.sand_fraction] {
            let head: Vec<f64> = series[..seg].to_vec();
            *series = [head.clone(), head.clone(), head].concat();
        }
        log.t = (0..3 * seg).map(|k| k as f64).collect();
        let well = Well {
            log,
            tops: WellTops {
                well_id: "W".into(),
                top1_t: seg as f64,
                top2_t: 2.0 * seg as f64,
            },
        };
        let mut zone = const_zone(2, 0.0);
        zone.net = nn::init_weights(2, 3).unwrap();
        let mann = MannModel {
            zones: std::array::from_fn(|_| zone.clone()),
            blind_well_id: "W".into(),
            seed: 0,
        };
        let single = SingleAnn {
            model: zone,
            blind_well_id: "W".into(),
            seed: 0,
        };
        let report = compare(&mann, &single, &well).unwrap();
        assert!((report.average.cc - report.single_ann.cc).abs() < 1e-12);
        assert!((report.average.rmse - report.single_ann.rmse).abs() < 1e-12);
        assert!((report.average.aem - report.single_ann.aem).abs() < 1e-12);
        assert_eq!(report.average.time_s, 3.0);
        assert_eq!(report.average.n, 3 * seg);
    }

    #[test]
    fn compare_rejects_mismatched_blind_wells() {
        let zone = const_zone(1, 0.0);
        let mann = MannModel {
            zones: std::array::from_fn(|_| zone.clone()),
            blind_well_id: "W1".into(),
            seed: 0,
        };
        let single = SingleAnn {
            model: zone,
            blind_well_id: "W2".into(),
            seed: 0,
        };
        assert!(matches!(
            compare(&mann, &single, &fixture_well("W1")),
            Err(Error::InconsistentComparison(_))
        ));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut zones: [ZoneModel; 3] = std::array::from_fn(|i| const_zone(i + 1, 0.1));
        for (i, z) in zones.iter_mut().enumerate() {
            z.net = nn::init_weights(i + 1, 40 + i as u64).unwrap();
            z.zscore.mean = [1.0 / 3.0, 6.02e6, -0.1];
            z.trace.rmse_history = vec![0.3, 0.2, 0.123_456_789_012_345_67];
            z.trace.epochs_run = 3;
        }
        let m = MannModel {
            zones,
            blind_well_id: "W6".into(),
            seed: 42,
        };
        let text = mann_to_json(&m);
        let back = mann_from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(mann_to_json(&back), text);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let m = MannModel {
            zones: std::array::from_fn(|_| const_zone(1, 0.0)),
            blind_well_id: "W6".into(),
            seed: 1,
        };
        let mut value: serde_json::Value = serde_json::from_str(&mann_to_json(&m)).unwrap();
        value["zones"].as_array_mut().unwrap().pop();
        let two = serde_json::to_string(&value).unwrap();
        assert!(matches!(mann_from_json(&two), Err(Error::MalformedModel(_))));

        let wrong = mann_to_json(&m).replace(MANN_FORMAT, "sandcast-mann-v0");
        assert!(matches!(mann_from_json(&wrong), Err(Error::VersionMismatch { .. })));
        assert!(mann_from_json("{").is_err());
    }
}
