use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::info;
use serde_json::{json, Map, Value};

use sandcast_core::acceptance;
use sandcast_core::ingest::{self, formats};
use sandcast_core::mann::{self, HiddenSpec, MannModel, RunMetadata, SingleAnn, DEFAULT_HIDDEN_CANDIDATES};
use sandcast_core::preprocess::{self, Well};
use sandcast_core::synth::{self, SynthConfig};
use sandcast_core::volume::{self, SectionFormat};
use sandcast_core::{BlindReport, TrainConfig};

use crate::args::*;
use crate::CliError;

pub const INTEGRATED_FILE: &str = "wells_integrated.csv";

/// What a command did, for the run log.
#[derive(Debug, Default)]
pub struct Record {
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub metrics: Map<String, Value>,
}

type Outcome = Result<Record, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn require_dir(path: &Path) -> Result<(), CliError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(usage(format!("{} is not a directory", path.display())))
    }
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{} does not exist", path.display())))
    }
}

fn parse_hidden(text: &str, max_sizes: usize) -> Result<HiddenSpec, CliError> {
    if text == "auto" {
        return Ok(HiddenSpec::Auto(DEFAULT_HIDDEN_CANDIDATES.to_vec()));
    }
    let sizes = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().ok().filter(|&h| h > 0))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| usage(format!("--hidden expects 'auto' or positive integers, got '{text}'")))?;
    match sizes.as_slice() {
        [h] => Ok(HiddenSpec::Uniform(*h)),
        [a, b, c] if max_sizes == 3 => Ok(HiddenSpec::PerZone([*a, *b, *c])),
        _ if max_sizes == 3 => Err(usage("--hidden takes one size or three (Z1,Z2,Z3)")),
        _ => Err(usage("--hidden takes 'auto' or one size")),
    }
}

fn train_config(t: &TrainingArgs, seed: u64) -> Result<TrainConfig, CliError> {
    let config = TrainConfig {
        max_epoch: t.max_epoch,
        err_min: t.err_min,
        seed,
        ..TrainConfig::default()
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Integrated wells paired with tops. Reads `wells_integrated.csv` when it
/// exists, otherwise integrates the raw inputs.
fn load_wells(data: &Path, rec: &mut Record) -> Result<Vec<Well>, CliError> {
    require_dir(data)?;
    let integrated = data.join(INTEGRATED_FILE);
    let logs = if integrated.is_file() {
        rec.inputs.push(integrated.clone());
        formats::load_integrated(&integrated)?
    } else {
        info!("{} not found, integrating raw inputs", integrated.display());
        let inputs = synth::load_inputs(data)?;
        rec.inputs.extend(
            [synth::WELL_LOGS_FILE, synth::CHECKSHOTS_FILE, synth::LOCATIONS_FILE, synth::ATTRIBUTES_FILE]
                .iter()
                .map(|f| data.join(f)),
        );
        ingest::integrate_all(&inputs.logs, &inputs.checkshots, &inputs.locations, &inputs.volume)?
    };
    let tops_path = data.join(synth::TOPS_FILE);
    rec.inputs.push(tops_path.clone());
    let tops = formats::load_tops(&tops_path)?;
    Ok(preprocess::pair_wells(logs, &tops)?)
}

fn restore_times(model_path: &Path, traces: &mut [&mut sandcast_core::TrainTrace]) -> Result<(), CliError> {
    if let Some(meta) = mann::read_metadata(model_path)? {
        for (t, w) in traces.iter_mut().zip(meta.wall_time_s) {
            t.wall_time = w;
        }
    }
    Ok(())
}

fn load_mann(path: &Path, rec: &mut Record) -> Result<MannModel, CliError> {
    require_file(path)?;
    rec.inputs.push(path.to_path_buf());
    let mut m = mann::load_model(path)?;
    let [a, b, c] = &mut m.zones;
    restore_times(path, &mut [&mut a.trace, &mut b.trace, &mut c.trace])?;
    Ok(m)
}

fn load_single(path: &Path, rec: &mut Record) -> Result<SingleAnn, CliError> {
    require_file(path)?;
    rec.inputs.push(path.to_path_buf());
    let mut s = mann::load_single(path)?;
    restore_times(path, &mut [&mut s.model.trace])?;
    Ok(s)
}

pub fn synth(a: &SynthArgs) -> Outcome {
    let config = SynthConfig {
        seed: a.seed,
        n_wells: a.n_wells,
        noise_sigma: a.noise_sigma,
        n_inlines: a.inlines,
        n_xlines: a.xlines,
        nt: a.samples,
        ..SynthConfig::default()
    };
    let field = synth::generate(&config)?;
    let outputs = synth::export(&field, &a.out)?;
    info!("wrote {} files to {}", outputs.len(), a.out.display());
    let mut metrics = Map::new();
    metrics.insert("n_wells".into(), json!(field.logs.len()));
    metrics.insert("n_voxels".into(), json!(field.volume.data.len()));
    Ok(Record {
        seed: Some(a.seed),
        outputs,
        metrics,
        ..Record::default()
    })
}

pub fn ingest(a: &IngestArgs) -> Outcome {
    require_dir(&a.data)?;
    let inputs = synth::load_inputs(&a.data)?;
    let wells = ingest::integrate_all(&inputs.logs, &inputs.checkshots, &inputs.locations, &inputs.volume)?;
    let out = a.out.clone().unwrap_or_else(|| a.data.join(INTEGRATED_FILE));
    formats::write_integrated(&out, &wells)?;
    let mut rec = Record::default();
    rec.inputs = [synth::WELL_LOGS_FILE, synth::CHECKSHOTS_FILE, synth::LOCATIONS_FILE, synth::ATTRIBUTES_FILE]
        .iter()
        .map(|f| a.data.join(f))
        .collect();
    rec.metrics.insert("n_wells".into(), json!(wells.len()));
    rec.metrics
        .insert("n_samples".into(), json!(wells.iter().map(|w| w.len()).sum::<usize>()));
    rec.outputs.push(out);
    Ok(rec)
}

pub fn train(a: &TrainArgs) -> Outcome {
    let hidden = parse_hidden(&a.hidden, 3)?;
    let config = train_config(&a.training, a.seed)?;
    let mut rec = Record {
        seed: Some(a.seed),
        ..Record::default()
    };
    let wells = load_wells(&a.data, &mut rec)?;
    let zoned = preprocess::partition_lowo(&wells, &a.blind)?;
    let model = mann::train_mann(&zoned, &config, &hidden)?;
    mann::save_model(&model, &a.out)?;
    mann::write_metadata(
        &a.out,
        &RunMetadata {
            created_unix_s: now_unix(),
            wall_time_s: model.train_times().to_vec(),
        },
    )?;
    for (zone, z) in model.zones.iter().enumerate() {
        let name = format!("Z{}", zone + 1);
        info!(
            "{name}: H={} epochs={} stop={} rmse={:.6}",
            z.net.hidden,
            z.trace.epochs_run,
            z.trace.stop_reason.as_str(),
            z.trace.final_rmse().unwrap_or(f64::NAN)
        );
        rec.metrics.insert(
            name,
            json!({
                "hidden": z.net.hidden,
                "n_train": zoned.zones[zone].train.len(),
                "epochs": z.trace.epochs_run,
                "stop_reason": z.trace.stop_reason.as_str(),
                "final_rmse": z.trace.final_rmse(),
            }),
        );
    }
    rec.outputs.push(a.out.clone());
    Ok(rec)
}

fn train_baseline(
    wells: &[Well],
    blind: &str,
    hidden: &HiddenSpec,
    config: &TrainConfig,
) -> Result<SingleAnn, CliError> {
    let pooled = preprocess::partition_pooled(wells, blind)?;
    Ok(mann::train_single_ann(&pooled, blind, config, hidden)?)
}

pub fn train_single(a: &TrainSingleArgs) -> Outcome {
    let config = train_config(&a.training, a.seed)?;
    let mut rec = Record {
        seed: Some(a.seed),
        ..Record::default()
    };
    let hidden = match &a.match_capacity {
        Some(path) => HiddenSpec::Uniform(load_mann(path, &mut rec)?.hidden_sizes().iter().sum()),
        None => parse_hidden(&a.hidden, 1)?,
    };
    let wells = load_wells(&a.data, &mut rec)?;
    let single = train_baseline(&wells, &a.blind, &hidden, &config)?;
    mann::save_single(&single, &a.out)?;
    mann::write_metadata(
        &a.out,
        &RunMetadata {
            created_unix_s: now_unix(),
            wall_time_s: vec![single.model.trace.wall_time],
        },
    )?;
    let t = &single.model.trace;
    rec.metrics.insert(
        "single_ann".into(),
        json!({
            "hidden": single.model.net.hidden,
            "epochs": t.epochs_run,
            "stop_reason": t.stop_reason.as_str(),
            "final_rmse": t.final_rmse(),
        }),
    );
    rec.outputs.push(a.out.clone());
    Ok(rec)
}

fn emit_report(report: &BlindReport, out: Option<&Path>, rec: &mut Record) -> Result<(), CliError> {
    let csv = report.to_csv();
    match out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| sandcast_core::Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            rec.outputs.push(path.to_path_buf());
        }
        None => print!("{csv}"),
    }
    rec.metrics.insert("blind_well".into(), json!(report.well_id));
    for (scope, m) in report.rows() {
        let cc = if m.cc.is_nan() { Value::Null } else { json!(m.cc) };
        rec.metrics
            .insert(scope.into(), json!({ "cc": cc, "rmse": m.rmse, "aem": m.aem, "n": m.n }));
    }
    Ok(())
}

fn blind_well<'a>(wells: &'a [Well], id: &str) -> Result<&'a Well, CliError> {
    wells
        .iter()
        .find(|w| w.id() == id)
        .ok_or_else(|| sandcast_core::Error::UnknownWell(id.to_string()).into())
}

pub fn blind_test(a: &BlindTestArgs) -> Outcome {
    let mut rec = Record::default();
    let model = load_mann(&a.model, &mut rec)?;
    let wells = load_wells(&a.data, &mut rec)?;
    let blind = blind_well(&wells, &model.blind_well_id)?;
    let seed = a.seed.unwrap_or(model.seed);
    rec.seed = Some(seed);
    let single = match &a.single {
        Some(path) => load_single(path, &mut rec)?,
        None => {
            let hidden = HiddenSpec::Uniform(model.hidden_sizes().iter().sum());
            info!("training capacity-matched single network ({hidden:?})");
            train_baseline(&wells, &model.blind_well_id, &hidden, &train_config(&a.training, seed)?)?
        }
    };
    let report = mann::compare(&model, &single, blind)?;
    emit_report(&report, a.out.as_deref(), &mut rec)?;
    Ok(rec)
}

pub fn compare(a: &CompareArgs) -> Outcome {
    let mut rec = Record::default();
    let model = load_mann(&a.model, &mut rec)?;
    let single = load_single(&a.single, &mut rec)?;
    rec.seed = Some(model.seed);
    let wells = load_wells(&a.data, &mut rec)?;
    let blind = blind_well(&wells, &model.blind_well_id)?;
    let report = mann::compare(&model, &single, blind)?;
    emit_report(&report, a.out.as_deref(), &mut rec)?;
    Ok(rec)
}

pub fn volume_predict(a: &VolumePredictArgs) -> Outcome {
    let mut rec = Record::default();
    let model = load_mann(&a.model, &mut rec)?;
    rec.seed = Some(model.seed);
    let pick = |explicit: &Option<PathBuf>, name: &str| -> Result<PathBuf, CliError> {
        match (explicit, &a.data) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(dir)) => Ok(dir.join(name)),
            (None, None) => Err(usage(format!("missing --data or the path of {name}"))),
        }
    };
    let vol_path = pick(&a.volume, synth::ATTRIBUTES_FILE)?;
    let hz_path = pick(&a.horizons, synth::HORIZONS_FILE)?;
    require_file(&vol_path)?;
    require_file(&hz_path)?;
    let vol = formats::load_volume(&vol_path)?;
    let hz = volume::load_horizons(&hz_path)?;
    let pred = volume::predict_volume(&model, &vol, &hz)?;
    volume::write_sand_volume(&a.out, &pred)?;
    rec.inputs.extend([vol_path, hz_path]);
    rec.outputs.push(a.out.clone());
    rec.metrics.insert("n_voxels".into(), json!(pred.values.len()));
    rec.metrics
        .insert("n_nan".into(), json!(pred.values.iter().filter(|v| v.is_nan()).count()));
    Ok(rec)
}

pub fn filter(a: &FilterArgs) -> Outcome {
    require_file(&a.input)?;
    let vol = volume::load_sand_volume(&a.input)?;
    let out = volume::filter_volume(&vol, a.window)?;
    volume::write_sand_volume(&a.out, &out)?;
    let mut rec = Record {
        inputs: vec![a.input.clone()],
        outputs: vec![a.out.clone()],
        ..Record::default()
    };
    rec.metrics.insert("window".into(), json!(a.window));
    Ok(rec)
}

pub fn section(a: &SectionArgs) -> Outcome {
    require_file(&a.input)?;
    let vol = volume::load_sand_volume(&a.input)?;
    let section = volume::extract_section(&vol, a.inline)?;
    let format = match a.format {
        Format::Csv => SectionFormat::Csv,
        Format::Pgm => SectionFormat::Pgm,
    };
    volume::write_section(&section, &a.out, format)?;
    let mut rec = Record {
        inputs: vec![a.input.clone()],
        outputs: vec![a.out.clone()],
        ..Record::default()
    };
    rec.metrics.insert("inline".into(), json!(a.inline));
    rec.metrics
        .insert("roughness".into(), json!(volume::time_roughness(&section.values)));
    Ok(rec)
}

pub fn selftest(a: &SelftestArgs) -> Outcome {
    let outcomes = acceptance::run(&a.only).map_err(|e| usage(e.to_string()))?;
    let mut rec = Record::default();
    for o in &outcomes {
        println!("{o}");
        rec.metrics.insert(format!("criterion_{}", o.id), json!(o.passed));
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        Ok(rec)
    } else {
        Err(CliError::Failed {
            msg: format!("acceptance criteria failed: {failed:?}"),
            record: Box::new(rec),
        })
    }
}
