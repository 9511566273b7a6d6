//! The acceptance suite: ten pass/fail properties of the whole pipeline,
//! shared by the `acceptance` test target and `sandcast selftest`.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{integrate_all, resample_uniform, uniform_grid, N_ATTRIBUTES};
use crate::mann::{self, HiddenSpec, MannModel};
use crate::metrics::{rmse, PairedSeries};
use crate::nn::{self, check_capacity, init_weights, loss, Batch, MlpModel, TrainConfig};
use crate::preprocess::{pair_wells, partition_lowo, partition_pooled, MinMaxStats, NormalizedSet, Well};
use crate::synth::{self, SynthConfig, SynthField};
use crate::volume::{self, extract_section, filter_volume, moving_average_filter, predict_volume_with, time_roughness, Execution, Grid2};

/// Hidden size of every zone network in the suite's training runs.
pub const ZONE_HIDDEN: usize = 4;
/// Training epochs per network in the suite.
pub const SUITE_EPOCHS: usize = 100;
/// Seed of the networks (the zones add 1, 2, 3).
pub const SUITE_TRAIN_SEED: u64 = 7;

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "synthetic blind-test quality"),
    (2, "modular network beats single network"),
    (3, "gradient matches central differences"),
    (4, "training error history is non-increasing"),
    (5, "spline reproduces cubics"),
    (6, "moving-average filter matches window oracle"),
    (7, "normalization round trips"),
    (8, "capacity guard"),
    (9, "determinism"),
    (10, "post-filter smoothing"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

fn suite_config() -> TrainConfig {
    TrainConfig {
        max_epoch: SUITE_EPOCHS,
        seed: SUITE_TRAIN_SEED,
        ..TrainConfig::default()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Loads a field and integrates its wells.
fn field_wells(field: &SynthField) -> Result<Vec<Well>> {
    let logs = integrate_all(&field.logs, &field.checkshots, &field.locations, &field.volume)?;
    pair_wells(logs, &field.tops)
}

struct Suite {
    /// Every training history produced so far, labelled.
    histories: Vec<(String, Vec<f64>)>,
    field42: Option<(SynthField, Vec<Well>)>,
    model42: Option<MannModel>,
}

impl Suite {
    fn new() -> Self {
        Self {
            histories: Vec::new(),
            field42: None,
            model42: None,
        }
    }

    fn field42(&mut self) -> Result<&(SynthField, Vec<Well>)> {
        if self.field42.is_none() {
            let field = synth::generate(&SynthConfig::with_seed(42))?;
            let wells = field_wells(&field)?;
            self.field42 = Some((field, wells));
        }
        Ok(self.field42.as_ref().expect("just set"))
    }

    fn record_mann(&mut self, label: &str, m: &MannModel) {
        for (i, z) in m.zones.iter().enumerate() {
            self.histories
                .push((format!("{label} Z{}", i + 1), z.trace.rmse_history.clone()));
        }
    }

    fn train_fold(&mut self, wells: &[Well], blind: &str, label: &str) -> Result<MannModel> {
        let zoned = partition_lowo(wells, blind)?;
        let m = mann::train_mann(&zoned, &suite_config(), &HiddenSpec::Uniform(ZONE_HIDDEN))?;
        self.record_mann(label, &m);
        Ok(m)
    }

    fn model42(&mut self) -> Result<MannModel> {
        if let Some(m) = &self.model42 {
            return Ok(m.clone());
        }
        let wells = self.field42()?.1.clone();
        let m = self.train_fold(&wells, wells[0].id(), "seed 42 W1")?;
        self.model42 = Some(m.clone());
        Ok(m)
    }
}

type Verdict = Result<(bool, String)>;

fn blind_quality(s: &mut Suite) -> Verdict {
    let start = Instant::now();
    let wells = s.field42()?.1.clone();
    let mut zone_cc: [Vec<f64>; 3] = Default::default();
    let mut overall = Vec::new();
    for w in &wells {
        let m = s.train_fold(&wells, w.id(), &format!("seed 42 {}", w.id()))?;
        if s.model42.is_none() {
            s.model42 = Some(m.clone());
        }
        let pred = mann::predict_well(&m, w)?;
        let ranges = crate::preprocess::segment_zones(&w.log, &w.tops)?;
        for (z, r) in ranges.iter().enumerate() {
            let p = PairedSeries::new(&w.log.sand_fraction[r.clone()], &pred[r.clone()])?;
            zone_cc[z].push(crate::metrics::cc(&p).unwrap_or(f64::NAN));
        }
        overall.push(rmse(&PairedSeries::new(&w.log.sand_fraction, &pred)?));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let cc = zone_cc.map(median);
    let rm = median(overall);
    let passed = cc.iter().all(|&c| c >= 0.90) && rm <= 0.08 && elapsed <= 120.0;
    Ok((
        passed,
        format!(
            "median CC Z1 {:.4} Z2 {:.4} Z3 {:.4} (>= 0.90), median RMSE {rm:.4} (<= 0.08), {elapsed:.1} s (<= 120)",
            cc[0], cc[1], cc[2]
        ),
    ))
}

fn mann_beats_single(s: &mut Suite) -> Verdict {
    let mut wins = 0;
    let mut runs = 0;
    let mut mann_times = Vec::new();
    let mut single_times = Vec::new();
    let config = suite_config();
    for seed in 1..=5u64 {
        let field = synth::generate(&SynthConfig::with_seed(seed))?;
        let wells = field_wells(&field)?;
        for w in &wells {
            let m = s.train_fold(&wells, w.id(), &format!("seed {seed} {}", w.id()))?;
            let hidden: usize = m.hidden_sizes().iter().sum();
            let pooled = partition_pooled(&wells, w.id())?;
            let single = mann::train_single_ann(&pooled, w.id(), &config, &HiddenSpec::Uniform(hidden))?;
            s.histories.push((
                format!("seed {seed} {} single", w.id()),
                single.model.trace.rmse_history.clone(),
            ));
            let report = mann::compare(&m, &single, w)?;
            runs += 1;
            if report.average.cc > report.single_ann.cc {
                wins += 1;
            }
            mann_times.push(m.train_times().iter().sum());
            single_times.push(single.model.trace.wall_time);
        }
    }
    let share = wins as f64 / runs as f64;
    let (tm, ts) = (median(mann_times), median(single_times));
    Ok((
        share >= 0.8 && tm <= ts,
        format!(
            "modular CC higher in {wins}/{runs} runs ({:.0}%, need >= 80%), median training time {tm:.3} s vs {ts:.3} s",
            100.0 * share
        ),
    ))
}

/// Relative error with a floor on the denominator, so components that are
/// zero up to rounding are judged on absolute error.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4)
}

fn gradient_check(_: &mut Suite) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let step = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h = rng.gen_range(1..=8);
        let n = rng.gen_range(5..=60);
        let p: Vec<f64> = (0..nn::n_params(h)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x: Vec<[f64; N_ATTRIBUTES]> = (0..n)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let batch = Batch::new(x, y)?;
        let analytic = nn::gradient(&MlpModel::from_params(h, &p), &batch)?.params();
        for i in 0..p.len() {
            let mut plus = p.clone();
            let mut minus = p.clone();
            plus[i] += step;
            minus[i] -= step;
            let fd = (loss(&plus, h, &batch) - loss(&minus, h, &batch)) / (2.0 * step);
            worst = worst.max(relative_error(analytic[i], fd));
        }
    }
    Ok((worst < 1e-6, format!("max relative error {worst:.3e} over 20 draws (< 1e-6)")))
}

fn monotone_histories(s: &mut Suite) -> Verdict {
    if s.histories.is_empty() {
        s.model42()?;
    }
    let mut offenders = Vec::new();
    for (label, h) in &s.histories {
        if h.windows(2).any(|w| w[1] > w[0] + 1e-15) {
            offenders.push(label.clone());
        }
    }
    let epochs: usize = s.histories.iter().map(|h| h.1.len()).sum();
    Ok((
        offenders.is_empty(),
        if offenders.is_empty() {
            format!("{} runs, {epochs} epochs, no increase beyond 1e-15", s.histories.len())
        } else {
            format!("history increased in {}", offenders.join(", "))
        },
    ))
}

fn spline_cubics(_: &mut Suite) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(5..=12);
        let mut knots: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        if knots.len() < 5 {
            continue;
        }
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let poly = |t: f64| ((c[3] * t + c[2]) * t + c[1]) * t + c[0];
        let values: Vec<f64> = knots.iter().map(|&t| poly(t)).collect();
        let (a, b) = (knots[0], knots[knots.len() - 1]);
        let dt = (b - a) / 199.0;
        let grid = uniform_grid(a, b, dt);
        let out = resample_uniform(&knots, &values, a, b, dt)?;
        if out.len() != 200 {
            return Ok((false, format!("expected 200 query points, got {}", out.len())));
        }
        for (t, v) in grid.iter().zip(&out) {
            worst = worst.max((v - poly(*t)).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max abs error {worst:.3e} at 200 points (<= 1e-9)")))
}

/// Direct enumeration of the `w x w` window at every cell, accumulating
/// row by row, left to right.
pub fn window_oracle(grid: &Grid2, w: usize) -> Vec<f64> {
    let r = (w / 2) as isize;
    let (rows, cols) = (grid.rows as isize, grid.cols as isize);
    let mut out = Vec::with_capacity(grid.data.len());
    for j in 0..rows {
        for k in 0..cols {
            let mut sum = 0.0;
            let mut count = 0;
            for dj in -r..=r {
                for dk in -r..=r {
                    let (jj, kk) = (j + dj, k + dk);
                    if jj < 0 || kk < 0 || jj >= rows || kk >= cols {
                        continue;
                    }
                    let v = grid.data[(jj * cols + kk) as usize];
                    if !v.is_nan() {
                        sum += v;
                        count += 1;
                    }
                }
            }
            out.push(if count == 0 { f64::NAN } else { sum / count as f64 });
        }
    }
    out
}

fn filter_oracle(_: &mut Suite) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    for i in 0..100 {
        let data: Vec<f64> = (0..100)
            .map(|_| if rng.gen::<f64>() < 0.2 { f64::NAN } else { rng.gen_range(-10.0..10.0) })
            .collect();
        let grid = Grid2::new(10, 10, data)?;
        let w = [1, 3, 5][i % 3];
        let got = moving_average_filter(&grid, w)?;
        let want = window_oracle(&grid, w);
        if got.data.iter().zip(&want).any(|(a, b)| a.to_bits() != b.to_bits()) {
            mismatches += 1;
        }
    }
    let spike = Grid2::new(3, 3, vec![0., 0., 0., 0., 9., 0., 0., 0., 0.])?;
    let out = moving_average_filter(&spike, 3)?;
    let worked = out.get(1, 1) == 1.0 && out.get(0, 0) == 2.25;
    Ok((
        mismatches == 0 && worked,
        format!(
            "{mismatches}/100 random grids differ from the oracle; spike example center {} corner {}",
            out.get(1, 1),
            out.get(0, 0)
        ),
    ))
}

fn column_stats(set: &NormalizedSet) -> ([f64; N_ATTRIBUTES], [f64; N_ATTRIBUTES]) {
    let n = set.train.len() as f64;
    let mut mean = [0.0; N_ATTRIBUTES];
    for p in &set.train {
        for a in 0..N_ATTRIBUTES {
            mean[a] += p.x[a];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; N_ATTRIBUTES];
    for p in &set.train {
        for a in 0..N_ATTRIBUTES {
            var[a] += (p.x[a] - mean[a]).powi(2);
        }
    }
    (mean, var.map(|v| (v / n).sqrt()))
}

fn normalization(s: &mut Suite) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_mm = 0.0f64;
    for _ in 0..100 {
        let lo = rng.gen_range(-1.0..1.0);
        let mm = MinMaxStats::new(lo, lo + rng.gen_range(0.01..2.0))?;
        for _ in 0..100 {
            let y = rng.gen_range(mm.y_min..=mm.y_max);
            worst_mm = worst_mm.max((mm.invert(mm.apply(y)) - y).abs());
        }
    }
    let wells = s.field42()?.1.clone();
    let (mut worst_mean, mut worst_std) = (0.0f64, 0.0f64);
    for w in &wells {
        let zoned = partition_lowo(&wells, w.id())?;
        let pooled = partition_pooled(&wells, w.id())?;
        for set in zoned.zones.iter().chain(std::iter::once(&pooled)) {
            let (mean, std) = column_stats(set);
            for a in 0..N_ATTRIBUTES {
                worst_mean = worst_mean.max(mean[a].abs());
                worst_std = worst_std.max((std[a] - 1.0).abs());
            }
        }
    }
    Ok((
        worst_mm <= 1e-12 && worst_mean < 1e-10 && worst_std < 1e-10,
        format!(
            "minmax round trip {worst_mm:.2e} (<= 1e-12), standardized |mean| {worst_mean:.2e}, |std - 1| {worst_std:.2e} (< 1e-10)"
        ),
    ))
}

fn capacity_guard(_: &mut Suite) -> Verdict {
    let rules = check_capacity(8, 1000) && !check_capacity(8, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<[f64; N_ATTRIBUTES]> = (0..500)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
        .collect();
    let batch = Batch::new(x, vec![0.5; 500])?;
    let refused = matches!(
        nn::train_scg(&init_weights(8, 1)?, &batch, &suite_config()),
        Err(Error::Capacity { .. })
    );
    Ok((
        rules && refused,
        format!("(H=8, n=1000) passes and (H=8, n=500) fails: {rules}; training refused on 500 patterns: {refused}"),
    ))
}

/// Scratch directory removed on drop.
struct ScratchDir(PathBuf);

impl ScratchDir {
    fn new(tag: &str) -> Result<Self> {
        use std::sync::atomic::{AtomicUsize, Ordering};
        static COUNTER: AtomicUsize = AtomicUsize::new(0);
        let dir = std::env::temp_dir().join(format!(
            "sandcast-{tag}-{}-{}",
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self(dir))
    }
}

impl Drop for ScratchDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

/// One full run: generate, export, re-read, train, predict, write.
/// Returns the hashes of the manifest, model file and predicted volume.
fn pipeline_hashes(s: &mut Suite, tag: &str) -> Result<[String; 3]> {
    let config = SynthConfig {
        n_inlines: 16,
        n_xlines: 16,
        n_wells: 4,
        min_well_spacing: 4.0,
        ..SynthConfig::with_seed(9)
    };
    let dir = ScratchDir::new(tag)?;
    let field = synth::generate(&config)?;
    synth::export(&field, &dir.0)?;
    let inputs = synth::load_inputs(&dir.0)?;
    let logs = integrate_all(&inputs.logs, &inputs.checkshots, &inputs.locations, &inputs.volume)?;
    let wells = pair_wells(logs, &inputs.tops)?;
    let zoned = partition_lowo(&wells, wells[1].id())?;
    let m = mann::train_mann(&zoned, &suite_config(), &HiddenSpec::Uniform(ZONE_HIDDEN))?;
    s.record_mann(&format!("determinism {tag}"), &m);
    let model_path = dir.0.join("model.json");
    mann::save_model(&m, &model_path)?;
    let reloaded = mann::load_model(&model_path)?;
    let horizons = synth::load_field_horizons(&dir.0)?;
    let pred = predict_volume_with(&reloaded, &inputs.volume, &horizons, Execution::Parallel)?;
    let vol_path = dir.0.join("prediction.csv");
    volume::write_sand_volume(&vol_path, &pred)?;
    Ok([
        synth::sha256_file(&dir.0.join(synth::MANIFEST_FILE))?,
        synth::sha256_file(&model_path)?,
        synth::sha256_file(&vol_path)?,
    ])
}

fn determinism(s: &mut Suite) -> Verdict {
    let a = pipeline_hashes(s, "a")?;
    let b = pipeline_hashes(s, "b")?;
    let model = s.model42()?;
    let (field, _) = s.field42()?;
    let serial = predict_volume_with(&model, &field.volume, &field.horizons, Execution::Serial)?;
    let parallel = predict_volume_with(&model, &field.volume, &field.horizons, Execution::Parallel)?;
    let same_exec = serial.bitwise_eq(&parallel);
    let names = ["manifest", "model", "prediction"];
    let differing: Vec<&str> = names
        .iter()
        .zip(a.iter().zip(&b))
        .filter(|(_, (x, y))| x != y)
        .map(|(n, _)| *n)
        .collect();
    Ok((
        differing.is_empty() && same_exec,
        format!(
            "repeat-run hashes {}; serial and parallel volumes bitwise equal: {same_exec}",
            if differing.is_empty() {
                "identical".to_string()
            } else {
                format!("differ for {}", differing.join(", "))
            }
        ),
    ))
}

fn smoothing(s: &mut Suite) -> Verdict {
    let model = s.model42()?;
    let (field, _) = s.field42()?;
    let pred = volume::predict_volume(&model, &field.volume, &field.horizons)?;
    let filtered = filter_volume(&pred, 3)?;
    let mut failures = Vec::new();
    let mut ratios = Vec::new();
    for &il in &pred.geometry.inlines {
        let before = time_roughness(&extract_section(&pred, il)?.values);
        let after = time_roughness(&extract_section(&filtered, il)?.values);
        ratios.push(after / before);
        if !(after < before) {
            failures.push(il);
        }
    }
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    Ok((
        failures.is_empty(),
        format!(
            "roughness decreased on {}/{} inlines (worst after/before ratio {worst:.3})",
            ratios.len() - failures.len(),
            ratios.len()
        ),
    ))
}

fn run_one(id: u8, s: &mut Suite) -> Verdict {
    match id {
        1 => blind_quality(s),
        2 => mann_beats_single(s),
        3 => gradient_check(s),
        4 => monotone_histories(s),
        5 => spline_cubics(s),
        6 => filter_oracle(s),
        7 => normalization(s),
        8 => capacity_guard(s),
        9 => determinism(s),
        10 => smoothing(s),
        _ => Err(Error::InvalidConfig(format!("no acceptance criterion {id}"))),
    }
}

/// Runs the selected criteria (all when `only` is empty) and returns their
/// outcomes in criterion order. Monotonicity is judged last so it covers
/// every training run of the session.
pub fn run(only: &[u8]) -> Result<Vec<Outcome>> {
    if let Some(bad) = only.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(Error::InvalidConfig(format!("no acceptance criterion {bad}")));
    }
    let selected: Vec<(u8, &'static str)> = CRITERIA
        .iter()
        .copied()
        .filter(|(id, _)| only.is_empty() || only.contains(id))
        .collect();
    let mut order: Vec<(u8, &'static str)> = selected.iter().copied().filter(|c| c.0 != 4).collect();
    order.extend(selected.iter().copied().filter(|c| c.0 == 4));

    let mut suite = Suite::new();
    let mut outcomes: Vec<Outcome> = order
        .into_iter()
        .map(|(id, title)| {
            let start = Instant::now();
            let (passed, detail) = match run_one(id, &mut suite) {
                Ok(v) => v,
                Err(e) => (false, format!("error: {e}")),
            };
            Outcome {
                id,
                title,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    outcomes.sort_by_key(|o| o.id);
    Ok(outcomes)
}
