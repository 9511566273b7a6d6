//! Deterministic synthetic field: smooth attribute volumes, two undulating
//! horizons, and a sand fraction that follows a different nonlinear law in
//! each zone. Wells sample the same truth, so every pipeline stage can be
//! checked against a known answer.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::formats::{
    load_checkshots, load_locations, load_tops, load_volume, load_well_logs, write_checkshots,
    write_locations, write_tops, write_volume, write_well_logs,
};
use crate::ingest::{
    AttributeVolume, Checkshot, LogSample, RawWellLog, VolumeGeometry, WellLocation, WellTops,
    INTEGRATED_DT, N_ATTRIBUTES,
};
use crate::nn::{logsig, n_params, CAPACITY_RATIO};
use crate::preprocess::{ZScoreStats, Zone};
use crate::volume::{load_horizons, write_horizons, write_sand_volume, HorizonGrid, SandFractionVolume};

pub const WELL_LOGS_FILE: &str = "well_logs.csv";
pub const CHECKSHOTS_FILE: &str = "checkshots.csv";
pub const LOCATIONS_FILE: &str = "locations.csv";
pub const TOPS_FILE: &str = "tops.csv";
pub const ATTRIBUTES_FILE: &str = "attributes.csv";
pub const HORIZONS_FILE: &str = "horizons.csv";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Depth per unit two-way time of the constant-velocity checkshots, m/ms.
pub const MD_PER_MS: f64 = 0.75;

/// Largest hidden size the default grid must be able to train in every zone.
const CAPACITY_HIDDEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_wells: usize,
    pub n_inlines: usize,
    pub n_xlines: usize,
    pub nt: usize,
    pub dt: f64,
    pub t0: f64,
    pub first_inline: i64,
    pub first_xline: i64,
    /// Standard deviation of the additive Gaussian noise on sand fraction.
    pub noise_sigma: f64,
    pub n_harmonics: usize,
    /// Mean Top1 and Top2 position as a fraction of the time span.
    pub top1_frac: f64,
    pub top2_frac: f64,
    /// Peak deviation of each horizon from its mean, ms.
    pub horizon_relief_ms: f64,
    /// Minimum Euclidean distance between wells, in grid cells.
    pub min_well_spacing: f64,
    /// Well log sample interval, ms. Must be a multiple of 0.25 ms.
    pub log_dt: f64,
    /// Fraction of off-grid log samples replaced by the null value.
    pub null_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_wells: 8,
            n_inlines: 40,
            n_xlines: 40,
            nt: 300,
            dt: 2.0,
            t0: 800.0,
            first_inline: 100,
            first_xline: 200,
            noise_sigma: 0.02,
            n_harmonics: 8,
            top1_frac: 0.3,
            top2_frac: 0.65,
            horizon_relief_ms: 10.0,
            min_well_spacing: 5.0,
            log_dt: 0.5,
            null_fraction: 0.02,
        }
    }
}

/// Log coverage bounds as fractions of the time span.
const LOG_START: (f64, f64) = (0.1, 0.2);
const LOG_END: (f64, f64) = (0.8, 0.9);

impl SynthConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn span(&self) -> f64 {
        (self.nt.saturating_sub(1)) as f64 * self.dt
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_wells < 2 {
            return bad(format!("n_wells must be at least 2, got {}", self.n_wells));
        }
        if self.n_inlines == 0 || self.n_xlines == 0 || self.nt < 8 {
            return bad("grid needs at least 1 x 1 traces and 8 samples".into());
        }
        let quarter = |v: f64| v > 0.0 && (v * 4.0).fract() == 0.0;
        if !quarter(self.dt) || !quarter(self.log_dt) || !self.t0.is_finite() || (self.t0 * 4.0).fract() != 0.0 {
            return bad("t0, dt and log_dt must be multiples of 0.25 ms".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if self.n_harmonics == 0 {
            return bad("n_harmonics must be positive".into());
        }
        if !(0.0..1.0).contains(&self.null_fraction) {
            return bad(format!("null_fraction must lie in [0, 1), got {}", self.null_fraction));
        }
        if !(self.min_well_spacing >= 0.0) {
            return bad("min_well_spacing must be non-negative".into());
        }
        let span = self.span();
        let relief = self.horizon_relief_ms;
        let top1 = (self.top1_frac * span - relief, self.top1_frac * span + relief);
        let top2 = (self.top2_frac * span - relief, self.top2_frac * span + relief);
        if !(relief >= 0.0 && top1.0 > LOG_START.1 * span && top1.1 < top2.0 && top2.1 < LOG_END.0 * span) {
            return bad("horizons must lie strictly inside the logged interval and not cross".into());
        }
        let zone_ms = [
            top1.0 - LOG_START.1 * span,
            top2.0 - top1.1,
            LOG_END.0 * span - top2.1,
        ];
        let per_well = zone_ms.iter().copied().fold(f64::INFINITY, f64::min) / INTEGRATED_DT;
        let needed = CAPACITY_RATIO * n_params(CAPACITY_HIDDEN);
        if per_well * ((self.n_wells - 1) as f64) < needed as f64 {
            return bad(format!(
                "grid too small: the thinnest zone yields about {} training patterns, need {needed}",
                (per_well * (self.n_wells - 1) as f64) as usize
            ));
        }
        Ok(())
    }
}

/// Sum of cosines over (inline index, xline index, time) with amplitudes
/// normalized so the field lies in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
struct Harmonics {
    /// `(amplitude, k_inline, k_xline, k_time, phase)`.
    terms: Vec<[f64; 5]>,
}

impl Harmonics {
    fn random(rng: &mut ChaCha8Rng, k: usize, cycles: [f64; 2], grid: [usize; 2], wavelength_ms: Option<(f64, f64)>) -> Self {
        let mut terms: Vec<[f64; 5]> = (0..k)
            .map(|_| {
                let c = rng.gen_range(0.2..1.0);
                let ki = rng.gen_range(-1.0..1.0) * 2.0 * PI * cycles[0] / grid[0].max(1) as f64;
                let kx = rng.gen_range(-1.0..1.0) * 2.0 * PI * cycles[1] / grid[1].max(1) as f64;
                let kt = match wavelength_ms {
                    Some((lo, hi)) => 2.0 * PI / rng.gen_range(lo..hi),
                    None => 0.0,
                };
                let phase = rng.gen_range(0.0..2.0 * PI);
                [c, ki, kx, kt, phase]
            })
            .collect();
        let total: f64 = terms.iter().map(|t| t[0]).sum();
        terms.iter_mut().for_each(|t| t[0] /= total);
        Self { terms }
    }

    fn eval(&self, i: f64, x: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|[c, ki, kx, kt, ph]| c * (ki * i + kx * x + kt * t + ph).cos())
            .sum()
    }
}

/// Realistic value ranges, as `center + half_width * g` for `g` in `[-1, 1]`.
const ATTRIBUTE_RANGES: [(f64, f64); N_ATTRIBUTES] = [(8.0e6, 4.0e6), (0.5, 0.5), (32.5, 27.5)];

/// Zone-specific generating law on per-zone standardized attributes.
pub fn zone_law(zone: Zone, u: &[f64; N_ATTRIBUTES]) -> f64 {
    let [u1, u2, u3] = *u;
    match zone {
        Zone::Z1 => logsig(1.2 * u1 - 0.8 * u2 + 0.5 * u3),
        Zone::Z2 => logsig(0.9 * u1 * u1 - 0.6 * u1 * u2 + 0.4 * u3 - 0.3),
        Zone::Z3 => logsig(0.7 * (2.0 * u1).sin() + 0.8 * u3 - 0.5 * u2),
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5AD_CA57, |h, &p| splitmix(h ^ p))
}

/// Random generator for one purpose, independent of every other draw.
fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(key(&[seed, tag]))
}

/// The exact generating model behind a field.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthModel {
    seed: u64,
    noise_sigma: f64,
    t0: f64,
    attributes: [Harmonics; N_ATTRIBUTES],
    /// Standardization of the attributes inside each zone, over the whole volume.
    pub zone_stats: [ZScoreStats; 3],
}

impl TruthModel {
    /// Attribute values at fractional grid position and absolute time.
    pub fn attributes(&self, ii: f64, xi: f64, t: f64) -> [f64; N_ATTRIBUTES] {
        std::array::from_fn(|a| {
            let (c, w) = ATTRIBUTE_RANGES[a];
            c + w * self.attributes[a].eval(ii, xi, t - self.t0)
        })
    }

    /// Noise-free sand fraction in `[0, 1]`.
    pub fn clean(&self, zone: Zone, x: &[f64; N_ATTRIBUTES]) -> f64 {
        zone_law(zone, &self.zone_stats[zone.index()].apply(x))
    }

    /// Noise draw keyed by trace labels and the quarter-millisecond time index.
    fn noise(&self, inline: i64, xline: i64, t: f64) -> f64 {
        if self.noise_sigma == 0.0 {
            return 0.0;
        }
        let tq = ((t - self.t0) * 4.0).round() as i64;
        let mut rng = ChaCha8Rng::seed_from_u64(key(&[self.seed, inline as u64, xline as u64, tq as u64]));
        Normal::new(0.0, self.noise_sigma)
            .expect("validated sigma")
            .sample(&mut rng)
    }

    /// Observed sand fraction: clean value plus noise, clamped to `[0, 1]`.
    pub fn observed(&self, zone: Zone, x: &[f64; N_ATTRIBUTES], inline: i64, xline: i64, t: f64) -> f64 {
        (self.clean(zone, x) + self.noise(inline, xline, t)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthField {
    pub config: SynthConfig,
    pub truth_model: TruthModel,
    pub volume: AttributeVolume,
    pub horizons: HorizonGrid,
    pub truth: SandFractionVolume,
    pub logs: Vec<RawWellLog>,
    pub checkshots: Vec<Checkshot>,
    pub locations: Vec<WellLocation>,
    pub tops: Vec<WellTops>,
}

impl SynthField {
    pub fn well_ids(&self) -> Vec<String> {
        self.logs.iter().map(|l| l.well_id.clone()).collect()
    }
}

pub fn well_id(i: usize) -> String {
    format!("W{}", i + 1)
}

fn place_wells(config: &SynthConfig) -> Result<Vec<(usize, usize)>> {
    let mut rng = stream(config.seed, 4);
    let mut nodes: Vec<(usize, usize)> = Vec::with_capacity(config.n_wells);
    let max_attempts = 10_000 * config.n_wells;
    let mut attempts = 0;
    while nodes.len() < config.n_wells {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::InvalidConfig(format!(
                "grid {} x {} too small to place {} wells at least {} cells apart",
                config.n_inlines, config.n_xlines, config.n_wells, config.min_well_spacing
            )));
        }
        let cand = (rng.gen_range(0..config.n_inlines), rng.gen_range(0..config.n_xlines));
        let far = nodes.iter().all(|&(i, x)| {
            let di = i as f64 - cand.0 as f64;
            let dx = x as f64 - cand.1 as f64;
            (di * di + dx * dx).sqrt() >= config.min_well_spacing
        });
        if far {
            nodes.push(cand);
        }
    }
    Ok(nodes)
}

/// Builds the whole field from its configuration. Pure in `config`.
pub fn generate(config: &SynthConfig) -> Result<SynthField> {
    config.validate()?;
    let inlines: Vec<i64> = (0..config.n_inlines as i64).map(|i| config.first_inline + i).collect();
    let xlines: Vec<i64> = (0..config.n_xlines as i64).map(|i| config.first_xline + i).collect();
    let geometry = VolumeGeometry::new(inlines.clone(), xlines.clone(), config.t0, config.dt, config.nt)?;
    let (ni, nx, nt) = (config.n_inlines, config.n_xlines, config.nt);
    let grid = [ni, nx];

    let attributes: [Harmonics; N_ATTRIBUTES] = std::array::from_fn(|a| {
        Harmonics::random(&mut stream(config.seed, 1 + a as u64), config.n_harmonics, [3.0, 3.0], grid, Some((40.0, 200.0)))
    });
    let surfaces: [Harmonics; 2] =
        std::array::from_fn(|h| Harmonics::random(&mut stream(config.seed, 10 + h as u64), 4, [1.5, 1.5], grid, None));

    let span = config.span();
    let picks: Vec<Option<(f64, f64)>> = (0..ni * nx)
        .map(|tr| {
            let (ii, xi) = ((tr / nx) as f64, (tr % nx) as f64);
            let top1 = config.t0 + config.top1_frac * span + config.horizon_relief_ms * surfaces[0].eval(ii, xi, 0.0);
            let top2 = config.t0 + config.top2_frac * span + config.horizon_relief_ms * surfaces[1].eval(ii, xi, 0.0);
            Some((top1, top2))
        })
        .collect();
    let horizons = HorizonGrid::new(inlines.clone(), xlines.clone(), picks)?;

    let mut model = TruthModel {
        seed: config.seed,
        noise_sigma: config.noise_sigma,
        t0: config.t0,
        attributes,
        zone_stats: [ZScoreStats {
            mean: [0.0; N_ATTRIBUTES],
            std: [1.0; N_ATTRIBUTES],
        }; 3],
    };

    let data: Vec<[f64; N_ATTRIBUTES]> = (0..ni * nx)
        .into_par_iter()
        .flat_map_iter(|tr| {
            let (ii, xi) = ((tr / nx) as f64, (tr % nx) as f64);
            let model = &model;
            let g = &geometry;
            (0..nt).map(move |k| model.attributes(ii, xi, g.time(k)))
        })
        .collect();
    let volume = AttributeVolume::new(geometry.clone(), data)?;
    let zones: Vec<Zone> = (0..ni * nx * nt)
        .map(|v| {
            let (t1, t2) = horizons.picks[v / nt].expect("synthetic horizons are complete");
            Zone::of(geometry.time(v % nt), t1, t2)
        })
        .collect();
    model.zone_stats = zone_statistics(&volume.data, &zones)?;

    let values: Vec<f64> = (0..ni * nx * nt)
        .into_par_iter()
        .map(|v| {
            let (il, xl) = geometry.labels(v / nt);
            model.observed(zones[v], &volume.data[v], il, xl, geometry.time(v % nt))
        })
        .collect();
    let truth = SandFractionVolume::new(geometry.clone(), values)?;

    let nodes = place_wells(config)?;
    let mut span_rng = stream(config.seed, 5);
    let mut null_rng = stream(config.seed, 6);
    let steps = |frac: (f64, f64), rng: &mut ChaCha8Rng| (rng.gen_range(frac.0..frac.1) * span / config.log_dt).round() as usize;
    let last_time = config.t0 + span + 100.0;
    let mut logs = Vec::new();
    let mut checkshots = Vec::new();
    let mut locations = Vec::new();
    let mut tops = Vec::new();
    for (w, &(ii, xi)) in nodes.iter().enumerate() {
        let id = well_id(w);
        let (il, xl) = (inlines[ii], xlines[xi]);
        let (top1_t, top2_t) = horizons.picks[ii * nx + xi].expect("complete");
        let (k0, k1) = (steps(LOG_START, &mut span_rng), steps(LOG_END, &mut span_rng));
        let samples = (k0..=k1)
            .map(|k| {
                let t = config.t0 + k as f64 * config.log_dt;
                let on_grid = ((t - config.t0) / config.dt).fract() == 0.0;
                let dropped = null_rng.gen::<f64>() < config.null_fraction && !on_grid;
                let x = model.attributes(ii as f64, xi as f64, t);
                let sf = model.observed(Zone::of(t, top1_t, top2_t), &x, il, xl, t);
                LogSample {
                    md: MD_PER_MS * t,
                    sand_fraction: (!dropped).then_some(sf),
                }
            })
            .collect();
        logs.push(RawWellLog {
            well_id: id.clone(),
            samples,
        });
        let pairs = (0..)
            .map(|j| 100.0 * j as f64)
            .take_while(|&t| t <= last_time + 100.0)
            .map(|t| (MD_PER_MS * t, t))
            .collect();
        checkshots.push(Checkshot::new(id.clone(), pairs)?);
        locations.push(WellLocation {
            well_id: id.clone(),
            inline: il,
            xline: xl,
        });
        tops.push(WellTops {
            well_id: id,
            top1_t,
            top2_t,
        });
    }

    Ok(SynthField {
        config: config.clone(),
        truth_model: model,
        volume,
        horizons,
        truth,
        logs,
        checkshots,
        locations,
        tops,
    })
}

fn zone_statistics(data: &[[f64; N_ATTRIBUTES]], zones: &[Zone]) -> Result<[ZScoreStats; 3]> {
    let mut out = [ZScoreStats {
        mean: [0.0; N_ATTRIBUTES],
        std: [1.0; N_ATTRIBUTES],
    }; 3];
    for zone in Zone::ALL {
        let rows: Vec<[f64; N_ATTRIBUTES]> = data
            .iter()
            .zip(zones)
            .filter(|(_, z)| **z == zone)
            .map(|(x, _)| *x)
            .collect();
        out[zone.index()] = crate::preprocess::fit_zscore(&rows)?;
    }
    Ok(out)
}

/// SHA-256 of a file's bytes, lowercase hex.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes every input file plus the ground truth and a SHA-256 manifest.
/// Returns the paths written, manifest last.
pub fn export(field: &SynthField, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = |name: &str| dir.join(name);
    write_well_logs(&p(WELL_LOGS_FILE), &field.logs)?;
    write_checkshots(&p(CHECKSHOTS_FILE), &field.checkshots)?;
    write_locations(&p(LOCATIONS_FILE), &field.locations)?;
    write_tops(&p(TOPS_FILE), &field.tops)?;
    write_volume(&p(ATTRIBUTES_FILE), &field.volume)?;
    write_horizons(&p(HORIZONS_FILE), &field.horizons)?;
    write_sand_volume(&p(GROUND_TRUTH_FILE), &field.truth)?;

    let names = [
        WELL_LOGS_FILE,
        CHECKSHOTS_FILE,
        LOCATIONS_FILE,
        TOPS_FILE,
        ATTRIBUTES_FILE,
        HORIZONS_FILE,
        GROUND_TRUTH_FILE,
    ];
    let manifest_path = p(MANIFEST_FILE);
    let mut manifest = String::new();
    for name in names {
        manifest.push_str(&format!("{}  {name}\n", sha256_file(&p(name))?));
    }
    let mut f = std::fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    f.write_all(manifest.as_bytes())
        .map_err(|e| Error::io(&manifest_path, e))?;
    let mut written: Vec<PathBuf> = names.iter().map(|n| p(n)).collect();
    written.push(manifest_path);
    Ok(written)
}

/// The raw inputs of a field directory, as read back by the ingest stage.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldInputs {
    pub logs: Vec<RawWellLog>,
    pub checkshots: Vec<Checkshot>,
    pub locations: Vec<WellLocation>,
    pub tops: Vec<WellTops>,
    pub volume: AttributeVolume,
}

pub fn load_inputs(dir: &Path) -> Result<FieldInputs> {
    Ok(FieldInputs {
        logs: load_well_logs(&dir.join(WELL_LOGS_FILE))?,
        checkshots: load_checkshots(&dir.join(CHECKSHOTS_FILE))?,
        locations: load_locations(&dir.join(LOCATIONS_FILE))?,
        tops: load_tops(&dir.join(TOPS_FILE))?,
        volume: load_volume(&dir.join(ATTRIBUTES_FILE))?,
    })
}

pub fn load_field_horizons(dir: &Path) -> Result<HorizonGrid> {
    load_horizons(&dir.join(HORIZONS_FILE))
}
