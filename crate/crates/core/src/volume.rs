//! Volumetric prediction, NaN-aware moving-average smoothing, and inline sections.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::formats::{create, field_f64, field_i64, finish, for_each_row, open, GridBuilder};
use crate::ingest::{is_null, AttributeVolume, VolumeGeometry, NULL_SENTINEL};
use crate::mann::{fmt_f64, MannModel};
use crate::preprocess::Zone;

pub const HORIZON_HEADER: &[&str] = &["inline", "xline", "top1_t_ms", "top2_t_ms"];
pub const SAND_VOLUME_HEADER: &[&str] = &["inline", "xline", "t_ms", "sand_fraction"];

/// Default moving-average window.
pub const DEFAULT_WINDOW: usize = 3;

/// Top1/Top2 times per trace; `None` where the horizons are unpicked.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonGrid {
    pub inlines: Vec<i64>,
    pub xlines: Vec<i64>,
    pub picks: Vec<Option<(f64, f64)>>,
}

impl HorizonGrid {
    pub fn new(inlines: Vec<i64>, xlines: Vec<i64>, picks: Vec<Option<(f64, f64)>>) -> Result<Self> {
        if picks.len() != inlines.len() * xlines.len() {
            return Err(Error::Geometry(format!(
                "{} horizon picks for a {} x {} grid",
                picks.len(),
                inlines.len(),
                xlines.len()
            )));
        }
        if let Some((t1, t2)) = picks.iter().flatten().find(|(t1, t2)| !(t1 < t2)) {
            return Err(Error::InvalidTops(format!("horizon Top1 {t1} not above Top2 {t2}")));
        }
        Ok(Self {
            inlines,
            xlines,
            picks,
        })
    }

    pub fn pick(&self, inline: i64, xline: i64) -> Option<(f64, f64)> {
        let ii = self.inlines.binary_search(&inline).ok()?;
        let xi = self.xlines.binary_search(&xline).ok()?;
        self.picks[ii * self.xlines.len() + xi]
    }

    fn check_against(&self, g: &VolumeGeometry) -> Result<()> {
        if self.inlines != g.inlines || self.xlines != g.xlines {
            return Err(Error::Geometry(
                "horizon grid does not cover the volume's traces".into(),
            ));
        }
        let (lo, hi) = (g.t0, g.t_last());
        if let Some((t1, t2)) = self
            .picks
            .iter()
            .flatten()
            .find(|(t1, t2)| !(lo <= *t1 && t1 < t2 && *t2 <= hi))
        {
            return Err(Error::InvalidTops(format!(
                "horizon pair ({t1}, {t2}) outside the volume's time range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Predicted sand fraction on the geometry of the source attribute volume.
#[derive(Debug, Clone, PartialEq)]
pub struct SandFractionVolume {
    pub geometry: VolumeGeometry,
    /// `[0, 1]`, or NaN on traces without horizons.
    pub values: Vec<f64>,
}

impl SandFractionVolume {
    pub fn new(geometry: VolumeGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.n_voxels() {
            return Err(Error::Geometry(format!(
                "expected {} voxels, got {}",
                geometry.n_voxels(),
                values.len()
            )));
        }
        Ok(Self { geometry, values })
    }

    pub fn trace(&self, trace: usize) -> &[f64] {
        let nt = self.geometry.nt;
        &self.values[trace * nt..(trace + 1) * nt]
    }

    /// Values of one inline as an `xline x time` grid.
    fn inline_block(&self, ii: usize) -> &[f64] {
        let len = self.geometry.xlines.len() * self.geometry.nt;
        &self.values[ii * len..(ii + 1) * len]
    }

    /// Bitwise comparison that treats NaN as equal to NaN.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.geometry == other.geometry
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// How trace work is scheduled. Both produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

fn predict_trace(model: &MannModel, vol: &AttributeVolume, hz: &HorizonGrid, trace: usize, out: &mut [f64]) {
    match hz.picks[trace] {
        None => out.fill(f64::NAN),
        Some((t1, t2)) => {
            let g = &vol.geometry;
            for (k, (x, slot)) in vol.trace(trace).iter().zip(out.iter_mut()).enumerate() {
                *slot = model.predict(Zone::of(g.time(k), t1, t2), x);
            }
        }
    }
}

/// Routes every voxel to its zone network by the trace's horizons and predicts
/// at the volume's native sampling.
pub fn predict_volume(model: &MannModel, vol: &AttributeVolume, hz: &HorizonGrid) -> Result<SandFractionVolume> {
    predict_volume_with(model, vol, hz, Execution::Parallel)
}

pub fn predict_volume_with(
    model: &MannModel,
    vol: &AttributeVolume,
    hz: &HorizonGrid,
    exec: Execution,
) -> Result<SandFractionVolume> {
    let g = &vol.geometry;
    hz.check_against(g)?;
    let mut values = vec![0.0; g.n_voxels()];
    match exec {
        Execution::Serial => values
            .chunks_mut(g.nt)
            .enumerate()
            .for_each(|(tr, out)| predict_trace(model, vol, hz, tr, out)),
        Execution::Parallel => values
            .par_chunks_mut(g.nt)
            .enumerate()
            .for_each(|(tr, out)| predict_trace(model, vol, hz, tr, out)),
    }
    SandFractionVolume::new(g.clone(), values)
}

/// Row-major 2D grid of values, NaN marking missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Grid2 {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Geometry(format!(
                "{} values for a {rows} x {cols} grid",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Geometry("ragged grid rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

fn check_window(w: usize) -> Result<()> {
    if w == 0 || w % 2 == 0 {
        return Err(Error::InvalidWindow(w));
    }
    Ok(())
}

fn filter_into(input: &[f64], rows: usize, cols: usize, w: usize, out: &mut [f64]) {
    let r = w / 2;
    for j in 0..rows {
        let (j0, j1) = (j.saturating_sub(r), (j + r).min(rows - 1));
        for k in 0..cols {
            let (k0, k1) = (k.saturating_sub(r), (k + r).min(cols - 1));
            let mut sum = 0.0;
            let mut count = 0usize;
            for jj in j0..=j1 {
                for &v in &input[jj * cols + k0..=jj * cols + k1] {
                    if !v.is_nan() {
                        sum += v;
                        count += 1;
                    }
                }
            }
            out[j * cols + k] = if count == 0 { f64::NAN } else { sum / count as f64 };
        }
    }
}

/// `w x w` moving average that skips NaN cells and crops at the edges.
///
/// Every output reads only the original input. Cells whose whole window is
/// NaN stay NaN. Window sums accumulate in row-major order.
pub fn moving_average_filter(grid: &Grid2, w: usize) -> Result<Grid2> {
    check_window(w)?;
    let mut out = vec![0.0; grid.data.len()];
    if !grid.data.is_empty() {
        filter_into(&grid.data, grid.rows, grid.cols, w, &mut out);
    }
    Grid2::new(grid.rows, grid.cols, out)
}

/// Applies [`moving_average_filter`] independently to every inline section
/// (window over xline and time).
pub fn filter_volume(vol: &SandFractionVolume, w: usize) -> Result<SandFractionVolume> {
    check_window(w)?;
    let g = &vol.geometry;
    let (nx, nt) = (g.xlines.len(), g.nt);
    let mut values = vec![0.0; vol.values.len()];
    values
        .par_chunks_mut(nx * nt)
        .enumerate()
        .for_each(|(ii, out)| filter_into(vol.inline_block(ii), nx, nt, w, out));
    SandFractionVolume::new(g.clone(), values)
}

/// Mean absolute second difference along time over all finite triples,
/// a roughness measure for one section.
pub fn time_roughness(section: &Grid2) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for j in 0..section.rows {
        let row = &section.data[j * section.cols..(j + 1) * section.cols];
        for t in row.windows(3) {
            let d = t[2] - 2.0 * t[1] + t[0];
            if d.is_finite() {
                sum += d.abs();
                n += 1;
            }
        }
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// One inline of a sand-fraction volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub inline: i64,
    pub xlines: Vec<i64>,
    pub times: Vec<f64>,
    /// `xline x time`.
    pub values: Grid2,
}

pub fn extract_section(vol: &SandFractionVolume, inline: i64) -> Result<Section> {
    let g = &vol.geometry;
    let ii = g.inline_pos(inline).ok_or(Error::MissingInline(inline))?;
    Ok(Section {
        inline,
        xlines: g.xlines.clone(),
        times: g.times(),
        values: Grid2::new(g.xlines.len(), g.nt, vol.inline_block(ii).to_vec())?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionFormat {
    Csv,
    Pgm,
}

impl std::str::FromStr for SectionFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SectionFormat::Csv),
            "pgm" => Ok(SectionFormat::Pgm),
            other => Err(Error::InvalidConfig(format!("unknown section format '{other}'"))),
        }
    }
}

pub fn write_section(section: &Section, path: &Path, format: SectionFormat) -> Result<()> {
    match format {
        SectionFormat::Csv => write_section_csv(section, path),
        SectionFormat::Pgm => write_section_pgm(section, path),
    }
}

/// Grid CSV: header `xline,<t_0>,<t_1>,...`, then one row per xline.
pub fn write_section_csv(section: &Section, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let header: Vec<String> = std::iter::once("xline".to_string())
        .chain(section.times.iter().map(|t| t.to_string()))
        .collect();
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for (j, xl) in section.xlines.iter().enumerate() {
        write!(w, "{xl}").map_err(io)?;
        for k in 0..section.values.cols {
            write!(w, ",{}", fmt_f64(section.values.get(j, k))).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    finish(path, w)
}

pub fn read_section_csv(path: &Path, inline: i64) -> Result<Section> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "empty section file"))?;
    let mut cols = header.split(',');
    if cols.next() != Some("xline") {
        return Err(Error::parse(1, "section header must start with 'xline'"));
    }
    let times = cols
        .map(|c| c.parse::<f64>().map_err(|_| Error::parse(1, format!("bad time '{c}'"))))
        .collect::<Result<Vec<_>>>()?;
    let mut xlines = Vec::new();
    let mut data = Vec::new();
    for (i, line) in lines.enumerate() {
        let lno = i as u64 + 2;
        let mut f = line.split(',');
        let xl = f
            .next()
            .and_then(|s| s.parse::<i64>().ok())
            .ok_or_else(|| Error::parse(lno, "bad xline"))?;
        xlines.push(xl);
        let row = f
            .map(|c| c.parse::<f64>().map_err(|_| Error::parse(lno, format!("bad value '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != times.len() {
            return Err(Error::parse(lno, "row length does not match header"));
        }
        data.extend(row);
    }
    Ok(Section {
        inline,
        values: Grid2::new(xlines.len(), times.len(), data)?,
        xlines,
        times,
    })
}

/// 8-bit ASCII PGM (P2, maxval 255): one image row per time sample, one
/// column per xline. `[0, 1]` maps linearly to `[0, 255]` and NaN to 0. The
/// mapping is recorded in `<path>.meta.txt`.
pub fn write_section_pgm(section: &Section, path: &Path) -> Result<()> {
    let g = &section.values;
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "P2").map_err(io)?;
    writeln!(w, "# inline {}", section.inline).map_err(io)?;
    writeln!(w, "{} {}", g.rows, g.cols).map_err(io)?;
    writeln!(w, "255").map_err(io)?;
    for k in 0..g.cols {
        let row: Vec<String> = (0..g.rows)
            .map(|j| gray_level(g.get(j, k)).to_string())
            .collect();
        writeln!(w, "{}", row.join(" ")).map_err(io)?;
    }
    finish(path, w)?;

    let finite: Vec<f64> = g.data.iter().copied().filter(|v| !v.is_nan()).collect();
    let range = if finite.is_empty() {
        "data range: degenerate (no finite values; image is all zero)".to_string()
    } else {
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        format!("data range: [{lo}, {hi}]")
    };
    let meta_path = {
        let mut s = path.as_os_str().to_owned();
        s.push(".meta.txt");
        std::path::PathBuf::from(s)
    };
    let meta = format!(
        "inline: {}\nwidth: {} xlines ({} .. {})\nheight: {} samples ({} .. {} ms)\nmapping: gray = round(255 * clamp(sand_fraction, 0, 1)); NaN -> 0\n{range}\n",
        section.inline,
        g.rows,
        section.xlines.first().copied().unwrap_or_default(),
        section.xlines.last().copied().unwrap_or_default(),
        g.cols,
        section.times.first().copied().unwrap_or(f64::NAN),
        section.times.last().copied().unwrap_or(f64::NAN),
    );
    std::fs::write(&meta_path, meta).map_err(|e| Error::io(meta_path, e))
}

fn gray_level(v: f64) -> u8 {
    if v.is_nan() {
        0
    } else {
        (255.0 * v.clamp(0.0, 1.0)).round() as u8
    }
}

// ---- file formats ----

pub fn parse_horizons<R: Read>(source: R) -> Result<HorizonGrid> {
    let mut rows: Vec<(i64, i64, Option<(f64, f64)>, u64)> = Vec::new();
    for_each_row(source, HORIZON_HEADER, |line, rec| {
        let il = field_i64(rec, 0, line, "inline")?;
        let xl = field_i64(rec, 1, line, "xline")?;
        let t1 = field_f64(rec, 2, line, "top1_t_ms")?;
        let t2 = field_f64(rec, 3, line, "top2_t_ms")?;
        let pick = if is_null(t1) || is_null(t2) || t1.is_nan() || t2.is_nan() {
            None
        } else {
            Some((t1, t2))
        };
        rows.push((il, xl, pick, line));
        Ok(())
    })?;
    let mut inlines: Vec<i64> = rows.iter().map(|r| r.0).collect();
    inlines.sort_unstable();
    inlines.dedup();
    let mut xlines: Vec<i64> = rows.iter().map(|r| r.1).collect();
    xlines.sort_unstable();
    xlines.dedup();
    let nx = xlines.len();
    let mut picks: Vec<Option<Option<(f64, f64)>>> = vec![None; inlines.len() * nx];
    for (il, xl, pick, line) in rows {
        let idx = inlines.binary_search(&il).expect("collected") * nx
            + xlines.binary_search(&xl).expect("collected");
        if picks[idx].replace(pick).is_some() {
            return Err(Error::Geometry(format!("duplicate horizon pick at line {line}")));
        }
    }
    let picks = picks
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Geometry("horizon grid is incomplete".into()))?;
    HorizonGrid::new(inlines, xlines, picks)
}

pub fn load_horizons(path: &Path) -> Result<HorizonGrid> {
    parse_horizons(std::io::BufReader::new(open(path)?))
}

pub fn write_horizons(path: &Path, hz: &HorizonGrid) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", HORIZON_HEADER.join(",")).map_err(io)?;
    for (ii, il) in hz.inlines.iter().enumerate() {
        for (xi, xl) in hz.xlines.iter().enumerate() {
            let (t1, t2) = hz.picks[ii * hz.xlines.len() + xi].unwrap_or((NULL_SENTINEL, NULL_SENTINEL));
            writeln!(w, "{il},{xl},{t1},{t2}").map_err(io)?;
        }
    }
    finish(path, w)
}

pub fn parse_sand_volume<R: Read>(source: R) -> Result<SandFractionVolume> {
    let mut grid = GridBuilder::new();
    for_each_row(source, SAND_VOLUME_HEADER, |line, rec| {
        let il = field_i64(rec, 0, line, "inline")?;
        let xl = field_i64(rec, 1, line, "xline")?;
        let t = field_f64(rec, 2, line, "t_ms")?;
        let v = field_f64(rec, 3, line, "sand_fraction")?;
        grid.push(il, xl, t, v, line);
        Ok(())
    })?;
    let (geometry, values) = grid.build()?;
    SandFractionVolume::new(geometry, values)
}

pub fn load_sand_volume(path: &Path) -> Result<SandFractionVolume> {
    parse_sand_volume(std::io::BufReader::new(open(path)?))
}

pub fn write_sand_volume(path: &Path, vol: &SandFractionVolume) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", SAND_VOLUME_HEADER.join(",")).map_err(io)?;
    let g = &vol.geometry;
    for trace in 0..g.n_traces() {
        let (il, xl) = g.labels(trace);
        for (k, v) in vol.trace(trace).iter().enumerate() {
            writeln!(w, "{il},{xl},{},{}", g.time(k), fmt_f64(*v)).map_err(io)?;
        }
    }
    finish(path, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mann::ZoneModel;
    use crate::nn::{MlpModel, StopReason, TrainTrace};
    use crate::preprocess::{MinMaxStats, ZScoreStats};

    fn grid(rows: &[&[f64]]) -> Grid2 {
        Grid2::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn worked_filter_examples() {
        let out = moving_average_filter(&grid(&[&[0., 0., 0.], &[0., 9., 0.], &[0., 0., 0.]]), 3).unwrap();
        assert_eq!(out.get(1, 1), 1.0);
        assert_eq!(out.get(0, 0), 2.25);

        let out = moving_average_filter(&grid(&[&[f64::NAN, 2.], &[2., 2.]]), 3).unwrap();
        assert_eq!(out.get(0, 0), 2.0);

        let constant = grid(&[&[5.; 4], &[5.; 4], &[5.; 4]]);
        for w in [1, 3, 5, 7] {
            assert!(moving_average_filter(&constant, w).unwrap().data.iter().all(|&v| v == 5.0));
        }
    }

    #[test]
    fn window_validation_and_identity() {
        let g = grid(&[&[1., f64::NAN], &[3., 4.]]);
        for w in [0, 2, 4] {
            assert!(matches!(moving_average_filter(&g, w), Err(Error::InvalidWindow(_))));
        }
        let id = moving_average_filter(&g, 1).unwrap();
        assert_eq!(id.get(0, 0), 1.0);
        assert!(id.get(0, 1).is_nan());
        let all_nan = grid(&[&[f64::NAN; 3], &[f64::NAN; 3]]);
        assert!(moving_average_filter(&all_nan, 3).unwrap().data.iter().all(|v| v.is_nan()));
    }

    fn zero_model() -> MannModel {
        let zone = |lo: f64| ZoneModel {
            net: MlpModel::zeros(1),
            zscore: ZScoreStats {
                mean: [0.0; 3],
                std: [1.0; 3],
            },
            minmax: MinMaxStats::new(lo, lo + 0.3).unwrap(),
            trace: TrainTrace {
                rmse_history: vec![],
                epochs_run: 0,
                stop_reason: StopReason::MaxEpoch,
                wall_time: 0.0,
            },
        };
        MannModel {
            zones: [zone(0.0), zone(0.3), zone(0.6)],
            blind_well_id: "W".into(),
            seed: 0,
        }
    }

    fn small_volume() -> (AttributeVolume, HorizonGrid) {
        let g = VolumeGeometry::new(vec![1, 2, 3], vec![10, 11], 100.0, 2.0, 20).unwrap();
        let data = (0..g.n_voxels()).map(|i| [i as f64, 1.0, -1.0]).collect();
        let mut picks = vec![Some((110.0, 125.0)); 6];
        picks[3] = None;
        let hz = HorizonGrid::new(vec![1, 2, 3], vec![10, 11], picks).unwrap();
        (AttributeVolume::new(g, data).unwrap(), hz)
    }

    #[test]
    fn volume_prediction_routes_by_horizon() {
        let (vol, hz) = small_volume();
        let out = predict_volume(&zero_model(), &vol, &hz).unwrap();
        assert_eq!(out.values.len(), 6 * 20);
        for tr in 0..6 {
            let v = out.trace(tr);
            if tr == 3 {
                assert!(v.iter().all(|x| x.is_nan()));
                continue;
            }
            for (k, &x) in v.iter().enumerate() {
                let t = 100.0 + 2.0 * k as f64;
                // logsig(0) = 0.5 sits mid-range of each zone's [lo, lo + 0.3]
                let lo = match Zone::of(t, 110.0, 125.0) {
                    Zone::Z1 => 0.0,
                    Zone::Z2 => 0.3,
                    Zone::Z3 => 0.6,
                };
                assert!((x - (lo + 0.15)).abs() < 1e-12);
            }
        }
        let serial = predict_volume_with(&zero_model(), &vol, &hz, Execution::Serial).unwrap();
        assert!(serial.bitwise_eq(&out));
    }

    #[test]
    fn volume_prediction_checks_geometry() {
        let (vol, _) = small_volume();
        let hz = HorizonGrid::new(vec![1, 2], vec![10, 11], vec![None; 4]).unwrap();
        assert!(matches!(predict_volume(&zero_model(), &vol, &hz), Err(Error::Geometry(_))));
        let late = HorizonGrid::new(vec![1, 2, 3], vec![10, 11], vec![Some((110.0, 500.0)); 6]).unwrap();
        assert!(predict_volume(&zero_model(), &vol, &late).is_err());
    }

    #[test]
    fn filter_volume_is_per_inline() {
        let (vol, hz) = small_volume();
        let pred = predict_volume(&zero_model(), &vol, &hz).unwrap();
        let filtered = filter_volume(&pred, 3).unwrap();
        for il in [1, 2, 3] {
            let s = extract_section(&pred, il).unwrap();
            let direct = moving_average_filter(&s.values, 3).unwrap();
            let via = extract_section(&filtered, il).unwrap();
            assert!(direct.data.iter().zip(&via.values.data).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
        let same = filter_volume(&pred, 1).unwrap();
        assert!(same.bitwise_eq(&pred));
    }

    #[test]
    fn sections_and_missing_inline() {
        let (vol, hz) = small_volume();
        let pred = predict_volume(&zero_model(), &vol, &hz).unwrap();
        let s = extract_section(&pred, 2).unwrap();
        assert_eq!((s.values.rows, s.values.cols), (2, 20));
        assert!(matches!(extract_section(&pred, 9), Err(Error::MissingInline(9))));
    }

    #[test]
    fn section_files() {
        let dir = tempfile::tempdir().unwrap();
        let (vol, hz) = small_volume();
        let pred = predict_volume(&zero_model(), &vol, &hz).unwrap();
        let s = extract_section(&pred, 2).unwrap();
        let csv = dir.path().join("s.csv");
        write_section(&s, &csv, SectionFormat::Csv).unwrap();
        let back = read_section_csv(&csv, 2).unwrap();
        assert_eq!(back.xlines, s.xlines);
        assert_eq!(back.times, s.times);
        assert!(back.values.data.iter().zip(&s.values.data).all(|(a, b)| a.to_bits() == b.to_bits()));

        let nan_section = Section {
            inline: 7,
            xlines: vec![1, 2],
            times: vec![0.0, 2.0, 4.0],
            values: Grid2::new(2, 3, vec![f64::NAN; 6]).unwrap(),
        };
        let pgm = dir.path().join("nan.pgm");
        write_section(&nan_section, &pgm, SectionFormat::Pgm).unwrap();
        let text = std::fs::read_to_string(&pgm).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("P2"));
        let body: Vec<&str> = lines.skip(3).flat_map(|l| l.split_whitespace()).collect();
        assert_eq!(body.len(), 6);
        assert!(body.iter().all(|v| *v == "0"));
        let meta = std::fs::read_to_string(dir.path().join("nan.pgm.meta.txt")).unwrap();
        assert!(meta.contains("degenerate"));
    }

    #[test]
    fn volume_and_horizon_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (vol, hz) = small_volume();
        let pred = predict_volume(&zero_model(), &vol, &hz).unwrap();
        let p = dir.path().join("sf.csv");
        write_sand_volume(&p, &pred).unwrap();
        assert!(load_sand_volume(&p).unwrap().bitwise_eq(&pred));
        let h = dir.path().join("hz.csv");
        write_horizons(&h, &hz).unwrap();
        assert_eq!(load_horizons(&h).unwrap(), hz);
    }
}
