//! Text formats for well and seismic inputs.
//!
//! Every file is UTF-8 CSV with a mandatory header row, comma separators,
//! `.` as decimal point and no quoting. Floats are written in shortest
//! round-trip form, so write/read cycles are lossless.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use csv::StringRecord;

use super::{
    is_null, AttributeVolume, Checkshot, LogSample, RawWellLog, VolumeGeometry, WellLocation,
    WellLog, WellTops, NULL_SENTINEL, N_ATTRIBUTES,
};
use crate::error::{Error, Result};

pub const WELL_LOG_HEADER: &[&str] = &["well_id", "md_m", "sand_fraction"];
pub const CHECKSHOT_HEADER: &[&str] = &["well_id", "md_m", "twt_ms"];
pub const LOCATION_HEADER: &[&str] = &["well_id", "inline", "xline"];
pub const TOPS_HEADER: &[&str] = &["well_id", "top_name", "twt_ms"];
pub const VOLUME_HEADER: &[&str] = &["inline", "xline", "t_ms", "impedance", "inst_amp", "inst_freq"];
pub const INTEGRATED_HEADER: &[&str] = &[
    "well_id",
    "t_ms",
    "impedance",
    "inst_amp",
    "inst_freq",
    "sand_fraction",
];

/// Streams the data rows of a CSV source, checking the header first.
/// The callback receives the 1-based line number and the record.
pub(crate) fn for_each_row<R: Read>(
    source: R,
    header: &[&str],
    mut f: impl FnMut(u64, &StringRecord) -> Result<()>,
) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .quoting(false)
        .flexible(true)
        .from_reader(source);
    let found = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != header {
        return Err(Error::parse(
            1,
            format!("expected header '{}', found '{}'", header.join(","), found.join(",")),
        ));
    }
    let mut record = StringRecord::new();
    loop {
        let more = rdr
            .read_record(&mut record)
            .map_err(|e| csv_error(e, 0))?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::parse(
                line,
                format!("expected {} columns, found {}", header.len(), record.len()),
            ));
        }
        f(line, &record)?;
    }
    Ok(())
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::parse(line, e.to_string())
}

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn field_f64(rec: &StringRecord, i: usize, line: u64, name: &str) -> Result<f64> {
    let raw = rec[i].trim();
    let v: f64 = raw
        .parse()
        .map_err(|_| Error::parse(line, format!("{name}: '{raw}' is not a number")))?;
    if raw.eq_ignore_ascii_case("nan") {
        return Ok(f64::NAN);
    }
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{name}: '{raw}' is not finite")));
    }
    Ok(v)
}

pub(crate) fn field_i64(rec: &StringRecord, i: usize, line: u64, name: &str) -> Result<i64> {
    let raw = rec[i].trim();
    raw.parse()
        .map_err(|_| Error::parse(line, format!("{name}: '{raw}' is not an integer")))
}

fn field_id(rec: &StringRecord, line: u64) -> Result<String> {
    let id = rec[0].trim();
    if id.is_empty() {
        return Err(Error::parse(line, "empty well_id"));
    }
    Ok(id.to_string())
}

/// Groups rows by well id, keeping wells in order of first appearance.
struct Grouper<T> {
    order: Vec<String>,
    index: HashMap<String, usize>,
    groups: Vec<Vec<T>>,
}

impl<T> Grouper<T> {
    fn new() -> Self {
        Self {
            order: Vec::new(),
            index: HashMap::new(),
            groups: Vec::new(),
        }
    }

    fn group(&mut self, id: String) -> &mut Vec<T> {
        let idx = match self.index.get(&id) {
            Some(&i) => i,
            None => {
                let i = self.groups.len();
                self.index.insert(id.clone(), i);
                self.order.push(id);
                self.groups.push(Vec::new());
                i
            }
        };
        &mut self.groups[idx]
    }

    fn into_iter(self) -> impl Iterator<Item = (String, Vec<T>)> {
        self.order.into_iter().zip(self.groups)
    }
}

pub fn parse_well_logs<R: Read>(source: R) -> Result<Vec<RawWellLog>> {
    let mut wells = Grouper::new();
    for_each_row(source, WELL_LOG_HEADER, |line, rec| {
        let id = field_id(rec, line)?;
        let md = field_f64(rec, 1, line, "md_m")?;
        let sf = field_f64(rec, 2, line, "sand_fraction")?;
        let sand_fraction = if is_null(sf) {
            None
        } else if (0.0..=1.0).contains(&sf) {
            Some(sf)
        } else {
            return Err(Error::parse(line, format!("sand_fraction {sf} outside [0, 1]")));
        };
        let samples = wells.group(id);
        if let Some(prev) = samples.last() {
            let prev: &(u64, LogSample) = prev;
            if !(md > prev.1.md) {
                return Err(Error::Ordering {
                    line,
                    msg: format!("md {md} does not increase after {}", prev.1.md),
                });
            }
        }
        samples.push((line, LogSample { md, sand_fraction }));
        Ok(())
    })?;
    Ok(wells
        .into_iter()
        .map(|(well_id, s)| RawWellLog {
            well_id,
            samples: s.into_iter().map(|(_, s)| s).collect(),
        })
        .collect())
}

pub fn load_well_logs(path: &Path) -> Result<Vec<RawWellLog>> {
    parse_well_logs(open(path)?)
}

pub fn write_well_logs(path: &Path, logs: &[RawWellLog]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", WELL_LOG_HEADER.join(",")).map_err(io)?;
    for log in logs {
        for s in &log.samples {
            let sf = s.sand_fraction.unwrap_or(NULL_SENTINEL);
            writeln!(w, "{},{},{}", log.well_id, s.md, sf).map_err(io)?;
        }
    }
    finish(path, w)
}

pub fn parse_checkshots<R: Read>(source: R) -> Result<Vec<Checkshot>> {
    let mut wells = Grouper::new();
    for_each_row(source, CHECKSHOT_HEADER, |line, rec| {
        let id = field_id(rec, line)?;
        let md = field_f64(rec, 1, line, "md_m")?;
        let twt = field_f64(rec, 2, line, "twt_ms")?;
        let pairs: &mut Vec<(f64, f64)> = wells.group(id);
        if let Some(&(pm, pt)) = pairs.last() {
            if !(md > pm && twt > pt) {
                return Err(Error::Ordering {
                    line,
                    msg: "checkshot depth and time must both increase".into(),
                });
            }
        }
        pairs.push((md, twt));
        Ok(())
    })?;
    wells
        .into_iter()
        .map(|(id, pairs)| Checkshot::new(id, pairs))
        .collect()
}

pub fn load_checkshots(path: &Path) -> Result<Vec<Checkshot>> {
    parse_checkshots(open(path)?)
}

pub fn write_checkshots(path: &Path, shots: &[Checkshot]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", CHECKSHOT_HEADER.join(",")).map_err(io)?;
    for cs in shots {
        for (md, twt) in &cs.pairs {
            writeln!(w, "{},{},{}", cs.well_id, md, twt).map_err(io)?;
        }
    }
    finish(path, w)
}

pub fn parse_locations<R: Read>(source: R) -> Result<Vec<WellLocation>> {
    let mut out: Vec<WellLocation> = Vec::new();
    for_each_row(source, LOCATION_HEADER, |line, rec| {
        let well_id = field_id(rec, line)?;
        if out.iter().any(|l| l.well_id == well_id) {
            return Err(Error::parse(line, format!("duplicate location for {well_id}")));
        }
        out.push(WellLocation {
            well_id,
            inline: field_i64(rec, 1, line, "inline")?,
            xline: field_i64(rec, 2, line, "xline")?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn load_locations(path: &Path) -> Result<Vec<WellLocation>> {
    parse_locations(open(path)?)
}

pub fn write_locations(path: &Path, locs: &[WellLocation]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", LOCATION_HEADER.join(",")).map_err(io)?;
    for l in locs {
        writeln!(w, "{},{},{}", l.well_id, l.inline, l.xline).map_err(io)?;
    }
    finish(path, w)
}

pub fn parse_tops<R: Read>(source: R) -> Result<Vec<WellTops>> {
    let mut wells: Grouper<(u64, String, f64)> = Grouper::new();
    for_each_row(source, TOPS_HEADER, |line, rec| {
        let id = field_id(rec, line)?;
        let name = rec[1].trim().to_string();
        if name != "Top1" && name != "Top2" {
            return Err(Error::parse(line, format!("unknown top '{name}', expected Top1 or Top2")));
        }
        let t = field_f64(rec, 2, line, "twt_ms")?;
        wells.group(id).push((line, name, t));
        Ok(())
    })?;
    wells
        .into_iter()
        .map(|(well_id, picks)| {
            let pick = |name: &str| -> Result<f64> {
                let mut it = picks.iter().filter(|p| p.1 == name);
                match (it.next(), it.next()) {
                    (Some(p), None) => Ok(p.2),
                    (None, _) => Err(Error::InvalidTops(format!("{well_id} has no {name}"))),
                    (Some(_), Some(p)) => Err(Error::parse(p.0, format!("duplicate {name} for {well_id}"))),
                }
            };
            let (top1_t, top2_t) = (pick("Top1")?, pick("Top2")?);
            if !(top1_t < top2_t) {
                return Err(Error::InvalidTops(format!(
                    "{well_id}: Top1 ({top1_t}) must lie above Top2 ({top2_t})"
                )));
            }
            Ok(WellTops {
                well_id,
                top1_t,
                top2_t,
            })
        })
        .collect()
}

pub fn load_tops(path: &Path) -> Result<Vec<WellTops>> {
    parse_tops(open(path)?)
}

pub fn write_tops(path: &Path, tops: &[WellTops]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", TOPS_HEADER.join(",")).map_err(io)?;
    for t in tops {
        writeln!(w, "{},Top1,{}", t.well_id, t.top1_t).map_err(io)?;
        writeln!(w, "{},Top2,{}", t.well_id, t.top2_t).map_err(io)?;
    }
    finish(path, w)
}

/// Reconstructs the regular grid behind a set of `(inline, xline, t)` rows.
///
/// Rows may come in any order, but every grid node must appear exactly once
/// and the time axis must be uniformly sampled.
pub(crate) struct GridBuilder<T> {
    rows: Vec<(i64, i64, f64, T, u64)>,
}

impl<T: Copy> GridBuilder<T> {
    pub(crate) fn new() -> Self {
        Self { rows: Vec::new() }
    }

    pub(crate) fn push(&mut self, inline: i64, xline: i64, t: f64, value: T, line: u64) {
        self.rows.push((inline, xline, t, value, line));
    }

    pub(crate) fn build(self) -> Result<(VolumeGeometry, Vec<T>)> {
        if self.rows.is_empty() {
            return Err(Error::Geometry("volume has no samples".into()));
        }
        let mut inlines: Vec<i64> = self.rows.iter().map(|r| r.0).collect();
        inlines.sort_unstable();
        inlines.dedup();
        let mut xlines: Vec<i64> = self.rows.iter().map(|r| r.1).collect();
        xlines.sort_unstable();
        xlines.dedup();
        let mut times: Vec<f64> = self.rows.iter().map(|r| r.2).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        if times.len() < 2 {
            return Err(Error::Geometry("time axis needs at least 2 samples".into()));
        }
        let nt = times.len();
        let t0 = times[0];
        let dt = (times[nt - 1] - t0) / (nt - 1) as f64;
        let tol = 1e-6 * dt;
        // tolerate text-rounded times, rejecting anything off the regular axis
        if let Some(bad) = times
            .iter()
            .enumerate()
            .find(|(k, &t)| (t - (t0 + *k as f64 * dt)).abs() > tol)
        {
            return Err(Error::Geometry(format!(
                "time axis is not regular near t = {} ms",
                bad.1
            )));
        }
        let geometry = VolumeGeometry::new(inlines, xlines, t0, dt, nt)?;
        if self.rows.len() != geometry.n_voxels() {
            return Err(Error::Geometry(format!(
                "incomplete grid: {} rows for {} x {} x {} nodes",
                self.rows.len(),
                geometry.inlines.len(),
                geometry.xlines.len(),
                nt
            )));
        }
        let mut cells: Vec<Option<T>> = vec![None; geometry.n_voxels()];
        for (il, xl, t, v, line) in self.rows {
            let trace = geometry.locate(il, xl)?;
            let k = ((t - t0) / dt).round() as usize;
            let cell = &mut cells[trace * nt + k];
            if cell.is_some() {
                return Err(Error::Geometry(format!(
                    "duplicate sample at line {line} (inline {il}, xline {xl}, t {t})"
                )));
            }
            *cell = Some(v);
        }
        // the count check plus duplicate rejection means every cell is filled
        let data = cells.into_iter().map(|c| c.expect("filled")).collect();
        Ok((geometry, data))
    }
}

pub fn parse_volume<R: Read>(source: R) -> Result<AttributeVolume> {
    let mut grid = GridBuilder::new();
    for_each_row(source, VOLUME_HEADER, |line, rec| {
        let il = field_i64(rec, 0, line, "inline")?;
        let xl = field_i64(rec, 1, line, "xline")?;
        let t = field_f64(rec, 2, line, "t_ms")?;
        let mut v = [0.0; N_ATTRIBUTES];
        for (a, slot) in v.iter_mut().enumerate() {
            *slot = field_f64(rec, 3 + a, line, VOLUME_HEADER[3 + a])?;
            if slot.is_nan() {
                return Err(Error::parse(line, "attribute values must be finite"));
            }
        }
        grid.push(il, xl, t, v, line);
        Ok(())
    })?;
    let (geometry, data) = grid.build()?;
    AttributeVolume::new(geometry, data)
}

pub fn load_volume(path: &Path) -> Result<AttributeVolume> {
    parse_volume(std::io::BufReader::new(open(path)?))
}

pub fn write_volume(path: &Path, vol: &AttributeVolume) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", VOLUME_HEADER.join(",")).map_err(io)?;
    let g = &vol.geometry;
    for trace in 0..g.n_traces() {
        let (il, xl) = g.labels(trace);
        for (k, v) in vol.trace(trace).iter().enumerate() {
            writeln!(w, "{il},{xl},{},{},{},{}", g.time(k), v[0], v[1], v[2]).map_err(io)?;
        }
    }
    finish(path, w)
}

pub fn parse_integrated<R: Read>(source: R) -> Result<Vec<WellLog>> {
    let mut wells: Grouper<[f64; 5]> = Grouper::new();
    for_each_row(source, INTEGRATED_HEADER, |line, rec| {
        let id = field_id(rec, line)?;
        let mut row = [0.0; 5];
        for (i, slot) in row.iter_mut().enumerate() {
            *slot = field_f64(rec, i + 1, line, INTEGRATED_HEADER[i + 1])?;
            if slot.is_nan() {
                return Err(Error::parse(line, "integrated values must be finite"));
            }
        }
        let rows = wells.group(id);
        if rows.last().is_some_and(|p| !(row[0] > p[0])) {
            return Err(Error::Ordering {
                line,
                msg: "t_ms must increase within a well".into(),
            });
        }
        rows.push(row);
        Ok(())
    })?;
    wells
        .into_iter()
        .map(|(well_id, rows)| {
            let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
            let log = WellLog {
                t: col(0),
                impedance: col(1),
                inst_amp: col(2),
                inst_freq: col(3),
                sand_fraction: col(4),
                well_id,
            };
            log.check_lengths()?;
            Ok(log)
        })
        .collect()
}

pub fn load_integrated(path: &Path) -> Result<Vec<WellLog>> {
    parse_integrated(std::io::BufReader::new(open(path)?))
}

pub fn write_integrated(path: &Path, wells: &[WellLog]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", INTEGRATED_HEADER.join(",")).map_err(io)?;
    for well in wells {
        for i in 0..well.len() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                well.well_id,
                well.t[i],
                well.impedance[i],
                well.inst_amp[i],
                well.inst_freq[i],
                well.sand_fraction[i]
            )
            .map_err(io)?;
        }
    }
    finish(path, w)
}
