//! CSV ingestion and export for profiles, fairway boundaries and AIS logs.
//!
//! Formats (header row required, UTF-8, `.` decimal separator):
//!
//! ```text
//! profiles:   waterway_id,km,point_index,easting,northing
//! boundaries: side,km,easting,northing
//! ais:        vessel_id,timestamp,easting,northing,cog,sog,direction
//! points:     [id,]easting,northing
//! ```
//!
//! Every format also accepts `lat,lon` columns in place of
//! `easting,northing`; those are projected into the UTM zone of the first
//! coordinate in the file.

use crate::domain::{AisRecord, BoundarySamples, Direction, ProfileLine, Side, Track, WaterwayAxis};
use crate::error::{Error, Result};
use crate::geom::GeoPoint;
use crate::kilometer::KmFix;
use crate::projection::{project, Zone};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

/// Maximum number of rejected line numbers kept in an [`IngestReport`].
pub const MAX_REPORTED_LINES: usize = 10;

/// Data-quality accounting for an AIS ingestion run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rejected: usize,
    /// Line numbers (1-based, header is line 1) of the first rejected rows.
    pub rejected_lines: Vec<u64>,
    pub duplicates_dropped: usize,
}

impl IngestReport {
    fn reject(&mut self, line: u64) {
        self.rejected += 1;
        if self.rejected_lines.len() < MAX_REPORTED_LINES {
            self.rejected_lines.push(line);
        }
    }
}

/// Tracks loaded from an AIS file together with the rejection report.
#[derive(Debug, Clone)]
pub struct AisData {
    pub tracks: Vec<Track>,
    pub report: IngestReport,
    pub zone: Option<Zone>,
}

enum CoordColumns {
    Planar { easting: usize, northing: usize },
    Geographic { lat: usize, lon: usize },
}

struct Columns {
    index: BTreeMap<String, usize>,
    coords: CoordColumns,
    zone: Option<Zone>,
}

impl Columns {
    fn resolve(path: &Path, headers: &csv::StringRecord, required: &[&str]) -> Result<Columns> {
        let index: BTreeMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_ascii_lowercase(), i))
            .collect();
        for name in required {
            if !index.contains_key(*name) {
                return Err(parse_err(path, 1, format!("missing column '{name}'")));
            }
        }
        let coords = match (
            index.get("easting"),
            index.get("northing"),
            index.get("lat"),
            index.get("lon"),
        ) {
            (Some(&e), Some(&n), _, _) => CoordColumns::Planar { easting: e, northing: n },
            (_, _, Some(&lat), Some(&lon)) => CoordColumns::Geographic { lat, lon },
            _ => {
                return Err(parse_err(
                    path,
                    1,
                    "missing coordinate columns (easting,northing or lat,lon)".into(),
                ))
            }
        };
        Ok(Columns {
            index,
            coords,
            zone: None,
        })
    }

    fn field<'r>(&self, rec: &'r csv::StringRecord, name: &str) -> &'r str {
        rec.get(self.index[name]).unwrap_or("").trim()
    }

    fn point(&mut self, rec: &csv::StringRecord) -> std::result::Result<GeoPoint, String> {
        let num = |i: usize, what: &str| -> std::result::Result<f64, String> {
            let s = rec.get(i).unwrap_or("").trim();
            let v: f64 = s.parse().map_err(|_| format!("invalid {what} '{s}'"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite {what}"))
            }
        };
        match self.coords {
            CoordColumns::Planar { easting, northing } => {
                Ok(GeoPoint::new(num(easting, "easting")?, num(northing, "northing")?))
            }
            CoordColumns::Geographic { lat, lon } => {
                let lat = num(lat, "lat")?;
                let lon = num(lon, "lon")?;
                if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                    return Err(format!("coordinate out of range ({lat}, {lon})"));
                }
                let zone = *self.zone.get_or_insert_with(|| Zone::for_lon_lat(lon, lat));
                Ok(project(lat, lon, zone))
            }
        }
    }
}

pub(crate) fn parse_err(path: &Path, line: u64, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

pub(crate) fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

pub(crate) fn headers(path: &Path, reader: &mut csv::Reader<File>) -> Result<csv::StringRecord> {
    let h = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    if h.is_empty() || (h.len() == 1 && h[0].trim().is_empty()) {
        return Err(parse_err(path, 1, "empty file (header row required)".into()));
    }
    Ok(h)
}

pub(crate) fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

pub(crate) fn parse_f64(path: &Path, line: u64, s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} '{s}'")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite {what}")));
    }
    Ok(v)
}

/// Load a profile CSV into a validated [`WaterwayAxis`].
pub fn load_axis(path: impl AsRef<Path>) -> Result<WaterwayAxis> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = headers(path, &mut reader)?;
    let mut cols = Columns::resolve(path, &headers, &["waterway_id", "km", "point_index"])?;

    let mut waterway: Option<String> = None;
    // keyed by the km bit pattern so identical labels group exactly
    let mut profiles: BTreeMap<u64, (f64, Vec<(i64, GeoPoint)>)> = BTreeMap::new();
    let mut rows = 0usize;
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = record_line(&rec);
        let id = cols.field(&rec, "waterway_id").to_string();
        match &waterway {
            None => waterway = Some(id),
            Some(w) if *w != id => {
                return Err(parse_err(
                    path,
                    line,
                    format!("multiple waterway ids in one file ('{w}' and '{id}')"),
                ))
            }
            _ => {}
        }
        let km = parse_f64(path, line, cols.field(&rec, "km"), "km")?;
        let idx_str = cols.field(&rec, "point_index");
        let idx: i64 = idx_str
            .parse()
            .map_err(|_| parse_err(path, line, format!("invalid point_index '{idx_str}'")))?;
        let p = cols.point(&rec).map_err(|m| parse_err(path, line, m))?;
        profiles.entry(km.to_bits()).or_insert((km, Vec::new())).1.push((idx, p));
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(path, 1, "no profile rows".into()));
    }

    let mut lines = Vec::new();
    for (km, mut pts) in profiles.into_values() {
        pts.sort_by_key(|(i, _)| *i);
        if pts.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation(format!("duplicate point_index in profile km {km}")));
        }
        lines.push(ProfileLine::new(km, pts.into_iter().map(|(_, p)| p).collect())?);
    }
    let mut axis = WaterwayAxis::new(waterway.unwrap_or_default(), lines)?;
    axis.zone = cols.zone;
    check_file_order(path)?;
    Ok(axis)
}

// km labels must appear in non-decreasing order in the file itself
fn check_file_order(path: &Path) -> Result<()> {
    let mut reader = open_reader(path)?;
    let headers = headers(path, &mut reader)?;
    let km_col = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("km"))
        .ok_or_else(|| parse_err(path, 1, "missing column 'km'".into()))?;
    let side_col = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("side"));
    let mut last: BTreeMap<String, f64> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(path, 0, e.to_string()))?;
        let key = side_col
            .and_then(|c| rec.get(c))
            .map(|s| s.trim().to_ascii_lowercase())
            .unwrap_or_default();
        let km: f64 = match rec.get(km_col).and_then(|s| s.trim().parse().ok()) {
            Some(v) => v,
            None => continue,
        };
        if let Some(prev) = last.get(&key) {
            if km < *prev {
                return Err(Error::Validation(format!(
                    "{}:{}: km labels not monotone ({prev} followed by {km})",
                    path.display(),
                    record_line(&rec)
                )));
            }
        }
        last.insert(key, km);
    }
    Ok(())
}

/// Load the samples of one fairway side from a boundary CSV.
pub fn load_boundaries(path: impl AsRef<Path>, side: Side) -> Result<BoundarySamples> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = headers(path, &mut reader)?;
    let mut cols = Columns::resolve(path, &headers, &["side", "km"])?;
    let mut samples = Vec::new();
    let mut rows = 0usize;
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = record_line(&rec);
        rows += 1;
        let row_side: Side = cols
            .field(&rec, "side")
            .parse()
            .map_err(|e: Error| parse_err(path, line, e.to_string()))?;
        if row_side != side {
            continue;
        }
        let km = parse_f64(path, line, cols.field(&rec, "km"), "km")?;
        let p = cols.point(&rec).map_err(|m| parse_err(path, line, m))?;
        samples.push((km, p));
    }
    if rows == 0 {
        return Err(parse_err(path, 1, "no boundary rows".into()));
    }
    if samples.is_empty() {
        return Err(Error::Validation(format!("no samples for the {side} boundary")));
    }
    check_file_order(path)?;
    BoundarySamples::new(side, samples)
}

/// Load an AIS CSV, grouping rows into per-vessel, per-direction tracks.
///
/// Rows with an out-of-range COG, an unparseable timestamp or any other
/// malformed field are rejected and counted. For repeated
/// `(vessel_id, timestamp)` pairs the first row in file order is kept.
pub fn load_ais(path: impl AsRef<Path>) -> Result<AisData> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = headers(path, &mut reader)?;
    let mut cols = Columns::resolve(
        path,
        &headers,
        &["vessel_id", "timestamp", "cog", "sog", "direction"],
    )?;

    let mut report = IngestReport::default();
    let mut by_vessel: BTreeMap<String, Vec<AisRecord>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                report.rows_read += 1;
                report.reject(e.position().map(|p| p.line()).unwrap_or(0));
                continue;
            }
        };
        report.rows_read += 1;
        let line = record_line(&rec);
        match parse_ais_row(&mut cols, &rec) {
            Some(r) => by_vessel.entry(r.vessel_id.clone()).or_default().push(r),
            None => report.reject(line),
        }
    }

    let mut groups: BTreeMap<(String, Direction), Vec<AisRecord>> = BTreeMap::new();
    for (vessel, mut records) in by_vessel {
        // stable: equal timestamps keep file order, so the first one survives
        records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        let before = records.len();
        records.dedup_by(|later, earlier| later.timestamp == earlier.timestamp);
        report.duplicates_dropped += before - records.len();
        for r in records {
            groups.entry((vessel.clone(), r.direction)).or_default().push(r);
        }
    }
    let tracks = groups
        .into_iter()
        .map(|((vessel_id, direction), records)| Track {
            vessel_id,
            direction,
            records,
        })
        .collect();
    Ok(AisData {
        tracks,
        report,
        zone: cols.zone,
    })
}

fn parse_ais_row(cols: &mut Columns, rec: &csv::StringRecord) -> Option<AisRecord> {
    let vessel_id = cols.field(rec, "vessel_id");
    if vessel_id.is_empty() {
        return None;
    }
    let timestamp: f64 = cols.field(rec, "timestamp").parse().ok()?;
    if !timestamp.is_finite() {
        return None;
    }
    let cog: f64 = cols.field(rec, "cog").parse().ok()?;
    if !(0.0..360.0).contains(&cog) {
        return None;
    }
    let sog_s = cols.field(rec, "sog");
    let sog = if sog_s.is_empty() {
        None
    } else {
        let v: f64 = sog_s.parse().ok()?;
        if !v.is_finite() || v < 0.0 {
            return None;
        }
        Some(v)
    };
    let direction: Direction = cols.field(rec, "direction").parse().ok()?;
    let position = cols.point(rec).ok()?;
    Some(AisRecord {
        vessel_id: vessel_id.to_string(),
        timestamp,
        position,
        cog,
        sog,
        direction,
    })
}

pub(crate) fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufWriter::new(f))
}

/// Numeric columns `names` of a headered CSV, one row per record.
pub(crate) fn read_numeric_table(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = open_reader(path)?;
    let h = headers(path, &mut reader)?;
    let idx = names
        .iter()
        .map(|n| {
            h.iter()
                .position(|c| c.trim().eq_ignore_ascii_case(n))
                .ok_or_else(|| parse_err(path, 1, format!("missing column '{n}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record_line(&rec);
        let row = idx
            .iter()
            .zip(names)
            .map(|(&i, n)| parse_f64(path, line, rec.get(i).unwrap_or("").trim(), n))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Write `header` followed by one line per row.
pub(crate) fn write_lines<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{header}").map_err(io)?;
    for r in rows {
        writeln!(w, "{r}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Load a point list: an optional `id` column and planar or geographic
/// coordinates. Rows without an id are numbered from 1.
pub fn load_points(path: impl AsRef<Path>) -> Result<Vec<(String, GeoPoint)>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = headers(path, &mut reader)?;
    let mut cols = Columns::resolve(path, &headers, &[])?;
    let has_id = cols.index.contains_key("id");
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record_line(&rec);
        let p = cols.point(&rec).map_err(|m| parse_err(path, line, m))?;
        let id = if has_id {
            cols.field(&rec, "id").to_string()
        } else {
            (out.len() + 1).to_string()
        };
        out.push((id, p));
    }
    Ok(out)
}

/// Write kilometerization results, one row per point; failed points keep
/// their id and carry the error message.
pub fn write_km_fixes(path: impl AsRef<Path>, rows: &[(String, Result<KmFix>)]) -> Result<()> {
    write_lines(
        path.as_ref(),
        "id,km,official_km,axis_distance,axis_side,error",
        rows.iter().map(|(id, r)| match r {
            Ok(f) => format!(
                "{id},{:.6},{:.6},{:.3},{},",
                f.km, f.official_km, f.axis_distance, f.axis_side
            ),
            Err(e) => format!("{id},,,,,\"{}\"", e.to_string().replace('"', "'")),
        }),
    )
}

/// Write an axis in the profile CSV format.
pub fn write_axis(path: impl AsRef<Path>, axis: &WaterwayAxis) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "waterway_id,km,point_index,easting,northing").map_err(io)?;
    for p in &axis.profiles {
        for (i, pt) in p.points.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                axis.waterway_id, p.km, i, pt.easting, pt.northing
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Write both fairway sides into one boundary CSV.
pub fn write_boundaries(
    path: impl AsRef<Path>,
    right: &BoundarySamples,
    left: &BoundarySamples,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "side,km,easting,northing").map_err(io)?;
    for b in [right, left] {
        for (km, p) in &b.samples {
            writeln!(w, "{},{},{},{}", b.side, km, p.easting, p.northing).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Write tracks in the AIS CSV format, record order preserved.
pub fn write_ais(path: impl AsRef<Path>, tracks: &[Track]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "vessel_id,timestamp,easting,northing,cog,sog,direction").map_err(io)?;
    for t in tracks {
        for r in &t.records {
            let sog = r.sog.map(|s| s.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.vessel_id,
                r.timestamp,
                r.position.easting,
                r.position.northing,
                r.cog,
                sog,
                r.direction
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}
