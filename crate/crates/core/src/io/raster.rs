//! Gridded field files.
//!
//! Text layout: a header line `ncols nrows dx dy [xorigin yorigin nodata]`
//! followed by `nrows` lines of `ncols` values, top row (largest y) first.
//! Values are written with 17 significant digits; `inf`, `-inf` and `NaN`
//! are literal tokens.
//!
//! Packed layout: the bytes `HJBF`, a version byte `1`, little-endian `u32`
//! column and row counts, then little-endian `f64` values with the bottom row
//! (y = 0) first. It carries no spacing, so loaders either take a grid or
//! assume unit spacing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{DomainMask, Grid2D, ScalarField};

const MAGIC: &[u8; 4] = b"HJBF";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldFormat {
    Text,
    Packed,
}

impl FieldFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            FieldFormat::Text => "txt",
            FieldFormat::Packed => "bin",
        }
    }
}

impl std::str::FromStr for FieldFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(FieldFormat::Text),
            "packed" | "bin" => Ok(FieldFormat::Packed),
            _ => Err(Error::InvalidParameter(format!("unknown field format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterHeader {
    /// Gridpoint columns, `nx + 1`.
    pub ncols: usize,
    /// Gridpoint rows, `ny + 1`.
    pub nrows: usize,
    pub dx: f64,
    pub dy: f64,
    pub xorigin: f64,
    pub yorigin: f64,
    pub nodata: Option<f64>,
}

impl RasterHeader {
    pub fn for_grid(grid: &Grid2D) -> Self {
        RasterHeader {
            ncols: grid.cols(),
            nrows: grid.rows(),
            dx: grid.dx(),
            dy: grid.dy(),
            xorigin: 0.0,
            yorigin: 0.0,
            nodata: None,
        }
    }

    pub fn grid(&self) -> Result<Grid2D> {
        if self.ncols < 3 || self.nrows < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3x3 gridpoints, got {}x{}",
                self.ncols, self.nrows
            )));
        }
        Grid2D::with_spacing(self.ncols - 1, self.nrows - 1, self.dx, self.dy)
    }

    fn is_nodata(&self, v: f64) -> bool {
        v.is_nan() || self.nodata == Some(v)
    }
}

/// Terrain elevation with the domain given by the valid (non-nodata) points.
#[derive(Debug, Clone)]
pub struct ElevationRaster {
    pub header: RasterHeader,
    /// Elevation; nodata points hold 0.
    pub z: ScalarField,
    pub mask: DomainMask,
}

impl ElevationRaster {
    /// Builds a raster from an elevation field and a mask; outside points are
    /// written as `nodata` on export.
    pub fn new(z: ScalarField, mask: DomainMask) -> Result<Self> {
        z.check_same_grid(&mask.to_field())?;
        if mask.inside_indices().any(|k| !z.values()[k].is_finite()) {
            return Err(Error::Domain("elevation must be finite inside the domain".into()));
        }
        let mut header = RasterHeader::for_grid(z.grid());
        header.nodata = Some(-9999.0);
        let vals = (0..z.values().len())
            .map(|k| if mask.is_inside(k) { z.values()[k] } else { 0.0 })
            .collect();
        Ok(ElevationRaster {
            header,
            z: ScalarField::new(*z.grid(), vals)?,
            mask,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        self.z.grid()
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        let nodata = self.header.nodata.unwrap_or(-9999.0);
        let vals: Vec<f64> = (0..self.z.values().len())
            .map(|k| if self.mask.is_inside(k) { self.z.values()[k] } else { nodata })
            .collect();
        let header = RasterHeader {
            nodata: Some(nodata),
            ..self.header
        };
        write_text(path, &header, &vals)
    }
}

/// Walking speed on grade `s`: `1.11·exp(−(100s+2)²/2345)`.
pub fn speed_law(s: f64) -> f64 {
    1.11 * (-(100.0 * s + 2.0).powi(2) / 2345.0).exp()
}

/// Speed from the elevation grade, with central differences where both
/// neighbors are inside and one-sided differences at the mask edge.
/// Outside points get the flat-ground speed.
pub fn speed_from_slope(raster: &ElevationRaster) -> ScalarField {
    let g = *raster.grid();
    let z = raster.z.values();
    let m = &raster.mask;
    let diff = |idx: usize, (b, f): (Option<usize>, Option<usize>), h: f64| {
        let b = b.filter(|&n| m.is_inside(n));
        let f = f.filter(|&n| m.is_inside(n));
        match (b, f) {
            (Some(b), Some(f)) => (z[f] - z[b]) / (2.0 * h),
            (Some(b), None) => (z[idx] - z[b]) / h,
            (None, Some(f)) => (z[f] - z[idx]) / h,
            (None, None) => 0.0,
        }
    };
    let vals = (0..g.len())
        .map(|k| {
            if !m.is_inside(k) {
                return speed_law(0.0);
            }
            let sx = diff(k, g.x_neighbors(k), g.dx());
            let sy = diff(k, g.y_neighbors(k), g.dy());
            speed_law(sx.hypot(sy))
        })
        .collect();
    ScalarField::new(g, vals).expect("grid-sized")
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("not a number: `{tok}`")))
}

/// Reads a text grid; values are returned bottom row first.
fn read_text(path: &Path) -> Result<(RasterHeader, Vec<f64>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let mut next_line = || -> Result<Option<(usize, String)>> {
        for (n, l) in lines.by_ref() {
            let l = l.map_err(|e| Error::io(path, e))?;
            if !l.trim().is_empty() {
                return Ok(Some((n + 1, l)));
            }
        }
        Ok(None)
    };

    let (hline, head) = next_line()?.ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let toks: Vec<&str> = head.split_whitespace().collect();
    if toks.len() != 4 && toks.len() != 7 {
        return Err(parse_err(
            path,
            hline,
            "header must be `ncols nrows dx dy [xorigin yorigin nodata]`",
        ));
    }
    let dim = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| parse_err(path, hline, format!("bad dimension `{t}`")))
    };
    let (ncols, nrows) = (dim(toks[0])?, dim(toks[1])?);
    let dx = parse_f64(path, hline, toks[2])?;
    let dy = parse_f64(path, hline, toks[3])?;
    if !(dx > 0.0 && dy > 0.0) {
        return Err(parse_err(path, hline, "spacings must be positive"));
    }
    let (xorigin, yorigin, nodata) = if toks.len() == 7 {
        (
            parse_f64(path, hline, toks[4])?,
            parse_f64(path, hline, toks[5])?,
            Some(parse_f64(path, hline, toks[6])?),
        )
    } else {
        (0.0, 0.0, None)
    };
    let header = RasterHeader {
        ncols,
        nrows,
        dx,
        dy,
        xorigin,
        yorigin,
        nodata,
    };

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nrows);
    while let Some((n, l)) = next_line()? {
        if rows.len() == nrows {
            return Err(parse_err(path, n, format!("more than {nrows} rows")));
        }
        let row = l
            .split_whitespace()
            .map(|t| parse_f64(path, n, t))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != ncols {
            return Err(parse_err(
                path,
                n,
                format!("expected {ncols} values, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != nrows {
        return Err(parse_err(
            path,
            hline,
            format!("header says {nrows} rows, file has {}", rows.len()),
        ));
    }
    let values = rows.into_iter().rev().flatten().collect();
    Ok((header, values))
}

fn write_text(path: &Path, header: &RasterHeader, values: &[f64]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(w, "{} {} {:.16e} {:.16e}", header.ncols, header.nrows, header.dx, header.dy).map_err(io)?;
    if let Some(nd) = header.nodata {
        write!(w, " {:.16e} {:.16e} {:.16e}", header.xorigin, header.yorigin, nd).map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for j in (0..header.nrows).rev() {
        let row = &values[j * header.ncols..(j + 1) * header.ncols];
        let mut first = true;
        for v in row {
            if !first {
                w.write_all(b" ").map_err(io)?;
            }
            first = false;
            write!(w, "{v:.16e}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn write_packed(path: &Path, ncols: usize, nrows: usize, values: &[f64]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&[VERSION]).map_err(io)?;
    w.write_all(&(ncols as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&(nrows as u32).to_le_bytes()).map_err(io)?;
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn read_packed(path: &Path, bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    let bad = |msg: &str| parse_err(path, 0, msg);
    if bytes.len() < 13 || &bytes[..4] != MAGIC {
        return Err(bad("not a packed field file"));
    }
    if bytes[4] != VERSION {
        return Err(bad("unsupported packed version"));
    }
    let ncols = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let nrows = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let body = &bytes[13..];
    if body.len() != ncols * nrows * 8 {
        return Err(bad(&format!(
            "header says {ncols}x{nrows} values, body holds {} bytes",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((ncols, nrows, values))
}

pub fn export_field(field: &ScalarField, path: &Path, format: FieldFormat) -> Result<()> {
    let g = field.grid();
    match format {
        FieldFormat::Text => write_text(path, &RasterHeader::for_grid(g), field.values()),
        FieldFormat::Packed => write_packed(path, g.cols(), g.rows(), field.values()),
    }
}

fn read_any(path: &Path) -> Result<(Option<RasterHeader>, usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        let (c, r, v) = read_packed(path, &bytes)?;
        Ok((None, c, r, v))
    } else {
        let (h, v) = read_text(path)?;
        Ok((Some(h), h.ncols, h.nrows, v))
    }
}

/// Loads a field in either format. Packed files get unit spacing.
pub fn load_field(path: &Path) -> Result<ScalarField> {
    let (header, ncols, nrows, values) = read_any(path)?;
    let header = header.unwrap_or(RasterHeader {
        ncols,
        nrows,
        dx: 1.0,
        dy: 1.0,
        xorigin: 0.0,
        yorigin: 0.0,
        nodata: None,
    });
    ScalarField::new(header.grid()?, values)
}

/// Loads a field that must match `grid` in dimensions (and spacing, for text).
pub fn load_field_on(path: &Path, grid: &Grid2D) -> Result<ScalarField> {
    let (header, ncols, nrows, values) = read_any(path)?;
    if ncols != grid.cols() || nrows != grid.rows() {
        return Err(Error::GridMismatch);
    }
    if let Some(h) = header {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        if !close(h.dx, grid.dx()) || !close(h.dy, grid.dy()) {
            return Err(Error::GridMismatch);
        }
    }
    ScalarField::new(*grid, values)
}

/// Loads an elevation raster. Nodata (and `NaN`) points are outside the
/// domain; without a nodata sentinel the outer ring of gridpoints is.
pub fn load_raster(path: &Path) -> Result<ElevationRaster> {
    let (header, values) = read_text(path)?;
    let grid = header.grid()?;
    let inside: Vec<bool> = if header.nodata.is_some() || values.iter().any(|v| v.is_nan()) {
        values.iter().map(|&v| !header.is_nodata(v)).collect()
    } else {
        DomainMask::open_box(grid).as_slice().to_vec()
    };
    if let Some((k, v)) = values
        .iter()
        .enumerate()
        .find(|&(k, v)| inside[k] && !v.is_finite())
    {
        let (i, j) = grid.coords(k);
        return Err(Error::Domain(format!("elevation {v} at gridpoint ({i}, {j})")));
    }
    let z = values
        .iter()
        .zip(&inside)
        .map(|(&v, &ins)| if ins { v } else { 0.0 })
        .collect();
    Ok(ElevationRaster {
        header,
        z: ScalarField::new(grid, z)?,
        mask: DomainMask::new(grid, inside)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn speed_law_values() {
        assert!((speed_law(0.0) - 1.11 * (-4.0f64 / 2345.0).exp()).abs() < 1e-15);
        assert!(speed_law(3.0) < 1e-6);
    }

    #[test]
    fn text_round_trip_with_infinities() {
        let d = tmp();
        let g = Grid2D::new(3, 2, 1.5, 1.0).unwrap();
        let mut f = ScalarField::from_fn(g, |x, y| (x * 7.3 + y).sin() / 3.0);
        f.values_mut()[4] = f64::INFINITY;
        f.values_mut()[5] = f64::NEG_INFINITY;
        let p = d.path().join("f.txt");
        export_field(&f, &p, FieldFormat::Text).unwrap();
        let back = load_field(&p).unwrap();
        assert_eq!(back.grid(), f.grid());
        for (a, b) in back.values().iter().zip(f.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // top row first in the file
        let text = std::fs::read_to_string(&p).unwrap();
        let first: f64 = text.lines().nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
        assert_eq!(first, f.at(0, 2));
    }

    #[test]
    fn packed_round_trip_is_bit_identical() {
        let d = tmp();
        let g = Grid2D::unit_square(5).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x.exp() - y * 1e-300);
        let p = d.path().join("f.bin");
        export_field(&f, &p, FieldFormat::Packed).unwrap();
        let back = load_field_on(&p, &g).unwrap();
        assert_eq!(back, f);
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..5], b"HJBF\x01");
        assert_eq!(bytes.len(), 13 + 36 * 8);
        assert!(load_field_on(&p, &Grid2D::unit_square(6).unwrap()).is_err());
    }

    #[test]
    fn malformed_files_report_line_numbers() {
        let d = tmp();
        let write = |name: &str, body: &str| {
            let p = d.path().join(name);
            std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
            p
        };
        let ragged = write("r.txt", "3 3 1 1\n0 0 0\n0 0\n0 0 0\n");
        assert!(matches!(load_field(&ragged), Err(Error::Parse { line: 3, .. })));
        let nan = write("n.txt", "3 3 1 1\n0 0 0\n0 x 0\n0 0 0\n");
        assert!(matches!(load_field(&nan), Err(Error::Parse { line: 3, .. })));
        let short = write("s.txt", "3 3 1 1\n0 0 0\n0 0 0\n");
        assert!(matches!(load_field(&short), Err(Error::Parse { line: 1, .. })));
        let head = write("h.txt", "3 3 1\n");
        assert!(matches!(load_field(&head), Err(Error::Parse { line: 1, .. })));
        let zeros = write("z.txt", "3 3 1 1\n0 0 0\n0 0 0\n0 0 0\n");
        let f = load_field(&zeros).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
        let mut bin = b"HJBF\x01".to_vec();
        bin.extend_from_slice(&3u32.to_le_bytes());
        bin.extend_from_slice(&3u32.to_le_bytes());
        bin.extend_from_slice(&[0u8; 16]);
        let bad = d.path().join("b.bin");
        std::fs::write(&bad, bin).unwrap();
        assert!(load_field(&bad).is_err());
    }

    #[test]
    fn nodata_marks_outside() {
        let d = tmp();
        let p = d.path().join("z.txt");
        std::fs::write(
            &p,
            "4 3 10 10 0 0 -1\n-1 -1 -1 -1\n-1 5 6 -1\n-1 -1 -1 -1\n",
        )
        .unwrap();
        let r = load_raster(&p).unwrap();
        assert_eq!(r.mask.inside_count(), 2);
        let g = r.grid();
        assert!(r.mask.is_inside(g.index(1, 1)));
        assert_eq!(r.z.at(2, 1), 6.0);
        let f = speed_from_slope(&r);
        // one-sided along x inside the mask, no y neighbors inside
        assert!((f.at(1, 1) - speed_law(0.1)).abs() < 1e-15);
        // round trip through the raster writer
        let q = d.path().join("z2.txt");
        r.write_text(&q).unwrap();
        let r2 = load_raster(&q).unwrap();
        assert_eq!(r2.mask.as_slice(), r.mask.as_slice());
        assert_eq!(r2.z, r.z);
    }

    #[test]
    fn flat_terrain_has_flat_speed() {
        let g = Grid2D::new(10, 8, 10.0, 8.0).unwrap();
        let r = ElevationRaster::new(ScalarField::constant(g, 3.0), DomainMask::open_box(g)).unwrap();
        let f = speed_from_slope(&r);
        assert!(f.values().iter().all(|&v| v == speed_law(0.0)));
    }
}
