//! Artifact serialization: JSON with floats fixed to 17 significant digits
//! (so identical runs produce byte-identical reports), headered CSV traces,
//! and the on-disk patch format.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::plateau::HistoryEntry;
use crate::space::{HyperboloidPoint, ModelSpace};
use crate::surface::ParametricPatch;

/// Pretty formatter printing every float as `d.dddddddddddddddde±x`:
/// 17 significant digits, enough to round-trip any f64, and independent of
/// the shortest-representation heuristic, so identical runs emit identical
/// bytes. Everything except floats is delegated to the stock pretty printer.
struct Digits17 {
    inner: PrettyFormatter<'static>,
}

impl Digits17 {
    fn new() -> Self {
        Digits17 { inner: PrettyFormatter::new() }
    }
}

impl Formatter for Digits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{:.16e}", value as f64)
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Pretty JSON with fixed-width floats and a trailing newline.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17::new());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("serialize: {e}")))?;
    let mut s = String::from_utf8(out).expect("serde_json emits utf-8");
    s.push('\n');
    Ok(s)
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, json_string(value)?).map_err(|e| with_path(path, e))
}

/// Headered CSV with every value at 17 significant digits.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let file = File::create(path).map_err(|e| with_path(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", header.join(",")).map_err(|e| with_path(path, e))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::invalid(format!(
                "csv row width {} does not match header width {}",
                row.len(),
                header.len()
            )));
        }
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| with_path(path, e))?;
    }
    w.flush().map_err(|e| with_path(path, e))
}

/// Residual trace of a flow run.
pub fn write_history_csv(path: &Path, history: &[HistoryEntry]) -> Result<()> {
    let rows: Vec<Vec<f64>> = history
        .iter()
        .map(|h| vec![h.iteration as f64, h.residual, h.max_displacement, h.area])
        .collect();
    write_csv(path, &["iteration", "residual", "max_displacement", "area"], &rows)
}

/// On-disk form of a patch: grid metadata plus raw hyperboloid coordinates.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchFile {
    dimension: usize,
    curvature_scale: f64,
    shape: Vec<usize>,
    spacing: Vec<f64>,
    periodic: Vec<bool>,
    mask: Vec<bool>,
    points: Vec<Vec<f64>>,
}

pub fn write_patch_json(path: &Path, patch: &ParametricPatch) -> Result<()> {
    let space = patch.space();
    let file = PatchFile {
        dimension: space.dimension(),
        curvature_scale: space.curvature_scale(),
        shape: patch.grid_shape().to_vec(),
        spacing: patch.spacing().to_vec(),
        periodic: patch.periodic().to_vec(),
        mask: patch.mask().to_vec(),
        points: patch
            .points()
            .iter()
            .map(|p| p.coords().as_slice().to_vec())
            .collect(),
    };
    write_json(path, &file)
}

pub fn read_patch_json(path: &Path) -> Result<ParametricPatch> {
    let text = std::fs::read_to_string(path).map_err(|e| with_path(path, e))?;
    let file: PatchFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let space = ModelSpace::new(file.dimension, file.curvature_scale)?;
    let points = file
        .points
        .into_iter()
        .map(|c| HyperboloidPoint::from_coords(nalgebra::DVector::from_vec(c)))
        .collect();
    ParametricPatch::new(
        space,
        file.shape,
        file.spacing,
        file.periodic,
        points,
        file.mask,
    )
}
