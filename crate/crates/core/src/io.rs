//! JSON file formats.
//!
//! Body: `{"dim": n, "normals": [[...], ...], "supports": [...]}`.
//! Measure: `{"dim": n, "atoms": [{"v": [...], "w": w}, ...]}`.
//! Every real is written with 17 significant digits so doubles round-trip
//! exactly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Error;
use crate::geom::{Atom, Direction, DiscreteMeasure, Polytope};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("{path}: {source}")]
    Invalid { path: String, source: Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFile {
    pub dim: usize,
    pub normals: Vec<Vec<f64>>,
    pub supports: Vec<f64>,
}

impl From<&Polytope> for BodyFile {
    fn from(p: &Polytope) -> Self {
        Self {
            dim: p.dim(),
            normals: p.normals().iter().map(|v| v.coords().to_vec()).collect(),
            supports: p.supports().to_vec(),
        }
    }
}

impl BodyFile {
    pub fn into_polytope(self) -> Result<Polytope, Error> {
        let normals = self
            .normals
            .into_iter()
            .map(Direction::new)
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(v) = normals.iter().find(|v| v.dim() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        Polytope::new(normals, self.supports)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomFile {
    pub v: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub dim: usize,
    pub atoms: Vec<AtomFile>,
}

impl From<&DiscreteMeasure> for MeasureFile {
    fn from(mu: &DiscreteMeasure) -> Self {
        Self {
            dim: mu.dim(),
            atoms: mu
                .atoms()
                .iter()
                .map(|a| AtomFile {
                    v: a.v.coords().to_vec(),
                    w: a.w,
                })
                .collect(),
        }
    }
}

impl MeasureFile {
    pub fn into_measure(self) -> Result<DiscreteMeasure, Error> {
        let atoms = self
            .atoms
            .into_iter()
            .map(|a| {
                Ok(Atom {
                    v: Direction::new(a.v)?,
                    w: a.w,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        DiscreteMeasure::new(self.dim, atoms)
    }
}

/// Pretty printer that writes every finite `f64` as `{:.16e}` and non-finite
/// values as `null`.
struct ExactFloats(PrettyFormatter<'static>);

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }
    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }
    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), FileError> {
    fs::write(path, to_json(value)).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let name = || path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| FileError::Io { path: name(), source })?;
    serde_json::from_str(&text).map_err(|source| FileError::Parse { path: name(), source })
}

pub fn read_body(path: &Path) -> Result<Polytope, FileError> {
    read_json::<BodyFile>(path)?
        .into_polytope()
        .map_err(|source| FileError::Invalid {
            path: path.display().to_string(),
            source,
        })
}

pub fn write_body(path: &Path, p: &Polytope) -> Result<(), FileError> {
    write_json(path, &BodyFile::from(p))
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure, FileError> {
    read_json::<MeasureFile>(path)?
        .into_measure()
        .map_err(|source| FileError::Invalid {
            path: path.display().to_string(),
            source,
        })
}

pub fn write_measure(path: &Path, mu: &DiscreteMeasure) -> Result<(), FileError> {
    write_json(path, &MeasureFile::from(mu))
}
