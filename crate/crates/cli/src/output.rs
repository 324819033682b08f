use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use semiclassic::io::fmt_f64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Pretty JSON with every float printed to 17 significant digits.
struct Digits17(PrettyFormatter<'static>);

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON serialisation");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Output directory, created on demand.
#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn io_err(&self, name: &str) -> impl FnOnce(io::Error) -> CliError {
        let path = self.path(name);
        move |source| CliError::Io { path, source }
    }

    /// Runs `body` against a buffered file in the output directory.
    pub fn write_with<F>(&self, name: &str, body: F) -> CliResult<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    {
        let file = File::create(self.path(name)).map_err(self.io_err(name))?;
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(self.io_err(name))
    }

    pub fn write_json(&self, name: &str, value: &Value) -> CliResult<()> {
        self.write_with(name, |w| writeln!(w, "{}", to_json_string(value)))
    }

    /// CSV with a header row; numeric cells use 17 significant digits and
    /// NaN marks an empty cell.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
        let file = File::create(self.path(name)).map_err(self.io_err(name))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let wrap = |e: csv::Error| CliError::Io {
            path: self.path(name),
            source: e.into(),
        };
        w.write_record(header).map_err(wrap)?;
        for row in rows {
            w.write_record(row.iter().map(|v| if v.is_nan() { String::new() } else { fmt_f64(*v) }))
                .map_err(wrap)?;
        }
        w.flush().map_err(self.io_err(name))
    }
}
