//! File emission. Tables go to `<name>.csv` or `<name>.json`; documents
//! are always JSON. Floats use the shortest round-trip representation.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

pub struct Sink {
    dir: PathBuf,
    format: Format,
    written: Vec<PathBuf>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

impl Sink {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io(dir))?;
        Ok(Self { dir: dir.to_path_buf(), format, written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        match self.format {
            Format::Json => self.document(name, &rows),
            Format::Csv => {
                let path = self.dir.join(format!("{name}.csv"));
                let ser =
                    |e: csv::Error| CliError::Serialize { path: path.display().to_string(), reason: e.to_string() };
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.serialize(r).map_err(ser)?;
                }
                let bytes = w
                    .into_inner()
                    .map_err(|e| CliError::Serialize { path: path.display().to_string(), reason: e.to_string() })?;
                self.write(path, &bytes)
            }
        }
    }

    pub fn document<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(format!("{name}.json"));
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Serialize { path: path.display().to_string(), reason: e.to_string() })?;
        text.push('\n');
        self.write(path, text.as_bytes())
    }

    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(&path, bytes).map_err(io(&path))?;
        self.written.push(path);
        Ok(())
    }
}
