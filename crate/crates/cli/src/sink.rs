//! The one place a run writes files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rmean_core::io::write_rows;

/// Output directory plus the list of files written so far, in order.
/// Every write goes through `&mut self`, so writes never interleave.
#[derive(Debug)]
pub struct Sink {
    dir: PathBuf,
    written: Vec<String>,
}

impl Sink {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File names relative to the output directory.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(BufWriter::new(f))
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        let out = self.open(name)?;
        write_rows(out, header, rows).with_context(|| format!("writing {name}"))
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let mut out = self.open(name)?;
        out.write_all(body.as_bytes())?;
        out.flush()?;
        Ok(())
    }
}
