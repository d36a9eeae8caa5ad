//! CSV files with a `#` metadata block ahead of the header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Metadata written at the top of every CSV.
#[derive(Clone, Debug)]
pub struct Meta {
    pub command: String,
    pub config_hash: String,
}

impl Meta {
    pub fn new(command: &str, canonical_config: &str) -> Self {
        let digest = Sha256::digest(canonical_config.as_bytes());
        Self {
            command: command.to_string(),
            config_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }

    pub fn write_block<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# kirchpore_version={}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command={}", self.command)?;
        writeln!(out, "# config_sha256={}", self.config_hash)
    }
}

/// Output directory handle; creates files lazily.
#[derive(Clone, Debug)]
pub struct OutDir {
    pub path: PathBuf,
    pub meta: Meta,
}

impl OutDir {
    pub fn create(path: &Path, meta: Meta) -> Result<Self, CliError> {
        std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            meta,
        })
    }

    /// Opens `name` and writes the metadata block.
    pub fn file(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let p = self.path.join(name);
        let mut w = BufWriter::new(File::create(&p).map_err(|e| CliError::io(&p, e))?);
        self.meta.write_block(&mut w).map_err(|e| CliError::io(&p, e))?;
        Ok((p, w))
    }

    /// Writes a table of string cells.
    pub fn table<S: AsRef<str>>(&self, name: &str, header: &[&str], rows: &[Vec<S>]) -> Result<PathBuf, CliError> {
        let (p, w) = self.file(name)?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(header)?;
        for r in rows {
            c.write_record(r.iter().map(|s| s.as_ref()))?;
        }
        c.flush().map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    /// Plot data: `#`-commented header, whitespace-separated columns.
    pub fn plot_data(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
        let (p, mut w) = self.file(name)?;
        let io = |e| CliError::io(&p, e);
        writeln!(w, "# {}", header.join(" ")).map_err(io)?;
        for r in rows {
            let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" ")).map_err(io)?;
        }
        w.flush().map_err(io)?;
        Ok(p)
    }
}

pub fn num(v: f64) -> String {
    v.to_string()
}
