// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ionlattice::CouplingMatrix;

use crate::CliError;

/// Writes output files into one directory, each starting with the same
/// header block.
pub struct OutputDir {
    dir: PathBuf,
    header: Vec<String>,
    written: Vec<PathBuf>,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl OutputDir {
    pub fn new(dir: &Path, command: &str, resolved_config: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        let mut header = vec![
            format!("ionlattice {}", env!("CARGO_PKG_VERSION")),
            format!("command: {command}"),
            "config:".to_string(),
        ];
        header.extend(resolved_config.lines().map(|l| format!("  {l}")));
        Ok(Self { dir: dir.to_path_buf(), header, written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let mut text = String::new();
        for h in &self.header {
            let _ = writeln!(text, "{}", format!("# {h}").trim_end());
        }
        text.push_str(body);
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, columns: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut body = columns.join(",");
        body.push('\n');
        for r in rows {
            body.push_str(&r.join(","));
            body.push('\n');
        }
        self.write(name, &body)
    }

    pub fn matrix(&mut self, name: &str, m: &CouplingMatrix) -> Result<(), CliError> {
        let n = m.n();
        let columns: Vec<String> = (1..=n).map(|j| format!("j{j}")).collect();
        let rows: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| num(m.get(i, j))).collect()).collect();
        self.csv(name, &columns, &rows)
    }

    pub fn toml(&mut self, name: &str, value: &toml::Table) -> Result<(), CliError> {
        self.write(name, &toml::to_string(value).expect("report serializes"))
    }
}
