use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::seed::Seed;

/// A small CSV table: header row, data rows, trailing `# seed=<v>` line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, seed: Seed) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            out.push_str(&line.join(","));
            out.push('\n');
        }
        writeln!(out, "# seed={}", seed.0).expect("writing to a String");
        out
    }

    pub fn write(&self, path: &Path, seed: Seed) -> Result<()> {
        std::fs::write(path, self.to_csv(seed))?;
        Ok(())
    }
}
