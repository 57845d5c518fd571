//! Reader for the tool's own CSV dialect: comma separator, header row,
//! numeric cells.

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    /// Row-major cells, one Vec per row.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Table> {
        let mut lines = text.lines();
        let header = lines.next().context("empty CSV")?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (idx, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::with_capacity(columns.len());
            for cell in line.split(',') {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .with_context(|| format!("non-numeric cell '{cell}' in row {}", idx + 2))?;
                row.push(v);
            }
            if row.len() != columns.len() {
                bail!(
                    "row {} has {} cells, header has {}",
                    idx + 2,
                    row.len(),
                    columns.len()
                );
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .with_context(|| format!("missing column '{name}'"))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}
