//! CSV emission with a stable on-disk format.
//!
//! All floating-point values are printed with 9 significant digits,
//! locale-independent, `.` decimal separator, so golden files are portable
//! across platforms. Header comments are `#`-prefixed and carry a schema
//! version string.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// 9-significant-digit rendering; scientific notation outside
/// `[1e-4, 1e9)`.
pub fn g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if !(1e-4..1e9).contains(&a) {
        return format!("{x:.8e}");
    }
    let digits_before = a.log10().floor() as i32 + 1;
    let prec = (9 - digits_before).max(0) as usize;
    format!("{x:.prec$}")
}

/// One output cell: already-formatted text or empty.
pub type Cell = String;

pub fn cell_f64(x: f64) -> Cell {
    g9(x)
}

pub fn cell_u64(x: u64) -> Cell {
    x.to_string()
}

pub fn cell_empty() -> Cell {
    String::new()
}

/// Writes a commented CSV: `# schema: aoi-lab/<name> v1`, the given extra
/// comments, a header row, then the data rows.
pub fn write_csv(
    out: &mut dyn Write,
    schema: &str,
    comments: &[String],
    header: &[&str],
    rows: &[Vec<Cell>],
) -> io::Result<()> {
    writeln!(out, "# schema: aoi-lab/{schema} v1")?;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Writes the CSV to `path`, or to stdout when `path` is `None`.
pub fn emit_csv(
    path: Option<&Path>,
    schema: &str,
    comments: &[String],
    header: &[&str],
    rows: &[Vec<Cell>],
) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_csv(&mut w, schema, comments, header, rows)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_csv(&mut w, schema, comments, header, rows)?;
        }
    }
    Ok(())
}

/// Minimal CSV reader for our own files: skips `#` comments, first
/// non-comment line is the header, cells split on `,`.
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        let mut lines = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| anyhow::anyhow!("{} has no header row", path.display()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let rows = lines
            .map(|l| l.split(',').map(|s| s.trim().to_string()).collect())
            .collect();
        Ok(Self { header, rows })
    }

    pub fn column_index(&self, name: &str) -> anyhow::Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow::anyhow!("column '{name}' not found (have: {:?})", self.header))
    }

    /// Column values parsed as f64; empty cells become None.
    pub fn numeric_column(&self, idx: usize) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| {
                r.get(idx)
                    .filter(|s| !s.is_empty())
                    .and_then(|s| s.parse().ok())
            })
            .collect()
    }
}
