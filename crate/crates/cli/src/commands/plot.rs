use std::path::Path;

use anyhow::bail;

use crate::csvfmt::CsvTable;
use crate::svg::{render, Series};

pub fn run(
    input: &Path,
    output: &Path,
    x_col: &str,
    y_cols: &[String],
    title: &str,
) -> anyhow::Result<()> {
    if y_cols.is_empty() {
        bail!("at least one --y column is required");
    }
    let table = CsvTable::read(input)?;
    render_chart(&table, output, x_col, y_cols, title)
}

pub fn render_chart(
    table: &CsvTable,
    output: &Path,
    x_col: &str,
    y_cols: &[String],
    title: &str,
) -> anyhow::Result<()> {
    let xi = table.column_index(x_col)?;
    let xs = table.numeric_column(xi);
    let mut series = Vec::new();
    for name in y_cols {
        let yi = table.column_index(name)?;
        let ys = table.numeric_column(yi);
        let points: Vec<(f64, f64)> = xs
            .iter()
            .zip(&ys)
            .filter_map(|(&x, &y)| Some((x?, y?)))
            .collect();
        series.push(Series {
            name: name.clone(),
            points,
        });
    }
    if series.iter().all(|s| s.points.is_empty()) {
        bail!("no plottable data: every selected cell is empty or non-numeric");
    }
    let y_label = y_cols.join(", ");
    std::fs::write(output, render(title, x_col, &y_label, &series))?;
    Ok(())
}
