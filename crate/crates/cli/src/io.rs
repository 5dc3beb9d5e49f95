use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use oqs_core::liouville::{c64, Operator};

/// Fixed 12-significant-digit scientific notation. Negative zero prints as
/// zero so that output bytes do not depend on the sign of a vanishing value.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_row(line: usize, l: &str) -> Result<Vec<f64>, String> {
    l.split(',')
        .map(|c| {
            let c = c.trim();
            c.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("line {line}: `{c}` is not a finite number"))
        })
        .collect()
}

/// Square complex matrix, one row per line, cells as `re,im` pairs.
pub fn parse_matrix_csv(text: &str) -> Result<Operator, String> {
    let rows: Vec<Vec<f64>> = data_lines(text)
        .map(|(n, l)| parse_row(n, l))
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if n == 0 {
        return Err("matrix file has no rows".into());
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != 2 * n {
            return Err(format!(
                "row {} has {} numbers; a {n}x{n} matrix needs {} (re,im per cell)",
                i + 1,
                r.len(),
                2 * n
            ));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| c64(rows[i][2 * j], rows[i][2 * j + 1])))
}

pub fn read_matrix_csv(path: &Path) -> Result<Operator, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_matrix_csv(&text).map_err(|m| format!("{}: {m}", path.display()))
}

pub fn format_matrix_csv(m: &Operator) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let cells: Vec<String> = (0..m.ncols())
            .flat_map(|j| [num(m[(i, j)].re), num(m[(i, j)].im)])
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Columns of a numeric CSV with exactly `cols` fields per line.
pub fn read_table_csv(path: &Path, cols: usize) -> Result<Vec<Vec<f64>>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut out = vec![Vec::new(); cols];
    for (n, l) in data_lines(&text) {
        let row = parse_row(n, l).map_err(|m| format!("{}: {m}", path.display()))?;
        if row.len() != cols {
            return Err(format!(
                "{}: line {n}: expected {cols} columns, found {}",
                path.display(),
                row.len()
            ));
        }
        for (c, x) in out.iter_mut().zip(row) {
            c.push(x);
        }
    }
    if out[0].is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(out)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
