//! Plain-text field snapshots.
//!
//! ```text
//! dim nx [ny [nz]] hx [hy [hz]]
//! v0 [w0 ...]
//! v1 [w1 ...]
//! ```
//!
//! One line per cell in storage order (x fastest); several whitespace
//! separated columns hold the components of vector or radiation fields.
//! Values are printed with 17 significant digits, so a round trip is exact.

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub extents: Vec<usize>,
    pub spacings: Vec<f64>,
    /// `columns[k][cell]`.
    pub columns: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn cells(&self) -> usize {
        self.extents.iter().product()
    }
}

pub fn format_snapshot<T: Real>(grid: &SpatialGrid<T>, columns: &[&[T]]) -> Result<String> {
    if columns.is_empty() {
        return Err(Error::Structural(
            "snapshot needs at least one column".into(),
        ));
    }
    for c in columns {
        grid.check_len(c.len(), "snapshot column")?;
    }
    let mut out = String::with_capacity(grid.len() * columns.len() * 25 + 64);
    out.push_str(&grid.dim().to_string());
    for n in grid.extents() {
        out.push(' ');
        out.push_str(&n.to_string());
    }
    for h in grid.spacings() {
        out.push_str(&format!(" {:.16e}", h.as_f64()));
    }
    out.push('\n');
    for i in 0..grid.len() {
        for (k, c) in columns.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{:.16e}", c[i].as_f64()));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let bad = |line: usize, msg: &str| Error::Structural(format!("snapshot line {line}: {msg}"));
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let dim: usize = tokens
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(1, "bad dimension"))?;
    if !(1..=3).contains(&dim) || tokens.len() != 1 + 2 * dim {
        return Err(bad(1, "header must read `dim nx [ny nz] hx [hy hz]`"));
    }
    let extents = tokens[1..=dim]
        .iter()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| bad(1, "bad extent"))?;
    let spacings = tokens[1 + dim..]
        .iter()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| bad(1, "bad spacing"))?;
    let cells: usize = extents.iter().product();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut rows = 0;
    for (ln, l) in lines {
        let vals = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad(ln + 1, "bad value"))?;
        if rows == 0 {
            columns = vec![Vec::with_capacity(cells); vals.len()];
        } else if vals.len() != columns.len() {
            return Err(bad(ln + 1, "inconsistent column count"));
        }
        for (c, v) in columns.iter_mut().zip(vals) {
            c.push(v);
        }
        rows += 1;
    }
    if rows != cells {
        return Err(Error::Structural(format!(
            "snapshot has {rows} rows for {cells} cells"
        )));
    }
    Ok(Snapshot {
        extents,
        spacings,
        columns,
    })
}
