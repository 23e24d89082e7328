//! File formats, CSV tables, and display-only coordinate outputs.

mod text;

pub use text::{
    format_adjacency, format_draws, format_matrix, format_real, format_reals, intercepts_path,
    parse_adjacency, parse_draws, parse_matrix, parse_names, parse_pairs, parse_reals_per_line, read_draws,
    read_file, write_draws, write_file,
};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::draws::DrawSet;
use crate::error::{Error, Result};
use crate::quotient::{procrustes_align, CenteredFactor, GramMatrix};

/// Coordinates `X̂ = U Λ^{1/2}` from the top `r` eigenpairs of `B̂`, with
/// negative eigenvalues clamped to zero and each column's largest-magnitude
/// entry made positive.
pub fn embed_mean(b: &GramMatrix) -> DMatrix<f64> {
    let (n, r) = (b.n(), b.rank_bound());
    let eig = SymmetricEigen::new(b.as_matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[q].total_cmp(&eig.eigenvalues[p]));
    let mut x = DMatrix::from_fn(n, r, |i, k| {
        if k >= n {
            return 0.0;
        }
        let c = order[k];
        eig.eigenvectors[(i, c)] * eig.eigenvalues[c].max(0.0).sqrt()
    });
    for mut col in x.column_iter_mut() {
        let pivot = col.iamax();
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
    x
}

/// `Y^(m) R*_m` for every draw, each aligned to `mean_factor`. For plotting
/// only; no summary depends on these coordinates.
pub fn align_for_display(draws: &DrawSet, mean_factor: &CenteredFactor) -> Result<Vec<DMatrix<f64>>> {
    draws
        .factors()
        .iter()
        .map(|y| Ok(y.as_matrix() * procrustes_align(mean_factor, y)?.rotation))
        .collect()
}

/// CSV text with a header row. Reals use the shortest exact decimal form.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Numerical(format!("CSV encoding failed: {e}"));
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(row).map_err(to_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numerical(format!("CSV encoding failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

/// Parses a CSV table produced by [`csv_table`] into its header and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .enumerate()
        .map(|(k, rec)| {
            rec.map(|rec| rec.iter().map(str::to_string).collect())
                .map_err(|e| Error::Parse {
                    line: k + 2,
                    message: e.to_string(),
                })
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

/// Coordinate table `node,x1,...,xr`.
pub fn coordinates_csv(x: &DMatrix<f64>, names: Option<&[String]>) -> Result<String> {
    let mut header = vec!["node".to_string()];
    if names.is_some() {
        header.push("name".into());
    }
    header.extend((1..=x.ncols()).map(|k| format!("x{k}")));
    let rows: Vec<Vec<String>> = x
        .row_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut cells = vec![i.to_string()];
            if let Some(names) = names {
                cells.push(names.get(i).cloned().unwrap_or_default());
            }
            cells.extend(row.iter().map(|v| v.to_string()));
            cells
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_table(&header, &rows)
}
