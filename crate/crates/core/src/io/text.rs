//! Whitespace-separated text formats. Reals are written with 17 significant
//! digits so every `f64` survives a write/read cycle unchanged. Blank lines
//! and lines starting with `#` are ignored by every reader.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::draws::DrawSet;
use crate::error::{Error, Result};
use crate::quotient::CenteredFactor;
use crate::sim::AdjacencyMatrix;

/// `{:.16e}`: 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_reals(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|tok| {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(line, format!("`{tok}` is not a real number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("`{tok}` is not finite")));
            }
            Ok(v)
        })
        .collect()
}

fn parse_counts(line: usize, s: &str, expected: usize, what: &str) -> Result<Vec<usize>> {
    let counts: Vec<usize> = s
        .split_whitespace()
        .map(|tok| {
            tok.parse()
                .map_err(|_| parse_err(line, format!("`{tok}` is not a count")))
        })
        .collect::<Result<_>>()?;
    if counts.len() != expected {
        return Err(parse_err(
            line,
            format!("{what} header needs {expected} integers, found {}", counts.len()),
        ));
    }
    Ok(counts)
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn push_rows(out: &mut String, m: &DMatrix<f64>) {
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&v| format_real(v)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
}

/// Header `rows cols`, then one line per row.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    push_rows(&mut out, m);
    out
}

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty matrix file"))?;
    let dims = parse_counts(hl, header, 2, "matrix")?;
    let (rows, cols) = (dims[0], dims[1]);
    let mut data = Vec::with_capacity(rows * cols);
    for k in 0..rows {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(hl, format!("expected {rows} rows, found {k}")))?;
        let vals = parse_reals(ln, l)?;
        if vals.len() != cols {
            return Err(parse_err(
                ln,
                format!("expected {cols} values, found {}", vals.len()),
            ));
        }
        data.extend(vals);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after the last row"));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

/// Header `n r M`, then `M` blocks of `n` rows separated by blank lines.
pub fn format_draws(draws: &DrawSet) -> String {
    let mut out = format!("{} {} {}\n", draws.n(), draws.rank_bound(), draws.len());
    for (m, f) in draws.factors().iter().enumerate() {
        if m > 0 {
            out.push('\n');
        }
        push_rows(&mut out, f.as_matrix());
    }
    out
}

/// Factors that pass the centering check are kept bit for bit; others are
/// recentered.
pub fn parse_draws(text: &str) -> Result<Vec<CenteredFactor>> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty draws file"))?;
    let dims = parse_counts(hl, header, 3, "draws")?;
    let (n, r, m) = (dims[0], dims[1], dims[2]);
    if n < 2 || r == 0 || m == 0 {
        return Err(parse_err(hl, "draws header needs n >= 2, r >= 1, M >= 1"));
    }
    let mut factors = Vec::with_capacity(m);
    for draw in 0..m {
        let mut data = Vec::with_capacity(n * r);
        for row in 0..n {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| parse_err(hl, format!("draw {draw} ends after {row} of {n} rows")))?;
            let vals = parse_reals(ln, l)?;
            if vals.len() != r {
                return Err(parse_err(
                    ln,
                    format!("expected {r} values, found {}", vals.len()),
                ));
            }
            data.extend(vals);
        }
        let y = DMatrix::from_row_slice(n, r, &data);
        factors.push(CenteredFactor::new(y.clone()).unwrap_or_else(|_| CenteredFactor::recentered(y)));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, format!("more rows than the {m} declared draws")));
    }
    Ok(factors)
}

pub fn format_reals(values: &[f64]) -> String {
    values.iter().map(|&v| format_real(v) + "\n").collect()
}

pub fn parse_reals_per_line(text: &str) -> Result<Vec<f64>> {
    content_lines(text)
        .map(|(ln, l)| {
            let vals = parse_reals(ln, l)?;
            match vals.as_slice() {
                [v] => Ok(*v),
                _ => Err(parse_err(ln, "expected one value per line")),
            }
        })
        .collect()
}

/// `D.intercepts` next to a draws file `D`.
pub fn intercepts_path(draws_path: &Path) -> PathBuf {
    let mut s = draws_path.as_os_str().to_owned();
    s.push(".intercepts");
    PathBuf::from(s)
}

/// Writes `path` and, when intercepts are present, its companion file.
pub fn write_draws(path: &Path, draws: &DrawSet) -> Result<()> {
    write_file(path, &format_draws(draws))?;
    if let Some(alpha) = draws.intercepts() {
        write_file(&intercepts_path(path), &format_reals(alpha))?;
    }
    Ok(())
}

/// Reads `path` and its companion intercepts file when one exists.
pub fn read_draws(path: &Path) -> Result<DrawSet> {
    let factors = parse_draws(&read_file(path)?)?;
    let companion = intercepts_path(path);
    let intercepts = if companion.exists() {
        Some(parse_reals_per_line(&read_file(&companion)?)?)
    } else {
        None
    };
    DrawSet::new(factors, intercepts)
}

/// Header `n`, then edge lines `i j` (0-based, `i < j`).
pub fn format_adjacency(a: &AdjacencyMatrix) -> String {
    let mut out = format!("{}\n", a.n());
    for (i, j) in a.edges() {
        out.push_str(&format!("{i} {j}\n"));
    }
    out
}

/// Dense when exactly `n` rows of `n` tokens follow the header, otherwise an
/// edge list.
pub fn parse_adjacency(text: &str) -> Result<AdjacencyMatrix> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty adjacency file"))?;
    let n = parse_counts(hl, header, 1, "adjacency")?[0];
    let body: Vec<(usize, Vec<&str>)> = lines
        .map(|(ln, l)| (ln, l.split_whitespace().collect()))
        .collect();
    let dense = body.len() == n && n > 0 && body.iter().all(|(_, t)| t.len() == n);
    if dense {
        let rows = body
            .iter()
            .map(|(ln, toks)| {
                toks.iter()
                    .map(|t| match *t {
                        "0" => Ok(0u8),
                        "1" => Ok(1u8),
                        other => Err(parse_err(*ln, format!("`{other}` is not 0 or 1"))),
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        return AdjacencyMatrix::from_dense(&rows);
    }
    let mut edges = Vec::with_capacity(body.len());
    for (ln, toks) in &body {
        let idx: Vec<usize> = toks
            .iter()
            .map(|t| {
                t.parse()
                    .map_err(|_| parse_err(*ln, format!("`{t}` is not a node index")))
            })
            .collect::<Result<_>>()?;
        match idx.as_slice() {
            [i, j] if i == j => return Err(parse_err(*ln, format!("self-loop at node {i}"))),
            [i, j] if *i >= n || *j >= n => {
                return Err(parse_err(
                    *ln,
                    format!("edge ({i}, {j}) out of range for n = {n}"),
                ))
            }
            [i, j] => edges.push((*i, *j)),
            _ => return Err(parse_err(*ln, "edge lines need exactly two indices")),
        }
    }
    AdjacencyMatrix::from_edges(n, &edges)
}

/// One name per line.
pub fn parse_names(text: &str) -> Vec<String> {
    content_lines(text).map(|(_, l)| l.to_string()).collect()
}

/// `i j` per line, 0-based.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, usize)>> {
    content_lines(text)
        .map(|(ln, l)| {
            let idx: Vec<usize> = l
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| parse_err(ln, format!("`{t}` is not a node index")))
                })
                .collect::<Result<_>>()?;
            match idx.as_slice() {
                [i, j] => Ok((*i, *j)),
                _ => Err(parse_err(ln, "pair lines need exactly two indices")),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn matrix_round_trip_is_exact() {
        let mut rng = stream_rng(1, 0);
        let m = DMatrix::from_fn(4, 3, |_, _| rng.random_range(-1e3..1e3) / 7.0);
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn matrix_errors_carry_line_numbers() {
        match parse_matrix("2 2\n1 2\n3 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_matrix("2 2\n1 2\n").is_err());
        assert!(parse_matrix("1 1\n1\n2\n").is_err());
        assert!(parse_matrix("1 1\nNaN\n").is_err());
    }

    #[test]
    fn draws_round_trip_is_exact() {
        let mut rng = stream_rng(2, 0);
        let factors: Vec<CenteredFactor> = (0..3)
            .map(|_| CenteredFactor::recentered(DMatrix::from_fn(5, 2, |_, _| rng.random_range(-2.0..2.0))))
            .collect();
        let draws = DrawSet::new(factors, None).unwrap();
        let back = DrawSet::new(parse_draws(&format_draws(&draws)).unwrap(), None).unwrap();
        assert_eq!(back, draws);
    }

    #[test]
    fn uncentered_draws_are_recentered() {
        let f = parse_draws("2 1 1\n1\n3\n").unwrap();
        assert_eq!(f[0].as_matrix().as_slice(), &[-1.0, 1.0]);
        assert!(parse_draws("2 1 2\n1\n3\n").is_err());
        assert!(parse_draws("2 1 1\n1\n3\n4\n").is_err());
    }

    #[test]
    fn adjacency_forms() {
        let a = parse_adjacency("3\n0 1\n1 2\n").unwrap();
        assert_eq!(a.edges(), vec![(0, 1), (1, 2)]);
        let dense = parse_adjacency("3\n0 1 0\n1 0 1\n0 1 0\n").unwrap();
        assert_eq!(dense, a);
        assert_eq!(parse_adjacency(&format_adjacency(&a)).unwrap(), a);
        let two = parse_adjacency("2\n0 1\n1 0\n").unwrap();
        assert_eq!(two.edge_count(), 1);
        assert!(parse_adjacency("3\n1 1\n").is_err());
        assert!(parse_adjacency("3\n0 5\n").is_err());
        assert!(parse_adjacency("3\n0 1 0\n0 0 1\n0 1 0\n").is_err());
        assert_eq!(parse_adjacency("4\n").unwrap().edge_count(), 0);
    }

    #[test]
    fn companion_path() {
        assert_eq!(
            intercepts_path(Path::new("out/d.txt")),
            PathBuf::from("out/d.txt.intercepts")
        );
    }
}
