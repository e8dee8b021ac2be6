//! Text formats: dense CSV matrices, layered TSV edge lists, label and
//! embedding CSVs.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! matrix written and read back is bit-identical.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, Matrix, SYMMETRY_TOL};

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    fs::write(path, matrix_to_csv(m))?;
    Ok(())
}

/// Parse a headerless CSV of floats with equal-length rows.
pub fn parse_matrix_csv(text: &str, path: &Path) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(path, idx + 1, format!("`{}`: {e}", c.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    path,
                    idx + 1,
                    format!("row has {} columns, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 0, "no rows"));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    parse_matrix_csv(&fs::read_to_string(path)?, path)
}

/// A dense CSV layer, validated to be symmetric within `1e-9`.
pub fn read_layer_csv(path: &Path) -> Result<Matrix> {
    let m = read_matrix_csv(path)?;
    check_symmetric(&m, SYMMETRY_TOL).map_err(|e| parse_err(path, 0, e.to_string()))?;
    Ok(m)
}

/// Parse a layered edge list: `layer_id \t i \t j \t weight`, 0-based vertex
/// ids, each undirected pair listed once. Layers are ordered by ascending id.
/// `n` defaults to one more than the largest vertex id.
pub fn parse_edge_list(text: &str, path: &Path, n: Option<usize>) -> Result<Vec<Matrix>> {
    let mut edges: BTreeMap<u64, Vec<(usize, usize, f64)>> = BTreeMap::new();
    let mut seen = HashSet::new();
    let mut max_vertex = 0;
    for (idx, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let lineno = idx + 1;
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 4 tab-separated columns, got {}", cols.len()),
            ));
        }
        let layer: u64 = cols[0]
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("layer id `{}`: {e}", cols[0])))?;
        let i: usize = cols[1]
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("vertex `{}`: {e}", cols[1])))?;
        let j: usize = cols[2]
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("vertex `{}`: {e}", cols[2])))?;
        let w: f64 = cols[3]
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("weight `{}`: {e}", cols[3])))?;
        if !w.is_finite() {
            return Err(parse_err(path, lineno, "weight is not finite"));
        }
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if !seen.insert((layer, lo, hi)) {
            return Err(parse_err(
                path,
                lineno,
                format!("pair ({lo},{hi}) repeated in layer {layer}"),
            ));
        }
        max_vertex = max_vertex.max(hi);
        edges.entry(layer).or_default().push((lo, hi, w));
    }
    if edges.is_empty() {
        return Err(parse_err(path, 0, "no edges"));
    }
    let n = match n {
        Some(n) if n <= max_vertex => {
            return Err(parse_err(
                path,
                0,
                format!("vertex id {max_vertex} out of range for n = {n}"),
            ));
        }
        Some(n) => n,
        None => max_vertex + 1,
    };
    Ok(edges
        .into_values()
        .map(|list| {
            let mut a = Matrix::zeros(n, n);
            for (i, j, w) in list {
                a[(i, j)] = w;
                a[(j, i)] = w;
            }
            a
        })
        .collect())
}

pub fn read_edge_list(path: &Path, n: Option<usize>) -> Result<Vec<Matrix>> {
    parse_edge_list(&fs::read_to_string(path)?, path, n)
}

/// Edge-list text for the given layers, upper triangle with diagonal,
/// nonzero entries only.
pub fn edge_list_to_string(layers: &[Matrix]) -> String {
    let mut out = String::from("# layer_id\ti\tj\tweight\n");
    for (l, a) in layers.iter().enumerate() {
        for i in 0..a.nrows() {
            for j in i..a.ncols() {
                if a[(i, j)] != 0.0 {
                    let _ = writeln!(out, "{l}\t{i}\t{j}\t{}", a[(i, j)]);
                }
            }
        }
    }
    out
}

pub fn labels_to_csv(labels: &[usize]) -> String {
    let mut out = String::from("vertex,community\n");
    for (i, z) in labels.iter().enumerate() {
        let _ = writeln!(out, "{i},{z}");
    }
    out
}

/// Labels from `vertex,community` rows (a header line is optional) or from a
/// single column of community ids. Vertices must be listed as `0..n`.
pub fn parse_labels_csv(text: &str, path: &Path) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<usize>, _> =
            cols.iter().map(|c| c.parse::<usize>()).collect();
        let cols = match parsed {
            Ok(c) => c,
            Err(_) if labels.is_empty() && idx == 0 => continue,
            Err(e) => return Err(parse_err(path, idx + 1, e.to_string())),
        };
        match cols.as_slice() {
            [z] => labels.push(*z),
            [v, z] => {
                if *v != labels.len() {
                    return Err(parse_err(
                        path,
                        idx + 1,
                        format!("expected vertex {}, found {v}", labels.len()),
                    ));
                }
                labels.push(*z);
            }
            _ => return Err(parse_err(path, idx + 1, "expected one or two columns")),
        }
    }
    if labels.is_empty() {
        return Err(parse_err(path, 0, "no labels"));
    }
    Ok(labels)
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<usize>> {
    parse_labels_csv(&fs::read_to_string(path)?, path)
}

/// Embedding rows preceded by a `kind=…,n=…,d=…` header row.
pub fn embedding_to_csv(e: &EmbeddingMatrix) -> String {
    format!(
        "kind={},n={},d={}\n{}",
        e.kind.as_str(),
        e.n(),
        e.dim(),
        matrix_to_csv(&e.rows)
    )
}
