//! Partition agreement scores.

use std::collections::HashMap;

use crate::error::{Error, Result};

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("no labels"));
    }
    Ok(())
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let out = labels
        .iter()
        .map(|z| {
            let next = map.len();
            *map.entry(*z).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Contingency table `table[a][b]` of two labelings, with compacted labels.
pub fn contingency(a: &[usize], b: &[usize]) -> Vec<Vec<usize>> {
    let (a, ka) = compact(a);
    let (b, kb) = compact(b);
    let mut table = vec![vec![0usize; kb]; ka];
    for (x, y) in a.iter().zip(&b) {
        table[*x][*y] += 1;
    }
    table
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Hubert–Arabie adjusted Rand index. When both partitions are trivial in the
/// same way (the expected index equals its maximum) the score is 1.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    check_lengths(a, b)?;
    let table = contingency(a, b);
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..table[0].len())
        .map(|j| choose2(table.iter().map(|r| r[j]).sum()))
        .sum();
    let total = choose2(a.len());
    let expected = rows * cols / total.max(1.0);
    let max = 0.5 * (rows + cols);
    if (max - expected).abs() < f64::EPSILON * max.max(1.0) {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Fraction of vertices misclustered under the best matching of labels,
/// `min_π (1/n) Σ 1{ẑ(i) ≠ π(z(i))}`, solved exactly as an assignment problem.
pub fn misclustering_rate(zhat: &[usize], z: &[usize]) -> Result<f64> {
    check_lengths(zhat, z)?;
    let table = contingency(zhat, z);
    let m = table.len().max(table[0].len());
    let max = table.iter().flatten().copied().max().unwrap_or(0) as i64;
    let mut cost = vec![vec![max; m]; m];
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            cost[i][j] = max - c as i64;
        }
    }
    let assignment = hungarian(&cost);
    let agree: usize = assignment
        .iter()
        .enumerate()
        .filter(|(i, j)| *i < table.len() && **j < table[0].len())
        .map(|(i, &j)| table[i][j])
        .sum();
    Ok((zhat.len() - agree) as f64 / zhat.len() as f64)
}

/// Minimum-cost perfect matching on a square cost matrix; returns the column
/// assigned to each row.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based potentials formulation.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ari_identical_and_relabelled() {
        let a = [0, 0, 1, 1, 2, 2, 2];
        assert_eq!(ari(&a, &a).unwrap(), 1.0);
        let b = [5, 5, 9, 9, 1, 1, 1];
        assert_abs_diff_eq!(ari(&a, &b).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ari_crossed_pairs() {
        // pairs: same in a = {01, 23}; same in b = {02, 13}; no overlap.
        // a=0 b=2 c=2 d=2 → 2(0·2 − 2·2)/((2)(4)+(2)(4)) = -0.5
        let v = ari(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap();
        assert_abs_diff_eq!(v, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn ari_length_mismatch() {
        assert!(matches!(
            ari(&[0, 1], &[0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn misclustering_examples() {
        let z = [0, 0, 1, 1, 2, 2];
        assert_eq!(misclustering_rate(&z, &z).unwrap(), 0.0);
        assert_eq!(misclustering_rate(&[2, 2, 0, 0, 1, 1], &z).unwrap(), 0.0);
        assert_abs_diff_eq!(
            misclustering_rate(&[1, 1, 1, 2], &[1, 1, 2, 2]).unwrap(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn misclustering_unequal_label_counts() {
        // zhat uses 3 labels, z uses 2.
        let r = misclustering_rate(&[0, 0, 1, 2], &[0, 0, 1, 1]).unwrap();
        assert_abs_diff_eq!(r, 0.25, epsilon = 1e-15);
        assert_eq!(misclustering_rate(&[0, 0, 0], &[0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn hungarian_small() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = hungarian(&cost);
        let total: i64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5);
    }
}
