use dcmase::estimation::{
    oos_mse_table, plugin_estimates, reconstruct_expectation, reconstruction_mse,
};
use dcmase::linalg::Matrix;
use dcmase::model::{CommunityAssignment, EdgeMode, MultilayerModel};
use dcmase::{ari, misclustering_rate, DcMaseConfig, Method};
use proptest::prelude::*;

fn layer(n: usize, seed: u64) -> Matrix {
    let z = CommunityAssignment::balanced(n, 2).unwrap();
    let b = Matrix::from_row_slice(2, 2, &[0.6, 0.1, 0.1, 0.5]);
    let th = vec![(0..n).map(|i| 0.4 + 0.05 * (i % 7) as f64).collect()];
    MultilayerModel::new(z, th, vec![b], EdgeMode::Bernoulli)
        .unwrap()
        .sample(seed, 0)
        .unwrap()
        .remove(0)
}

#[test]
fn plugin_matches_hand_loops() {
    let a = layer(20, 1);
    let z = CommunityAssignment::balanced(20, 2).unwrap();
    let params = plugin_estimates(std::slice::from_ref(&a), &z).unwrap();
    let labels = z.labels();
    let degree: Vec<f64> = (0..20).map(|i| (0..20).map(|j| a[(i, j)]).sum()).collect();
    for i in 0..20 {
        let members: Vec<usize> = (0..20).filter(|&j| labels[j] == labels[i]).collect();
        let mean = members.iter().map(|&j| degree[j]).sum::<f64>() / members.len() as f64;
        assert!((params.theta[0][i] - degree[i] / mean).abs() < 1e-12);
    }
    for r in 0..2 {
        for s in 0..2 {
            let mut total = 0.0;
            let mut count = 0.0;
            for i in 0..20 {
                for j in 0..20 {
                    if labels[i] == r && labels[j] == s {
                        total += a[(i, j)];
                        count += 1.0;
                    }
                }
            }
            assert!((params.blocks[0][(r, s)] - total / count).abs() < 1e-12);
        }
    }
}

#[test]
fn single_community_reconstruction_is_degree_outer_product() {
    let a = layer(16, 2);
    let z = CommunityAssignment::balanced(16, 1).unwrap();
    let params = plugin_estimates(std::slice::from_ref(&a), &z).unwrap();
    let p = reconstruct_expectation(&params, 0).unwrap();
    let d: Vec<f64> = (0..16).map(|i| a.row(i).sum()).collect();
    let total: f64 = d.iter().sum();
    for i in 0..16 {
        for j in 0..16 {
            assert!((p[(i, j)] - d[i] * d[j] / total).abs() < 1e-12);
        }
    }
}

#[test]
fn population_input_has_zero_error() {
    let z = CommunityAssignment::from_sizes(&[5, 9, 6]).unwrap();
    let b = Matrix::from_row_slice(3, 3, &[0.7, 0.2, 0.1, 0.2, 0.5, 0.3, 0.1, 0.3, 0.9]);
    let th = vec![(0..20).map(|i| 0.3 + 0.03 * i as f64).collect()];
    let m = MultilayerModel::new(z.clone(), th, vec![b], EdgeMode::Bernoulli).unwrap();
    let mse = reconstruction_mse(&m.expected_matrix(0).unwrap(), &z).unwrap();
    assert!(mse < 1e-28);
}

#[test]
fn oos_table_covers_grid_and_prefers_true_k() {
    let z = CommunityAssignment::balanced(60, 3).unwrap();
    let b = Matrix::from_row_slice(3, 3, &[0.9, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.9]);
    let th = (0..4).map(|_| vec![0.8; 60]).collect();
    let m = MultilayerModel::new(z, th, vec![b; 4], EdgeMode::Bernoulli).unwrap();
    let a = m.sample(5, 0).unwrap();
    let table = oos_mse_table(&a, Method::DcMase, &[1, 3], &DcMaseConfig::default(), true).unwrap();
    assert_eq!(table.len(), 8);
    let mean = |k: usize| {
        table
            .iter()
            .filter(|r| r.k == k)
            .map(|r| r.mse)
            .sum::<f64>()
            / 4.0
    };
    assert!(mean(3) < mean(1));
}

// Brute-force metric oracles on small inputs.
fn pair_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut t = [0.0f64; 4];
    for i in 0..n {
        for j in (i + 1)..n {
            t[(a[i] == a[j]) as usize * 2 + (b[i] == b[j]) as usize] += 1.0;
        }
    }
    let pairs = t.iter().sum::<f64>();
    let (sa, sb) = (t[3] + t[2], t[3] + t[1]);
    let expected = sa * sb / pairs;
    let max = 0.5 * (sa + sb);
    if max == expected {
        1.0
    } else {
        (t[3] - expected) / (max - expected)
    }
}

proptest! {
    #[test]
    fn ari_matches_pair_counting(a in prop::collection::vec(0usize..4, 2..14), seed in any::<u64>()) {
        let b: Vec<usize> = a.iter().enumerate().map(|(i, x)| ((*x as u64 * 31 + i as u64 + seed) % 3) as usize).collect();
        prop_assert!((ari(&a, &b).unwrap() - pair_ari(&a, &b)).abs() < 1e-12);
        prop_assert!((ari(&a, &b).unwrap() - ari(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn relabeling_preserves_metrics(z in prop::collection::vec(0usize..3, 1..20)) {
        let relabeled: Vec<usize> = z.iter().map(|x| (x + 1) % 3).collect();
        prop_assert_eq!(misclustering_rate(&relabeled, &z).unwrap(), 0.0);
        prop_assert!((ari(&relabeled, &z).unwrap() - 1.0).abs() < 1e-12);
    }
}
