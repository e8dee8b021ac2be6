use dcmase::linalg::Matrix;
use dcmase::model::{
    check_identifiability, population_diagnostics, sample_layer, CommunityAssignment, EdgeMode,
    MultilayerModel, IDENTIFIABILITY_TOL,
};
use proptest::prelude::*;

fn two_layer_model() -> MultilayerModel {
    let z = CommunityAssignment::from_sizes(&[4, 3, 5]).unwrap();
    let theta = vec![
        (0..12).map(|i| 0.3 + 0.05 * i as f64).collect(),
        (0..12).map(|i| 0.9 - 0.04 * i as f64).collect(),
    ];
    let blocks = vec![
        Matrix::from_row_slice(3, 3, &[0.9, 0.2, 0.1, 0.2, 0.8, 0.3, 0.1, 0.3, 0.7]),
        Matrix::from_row_slice(3, 3, &[0.4, 0.6, 0.1, 0.6, 0.5, 0.2, 0.1, 0.2, 0.9]),
    ];
    MultilayerModel::new(z, theta, blocks, EdgeMode::Bernoulli).unwrap()
}

#[test]
fn expected_matrix_matches_entrywise_formula() {
    let m = two_layer_model();
    let z = m.assignment().labels().to_vec();
    for l in 0..2 {
        let p = m.expected_matrix(l).unwrap();
        let (t, b) = (m.theta(l), m.block(l));
        for i in 0..12 {
            for j in 0..12 {
                let want = t[i] * t[j] * b[(z[i], z[j])];
                assert!((p[(i, j)] - want).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn rescaled_mean_degree_hits_target() {
    let m = two_layer_model().with_edge_mode(EdgeMode::Poisson).unwrap();
    let scaled = m.rescale_to_average_degree(10.0).unwrap();
    for l in 0..2 {
        let p = scaled.expected_matrix(l).unwrap();
        let degree = p.sum() / 12.0;
        assert!((degree - 10.0).abs() < 1e-9, "layer {l}: {degree}");
    }
}

#[test]
fn bernoulli_sample_mean_matches_probability() {
    let p = Matrix::from_element(200, 200, 0.3);
    let pairs = 200.0 * 201.0 / 2.0;
    let means: Vec<f64> = (0..50)
        .map(|seed| {
            let a = sample_layer(&p, EdgeMode::Bernoulli, seed).unwrap();
            let upper: f64 = (0..200)
                .map(|i| (i..200).map(|j| a[(i, j)]).sum::<f64>())
                .sum();
            upper / pairs
        })
        .collect();
    let mean = means.iter().sum::<f64>() / 50.0;
    let se = (0.3 * 0.7 / (pairs * 50.0)).sqrt();
    assert!((mean - 0.3).abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn samples_are_symmetric_binary_and_reproducible() {
    let m = two_layer_model();
    let a = m.sample(7, 3).unwrap();
    assert_eq!(a, m.sample(7, 3).unwrap());
    assert_ne!(a, m.sample(7, 4).unwrap());
    for layer in &a {
        assert_eq!(layer, &layer.transpose());
        assert!(layer.iter().all(|&x| x == 0.0 || x == 1.0));
    }
}

#[test]
fn diagnostics_match_scalar_loops() {
    let m = two_layer_model();
    let d = population_diagnostics(&m).unwrap();
    let n = 12;
    for l in 0..2 {
        let t = m.theta(l);
        let mut mags: Vec<f64> = nalgebra::SymmetricEigen::new(m.block(l).clone())
            .eigenvalues
            .iter()
            .map(|v| v.abs())
            .collect();
        mags.sort_by(|a, b| a.total_cmp(b));
        assert!((d.lambda_min[l] - mags[0]).abs() < 1e-12);
        let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (lo, hi) = t
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let snr = (lo / hi).sqrt() * mags[0].sqrt() * norm;
        assert!((d.snr[l] - snr).abs() < 1e-12);
    }
    for i in 0..n {
        let mut ave = 0.0;
        let mut max = 0.0f64;
        for l in 0..2 {
            let t = m.theta(l);
            let norm2: f64 = t.iter().map(|x| x * x).sum();
            let cubes: f64 = t.iter().map(|x| x.powi(3)).sum();
            let hi = t.iter().cloned().fold(0.0, f64::max);
            ave += cubes / (t[i] * norm2 * norm2 * d.lambda_min[l]) / 2.0;
            max = max.max(hi / (t[i] * norm2 * d.lambda_min[l].sqrt()));
        }
        assert!((d.err_ave[i] - ave).abs() < 1e-12 * ave);
        assert!((d.err_max[i] - max).abs() < 1e-12 * max);
    }
}

#[test]
fn descriptor_round_trips_through_json() {
    let m = two_layer_model();
    let json = serde_json::to_string(&m.to_descriptor()).unwrap();
    let back = MultilayerModel::from_descriptor(serde_json::from_str(&json).unwrap()).unwrap();
    for l in 0..2 {
        assert_eq!(
            back.expected_matrix(l).unwrap(),
            m.expected_matrix(l).unwrap()
        );
    }
}

fn permute(b: &Matrix, perm: &[usize]) -> Matrix {
    Matrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(perm[i], perm[j])])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Relabeling communities cannot change whether they are distinguishable.
    #[test]
    fn identifiability_is_permutation_invariant(
        w in prop::collection::vec(0.05f64..1.0, 8),
        diag in prop::collection::vec(0.5f64..1.0, 4),
        full in any::<bool>(),
        duplicate in any::<bool>(),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let mut wm = Matrix::from_row_slice(4, 2, &w);
        if duplicate {
            let r = wm.row(0).into_owned();
            wm.row_mut(2).copy_from(&r);
        }
        let mut blocks = vec![&wm * wm.transpose()];
        if full {
            blocks.push(Matrix::from_fn(4, 4, |i, j| if i == j { diag[i] } else { 0.1 }));
        }
        let base = check_identifiability(&blocks, IDENTIFIABILITY_TOL).unwrap().identifiable;
        let permuted: Vec<Matrix> = blocks.iter().map(|b| permute(b, &perm)).collect();
        let again = check_identifiability(&permuted, IDENTIFIABILITY_TOL).unwrap().identifiable;
        prop_assert_eq!(base, again);
        if full {
            prop_assert!(base);
        }
    }

    #[test]
    fn expected_degree_scales_linearly(target in 0.5f64..50.0) {
        let m = two_layer_model().with_edge_mode(EdgeMode::Poisson).unwrap();
        let scaled = m.rescale_to_average_degree(target).unwrap();
        for l in 0..2 {
            prop_assert!((scaled.mean_degree(l) - target).abs() < 1e-9 * target.max(1.0));
        }
    }
}
