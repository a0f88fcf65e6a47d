//! Worked examples checked against independent computations.

#![allow(clippy::needless_range_loop)]

mod common;

use std::time::Instant;

use gpic::affinity::{build_affinity, degree, normalize, similarity, AffinityMatrix};
use gpic::datasets::{generate, per_class_count, GeneratorKind, GeneratorSpec};
use gpic::kernels::{k_affinity, k_multiply, k_normalize, k_reduce, k_rowsum};
use gpic::kmeans::{kmeans_1d, within_cluster_ss};
use gpic::pic::{initial_vector, power_iterate, InitialVector};
use gpic::validation::{ari_and_jaccard, contingency};
use gpic::{gpic_cluster, pic_cluster, DenseMatrix, DenseVector, EmbeddingVector, KMeansParams, KernelConfig, PicParams};
use gpic::{DataSet, SimilarityKind};
use rand::Rng;

use common::*;

fn rbf(sigma: f64) -> SimilarityKind {
    SimilarityKind::GaussianRbf { sigma }
}

#[test]
fn cosine_of_diagonal_and_axis() {
    let got = similarity(&[1.0, 1.0], &[1.0, 0.0], SimilarityKind::Cosine).unwrap();
    assert!((got - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-15);
}

#[test]
fn affinity_matches_double_loop() {
    let mut rng = rng(11);
    for s in [SimilarityKind::Cosine, rbf(0.7)] {
        let d = random_points(&mut rng, 5, 3);
        let a = build_affinity(&d, s).unwrap();
        let want = brute_affinity(&d, s);
        for i in 0..5 {
            for j in 0..5 {
                assert!((a.matrix().get(i, j) - want[i][j]).abs() <= 1e-15, "{s} ({i},{j})");
            }
        }
    }
}

#[test]
fn random_six_by_six_rows_sum_to_one() {
    let mut rng = rng(12);
    let mut data = vec![0.0; 36];
    for i in 0..6 {
        for j in i + 1..6 {
            let x = rng.gen_range(0.01..1.0);
            data[i * 6 + j] = x;
            data[j * 6 + i] = x;
        }
    }
    let a = AffinityMatrix::new(DenseMatrix::new(6, 6, data).unwrap()).unwrap();
    let w = normalize(&a, &degree(&a).unwrap()).unwrap();
    for i in 0..6 {
        let sum = compensated_sum(w.matrix().row(i));
        assert!((sum - 1.0).abs() <= 1e-9);
    }
}

/// Two 3-cliques with nothing between them.
fn block_diagonal() -> AffinityMatrix {
    let blocks = [[0.9, 0.2, 0.5], [0.3, 0.8, 0.4]];
    let mut data = vec![0.0; 36];
    for (b, w) in blocks.iter().enumerate() {
        let o = 3 * b;
        let pairs = [(0, 1), (0, 2), (1, 2)];
        for (&(i, j), &x) in pairs.iter().zip(w) {
            data[(o + i) * 6 + o + j] = x;
            data[(o + j) * 6 + o + i] = x;
        }
    }
    AffinityMatrix::new(DenseMatrix::new(6, 6, data).unwrap()).unwrap()
}

#[test]
fn block_diagonal_iterate_is_flat_per_block() {
    let a = block_diagonal();
    let deg = degree(&a).unwrap();
    let w = normalize(&a, &deg).unwrap();

    // The eigen-solve shows eigenvalue 1 twice and everything else strictly
    // inside the unit circle, so the iterate must flatten on each block.
    let n = 6;
    let m = nalgebra::DMatrix::from_row_slice(n, n, w.matrix().as_slice());
    let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|x, y| y.total_cmp(x));
    assert!((moduli[0] - 1.0).abs() < 1e-12 && (moduli[1] - 1.0).abs() < 1e-12);
    assert!(moduli[2] < 0.9);
    let (_, e) = dominant_right_eigenvector(w.matrix());
    // any vector in the eigenvalue-1 space is constant on each block
    assert!((e[0] - e[1]).abs() < 1e-9 && (e[3] - e[5]).abs() < 1e-9);

    let v0 = initial_vector(&deg, &InitialVector::Degree).unwrap();
    let params = PicParams::new(2).with_max_iterations(50).without_early_stop();
    let (v, _) = power_iterate(&w, &v0, &params).unwrap();
    let v = v.as_slice();
    for block in [&v[..3], &v[3..]] {
        let spread = block.iter().cloned().fold(f64::MIN, f64::max) - block.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 1e-6, "spread {spread}");
    }
}

#[test]
fn two_blobs_are_recovered() {
    let d = generate(&GeneratorSpec::new(GeneratorKind::GaussianBlobs { components: 2 }, 200, 4)).unwrap();
    let r = pic_cluster(&d, rbf(0.25), &PicParams::new(2)).unwrap();
    let (ari, _) = ari_and_jaccard(d.labels().unwrap(), r.assignment.labels()).unwrap();
    assert_eq!(ari, 1.0);
}

#[test]
fn triangle_toy_gives_block_partition() {
    let (d, labels) = two_triangles();
    for s in [rbf(1.0), rbf(2.0)] {
        let r = pic_cluster(&d, s, &PicParams::new(2)).unwrap();
        let (ari, _) = ari_and_jaccard(&labels, r.assignment.labels()).unwrap();
        assert_eq!(ari, 1.0, "{s}");
    }
}

#[test]
fn identical_points_collapse_to_one_cluster() {
    let d = DataSet::from_rows("same", &vec![vec![1.0, 2.0]; 8], None).unwrap();
    let r = pic_cluster(&d, rbf(1.0), &PicParams::new(2)).unwrap();
    assert_eq!(r.assignment.distinct(), 1);
}

#[test]
fn parallel_affinity_equals_serial_on_64_points() {
    let mut rng = rng(13);
    let d = random_points(&mut rng, 64, 4);
    for s in [SimilarityKind::Cosine, rbf(0.5)] {
        let serial = build_affinity(&d, s).unwrap();
        for p in [2, 4, 8] {
            let got = k_affinity(&d, s, &KernelConfig::new(p)).unwrap();
            assert!(linf(got.matrix().as_slice(), serial.matrix().as_slice()) <= 1e-15);
        }
    }
}

#[test]
fn parallel_rowsum_and_normalize_on_33_points() {
    let mut rng = rng(14);
    let d = random_points(&mut rng, 33, 2);
    let a = build_affinity(&d, rbf(0.4)).unwrap();
    let want: Vec<f64> = (0..33).map(|i| compensated_sum(a.matrix().row(i))).collect();
    let got = k_rowsum(&a, &KernelConfig::new(4)).unwrap();
    assert!(linf(got.as_slice(), &want) <= 1e-12);
    let serial = normalize(&a, &degree(&a).unwrap()).unwrap();
    for p in [1, 2, 4] {
        let w = k_normalize(&a, &got, &KernelConfig::new(p)).unwrap();
        assert!(linf(w.matrix().as_slice(), serial.matrix().as_slice()) <= 1e-15);
    }
}

#[test]
fn parallel_matvec_on_40_by_40() {
    let mut rng = rng(15);
    let w = random_row_stochastic(&mut rng, 40);
    let raw: Vec<f64> = (0..40).map(|_| rng.gen::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    let v = EmbeddingVector::new(DenseVector::new(raw.iter().map(|x| x / s).collect()).unwrap()).unwrap();
    let want: Vec<f64> = (0..40)
        .map(|i| compensated_sum(&w.matrix().row(i).iter().zip(v.as_slice()).map(|(a, b)| a * b).collect::<Vec<_>>()))
        .collect();
    let got = k_multiply(&w, &v, &KernelConfig::new(4)).unwrap();
    assert!(linf(got.as_slice(), &want) <= 1e-12);
}

#[test]
fn reduce_length_1000() {
    let mut rng = rng(16);
    let xs: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>()).collect();
    let want = compensated_sum(&xs);
    let got = k_reduce(&DenseVector::new(xs).unwrap(), &KernelConfig::new(3)).unwrap();
    assert!(((got - want) / want).abs() <= 1e-12);
}

#[test]
fn eight_workers_match_serial_on_two_blobs() {
    let d = generate(&GeneratorSpec::new(GeneratorKind::GaussianBlobs { components: 2 }, 500, 2)).unwrap();
    let params = PicParams::new(2);
    let serial = pic_cluster(&d, rbf(0.25), &params).unwrap();
    let par = gpic_cluster(&d, rbf(0.25), &params, &KernelConfig::new(8)).unwrap();
    let truth = d.labels().unwrap();
    assert_eq!(ari_and_jaccard(truth, serial.assignment.labels()).unwrap().0, 1.0);
    assert_eq!(ari_and_jaccard(truth, par.assignment.labels()).unwrap().0, 1.0);
}

#[test]
fn forced_chunking_on_2000_points() {
    let d = generate(&GeneratorSpec::new(GeneratorKind::ThreeCircles, 2000, 6)).unwrap();
    let params = PicParams::new(3);
    let whole = gpic_cluster(&d, rbf(0.3), &params, &KernelConfig::new(2)).unwrap();
    let chunked = gpic_cluster(&d, rbf(0.3), &params, &KernelConfig::new(2).with_chunk_rows(64)).unwrap();
    assert_eq!(whole.assignment, chunked.assignment);
    assert_eq!(whole.embedding, chunked.embedding);
}

#[test]
fn kmeans_matches_exhaustive_partition() {
    let mut rng = rng(17);
    for _ in 0..50 {
        let n = rng.gen_range(5..=20);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let a = kmeans_1d(&values, &KMeansParams::new(3, 0)).unwrap();
        let got = within_cluster_ss(&values, a.labels());
        assert!((got - exhaustive_1d_kmeans(&values, 3)).abs() <= 1e-9);
    }
}

#[test]
fn rounding_rule_at_low_fraction() {
    // 0.0001 · 45000 / 3 = 3/2 exactly in rationals; half rounds up
    let per = per_class_count(45000, 3, 0.0001);
    assert!(per == 1 || per == 2);
    assert_eq!(per, 2);
}

#[test]
fn contingency_marginals_are_class_sizes() {
    let mut rng = rng(18);
    let truth: Vec<usize> = (0..30).map(|_| rng.gen_range(0..4)).collect();
    let pred: Vec<usize> = (0..30).map(|_| rng.gen_range(0..3)).collect();
    let t = contingency(&truth, &pred).unwrap();
    for (c, &sum) in t.row_sums().iter().enumerate() {
        assert_eq!(sum as usize, truth.iter().filter(|&&l| l == c).count());
    }
    for (c, &sum) in t.col_sums().iter().enumerate() {
        assert_eq!(sum as usize, pred.iter().filter(|&&l| l == c).count());
    }
}

#[test]
fn crossed_pair_indices() {
    let (ari, jac) = ari_and_jaccard(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    assert_eq!(ari, brute_ari(&[0, 0, 1, 1], &[0, 1, 0, 1]));
    assert_eq!(ari, -0.5);
    assert_eq!(jac, 0.0);
    let (_, jac) = ari_and_jaccard(&[0, 0, 0], &[0, 0, 1]).unwrap();
    assert_eq!(jac, brute_jaccard(&[0, 0, 0], &[0, 0, 1]));
    assert!((jac - 1.0 / 3.0).abs() <= 1e-15);
}

fn cores() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

#[test]
fn affinity_scales_with_workers() {
    if cores() < 4 {
        eprintln!("skipped: needs a host with at least 4 cores, found {}", cores());
        return;
    }
    let mut rng = rng(19);
    let d = random_points(&mut rng, 4096, 2);
    let time = |p| {
        let start = Instant::now();
        k_affinity(&d, SimilarityKind::Cosine, &KernelConfig::new(p)).unwrap();
        start.elapsed().as_secs_f64()
    };
    time(1);
    let (t1, t4) = (time(1), time(4));
    assert!(t4 <= 0.6 * t1, "p=4 {t4:.3}s vs p=1 {t1:.3}s");
}

#[test]
fn four_workers_beat_one_at_4000_points() {
    if cores() < 4 {
        eprintln!("skipped: needs a host with at least 4 cores, found {}", cores());
        return;
    }
    use gpic::bench::{profile, Backend, RunConfig};
    let d = generate(&GeneratorSpec::new(GeneratorKind::GaussianBlobs { components: 3 }, 4000, 1)).unwrap();
    let cfg = |p| RunConfig {
        backend: Backend::Parallel,
        kernel: KernelConfig::new(p),
        similarity: SimilarityKind::Cosine,
        params: PicParams::benchmark_preset(3),
    };
    let (report, _) = profile(&d, &cfg(4), 2, Some(&cfg(1))).unwrap();
    assert!(report.speedup.unwrap() > 1.0);
}

#[test]
fn phases_partition_total() {
    let d = generate(&GeneratorSpec::new(GeneratorKind::TwoMoons, 1500, 3)).unwrap();
    for r in [
        pic_cluster(&d, rbf(0.2), &PicParams::new(2)).unwrap(),
        gpic_cluster(&d, rbf(0.2), &PicParams::new(2), &KernelConfig::new(2)).unwrap(),
    ] {
        let t = r.timings;
        for phase in [t.affinity, t.rowsum, t.normalize, t.iterate, t.kmeans] {
            assert!(phase >= 0.0 && phase <= t.total);
        }
        let sum = t.components_sum();
        assert!(sum <= t.total && sum >= 0.95 * t.total, "{t:?}");
    }
}

#[test]
fn full_fraction_reproduces_full_run() {
    use gpic::bench::{run_experiment2, Backend, RunConfig};
    let d = generate(&GeneratorSpec::new(GeneratorKind::GaussianBlobs { components: 3 }, 600, 8)).unwrap();
    let cfg = RunConfig {
        backend: Backend::Serial,
        kernel: KernelConfig::new(1),
        similarity: rbf(1.0),
        params: PicParams::new(3),
    };
    let full = cfg.run(&d).unwrap();
    let (ari, jaccard) = ari_and_jaccard(d.labels().unwrap(), full.assignment.labels()).unwrap();
    let rows = run_experiment2(&d, &cfg, &[1.0], 2, 0).unwrap();
    assert_eq!(rows[0].sample_size, 600);
    assert_eq!((rows[0].ari_mean, rows[0].jaccard_mean), (ari, jaccard));
    assert_eq!((rows[0].ari_std, rows[0].jaccard_std), (0.0, 0.0));
}
