use gsp_cnn::graph::{erdos_renyi, normalize_spectral, permute, permute_signal, ring_graph, Graph, Permutation};
use gsp_cnn::gsp::{poly_filter, shift, spectral_filter, spectrum, FilterCoeffs};
use gsp_cnn::rng::seeded_rng;
use gsp_cnn::{Error, Tensor};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

/// Directed or undirected random graph with uniform weights in (0, 1].
fn random_graph<R: Rng>(n: usize, directed: bool, rng: &mut R) -> Graph {
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || (!directed && j < i) {
                continue;
            }
            if rng.gen::<f64>() < 0.35 {
                entries.push((i, j, 1.0 - rng.gen::<f64>()));
            }
        }
    }
    if directed {
        Graph::directed(n, &entries).unwrap()
    } else {
        Graph::undirected(n, &entries).unwrap()
    }
}

fn random_filter<R: Rng>(n: usize, rng: &mut R) -> FilterCoeffs {
    let degree = rng.gen_range(0..n.min(4));
    FilterCoeffs::new((0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn filters_commute_with_relabeling() {
    let mut rng = seeded_rng(11);
    for case in 0..100 {
        let n = rng.gen_range(2..=20);
        let g = random_graph(n, case % 2 == 0, &mut rng);
        let c = random_filter(n, &mut rng);
        let x = Tensor::uniform(n, 2, 1.0, &mut rng);
        let p = Permutation::random(n, &mut rng);
        let lhs = poly_filter(&permute(&g, &p).unwrap(), &c, &permute_signal(&x, &p).unwrap()).unwrap();
        let rhs = permute_signal(&poly_filter(&g, &c, &x).unwrap(), &p).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-10, "case {case}");
    }
}

#[test]
fn vertex_and_spectral_filtering_agree() {
    let mut rng = seeded_rng(12);
    let mut checked = 0;
    for case in 0..100 {
        let n = rng.gen_range(2..=30);
        let raw = random_graph(n, case % 2 == 1, &mut rng);
        let g = if raw.nnz() > 0 {
            normalize_spectral(&raw).unwrap_or(raw)
        } else {
            raw
        };
        // defective adjacencies have no eigenvector basis; they count as flagged
        let s = match spectrum(&g) {
            Ok(s) => s,
            Err(Error::Numerical(_)) => continue,
            Err(e) => panic!("case {case}: {e}"),
        };
        if s.repeated_warning || s.condition_estimate > 1e6 {
            continue;
        }
        let c = random_filter(n, &mut rng);
        let x = Tensor::uniform(n, 1, 1.0, &mut rng);
        let vertex = poly_filter(&g, &c, &x).unwrap();
        let spectral = spectral_filter(&s, &c, &x).unwrap();
        assert!(vertex.max_abs_diff(&spectral) < 1e-8, "case {case}, n={n}");
        checked += 1;
    }
    assert!(checked >= 50, "only {checked} unflagged graphs");
    eprintln!("duality checked on {checked} graphs");
}

#[test]
fn ring_is_circular_shift_with_root_of_unity_spectrum() {
    for n in [2usize, 4, 8, 16] {
        let g = ring_graph(n).unwrap();
        let x = Tensor::column(&(0..n).map(|i| i as f64 + 1.0).collect::<Vec<_>>());
        let y = shift(&g, &x).unwrap();
        for i in 0..n {
            assert_eq!(y[(i, 0)], x[((i + n - 1) % n, 0)]);
        }
        let s = spectrum(&g).unwrap();
        for k in 0..n {
            let root = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / n as f64);
            let nearest = s.eigenvalues.iter().map(|z| (z - root).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-8, "n={n}, k={k}: {nearest}");
        }
    }
}

#[test]
fn er_edge_count_within_three_sigma() {
    let (n, p) = (30usize, 0.2);
    let pairs = (n * (n - 1) / 2) as f64;
    let counts: Vec<f64> = (0..100).map(|s| erdos_renyi(n, p, s).unwrap().edge_count() as f64).collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let sigma_of_mean = (pairs * p * (1.0 - p) / counts.len() as f64).sqrt();
    assert!((mean - pairs * p).abs() < 3.0 * sigma_of_mean, "{mean}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composed_filters_match_sequential_application(seed in any::<u64>(), n in 4usize..16) {
        let mut rng = seeded_rng(seed);
        let g = normalize_spectral(&random_graph(n, seed % 2 == 0, &mut rng)).unwrap_or_else(|_| Graph::empty(n, true));
        let a = FilterCoeffs::new(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).unwrap();
        let b = FilterCoeffs::new(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).unwrap();
        let x = Tensor::uniform(n, 1, 1.0, &mut rng);
        let seq = poly_filter(&g, &a, &poly_filter(&g, &b, &x).unwrap()).unwrap();
        let composed = poly_filter(&g, &a.compose(&b), &x).unwrap();
        prop_assert!(seq.max_abs_diff(&composed) < 1e-9);
    }

    #[test]
    fn filters_are_linear(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        let mut rng = seeded_rng(seed);
        let g = random_graph(8, true, &mut rng);
        let c = random_filter(8, &mut rng);
        let x = Tensor::uniform(8, 1, 1.0, &mut rng);
        let y = Tensor::uniform(8, 1, 1.0, &mut rng);
        let lhs = poly_filter(&g, &c, &x.scale(alpha).add(&y).unwrap()).unwrap();
        let rhs = poly_filter(&g, &c, &x).unwrap().scale(alpha).add(&poly_filter(&g, &c, &y).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }
}
