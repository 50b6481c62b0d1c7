use gsp_cnn::aggregation::{fgsd_features, graph_logits, harmonic_distances, readout};
use gsp_cnn::autodiff::gradcheck::numeric_gradients;
use gsp_cnn::autodiff::{ParamStore, Reduction, Tape};
use gsp_cnn::graph::{cycle_graph, erdos_renyi, path_graph, permute, permute_signal, Graph, Permutation};
use gsp_cnn::layers::{Activation, DenseLayer};
use gsp_cnn::rng::seeded_rng;
use gsp_cnn::Tensor;

const ALL: [Reduction; 4] = [Reduction::Mean, Reduction::Sum, Reduction::Max, Reduction::Var];

fn read(x: &Tensor, stats: &[Reduction]) -> Tensor {
    let mut tape = Tape::new();
    let v = tape.constant(x.clone());
    let r = readout(&mut tape, v, stats).unwrap();
    tape.value(r).clone()
}

#[test]
fn readouts_ignore_node_order() {
    let mut rng = seeded_rng(80);
    for n in [1usize, 2, 9, 25] {
        let x = Tensor::uniform(n, 3, 2.0, &mut rng);
        let p = Permutation::random(n, &mut rng);
        for k in 1..=4 {
            let stats = &ALL[..k];
            let a = read(&x, stats);
            let b = read(&permute_signal(&x, &p).unwrap(), stats);
            assert!(a.max_abs_diff(&b) < 1e-9);
            assert_eq!(a.shape(), (1, 3 * k));
        }
    }
}

#[test]
fn readouts_match_direct_statistics() {
    let mut rng = seeded_rng(81);
    let x = Tensor::uniform(7, 2, 3.0, &mut rng);
    let got = read(&x, &ALL);
    for c in 0..2 {
        let col: Vec<f64> = (0..7).map(|r| x[(r, c)]).collect();
        let sum: f64 = col.iter().sum();
        let mean = sum / 7.0;
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 7.0;
        for (slot, want) in [mean, sum, max, var].into_iter().enumerate() {
            assert!((got[(0, slot * 2 + c)] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn scaling_moves_mean_and_variance_as_expected() {
    let mut rng = seeded_rng(82);
    let x = Tensor::uniform(11, 4, 1.0, &mut rng);
    let mean = read(&x, &[Reduction::Mean]);
    let var = read(&x, &[Reduction::Var]);
    let x2 = x.scale(2.0);
    assert!(read(&x2, &[Reduction::Mean]).max_abs_diff(&mean.scale(2.0)) < 1e-12);
    assert!(read(&x2, &[Reduction::Var]).max_abs_diff(&var.scale(4.0)) < 1e-12);
}

#[test]
fn zero_head_gives_uniform_probabilities() {
    let mut rng = seeded_rng(83);
    let mut store = ParamStore::new();
    let head = [
        DenseLayer::new(&mut store, "h0", 6, 5, Activation::Relu, &mut rng),
        DenseLayer::new(&mut store, "h1", 5, 3, Activation::Identity, &mut rng),
    ];
    for v in store.values_mut() {
        *v = Tensor::zeros(v.rows(), v.cols());
    }
    let mut tape = Tape::new();
    let bound = store.bind(&mut tape);
    let z = tape.constant(Tensor::uniform(1, 6, 1.0, &mut rng));
    let logits = graph_logits(&mut tape, &bound, z, &head).unwrap();
    let probs = tape.softmax_rows(logits).unwrap();
    for &p in tape.value(probs).data() {
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn head_and_readout_gradients_match_finite_differences() {
    let mut rng = seeded_rng(84);
    let x = Tensor::uniform(6, 3, 1.0, &mut rng);
    let mut store = ParamStore::new();
    let head = [
        DenseLayer::new(&mut store, "h0", 12, 4, Activation::Tanh, &mut rng),
        DenseLayer::new(&mut store, "h1", 4, 2, Activation::Identity, &mut rng),
    ];
    for v in store.values_mut() {
        *v = Tensor::uniform(v.rows(), v.cols(), 0.5, &mut rng);
    }
    let mut inputs = store.values().to_vec();
    inputs.push(x.clone());
    let loss_at = |point: &[Tensor], tape: &mut Tape| {
        let mut s = store.clone();
        s.values_mut().clone_from_slice(&point[..point.len() - 1]);
        let bound = s.bind(tape);
        let xv = tape.leaf(point[point.len() - 1].clone(), true);
        let z = readout(tape, xv, &ALL).unwrap();
        let logits = graph_logits(tape, &bound, z, &head).unwrap();
        let l = tape.cross_entropy(logits, &[1], &[0]).unwrap();
        (bound, xv, l)
    };
    let mut tape = Tape::new();
    let (bound, xv, l) = loss_at(&inputs, &mut tape);
    tape.backward(l).unwrap();
    let mut analytic = bound.grads(&tape);
    analytic.push(tape.grad(xv).unwrap().clone());
    let numeric = numeric_gradients(&inputs, 1e-5, |pt| {
        let mut t = Tape::new();
        let (_, _, l) = loss_at(pt, &mut t);
        Ok(t.value(l).item())
    })
    .unwrap();
    for (a, n) in analytic.iter().zip(&numeric) {
        let rel = a.sub(n).unwrap().frobenius_norm() / a.frobenius_norm().max(n.frobenius_norm()).max(1e-7);
        assert!(rel < 1e-4, "{rel}");
    }
}

/// Effective resistance between `i` and `j` by grounding `j` and solving
/// the reduced Laplacian system with unit current injected at `i`.
fn effective_resistance(g: &Graph, i: usize, j: usize) -> f64 {
    let n = g.n();
    let a = g.dense().unwrap();
    let keep: Vec<usize> = (0..n).filter(|&v| v != j).collect();
    let m = keep.len();
    let mut sys = vec![vec![0.0; m + 1]; m];
    for (r, &u) in keep.iter().enumerate() {
        let deg: f64 = a.row_slice(u).iter().sum();
        for (c, &v) in keep.iter().enumerate() {
            sys[r][c] = if u == v { deg - a[(u, v)] } else { -a[(u, v)] };
        }
        sys[r][m] = if u == i { 1.0 } else { 0.0 };
    }
    // Gauss-Jordan with partial pivoting
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| sys[x][col].abs().total_cmp(&sys[y][col].abs())).unwrap();
        sys.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = sys[r][col] / sys[col][col];
                for c in col..=m {
                    sys[r][c] -= f * sys[col][c];
                }
            }
        }
    }
    let r = keep.iter().position(|&v| v == i).unwrap();
    sys[r][m] / sys[r][r]
}

#[test]
fn harmonic_distance_is_effective_resistance_on_connected_graphs() {
    let mut graphs = vec![path_graph(6).unwrap(), cycle_graph(7).unwrap()];
    for seed in 0..20 {
        let g = erdos_renyi(10, 0.5, seed).unwrap();
        if gsp_cnn::graph::connected_components(&g).iter().all(|&c| c == 0) {
            graphs.push(g);
        }
    }
    assert!(graphs.len() > 10);
    for g in &graphs {
        let d = harmonic_distances(g).unwrap();
        let n = g.n();
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                assert!((d[k] - effective_resistance(g, i, j)).abs() < 1e-9);
                k += 1;
            }
        }
    }
}

#[test]
fn fgsd_histogram_is_a_permutation_invariant_distribution() {
    let mut rng = seeded_rng(85);
    for seed in 0..10 {
        let g = erdos_renyi(12, 0.3, seed).unwrap();
        let h = fgsd_features(&g, 16, 4.0).unwrap();
        assert!((h.sum() - 1.0).abs() < 1e-12);
        assert!(h.data().iter().all(|&v| v >= 0.0));
        let p = Permutation::random(12, &mut rng);
        let hp = fgsd_features(&permute(&g, &p).unwrap(), 16, 4.0).unwrap();
        assert!(h.max_abs_diff(&hp) < 1e-12);
    }
}
