use std::sync::Arc;

use gsp_cnn::autodiff::gradcheck::{check_gradients, numeric_gradients};
use gsp_cnn::autodiff::{BoundParams, ParamStore, Tape, Var};
use gsp_cnn::graph::{permute, permute_signal, sbm, Graph, Permutation};
use gsp_cnn::layers::{gcn_operator, Activation, GcnLayer, Operator};
use gsp_cnn::pooling::{diff_pool, sag_pool, sort_pool, topk_pool, PoolResult, PooledAdjacency, SelectionRecord};
use gsp_cnn::rng::seeded_rng;
use gsp_cnn::{Result, Tensor};
use rand::Rng;

fn random_undirected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j, rng.gen_range(0.2..1.5)));
            }
        }
    }
    Graph::undirected(n, &edges).unwrap()
}

// ratios as exact fractions so the ceiling oracle is integer arithmetic
const RATIOS: [(usize, usize); 5] = [(1, 2), (3, 10), (1, 3), (9, 10), (1, 1)];

fn ceil_ratio(num: usize, den: usize, n: usize) -> usize {
    ((num * n).div_ceil(den)).max(1)
}

fn dense_adjacency(tape: &Tape, r: &PoolResult) -> Tensor {
    match &r.adjacency {
        PooledAdjacency::Sparse(g) => g.dense().unwrap(),
        PooledAdjacency::Dense(a) => tape.value(*a).clone(),
    }
}

fn asymmetry(a: &Tensor) -> f64 {
    a.max_abs_diff(&a.transpose())
}

struct Fixture {
    g: Arc<Graph>,
    op: Operator,
    x: Tensor,
}

fn fixture(n: usize, c: usize, seed: u64) -> Fixture {
    let mut rng = seeded_rng(seed);
    let g = random_undirected(n, 0.3, &mut rng);
    let op = Operator::Sparse(Arc::new(gcn_operator(&g).unwrap()));
    let x = Tensor::uniform(n, c, 1.0, &mut rng);
    Fixture {
        g: Arc::new(g),
        op,
        x,
    }
}

#[test]
fn selection_keeps_ceiling_of_ratio_and_stays_symmetric() {
    for (case, n) in [3usize, 7, 10, 20, 31].into_iter().enumerate() {
        let f = fixture(n, 4, 40 + case as u64);
        let mut rng = seeded_rng(case as u64);
        let mut store = ParamStore::new();
        let p = store.add("p", Tensor::uniform(4, 1, 1.0, &mut rng));
        let scorer = GcnLayer::new(&mut store, "score", 4, 1, Activation::Tanh, &mut rng);
        for (num, den) in RATIOS {
            let ratio = num as f64 / den as f64;
            let want = ceil_ratio(num, den, n);
            let mut tape = Tape::new();
            let bound = store.bind(&mut tape);
            let x = tape.constant(f.x.clone());
            let results = [
                topk_pool(&mut tape, &f.g, x, ratio, bound.var(p)).unwrap(),
                sag_pool(&mut tape, &bound, &f.g, &f.op, x, ratio, &scorer).unwrap(),
            ];
            for r in &results {
                let kept = r.kept().unwrap();
                assert_eq!(kept.len(), want, "n={n} ratio={num}/{den}");
                assert!(kept.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(tape.shape(r.x), (want, 4));
                let a = dense_adjacency(&tape, r);
                assert!(asymmetry(&a) <= 1e-12);
                // induced subgraph of the original adjacency
                let full = f.g.dense().unwrap();
                for (i, &u) in kept.iter().enumerate() {
                    for (j, &v) in kept.iter().enumerate() {
                        assert_eq!(a[(i, j)], full[(u, v)]);
                    }
                }
            }
        }
    }
}

#[test]
fn diffpool_adjacency_is_symmetric_and_aux_losses_are_bounded() {
    for (case, n) in [4usize, 9, 16].into_iter().enumerate() {
        let f = fixture(n, 3, 50 + case as u64);
        let mut rng = seeded_rng(case as u64);
        for clusters in 1..=n.min(4) {
            let mut store = ParamStore::new();
            let assign = GcnLayer::new(&mut store, "a", 3, clusters, Activation::Identity, &mut rng);
            let embed = GcnLayer::new(&mut store, "e", 3, 5, Activation::Relu, &mut rng);
            let mut tape = Tape::new();
            let bound = store.bind(&mut tape);
            let x = tape.constant(f.x.clone());
            let r = diff_pool(&mut tape, &bound, &f.g, &f.op, x, &assign, &embed, clusters).unwrap();
            let a = dense_adjacency(&tape, &r);
            assert_eq!(a.shape(), (clusters, clusters));
            assert!(asymmetry(&a) <= 1e-12);
            // S^T A S preserves total edge weight since rows of S sum to 1
            assert!((a.sum() - f.g.dense().unwrap().sum()).abs() < 1e-9);
            let SelectionRecord::Assignment(s) = r.record else {
                panic!("diffpool must record an assignment");
            };
            let s = tape.value(s);
            for i in 0..n {
                assert!((s.row_slice(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            for (name, v) in &r.aux_losses {
                let v = tape.value(*v).item();
                assert!(v >= 0.0, "{name} = {v}");
                if *name == "entropy" {
                    assert!(v <= (clusters as f64).ln() + 1e-12);
                }
            }
        }
    }
}

#[test]
fn selection_is_covariant_under_relabeling() {
    let mut rng = seeded_rng(60);
    for case in 0..20 {
        let n = rng.gen_range(4..=20);
        let g = random_undirected(n, 0.3, &mut rng);
        let x = Tensor::uniform(n, 3, 1.0, &mut rng);
        let perm = Permutation::random(n, &mut rng);
        let mut store = ParamStore::new();
        let p = store.add("p", Tensor::uniform(3, 1, 1.0, &mut rng));
        let scorer = GcnLayer::new(&mut store, "score", 3, 1, Activation::Tanh, &mut rng);

        let run = |g: &Graph, x: &Tensor| {
            let g = Arc::new(g.clone());
            let op = Operator::Sparse(Arc::new(gcn_operator(&g).unwrap()));
            let mut tape = Tape::new();
            let bound = store.bind(&mut tape);
            let xv = tape.constant(x.clone());
            let t = topk_pool(&mut tape, &g, xv, 0.5, bound.var(p)).unwrap();
            let s = sag_pool(&mut tape, &bound, &g, &op, xv, 0.5, &scorer).unwrap();
            [t, s].map(|r| (r.kept().unwrap().to_vec(), tape.value(r.x).clone()))
        };
        let base = run(&g, &x);
        let moved = run(&permute(&g, &perm).unwrap(), &permute_signal(&x, &perm).unwrap());
        for ((kept, xr), (kept_p, xr_p)) in base.iter().zip(&moved) {
            let mut mapped: Vec<usize> = kept.iter().map(|&i| perm.apply(i)).collect();
            mapped.sort_unstable();
            assert_eq!(&mapped, kept_p, "case {case}");
            // same gated rows, listed in the permuted graph's index order
            for (r, &i) in kept.iter().enumerate() {
                let pr = kept_p.binary_search(&perm.apply(i)).unwrap();
                for c in 0..3 {
                    assert!((xr[(r, c)] - xr_p[(pr, c)]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn sortpool_ignores_input_order() {
    let mut rng = seeded_rng(61);
    for k in [1usize, 5, 12] {
        let x = Tensor::uniform(8, 3, 1.0, &mut rng);
        let perm = Permutation::random(8, &mut rng);
        let mut tape = Tape::new();
        let a = tape.constant(x.clone());
        let b = tape.constant(permute_signal(&x, &perm).unwrap());
        let ya = sort_pool(&mut tape, a, k).unwrap();
        let yb = sort_pool(&mut tape, b, k).unwrap();
        assert_eq!(tape.value(ya), tape.value(yb));
        assert_eq!(tape.shape(ya), (k, 3));
        let last: Vec<f64> = (0..k.min(8)).map(|r| tape.value(ya)[(r, 2)]).collect();
        assert!(last.windows(2).all(|w| w[0] >= w[1]));
    }
}

/// Norm-relative error of tape gradients against central differences,
/// plus the analytic gradient norms, over every parameter in `store`.
fn param_gradcheck<F>(store: &ParamStore, mut loss: F) -> (f64, Vec<f64>)
where
    F: FnMut(&mut Tape, &BoundParams) -> Result<Var>,
{
    let mut tape = Tape::new();
    let bound = store.bind(&mut tape);
    let l = loss(&mut tape, &bound).unwrap();
    tape.backward(l).unwrap();
    let analytic = bound.grads(&tape);
    let numeric = numeric_gradients(store.values(), 1e-5, |point| {
        let mut s = store.clone();
        s.values_mut().clone_from_slice(point);
        let mut t = Tape::new();
        let b = s.bind(&mut t);
        let l = loss(&mut t, &b)?;
        Ok(t.value(l).item())
    })
    .unwrap();
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.iter().zip(&numeric) {
        let diff = a.sub(n).unwrap().frobenius_norm();
        let scale = a.frobenius_norm().max(n.frobenius_norm());
        worst = worst.max(if scale < 1e-7 { diff } else { diff / scale });
    }
    (worst, analytic.iter().map(Tensor::frobenius_norm).collect())
}

fn squared_sum(tape: &mut Tape, v: Var) -> Result<Var> {
    let sq = tape.hadamard(v, v)?;
    tape.sum_all(sq)
}

#[test]
fn pooling_parameters_receive_correct_gradients() {
    let f = fixture(10, 3, 70);
    let mut rng = seeded_rng(71);

    let mut store = ParamStore::new();
    let p = store.add("p", Tensor::uniform(3, 1, 1.0, &mut rng));
    let (err, norms) = param_gradcheck(&store, |tape, bound| {
        let x = tape.constant(f.x.clone());
        let r = topk_pool(tape, &f.g, x, 0.5, bound.var(p))?;
        squared_sum(tape, r.x)
    });
    assert!(err < 1e-3 && norms[0] > 0.0, "topk {err} {norms:?}");

    let mut store = ParamStore::new();
    let scorer = GcnLayer::new(&mut store, "score", 3, 1, Activation::Tanh, &mut rng);
    let (err, norms) = param_gradcheck(&store, |tape, bound| {
        let x = tape.constant(f.x.clone());
        let r = sag_pool(tape, bound, &f.g, &f.op, x, 0.5, &scorer)?;
        squared_sum(tape, r.x)
    });
    assert!(err < 1e-3 && norms[0] > 0.0, "sag {err} {norms:?}");

    let mut store = ParamStore::new();
    let assign = GcnLayer::new(&mut store, "a", 3, 3, Activation::Identity, &mut rng);
    let embed = GcnLayer::new(&mut store, "e", 3, 4, Activation::Tanh, &mut rng);
    let (err, norms) = param_gradcheck(&store, |tape, bound| {
        let x = tape.constant(f.x.clone());
        let r = diff_pool(tape, bound, &f.g, &f.op, x, &assign, &embed, 3)?;
        let mut loss = squared_sum(tape, r.x)?;
        let PooledAdjacency::Dense(a) = r.adjacency else {
            unreachable!()
        };
        let la = squared_sum(tape, a)?;
        loss = tape.add(loss, la)?;
        for (_, aux) in r.aux_losses {
            loss = tape.add(loss, aux)?;
        }
        Ok(loss)
    });
    assert!(err < 1e-3 && norms.iter().all(|&v| v > 0.0), "diffpool {err} {norms:?}");

    // SortPool has no parameters of its own; gradients pass through to x
    let report = check_gradients(&[f.x.clone()], 1e-5, |tape, v| {
        let y = sort_pool(tape, v[0], 6)?;
        let w = tape.constant(Tensor::uniform(6, 3, 1.0, &mut seeded_rng(72)));
        let prod = tape.hadamard(y, w)?;
        tape.sum_all(prod)
    })
    .unwrap();
    assert!(report.max_relative_error() < 1e-3);
    assert!(report.analytic[0].frobenius_norm() > 0.0);
}

#[test]
fn sag_selection_matches_argsort_oracle_on_blocks() {
    let (g, labels) = sbm(&[30, 30], 0.3, 0.02, 5).unwrap();
    let n = g.n();
    let mut x = Tensor::zeros(n, 2);
    for (v, &l) in labels.iter().enumerate() {
        x[(v, l)] = 1.0;
    }
    let mut store = ParamStore::new();
    let w = store.add("w", Tensor::column(&[1.0, -1.0]));
    let scorer = GcnLayer {
        weight: w,
        activation: Activation::Tanh,
    };
    let g = Arc::new(g);
    let op = Operator::Sparse(Arc::new(gcn_operator(&g).unwrap()));
    let mut tape = Tape::new();
    let bound = store.bind(&mut tape);
    let xv = tape.constant(x.clone());
    let r = sag_pool(&mut tape, &bound, &g, &op, xv, 0.5, &scorer).unwrap();

    // oracle: dense D^-1/2 (A + I) D^-1/2 x w, tanh, stable descending sort
    let mut a = g.dense().unwrap();
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    let deg: Vec<f64> = (0..n).map(|i| a.row_slice(i).iter().sum()).collect();
    let mut scores = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            scores[i] += a[(i, j)] / (deg[i] * deg[j]).sqrt() * (x[(j, 0)] - x[(j, 1)]);
        }
        scores[i] = scores[i].tanh();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap().then(i.cmp(&j)));
    let mut want: Vec<usize> = order[..30].to_vec();
    want.sort_unstable();
    assert_eq!(r.kept().unwrap(), want.as_slice());
    let in_first = want.iter().filter(|&&v| labels[v] == 0).count();
    assert!(in_first >= 27, "{in_first} of 30 kept nodes in the favoured block");
}
