use gsp_cnn::entropy::{edge_entropy, interclass_walk_counts};
use gsp_cnn::graph::{permute, Graph, Permutation};
use gsp_cnn::rng::seeded_rng;
use rand::Rng;

/// Walk counts by explicit enumeration of every vertex sequence.
fn enumerate_walks(g: &Graph, labels: &[i64], order: usize, classes: usize) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut next: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.entries() {
        if e.weight != 0.0 {
            next[e.row].push(e.col);
        }
    }
    let mut counts = vec![vec![0.0; classes]; classes];
    fn walk(v: usize, left: usize, start: usize, next: &[Vec<usize>], labels: &[i64], counts: &mut [Vec<f64>]) {
        if left == 0 {
            counts[labels[start] as usize][labels[v] as usize] += 1.0;
            return;
        }
        for &w in &next[v] {
            walk(w, left - 1, start, next, labels, counts);
        }
    }
    for v in 0..n {
        walk(v, order, v, &next, labels, &mut counts);
    }
    counts
}

fn fixtures() -> Vec<(Graph, Vec<i64>)> {
    let mut out = Vec::new();
    let path: Vec<(usize, usize, f64)> = (0..5).map(|i| (i, i + 1, 1.0)).collect();
    out.push((Graph::undirected(6, &path).unwrap(), vec![0, 0, 1, 1, 2, 2]));
    let star: Vec<(usize, usize, f64)> = (1..8).map(|i| (0, i, 0.5)).collect();
    out.push((Graph::undirected(8, &star).unwrap(), vec![1, 0, 0, 1, 1, 0, 1, 0]));
    let loops = [(0, 0, 1.0), (0, 1, 2.0), (1, 2, 1.0), (2, 0, 1.0), (3, 2, 1.0)];
    out.push((Graph::directed(4, &loops).unwrap(), vec![0, 1, 1, 0]));
    let mut rng = seeded_rng(90);
    for case in 0..60 {
        let n = rng.gen_range(2..=8);
        let directed = case % 3 == 0;
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && (directed || i < j) && rng.gen::<f64>() < 0.4 {
                    entries.push((i, j, rng.gen_range(0.1..3.0)));
                }
            }
        }
        let g = if directed {
            Graph::directed(n, &entries).unwrap()
        } else {
            Graph::undirected(n, &entries).unwrap()
        };
        let m = rng.gen_range(2..=3.min(n));
        // every class present
        let mut labels: Vec<i64> = (0..n).map(|v| (v % m) as i64).collect();
        for v in m..n {
            labels[v] = rng.gen_range(0..m as i64);
        }
        out.push((g, labels));
    }
    out
}

#[test]
fn matrix_powers_match_enumerated_walks() {
    for (case, (g, labels)) in fixtures().into_iter().enumerate() {
        let m = *labels.iter().max().unwrap() as usize + 1;
        for order in 1..=3 {
            let counts = interclass_walk_counts(&g, &labels, order).unwrap();
            let want = enumerate_walks(&g, &labels, order, m);
            for i in 0..m {
                for j in 0..m {
                    assert_eq!(counts[(i, j)], want[i][j], "case {case}, order {order}");
                }
            }
        }
    }
}

#[test]
fn rows_are_distributions_and_entropies_lie_in_unit_interval() {
    for (g, labels) in fixtures() {
        let r = edge_entropy(&g, &labels, 2).unwrap();
        for i in 0..r.classes {
            let total: f64 = r.p.row_slice(i).iter().sum();
            match r.entropy[i] {
                Some(h) => {
                    assert!((total - 1.0).abs() < 1e-12);
                    assert!((-1e-12..=1.0 + 1e-12).contains(&h));
                }
                None => {
                    assert_eq!(total, 0.0);
                    assert!(r.undefined_classes.contains(&i));
                }
            }
        }
    }
}

#[test]
fn entropy_ignores_node_order() {
    let mut rng = seeded_rng(91);
    for (g, labels) in fixtures() {
        let p = Permutation::random(g.n(), &mut rng);
        let mut moved = vec![0; labels.len()];
        for (v, &l) in labels.iter().enumerate() {
            moved[p.apply(v)] = l;
        }
        let a = edge_entropy(&g, &labels, 2).unwrap();
        let b = edge_entropy(&permute(&g, &p).unwrap(), &moved, 2).unwrap();
        assert!(a.p.max_abs_diff(&b.p) < 1e-12);
    }
}

#[test]
fn homophilic_graph_has_zero_entropy() {
    // two disjoint 4-cliques, one per class
    let mut edges = Vec::new();
    for base in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((base + i, base + j, 1.0));
            }
        }
    }
    let g = Graph::undirected(8, &edges).unwrap();
    for order in 1..=4 {
        let r = edge_entropy(&g, &[0, 0, 0, 0, 1, 1, 1, 1], order).unwrap();
        for h in r.entropy {
            assert!(h.unwrap().abs() < 1e-9);
        }
    }
}

#[test]
fn complete_graph_with_loops_has_unit_entropy() {
    for m in [2usize, 3, 4] {
        let n = 2 * m;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i..n {
                edges.push((i, j, 1.0));
            }
        }
        let g = Graph::undirected(n, &edges).unwrap();
        let labels: Vec<i64> = (0..n).map(|v| (v % m) as i64).collect();
        for order in 1..=3 {
            let r = edge_entropy(&g, &labels, order).unwrap();
            for h in r.entropy {
                assert!((h.unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }
}
