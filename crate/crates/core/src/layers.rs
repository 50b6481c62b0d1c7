//! GCN and TAGCN convolutional layers, dense head layers, and model
//! assembly from a declarative [`ModelSpec`].

use std::sync::Arc;

use rand::Rng;

use crate::aggregation::{self, FgsdConfig};
use crate::autodiff::{BoundParams, ParamId, ParamStore, Reduction, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::{self, Graph};
use crate::pooling::{self, PoolResult, PooledAdjacency};
use crate::rng::seeded_rng;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvKind {
    Gcn,
    Tagcn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, tape: &mut Tape, x: Var) -> Result<Var> {
        match self {
            Activation::Relu => tape.relu(x),
            Activation::Tanh => tape.tanh(x),
            Activation::Identity => Ok(x),
        }
    }
}

/// A propagation matrix as seen by a convolution.
#[derive(Clone, Debug)]
pub enum Operator {
    Sparse(Arc<Graph>),
    Dense(Var),
}

impl Operator {
    pub fn apply(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        match self {
            Operator::Sparse(g) => tape.sparse_matmul(g, x),
            Operator::Dense(a) => tape.matmul(*a, x),
        }
    }

    pub fn n(&self, tape: &Tape) -> usize {
        match self {
            Operator::Sparse(g) => g.n(),
            Operator::Dense(a) => tape.shape(*a).0,
        }
    }
}

/// `sigma(A_tilde x W)` with `A_tilde` supplied pre-normalized.
#[derive(Clone, Debug)]
pub struct GcnLayer {
    pub weight: ParamId,
    pub activation: Activation,
}

impl GcnLayer {
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let weight = params.add(format!("{name}.w"), Tensor::glorot(in_dim, out_dim, rng));
        Self { weight, activation }
    }

    pub fn forward(&self, tape: &mut Tape, bound: &BoundParams, op: &Operator, x: Var) -> Result<Var> {
        check_rows(tape, op, x)?;
        let h = tape.matmul(x, bound.var(self.weight))?;
        let h = op.apply(tape, h)?;
        self.activation.apply(tape, h)
    }
}

/// `sigma(sum_k A^k x W_k)`, powers applied by repeated shifts.
#[derive(Clone, Debug)]
pub struct TagcnLayer {
    pub weights: Vec<ParamId>,
    pub activation: Activation,
}

impl TagcnLayer {
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        degree: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let weights = (0..=degree)
            .map(|k| params.add(format!("{name}.w{k}"), Tensor::glorot(in_dim, out_dim, rng)))
            .collect();
        Self { weights, activation }
    }

    pub fn degree(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn forward(&self, tape: &mut Tape, bound: &BoundParams, op: &Operator, x: Var) -> Result<Var> {
        check_rows(tape, op, x)?;
        let n = op.n(tape);
        if self.degree() >= n.max(1) && self.degree() > 0 {
            return Err(Error::Degree {
                degree: self.degree(),
                n,
            });
        }
        let mut shifted = x;
        let mut out = tape.matmul(x, bound.var(self.weights[0]))?;
        for &w in &self.weights[1..] {
            shifted = op.apply(tape, shifted)?;
            let term = tape.matmul(shifted, bound.var(w))?;
            out = tape.add(out, term)?;
        }
        self.activation.apply(tape, out)
    }
}

fn check_rows(tape: &Tape, op: &Operator, x: Var) -> Result<()> {
    let n = op.n(tape);
    if tape.shape(x).0 != n {
        return Err(Error::Shape(format!(
            "signal has {} rows, operator acts on {n} vertices",
            tape.shape(x).0
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub enum ConvLayer {
    Gcn(GcnLayer),
    Tagcn(TagcnLayer),
}

impl ConvLayer {
    pub fn kind(&self) -> ConvKind {
        match self {
            ConvLayer::Gcn(_) => ConvKind::Gcn,
            ConvLayer::Tagcn(_) => ConvKind::Tagcn,
        }
    }

    pub fn forward(&self, tape: &mut Tape, bound: &BoundParams, ops: &Operators, x: Var) -> Result<Var> {
        match self {
            ConvLayer::Gcn(l) => l.forward(tape, bound, ops.for_kind(ConvKind::Gcn)?, x),
            ConvLayer::Tagcn(l) => l.forward(tape, bound, ops.for_kind(ConvKind::Tagcn)?, x),
        }
    }
}

/// `x W + b` on row vectors.
#[derive(Clone, Debug)]
pub struct DenseLayer {
    pub weight: ParamId,
    pub bias: ParamId,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let weight = params.add(format!("{name}.w"), Tensor::glorot(in_dim, out_dim, rng));
        let bias = params.add(format!("{name}.b"), Tensor::zeros(1, out_dim));
        Self {
            weight,
            bias,
            activation,
        }
    }

    pub fn forward(&self, tape: &mut Tape, bound: &BoundParams, x: Var) -> Result<Var> {
        let h = tape.matmul(x, bound.var(self.weight))?;
        let h = tape.add(h, bound.var(self.bias))?;
        self.activation.apply(tape, h)
    }
}

/// Normalized propagation matrices for one graph, built once and reused
/// for every forward pass.
#[derive(Clone, Debug)]
pub struct PreparedGraph {
    pub raw: Arc<Graph>,
    /// `normalize_sym(A + I)`.
    pub gcn: Option<Arc<Graph>>,
    /// `normalize_sym(A)` when undirected, `normalize_spectral(A)` when directed.
    pub tagcn: Option<Arc<Graph>>,
    /// Harmonic-distance histogram, when the model concatenates it.
    pub fgsd: Option<Tensor>,
}

impl PreparedGraph {
    pub fn new(g: Graph, spec: &ModelSpec) -> Result<Self> {
        let needs = |kind: ConvKind| {
            spec.layers.iter().any(|l| l.kind == kind)
                || (kind == ConvKind::Gcn && matches!(spec.pooling, PoolingSpec::Sag { .. } | PoolingSpec::Diff { .. }))
        };
        let gcn = if needs(ConvKind::Gcn) {
            Some(Arc::new(gcn_operator(&g)?))
        } else {
            None
        };
        let tagcn = if needs(ConvKind::Tagcn) {
            Some(Arc::new(tagcn_operator(&g)?))
        } else {
            None
        };
        let fgsd = match &spec.fgsd {
            Some(cfg) => Some(aggregation::fgsd_features(&g, cfg.bins, cfg.range_max)?),
            None => None,
        };
        Ok(Self {
            raw: Arc::new(g),
            gcn,
            tagcn,
            fgsd,
        })
    }

    pub fn n(&self) -> usize {
        self.raw.n()
    }

    fn operators(&self) -> Operators {
        Operators {
            gcn: self.gcn.clone().map(Operator::Sparse),
            tagcn: self.tagcn.clone().map(Operator::Sparse),
        }
    }
}

/// `D^{-1/2} (A + I) D^{-1/2}`.
pub fn gcn_operator(g: &Graph) -> Result<Graph> {
    graph::normalize_sym(&graph::add_self_loops(g))
}

/// Symmetric normalization for undirected graphs, spectral-radius scaling
/// for directed ones. Edgeless graphs pass through unchanged.
pub fn tagcn_operator(g: &Graph) -> Result<Graph> {
    if !g.is_directed() {
        graph::normalize_sym(g)
    } else if g.nnz() == 0 {
        Ok(g.clone())
    } else {
        match graph::normalize_spectral(g) {
            Err(Error::DegenerateSpectrum(_)) => Ok(g.clone()),
            other => other,
        }
    }
}

/// Operators available to convolutions at one point of the network.
#[derive(Clone, Debug)]
pub struct Operators {
    pub gcn: Option<Operator>,
    pub tagcn: Option<Operator>,
}

impl Operators {
    fn for_kind(&self, kind: ConvKind) -> Result<&Operator> {
        let op = match kind {
            ConvKind::Gcn => self.gcn.as_ref(),
            ConvKind::Tagcn => self.tagcn.as_ref(),
        };
        op.ok_or_else(|| Error::Contract(format!("graph was not prepared for {kind:?} layers")))
    }

    /// Operators for a pooled adjacency (re-normalized).
    fn pooled(tape: &mut Tape, adjacency: &PooledAdjacency) -> Result<Self> {
        Ok(match adjacency {
            PooledAdjacency::Sparse(g) => Operators {
                gcn: Some(Operator::Sparse(Arc::new(gcn_operator(g)?))),
                tagcn: Some(Operator::Sparse(Arc::new(tagcn_operator(g)?))),
            },
            PooledAdjacency::Dense(a) => Operators {
                gcn: Some(Operator::Dense(tape.sym_normalize(*a, true)?)),
                tagcn: Some(Operator::Dense(tape.sym_normalize(*a, false)?)),
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Node,
    Graph,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec {
    pub kind: ConvKind,
    /// Filter degree; ignored for GCN, which is fixed at degree 1.
    pub k: usize,
    /// Output width; `None` means "number of classes" (last node-task layer).
    pub width: Option<usize>,
    pub activation: Activation,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PoolingSpec {
    None,
    TopK { ratio: f64 },
    Sag { ratio: f64 },
    Sort { k: usize },
    Diff { clusters: usize },
}

impl PoolingSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PoolingSpec::None => "none",
            PoolingSpec::TopK { .. } => "topk",
            PoolingSpec::Sag { .. } => "sagpool",
            PoolingSpec::Sort { .. } => "sortpool",
            PoolingSpec::Diff { .. } => "diffpool",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub task: Task,
    pub layers: Vec<LayerSpec>,
    pub dropout: f64,
    pub pooling: PoolingSpec,
    /// Readout statistics, kept in canonical order (mean, sum, max, var).
    pub readout: Vec<Reduction>,
    pub fgsd: Option<FgsdConfig>,
    /// Hidden widths of the dense head; the final class layer is implicit.
    pub head_hidden: Vec<usize>,
}

impl ModelSpec {
    /// `depth` conv layers: `depth - 1` hidden ReLU layers then a logit layer.
    pub fn node_classifier(kind: ConvKind, depth: usize, hidden: usize, k: usize, dropout: f64) -> Self {
        let mut layers: Vec<LayerSpec> = (0..depth.saturating_sub(1))
            .map(|_| LayerSpec {
                kind,
                k,
                width: Some(hidden),
                activation: Activation::Relu,
            })
            .collect();
        layers.push(LayerSpec {
            kind,
            k,
            width: None,
            activation: Activation::Identity,
        });
        Self {
            task: Task::Node,
            layers,
            dropout,
            pooling: PoolingSpec::None,
            readout: Vec::new(),
            fgsd: None,
            head_hidden: Vec::new(),
        }
    }

    /// `depth` ReLU conv layers of width `hidden`, optional pooling, readout and a dense head.
    pub fn graph_classifier(
        kind: ConvKind,
        depth: usize,
        hidden: usize,
        k: usize,
        dropout: f64,
        pooling: PoolingSpec,
        readout: Vec<Reduction>,
    ) -> Self {
        let layers = (0..depth)
            .map(|_| LayerSpec {
                kind,
                k,
                width: Some(hidden),
                activation: Activation::Relu,
            })
            .collect();
        let mut readout = readout;
        readout.sort();
        readout.dedup();
        Self {
            task: Task::Graph,
            layers,
            dropout,
            pooling,
            readout,
            fgsd: None,
            head_hidden: vec![hidden],
        }
    }

    /// Hops that can influence one output vertex: sum of layer degrees.
    pub fn receptive_field(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l.kind {
                ConvKind::Gcn => 1,
                ConvKind::Tagcn => l.k,
            })
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() && self.task == Task::Node {
            return Err(Error::Spec("node model needs at least one conv layer".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Spec(format!("dropout {} not in [0, 1)", self.dropout)));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.kind == ConvKind::Tagcn && l.k == 0 && self.task == Task::Node {
                // K = 0 is a plain dense layer; allowed at layer level but not
                // as a graph model
                return Err(Error::Spec(format!("layer {i}: TAGCN degree must be >= 1")));
            }
            if l.kind == ConvKind::Tagcn && l.k == 0 {
                return Err(Error::Spec(format!("layer {i}: TAGCN degree must be >= 1")));
            }
            if l.width == Some(0) {
                return Err(Error::Spec(format!("layer {i}: width must be >= 1")));
            }
            let last = i + 1 == self.layers.len();
            if l.width.is_none() && !(last && self.task == Task::Node) {
                return Err(Error::Spec(format!(
                    "layer {i}: only the last node-task layer may take the class count as width"
                )));
            }
        }
        match self.task {
            Task::Node => {
                if self.pooling != PoolingSpec::None {
                    return Err(Error::Spec("node classification takes no pooling layer".into()));
                }
                if !self.readout.is_empty() || self.fgsd.is_some() {
                    return Err(Error::Spec("node classification takes no readout".into()));
                }
            }
            Task::Graph => {
                if self.layers.is_empty() {
                    return Err(Error::Spec("graph model needs at least one conv layer".into()));
                }
                match self.pooling {
                    PoolingSpec::TopK { ratio } | PoolingSpec::Sag { ratio }
                        if !(ratio > 0.0 && ratio <= 1.0) =>
                    {
                        return Err(Error::Spec(format!("pool ratio {ratio} not in (0, 1]")));
                    }
                    PoolingSpec::Sort { k: 0 } => {
                        return Err(Error::Spec("sortpool k must be >= 1".into()));
                    }
                    PoolingSpec::Diff { clusters: 0 } => {
                        return Err(Error::Spec("diffpool needs >= 1 cluster".into()));
                    }
                    _ => {}
                }
                let sortpool = matches!(self.pooling, PoolingSpec::Sort { .. });
                if !sortpool && self.readout.is_empty() && self.fgsd.is_none() {
                    return Err(Error::Spec("graph model needs a readout statistic".into()));
                }
                if self.head_hidden.contains(&0) {
                    return Err(Error::Spec("dense head widths must be >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum PoolLayer {
    TopK { ratio: f64, projection: ParamId },
    Sag { ratio: f64, scorer: GcnLayer },
    Sort { k: usize },
    Diff { clusters: usize, assign: GcnLayer, embed: GcnLayer },
}

/// Output of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardOutput {
    /// `N x M` for node tasks, `1 x M` for graph tasks.
    pub logits: Var,
    /// Auxiliary scalar losses to add to the objective (DiffPool).
    pub aux_losses: Vec<(&'static str, Var)>,
}

/// A built model: parameters plus layer wiring.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    input_dim: usize,
    n_classes: usize,
    pub params: ParamStore,
    convs: Vec<ConvLayer>,
    pool: Option<PoolLayer>,
    post_pool: Option<ConvLayer>,
    head: Vec<DenseLayer>,
}

fn make_conv<R: Rng + ?Sized>(
    params: &mut ParamStore,
    name: &str,
    spec: &LayerSpec,
    in_dim: usize,
    out_dim: usize,
    rng: &mut R,
) -> ConvLayer {
    match spec.kind {
        ConvKind::Gcn => ConvLayer::Gcn(GcnLayer::new(params, name, in_dim, out_dim, spec.activation, rng)),
        ConvKind::Tagcn => ConvLayer::Tagcn(TagcnLayer::new(
            params,
            name,
            in_dim,
            out_dim,
            spec.k,
            spec.activation,
            rng,
        )),
    }
}

/// Initializes parameters (Glorot uniform, zero biases) for `spec`.
pub fn build_model(spec: &ModelSpec, input_dim: usize, n_classes: usize, seed: u64) -> Result<Model> {
    spec.validate()?;
    if input_dim == 0 || n_classes == 0 {
        return Err(Error::Spec("input dimension and class count must be >= 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut params = ParamStore::new();
    let mut convs = Vec::with_capacity(spec.layers.len());
    let mut width = input_dim;
    for (i, l) in spec.layers.iter().enumerate() {
        let out = l.width.unwrap_or(n_classes);
        convs.push(make_conv(&mut params, &format!("conv{i}"), l, width, out, &mut rng));
        width = out;
    }
    if spec.task == Task::Node {
        if width != n_classes {
            return Err(Error::Spec(format!(
                "last conv layer emits {width} channels for {n_classes} classes"
            )));
        }
        return Ok(Model {
            spec: spec.clone(),
            input_dim,
            n_classes,
            params,
            convs,
            pool: None,
            post_pool: None,
            head: Vec::new(),
        });
    }

    let last = spec.layers.last().expect("validated nonempty").clone();
    let post_spec = LayerSpec {
        width: Some(width),
        activation: Activation::Relu,
        ..last
    };
    let (pool, post_pool, mut feat) = match spec.pooling {
        PoolingSpec::None => (None, None, width),
        PoolingSpec::TopK { ratio } => {
            let projection = params.add("pool.p", Tensor::glorot(width, 1, &mut rng));
            let post = make_conv(&mut params, "post", &post_spec, width, width, &mut rng);
            (Some(PoolLayer::TopK { ratio, projection }), Some(post), width)
        }
        PoolingSpec::Sag { ratio } => {
            let scorer = GcnLayer::new(&mut params, "pool.score", width, 1, Activation::Tanh, &mut rng);
            let post = make_conv(&mut params, "post", &post_spec, width, width, &mut rng);
            (Some(PoolLayer::Sag { ratio, scorer }), Some(post), width)
        }
        PoolingSpec::Sort { k } => (Some(PoolLayer::Sort { k }), None, k * width),
        PoolingSpec::Diff { clusters } => {
            let assign = GcnLayer::new(&mut params, "pool.assign", width, clusters, Activation::Identity, &mut rng);
            let embed = GcnLayer::new(&mut params, "pool.embed", width, width, Activation::Relu, &mut rng);
            let post = make_conv(&mut params, "post", &post_spec, width, width, &mut rng);
            (
                Some(PoolLayer::Diff {
                    clusters,
                    assign,
                    embed,
                }),
                Some(post),
                width,
            )
        }
    };
    if !matches!(spec.pooling, PoolingSpec::Sort { .. }) {
        feat *= spec.readout.len();
        if let Some(f) = &spec.fgsd {
            feat += f.bins;
        }
    }
    let mut head = Vec::new();
    for (i, &h) in spec.head_hidden.iter().enumerate() {
        head.push(DenseLayer::new(&mut params, &format!("head{i}"), feat, h, Activation::Relu, &mut rng));
        feat = h;
    }
    head.push(DenseLayer::new(
        &mut params,
        &format!("head{}", spec.head_hidden.len()),
        feat,
        n_classes,
        Activation::Identity,
        &mut rng,
    ));
    Ok(Model {
        spec: spec.clone(),
        input_dim,
        n_classes,
        params,
        convs,
        pool,
        post_pool,
        head,
    })
}

impl Model {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn convs(&self) -> &[ConvLayer] {
        &self.convs
    }

    pub fn prepare(&self, g: Graph) -> Result<PreparedGraph> {
        PreparedGraph::new(g, &self.spec)
    }

    /// One forward pass. Dropout applies to every conv and head input when
    /// `train` is set; `rng` is only drawn from in that case.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        graph: &PreparedGraph,
        x: Var,
        train: bool,
        rng: &mut R,
    ) -> Result<ForwardOutput> {
        if tape.shape(x) != (graph.n(), self.input_dim) {
            let (r, c) = tape.shape(x);
            return Err(Error::Shape(format!(
                "features are {r}x{c}, model expects {}x{}",
                graph.n(),
                self.input_dim
            )));
        }
        let ops = graph.operators();
        let mut h = x;
        for conv in &self.convs {
            h = tape.dropout(h, self.spec.dropout, train, rng)?;
            h = conv.forward(tape, bound, &ops, h)?;
        }
        if self.spec.task == Task::Node {
            return Ok(ForwardOutput {
                logits: h,
                aux_losses: Vec::new(),
            });
        }

        let mut aux_losses = Vec::new();
        let pooled: Option<PoolResult> = match &self.pool {
            None => None,
            Some(PoolLayer::TopK { ratio, projection }) => {
                Some(pooling::topk_pool(tape, &graph.raw, h, *ratio, bound.var(*projection))?)
            }
            Some(PoolLayer::Sag { ratio, scorer }) => {
                let op = ops.for_kind(ConvKind::Gcn)?;
                Some(pooling::sag_pool(tape, bound, &graph.raw, op, h, *ratio, scorer)?)
            }
            Some(PoolLayer::Sort { k }) => {
                let sorted = pooling::sort_pool(tape, h, *k)?;
                let (rows, cols) = tape.shape(sorted);
                let mut flat = tape.reshape(sorted, 1, rows * cols)?;
                for layer in &self.head {
                    flat = tape.dropout(flat, self.spec.dropout, train, rng)?;
                    flat = layer.forward(tape, bound, flat)?;
                }
                return Ok(ForwardOutput {
                    logits: flat,
                    aux_losses,
                });
            }
            Some(PoolLayer::Diff {
                clusters,
                assign,
                embed,
            }) => {
                let op = ops.for_kind(ConvKind::Gcn)?;
                Some(pooling::diff_pool(tape, bound, &graph.raw, op, h, assign, embed, *clusters)?)
            }
        };
        if let Some(p) = pooled {
            aux_losses.extend(p.aux_losses.iter().cloned());
            let pooled_ops = Operators::pooled(tape, &p.adjacency)?;
            let post = self.post_pool.as_ref().expect("pooling layers carry a post conv");
            let hp = tape.dropout(p.x, self.spec.dropout, train, rng)?;
            h = post.forward(tape, bound, &pooled_ops, hp)?;
        }
        let mut parts = Vec::with_capacity(2);
        if !self.spec.readout.is_empty() {
            parts.push(aggregation::readout(tape, h, &self.spec.readout)?);
        }
        if let Some(f) = &graph.fgsd {
            parts.push(tape.constant(f.clone()));
        }
        let mut z = if parts.len() == 1 {
            parts[0]
        } else {
            tape.concat_cols(&parts)?
        };
        for layer in &self.head {
            z = tape.dropout(z, self.spec.dropout, train, rng)?;
            z = layer.forward(tape, bound, z)?;
        }
        Ok(ForwardOutput {
            logits: z,
            aux_losses,
        })
    }

    /// Evaluation-mode logits on a fresh tape.
    pub fn predict(&self, graph: &PreparedGraph, features: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape);
        let x = tape.constant(features.clone());
        let mut unused = seeded_rng(0);
        let out = self.forward(&mut tape, &bound, graph, x, false, &mut unused)?;
        Ok(tape.value(out.logits).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::gradcheck::{check_gradients, DEFAULT_STEP};
    use crate::graph::{erdos_renyi, path_graph, permute, permute_signal, Permutation};

    fn bind_single(tape: &mut Tape, w: &Tensor) -> (ParamStore, BoundParams) {
        let mut store = ParamStore::new();
        store.add("w", w.clone());
        let bound = store.bind(tape);
        (store, bound)
    }

    #[test]
    fn single_node_gcn_is_dense() {
        let g = Graph::empty(1, false);
        let op = Operator::Sparse(Arc::new(gcn_operator(&g).unwrap()));
        let mut tape = Tape::new();
        let w = Tensor::from_rows(&[&[1.0, -2.0], &[0.5, 3.0]]);
        let (store, bound) = bind_single(&mut tape, &w);
        let layer = GcnLayer {
            weight: store.ids().next().unwrap(),
            activation: Activation::Relu,
        };
        let x = tape.constant(Tensor::row(&[2.0, 1.0]));
        let y = layer.forward(&mut tape, &bound, &op, x).unwrap();
        assert_eq!(tape.value(y), &Tensor::row(&[2.5, 0.0]));
    }

    #[test]
    fn isolated_nodes_identity_weights() {
        let g = Graph::empty(2, false);
        let op = Operator::Sparse(Arc::new(gcn_operator(&g).unwrap()));
        let mut tape = Tape::new();
        let (store, bound) = bind_single(&mut tape, &Tensor::identity(2));
        let layer = GcnLayer {
            weight: store.ids().next().unwrap(),
            activation: Activation::Identity,
        };
        let xv = Tensor::from_rows(&[&[1.0, 2.0], &[3.0, -4.0]]);
        let x = tape.constant(xv.clone());
        let y = layer.forward(&mut tape, &bound, &op, x).unwrap();
        assert_eq!(tape.value(y), &xv);
    }

    #[test]
    fn path_gcn_matches_hand_product() {
        // A + I on the 3-path has degrees (2, 3, 2)
        let g = path_graph(3).unwrap();
        let op = Operator::Sparse(Arc::new(gcn_operator(&g).unwrap()));
        let mut tape = Tape::new();
        let (store, bound) = bind_single(&mut tape, &Tensor::identity(1));
        let layer = GcnLayer {
            weight: store.ids().next().unwrap(),
            activation: Activation::Identity,
        };
        let x = tape.constant(Tensor::column(&[1.0, 1.0, 1.0]));
        let y = layer.forward(&mut tape, &bound, &op, x).unwrap();
        let (a, b) = (1.0 / 2.0, 1.0 / 6f64.sqrt());
        let expected = [a + b, 1.0 / 3.0 + 2.0 * b, a + b];
        for (got, want) in tape.value(y).data().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((tape.value(y)[(0, 0)] - tape.value(y)[(1, 0)]).abs() > 0.1);
    }

    #[test]
    fn tagcn_degree_zero_is_dense_layer() {
        let g = erdos_renyi(6, 0.5, 1).unwrap();
        let op = Operator::Sparse(Arc::new(g));
        let mut rng = seeded_rng(2);
        let mut tape = Tape::new();
        let mut store = ParamStore::new();
        let layer = TagcnLayer::new(&mut store, "t", 3, 2, 0, Activation::Relu, &mut rng);
        let bound = store.bind(&mut tape);
        let xv = Tensor::uniform(6, 3, 1.0, &mut rng);
        let x = tape.constant(xv.clone());
        let y = layer.forward(&mut tape, &bound, &op, x).unwrap();
        let expected = xv.matmul(store.get(layer.weights[0])).unwrap().map(|v| v.max(0.0));
        assert_eq!(tape.value(y), &expected);
    }

    #[test]
    fn tagcn_rejects_degree_at_least_n() {
        let g = path_graph(2).unwrap();
        let op = Operator::Sparse(Arc::new(g));
        let mut rng = seeded_rng(2);
        let mut tape = Tape::new();
        let mut store = ParamStore::new();
        let layer = TagcnLayer::new(&mut store, "t", 1, 1, 2, Activation::Relu, &mut rng);
        let bound = store.bind(&mut tape);
        let x = tape.constant(Tensor::column(&[1.0, 2.0]));
        assert!(matches!(
            layer.forward(&mut tape, &bound, &op, x),
            Err(Error::Degree { degree: 2, n: 2 })
        ));
    }

    #[test]
    fn tagcn_permutation_equivariant() {
        let mut rng = seeded_rng(4);
        let g = erdos_renyi(10, 0.3, 5).unwrap();
        let p = Permutation::random(10, &mut rng);
        let gp = permute(&g, &p).unwrap();
        let xv = Tensor::uniform(10, 3, 1.0, &mut rng);
        let mut store = ParamStore::new();
        let layer = TagcnLayer::new(&mut store, "t", 3, 4, 3, Activation::Relu, &mut rng);
        let run = |graph: &Graph, x: &Tensor| {
            let mut tape = Tape::new();
            let bound = store.bind(&mut tape);
            let op = Operator::Sparse(Arc::new(tagcn_operator(graph).unwrap()));
            let xv = tape.constant(x.clone());
            let y = layer.forward(&mut tape, &bound, &op, xv).unwrap();
            tape.value(y).clone()
        };
        let base = run(&g, &xv);
        let perm = run(&gp, &permute_signal(&xv, &p).unwrap());
        assert!(perm.max_abs_diff(&permute_signal(&base, &p).unwrap()) < 1e-10);
    }

    #[test]
    fn build_model_shapes() {
        let spec = ModelSpec::node_classifier(ConvKind::Gcn, 2, 16, 1, 0.5);
        let m = build_model(&spec, 1433, 7, 0).unwrap();
        let shapes: Vec<_> = m.params.values().iter().map(Tensor::shape).collect();
        assert_eq!(shapes, vec![(1433, 16), (16, 7)]);
    }

    #[test]
    fn node_spec_with_pooling_rejected() {
        let mut spec = ModelSpec::node_classifier(ConvKind::Gcn, 2, 16, 1, 0.5);
        spec.pooling = PoolingSpec::TopK { ratio: 0.5 };
        assert!(matches!(build_model(&spec, 4, 2, 0), Err(Error::Spec(_))));
    }

    #[test]
    fn inconsistent_widths_rejected() {
        let mut spec = ModelSpec::node_classifier(ConvKind::Gcn, 2, 16, 1, 0.5);
        spec.layers[1].width = Some(5);
        assert!(matches!(build_model(&spec, 4, 3, 0), Err(Error::Spec(_))));
        let mut spec = ModelSpec::node_classifier(ConvKind::Gcn, 2, 16, 1, 0.5);
        spec.layers[0].width = None;
        assert!(matches!(build_model(&spec, 4, 3, 0), Err(Error::Spec(_))));
    }

    #[test]
    fn tagcn_receptive_field() {
        let spec = ModelSpec::node_classifier(ConvKind::Tagcn, 2, 16, 3, 0.5);
        assert_eq!(spec.receptive_field(), 6);
        let spec = ModelSpec::node_classifier(ConvKind::Gcn, 3, 16, 3, 0.5);
        assert_eq!(spec.receptive_field(), 3);
    }

    #[test]
    fn tagcn_output_depends_on_k_ell_hops_only() {
        // on a path, vertex 0 sees vertex j only if j <= K * layers
        let g = path_graph(12).unwrap();
        let spec = ModelSpec::node_classifier(ConvKind::Tagcn, 2, 4, 2, 0.0);
        let model = build_model(&spec, 1, 2, 3).unwrap();
        let prepared = model.prepare(g).unwrap();
        let base = model.predict(&prepared, &Tensor::zeros(12, 1)).unwrap();
        for j in 1..12 {
            let mut x = Tensor::zeros(12, 1);
            x[(j, 0)] = 1.0;
            let y = model.predict(&prepared, &x).unwrap();
            let moved = (0..2).any(|c| (y[(0, c)] - base[(0, c)]).abs() > 0.0);
            assert_eq!(moved, j <= 4, "vertex {j}");
        }
    }

    #[test]
    fn layer_gradients_match_finite_differences() {
        let mut rng = seeded_rng(9);
        let g = erdos_renyi(8, 0.4, 3).unwrap();
        let gcn_op = Operator::Sparse(Arc::new(gcn_operator(&g).unwrap()));
        let tag_op = Operator::Sparse(Arc::new(tagcn_operator(&g).unwrap()));
        let xv = Tensor::uniform(8, 3, 1.0, &mut rng);
        let labels: Vec<usize> = (0..8).map(|i| i % 2).collect();
        let rows: Vec<usize> = (0..8).collect();
        let w1 = Tensor::glorot(3, 4, &mut rng);
        let w2 = Tensor::glorot(4, 2, &mut rng);
        let report = check_gradients(&[w1.clone(), w2.clone()], DEFAULT_STEP, |t, v| {
            let mut store = ParamStore::new();
            let id1 = store.add("w1", Tensor::zeros(3, 4));
            let id2 = store.add("w2", Tensor::zeros(4, 2));
            let _ = store;
            let x = t.constant(xv.clone());
            let h = t.matmul(x, v[0])?;
            let h = gcn_op.apply(t, h)?;
            let h = t.tanh(h)?;
            let h = t.matmul(h, v[1])?;
            let h = gcn_op.apply(t, h)?;
            let _ = (id1, id2);
            t.cross_entropy(h, &labels, &rows)
        })
        .unwrap();
        assert!(report.max_relative_error() < 1e-4, "{report:?}");

        let ws: Vec<Tensor> = (0..3).map(|_| Tensor::glorot(3, 2, &mut rng)).collect();
        let report = check_gradients(&ws, DEFAULT_STEP, |t, v| {
            let x = t.constant(xv.clone());
            let mut s = x;
            let mut out = t.matmul(x, v[0])?;
            for &w in &v[1..] {
                s = tag_op.apply(t, s)?;
                let term = t.matmul(s, w)?;
                out = t.add(out, term)?;
            }
            let out = t.tanh(out)?;
            t.cross_entropy(out, &labels, &rows)
        })
        .unwrap();
        assert!(report.max_relative_error() < 1e-4, "{report:?}");
    }
}
