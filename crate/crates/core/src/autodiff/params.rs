use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::tape::{Tape, Var};

/// Named trainable tensors, in registration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Tensor>,
}

/// Index of a parameter inside a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn values(&self) -> &[Tensor] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Tensor] {
        &mut self.values
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn total_size(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }

    /// Puts every parameter on the tape as a gradient-tracking leaf.
    pub fn bind(&self, tape: &mut Tape) -> BoundParams {
        BoundParams {
            vars: self
                .values
                .iter()
                .map(|v| tape.leaf(v.clone(), true))
                .collect(),
        }
    }

    /// Serializes as a text table.
    ///
    /// ```text
    /// gsp-cnn checkpoint v1
    /// param <name> <rows> <cols>
    /// <row 0 values, space separated>
    /// ...
    /// ```
    ///
    /// Values use Rust's shortest round-trip float formatting.
    pub fn to_checkpoint(&self) -> String {
        let mut s = String::from("gsp-cnn checkpoint v1\n");
        for (name, t) in self.names.iter().zip(&self.values) {
            writeln!(s, "param {name} {} {}", t.rows(), t.cols()).unwrap();
            for r in 0..t.rows() {
                let row: Vec<String> = t.row_slice(r).iter().map(|v| format!("{v:?}")).collect();
                writeln!(s, "{}", row.join(" ")).unwrap();
            }
        }
        s
    }

    /// Loads values from a checkpoint; names, order and shapes must match.
    pub fn load_checkpoint(&mut self, text: &str, origin: &Path) -> Result<()> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "gsp-cnn checkpoint v1")) => {}
            _ => return Err(Error::parse(origin, 1, "missing checkpoint header")),
        }
        let mut loaded = Vec::with_capacity(self.values.len());
        while let Some((ln, line)) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [tag, name, rows, cols] = parts[..] else {
                return Err(Error::parse(origin, ln + 1, "expected `param <name> <rows> <cols>`"));
            };
            if tag != "param" {
                return Err(Error::parse(origin, ln + 1, format!("unexpected token `{tag}`")));
            }
            let parse_dim = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(origin, ln + 1, format!("bad dimension `{s}`")))
            };
            let (rows, cols) = (parse_dim(rows)?, parse_dim(cols)?);
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (rl, row) = lines
                    .next()
                    .ok_or_else(|| Error::parse(origin, ln + 1, "truncated parameter"))?;
                let before = data.len();
                for tok in row.split_whitespace() {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| Error::parse(origin, rl + 1, format!("bad value `{tok}`")))?;
                    if !v.is_finite() {
                        return Err(Error::parse(origin, rl + 1, "non-finite value"));
                    }
                    data.push(v);
                }
                if data.len() - before != cols {
                    return Err(Error::parse(origin, rl + 1, format!("expected {cols} values")));
                }
            }
            loaded.push((name.to_string(), Tensor::from_vec(rows, cols, data)?, ln + 1));
        }
        if loaded.len() != self.values.len() {
            return Err(Error::Contract(format!(
                "checkpoint has {} parameters, model has {}",
                loaded.len(),
                self.values.len()
            )));
        }
        for (i, (name, t, ln)) in loaded.iter().enumerate() {
            if *name != self.names[i] || t.shape() != self.values[i].shape() {
                let (r, c) = self.values[i].shape();
                return Err(Error::parse(
                    origin,
                    *ln,
                    format!(
                        "parameter `{name}` {}x{} does not match model parameter `{}` {r}x{c}",
                        t.rows(),
                        t.cols(),
                        self.names[i]
                    ),
                ));
            }
        }
        for (i, (_, t, _)) in loaded.into_iter().enumerate() {
            self.values[i] = t;
        }
        Ok(())
    }
}

/// Tape handles for a bound [`ParamStore`], indexed by [`ParamId`].
#[derive(Clone, Debug)]
pub struct BoundParams {
    vars: Vec<Var>,
}

impl BoundParams {
    pub fn var(&self, id: ParamId) -> Var {
        self.vars[id.0]
    }

    /// Gradients after `backward`; parameters the loss did not touch get zeros.
    pub fn grads(&self, tape: &Tape) -> Vec<Tensor> {
        self.vars
            .iter()
            .map(|&v| {
                tape.grad(v).cloned().unwrap_or_else(|| {
                    let (r, c) = tape.shape(v);
                    Tensor::zeros(r, c)
                })
            })
            .collect()
    }
}
