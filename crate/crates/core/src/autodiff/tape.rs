//! Tape-based reverse-mode differentiation over [`Tensor`]s.
//!
//! Every op appends a node holding its forward value; [`Tape::backward`]
//! walks the nodes in reverse and accumulates adjoints into every node that
//! depends on a tracked leaf. Constants never receive gradients.

use super::{AutodiffError, Tensor};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// How the right operand of a binary elementwise op is broadcast.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Bcast {
    Same,
    /// `1 x cols` repeated over rows.
    Row,
    /// `1 x 1` repeated everywhere.
    Scalar,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var, Bcast),
    Sub(Var, Var, Bcast),
    Mul(Var, Var, Bcast),
    Scale(Var, f64),
    AddScalar(Var),
    Transpose(Var),
    ConcatRows(Vec<Var>),
    ConcatCols(Vec<Var>),
    MeanOfRows(Var),
    SumWithinRows(Var),
    Sum(Var),
    Sigmoid(Var),
    Relu(Var),
    Exp(Var),
    Log(Var),
    Clamp(Var, f64, f64),
    Softmax(Var),
    MaskedSoftmax { x: Var, mult: Tensor },
    LayerNorm { x: Var, inv_std: Vec<f64> },
    L2Normalize { x: Var, norms: Vec<f64> },
    SelectRows(Var, Vec<usize>),
}

struct Node {
    value: Tensor,
    op: Op,
    tracked: bool,
}

pub const LAYER_NORM_EPS: f64 = 1e-5;
const L2_EPS: f64 = 1e-12;

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Adjoints from one backward pass, indexed by [`Var`].
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient of `v`, zeros of `shape` when nothing flowed into it.
    pub fn get_or_zeros(&self, v: Var, rows: usize, cols: usize) -> Tensor {
        self.get(v).cloned().unwrap_or_else(|| Tensor::zeros(rows, cols))
    }
}

fn shape_err(op: &'static str, a: &Tensor, b: &Tensor) -> AutodiffError {
    AutodiffError::Shape { op, left: a.shape(), right: b.shape() }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, tracked: bool) -> Var {
        self.nodes.push(Node { value, op, tracked });
        Var(self.nodes.len() - 1)
    }

    fn tracked(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].tracked)
    }

    /// A leaf that receives gradients.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// A leaf that never receives gradients.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn unary(&mut self, x: Var, value: Tensor, op: Op) -> Var {
        let t = self.tracked(&[x]);
        self.push(value, op, t)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let value = self.value(a).matmul(self.value(b))?;
        let t = self.tracked(&[a, b]);
        Ok(self.push(value, Op::MatMul(a, b), t))
    }

    fn bcast_kind(&self, op: &'static str, a: Var, b: Var) -> Result<Bcast, AutodiffError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() == y.shape() {
            Ok(Bcast::Same)
        } else if y.rows() == 1 && y.cols() == 1 {
            Ok(Bcast::Scalar)
        } else if y.rows() == 1 && y.cols() == x.cols() {
            Ok(Bcast::Row)
        } else {
            Err(shape_err(op, x, y))
        }
    }

    fn elementwise(&mut self, op_name: &'static str, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Result<(Tensor, Bcast), AutodiffError> {
        let kind = self.bcast_kind(op_name, a, b)?;
        let (x, y) = (self.value(a), self.value(b));
        let cols = x.cols();
        let mut out = x.clone();
        for (k, o) in out.data_mut().iter_mut().enumerate() {
            let rhs = match kind {
                Bcast::Same => y.data()[k],
                Bcast::Row => y.data()[k % cols],
                Bcast::Scalar => y.data()[0],
            };
            *o = f(*o, rhs);
        }
        Ok((out, kind))
    }

    /// `a + b`; `b` may be a `1 x cols` row or a `1 x 1` scalar, broadcast.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (value, k) = self.elementwise("add", a, b, |x, y| x + y)?;
        let t = self.tracked(&[a, b]);
        Ok(self.push(value, Op::Add(a, b, k), t))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (value, k) = self.elementwise("sub", a, b, |x, y| x - y)?;
        let t = self.tracked(&[a, b]);
        Ok(self.push(value, Op::Sub(a, b, k), t))
    }

    /// Elementwise product with the same broadcasting as [`Tape::add`].
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (value, k) = self.elementwise("mul", a, b, |x, y| x * y)?;
        let t = self.tracked(&[a, b]);
        Ok(self.push(value, Op::Mul(a, b, k), t))
    }

    pub fn scale(&mut self, x: Var, s: f64) -> Var {
        let value = self.value(x).map(|v| v * s);
        self.unary(x, value, Op::Scale(x, s))
    }

    pub fn add_scalar(&mut self, x: Var, s: f64) -> Var {
        let value = self.value(x).map(|v| v + s);
        self.unary(x, value, Op::AddScalar(x))
    }

    pub fn transpose(&mut self, x: Var) -> Var {
        let value = self.value(x).transpose();
        self.unary(x, value, Op::Transpose(x))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, AutodiffError> {
        let first = parts.first().ok_or(AutodiffError::Empty("concat_rows"))?;
        let cols = self.value(*first).cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let v = self.value(p);
            if v.cols() != cols {
                return Err(shape_err("concat_rows", self.value(*first), v));
            }
            rows += v.rows();
            data.extend_from_slice(v.data());
        }
        let value = Tensor::new(rows, cols, data)?;
        let t = self.tracked(parts);
        Ok(self.push(value, Op::ConcatRows(parts.to_vec()), t))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, AutodiffError> {
        let first = parts.first().ok_or(AutodiffError::Empty("concat_cols"))?;
        let rows = self.value(*first).rows();
        for &p in parts {
            if self.value(p).rows() != rows {
                return Err(shape_err("concat_cols", self.value(*first), self.value(p)));
            }
        }
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut value = Tensor::zeros(rows, cols);
        let mut offset = 0;
        for &p in parts {
            let v = self.value(p);
            for i in 0..rows {
                for j in 0..v.cols() {
                    value.set(i, offset + j, v.get(i, j));
                }
            }
            offset += v.cols();
        }
        let t = self.tracked(parts);
        Ok(self.push(value, Op::ConcatCols(parts.to_vec()), t))
    }

    /// Mean of all rows, `1 x cols`.
    pub fn row_mean(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let n = v.rows().max(1) as f64;
        let value = v.column_sums().map(|s| s / n);
        self.unary(x, value, Op::MeanOfRows(x))
    }

    /// Sum within each row, `rows x 1`.
    pub fn row_sums(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let value = Tensor::column((0..v.rows()).map(|i| v.row(i).iter().sum()).collect());
        self.unary(x, value, Op::SumWithinRows(x))
    }

    /// Sum of every entry, `1 x 1`.
    pub fn sum(&mut self, x: Var) -> Var {
        let value = Tensor::scalar(self.value(x).sum());
        self.unary(x, value, Op::Sum(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let value = self.value(x).map(sigmoid);
        self.unary(x, value, Op::Sigmoid(x))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| v.max(0.0));
        self.unary(x, value, Op::Relu(x))
    }

    pub fn exp(&mut self, x: Var) -> Var {
        let value = self.value(x).map(f64::exp);
        self.unary(x, value, Op::Exp(x))
    }

    pub fn log(&mut self, x: Var) -> Var {
        let value = self.value(x).map(f64::ln);
        self.unary(x, value, Op::Log(x))
    }

    /// Clamps into `[lo, hi]`; gradient is zero outside the interval.
    pub fn clamp(&mut self, x: Var, lo: f64, hi: f64) -> Var {
        let value = self.value(x).map(|v| v.clamp(lo, hi));
        self.unary(x, value, Op::Clamp(x, lo, hi))
    }

    pub fn softmax_rows(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let mut value = v.clone();
        for i in 0..v.rows() {
            softmax_in_place(&mut value.data_mut()[i * v.cols()..(i + 1) * v.cols()], None);
        }
        self.unary(x, value, Op::Softmax(x))
    }

    /// Row softmax of `x ⊙ mult`, where entries with `exclude[k] == true`
    /// are left out of the normalization and get weight 0. A row with every
    /// entry excluded is all zeros.
    pub fn masked_softmax_rows(&mut self, x: Var, mult: &Tensor, exclude: &[bool]) -> Result<Var, AutodiffError> {
        let v = self.value(x);
        if mult.shape() != v.shape() {
            return Err(shape_err("masked_softmax_rows", v, mult));
        }
        if exclude.len() != v.data().len() {
            return Err(AutodiffError::Data { shape: v.shape(), len: exclude.len() });
        }
        let cols = v.cols();
        let mut value = v.clone();
        for (o, m) in value.data_mut().iter_mut().zip(mult.data()) {
            *o *= m;
        }
        for i in 0..v.rows() {
            let span = i * cols..(i + 1) * cols;
            softmax_in_place(&mut value.data_mut()[span.clone()], Some(&exclude[span]));
        }
        Ok(self.unary(x, value, Op::MaskedSoftmax { x, mult: mult.clone() }))
    }

    /// Per-row standardization `(x - mean) / sqrt(var + 1e-5)`, no affine.
    pub fn layer_norm_rows(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let cols = v.cols();
        let mut value = v.clone();
        let mut inv_std = Vec::with_capacity(v.rows());
        for row in value.data_mut().chunks_mut(cols.max(1)) {
            let mean = row.iter().sum::<f64>() / cols as f64;
            let var = row.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / cols as f64;
            let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            row.iter_mut().for_each(|a| *a = (*a - mean) * inv);
            inv_std.push(inv);
        }
        self.unary(x, value, Op::LayerNorm { x, inv_std })
    }

    /// Scales each row to unit L2 norm. A zero row stays zero with zero
    /// gradient, so cosine similarity with a zero vector is 0.
    pub fn l2_normalize_rows(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let cols = v.cols();
        let mut value = v.clone();
        let mut norms = Vec::with_capacity(v.rows());
        for row in value.data_mut().chunks_mut(cols.max(1)) {
            let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > L2_EPS {
                row.iter_mut().for_each(|a| *a /= norm);
            } else {
                row.iter_mut().for_each(|a| *a = 0.0);
            }
            norms.push(norm);
        }
        self.unary(x, value, Op::L2Normalize { x, norms })
    }

    pub fn select_rows(&mut self, x: Var, idx: &[usize]) -> Result<Var, AutodiffError> {
        let v = self.value(x);
        if let Some(&bad) = idx.iter().find(|&&i| i >= v.rows()) {
            return Err(AutodiffError::Index { index: bad, shape: v.shape() });
        }
        let data = idx.iter().flat_map(|&i| v.row(i).iter().copied()).collect();
        let value = Tensor::new(idx.len(), v.cols(), data)?;
        Ok(self.unary(x, value, Op::SelectRows(x, idx.to_vec())))
    }

    /// Reverse pass from a `1 x 1` output.
    pub fn backward(&self, output: Var) -> Result<Gradients, AutodiffError> {
        let out = self.value(output);
        if out.shape() != [1, 1] {
            return Err(AutodiffError::NotScalar(out.shape()));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; output.0 + 1];
        grads[output.0] = Some(Tensor::scalar(1.0));
        for i in (0..=output.0).rev() {
            let node = &self.nodes[i];
            if !node.tracked {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
        if !self.nodes[v.0].tracked {
            return;
        }
        match &mut grads[v.0] {
            Some(acc) => acc.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    fn reduce_bcast(g: &Tensor, kind: Bcast) -> Tensor {
        match kind {
            Bcast::Same => g.clone(),
            Bcast::Row => g.column_sums(),
            Bcast::Scalar => Tensor::scalar(g.sum()),
        }
    }

    fn expand_bcast(y: &Tensor, kind: Bcast, rows: usize, cols: usize) -> Tensor {
        match kind {
            Bcast::Same => y.clone(),
            Bcast::Row => {
                let data = (0..rows).flat_map(|_| y.data().iter().copied()).collect();
                Tensor::new(rows, cols, data).expect("row broadcast")
            }
            Bcast::Scalar => Tensor::filled(rows, cols, y.item()),
        }
    }

    fn propagate(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let val = |v: Var| &self.nodes[v.0].value;
        let zip_map = |a: &Tensor, b: &Tensor, f: &dyn Fn(f64, f64) -> f64| {
            let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
            Tensor::new(a.rows(), a.cols(), data).expect("same shape")
        };
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.nodes[a.0].tracked {
                    self.accumulate(grads, *a, g.matmul_raw(&val(*b).transpose()));
                }
                if self.nodes[b.0].tracked {
                    self.accumulate(grads, *b, val(*a).transpose().matmul_raw(g));
                }
            }
            Op::Add(a, b, k) => {
                self.accumulate(grads, *a, g.clone());
                self.accumulate(grads, *b, Self::reduce_bcast(g, *k));
            }
            Op::Sub(a, b, k) => {
                self.accumulate(grads, *a, g.clone());
                self.accumulate(grads, *b, Self::reduce_bcast(&g.map(|x| -x), *k));
            }
            Op::Mul(a, b, k) => {
                let (x, y) = (val(*a), val(*b));
                if self.nodes[a.0].tracked {
                    let yb = Self::expand_bcast(y, *k, x.rows(), x.cols());
                    self.accumulate(grads, *a, zip_map(g, &yb, &|p, q| p * q));
                }
                if self.nodes[b.0].tracked {
                    self.accumulate(grads, *b, Self::reduce_bcast(&zip_map(g, x, &|p, q| p * q), *k));
                }
            }
            Op::Scale(x, s) => self.accumulate(grads, *x, g.map(|v| v * s)),
            Op::AddScalar(x) => self.accumulate(grads, *x, g.clone()),
            Op::Transpose(x) => self.accumulate(grads, *x, g.transpose()),
            Op::ConcatRows(parts) => {
                let cols = g.cols();
                let mut offset = 0;
                for &p in parts {
                    let rows = val(p).rows();
                    let chunk = g.data()[offset * cols..(offset + rows) * cols].to_vec();
                    self.accumulate(grads, p, Tensor::new(rows, cols, chunk).expect("slice"));
                    offset += rows;
                }
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let (rows, cols) = (val(p).rows(), val(p).cols());
                    let mut part = Tensor::zeros(rows, cols);
                    for i in 0..rows {
                        for j in 0..cols {
                            part.set(i, j, g.get(i, offset + j));
                        }
                    }
                    self.accumulate(grads, p, part);
                    offset += cols;
                }
            }
            Op::MeanOfRows(x) => {
                let (rows, cols) = (val(*x).rows(), val(*x).cols());
                let scaled = g.map(|v| v / rows.max(1) as f64);
                self.accumulate(grads, *x, Self::expand_bcast(&scaled, Bcast::Row, rows, cols));
            }
            Op::SumWithinRows(x) => {
                let (rows, cols) = (val(*x).rows(), val(*x).cols());
                let data = (0..rows).flat_map(|i| std::iter::repeat_n(g.get(i, 0), cols)).collect();
                self.accumulate(grads, *x, Tensor::new(rows, cols, data).expect("expand"));
            }
            Op::Sum(x) => {
                let (rows, cols) = (val(*x).rows(), val(*x).cols());
                self.accumulate(grads, *x, Tensor::filled(rows, cols, g.item()));
            }
            Op::Sigmoid(x) => {
                self.accumulate(grads, *x, zip_map(g, &node.value, &|d, y| d * y * (1.0 - y)));
            }
            Op::Relu(x) => {
                self.accumulate(grads, *x, zip_map(g, val(*x), &|d, v| if v > 0.0 { d } else { 0.0 }));
            }
            Op::Exp(x) => self.accumulate(grads, *x, zip_map(g, &node.value, &|d, y| d * y)),
            Op::Log(x) => self.accumulate(grads, *x, zip_map(g, val(*x), &|d, v| d / v)),
            Op::Clamp(x, lo, hi) => {
                let (lo, hi) = (*lo, *hi);
                self.accumulate(grads, *x, zip_map(g, val(*x), &|d, v| if v >= lo && v <= hi { d } else { 0.0 }));
            }
            Op::Softmax(x) => self.accumulate(grads, *x, softmax_backward(&node.value, g)),
            Op::MaskedSoftmax { x, mult } => {
                let dz = softmax_backward(&node.value, g);
                self.accumulate(grads, *x, zip_map(&dz, mult, &|d, m| d * m));
            }
            Op::LayerNorm { x, inv_std } => {
                let y = &node.value;
                let cols = y.cols();
                let mut dx = Tensor::zeros(y.rows(), cols);
                for i in 0..y.rows() {
                    let (yr, gr) = (y.row(i), g.row(i));
                    let mean_g = gr.iter().sum::<f64>() / cols as f64;
                    let mean_gy = gr.iter().zip(yr).map(|(a, b)| a * b).sum::<f64>() / cols as f64;
                    for j in 0..cols {
                        dx.set(i, j, inv_std[i] * (gr[j] - mean_g - yr[j] * mean_gy));
                    }
                }
                self.accumulate(grads, *x, dx);
            }
            Op::L2Normalize { x, norms } => {
                let y = &node.value;
                let cols = y.cols();
                let mut dx = Tensor::zeros(y.rows(), cols);
                for i in 0..y.rows() {
                    if norms[i] <= L2_EPS {
                        continue;
                    }
                    let (yr, gr) = (y.row(i), g.row(i));
                    let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                    for j in 0..cols {
                        dx.set(i, j, (gr[j] - yr[j] * dot) / norms[i]);
                    }
                }
                self.accumulate(grads, *x, dx);
            }
            Op::SelectRows(x, idx) => {
                let src = val(*x);
                let mut dx = Tensor::zeros(src.rows(), src.cols());
                for (k, &i) in idx.iter().enumerate() {
                    for j in 0..src.cols() {
                        dx.set(i, j, dx.get(i, j) + g.get(k, j));
                    }
                }
                self.accumulate(grads, *x, dx);
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax_in_place(row: &mut [f64], exclude: Option<&[bool]>) {
    let included = |k: usize| exclude.is_none_or(|e| !e[k]);
    let max = (0..row.len()).filter(|&k| included(k)).map(|k| row[k]).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        row.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut total = 0.0;
    for (k, v) in row.iter_mut().enumerate() {
        *v = if included(k) { (*v - max).exp() } else { 0.0 };
        total += *v;
    }
    row.iter_mut().for_each(|v| *v /= total);
}

/// `dx = y ⊙ (g - <g, y>)` per row. Excluded entries have `y = 0` and so get
/// no gradient.
fn softmax_backward(y: &Tensor, g: &Tensor) -> Tensor {
    let cols = y.cols();
    let mut dx = Tensor::zeros(y.rows(), cols);
    for i in 0..y.rows() {
        let (yr, gr) = (y.row(i), g.row(i));
        let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
        for j in 0..cols {
            dx.set(i, j, yr[j] * (gr[j] - dot));
        }
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_entry_softmax() {
        let mut t = Tape::new();
        let x = t.param(Tensor::scalar(3.7));
        let y = t.softmax_rows(x);
        assert_eq!(t.value(y).item(), 1.0);
        let g = t.backward(y).unwrap();
        assert_eq!(g.get(x).unwrap().item(), 0.0);
    }

    #[test]
    fn matmul_identity_gradient() {
        let mut t = Tape::new();
        let a = t.param(Tensor::new(2, 3, vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0]).unwrap());
        let i = t.constant(Tensor::identity(3));
        let p = t.matmul(a, i).unwrap();
        assert_eq!(t.value(p), t.value(a));
        let s = t.sum(p);
        let g = t.backward(s).unwrap();
        assert_eq!(g.get(a).unwrap(), &Tensor::filled(2, 3, 1.0));
        assert!(g.get(i).is_none());
    }

    #[test]
    fn masked_softmax_excludes_entries() {
        let mut t = Tape::new();
        let x = t.param(Tensor::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap());
        let m = Tensor::filled(1, 3, 1.0);
        let y = t.masked_softmax_rows(x, &m, &[false, true, false]).unwrap();
        let v = t.value(y);
        assert_eq!(v.get(0, 1), 0.0);
        let e = (1.0f64).exp() + (3.0f64).exp();
        assert!((v.get(0, 0) - (1.0f64).exp() / e).abs() < 1e-15);
        let all = t.masked_softmax_rows(x, &m, &[true; 3]).unwrap();
        assert_eq!(t.value(all).data(), &[0.0; 3]);
    }

    #[test]
    fn shape_errors_name_both_shapes() {
        let mut t = Tape::new();
        let a = t.constant(Tensor::zeros(2, 3));
        let b = t.constant(Tensor::zeros(2, 2));
        let msg = t.add(a, b).unwrap_err().to_string();
        assert!(msg.contains("[2, 3]") && msg.contains("[2, 2]"), "{msg}");
        assert!(t.matmul(a, b).is_err());
        assert!(t.backward(a).is_err());
    }

    #[test]
    fn zero_row_normalizes_to_zero() {
        let mut t = Tape::new();
        let x = t.param(Tensor::new(2, 2, vec![0.0, 0.0, 3.0, 4.0]).unwrap());
        let y = t.l2_normalize_rows(x);
        assert_eq!(t.value(y).data(), &[0.0, 0.0, 0.6, 0.8]);
    }

    #[test]
    fn replay_is_bit_identical() {
        let run = || {
            let mut t = Tape::new();
            let a = t.param(crate::autodiff::xavier_init(3, 4, 1));
            let b = t.param(crate::autodiff::xavier_init(4, 2, 2));
            let p = t.matmul(a, b).unwrap();
            let s = t.softmax_rows(p);
            let l = t.log(s);
            let o = t.sum(l);
            let g = t.backward(o).unwrap();
            (t.value(o).item().to_bits(), g.get(a).unwrap().clone(), g.get(b).unwrap().clone())
        };
        assert_eq!(run(), run());
    }
}
