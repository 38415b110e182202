//! Tape-based reverse-mode differentiation over real tensors.
//!
//! Every primitive appends a node to the tape; node indices are therefore a
//! topological order and [`Tape::backward`] walks them in reverse. The tape is
//! emptied by `backward`, so one tape corresponds to one training step.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::tensor::{numel, Tensor};

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op<T> {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    MatMul(Var, Var),
    Affine(Var, Var, Var),
    Sum(Var),
    Mean(Var),
    SumLast(Var),
    MeanLast(Var),
    Neg(Var),
    Scale(Var, T),
    Offset(Var),
    Tanh(Var),
    Relu(Var),
    Sigmoid(Var),
    Sin(Var),
    Cos(Var),
    Square(Var),
    Sqrt(Var),
    Softmax(Var),
    Concat(Vec<Var>),
    Slice(Var, usize),
    Reshape(Var),
}

#[derive(Clone, Debug)]
struct Node<T> {
    shape: Vec<usize>,
    value: Vec<T>,
    op: Op<T>,
    requires_grad: bool,
}

/// Per-node gradients produced by one backward pass.
#[derive(Clone, Debug)]
pub struct Gradients<T> {
    grads: Vec<Option<Vec<T>>>,
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, v: Var) -> Option<&[T]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

fn last_dim(shape: &[usize]) -> usize {
    shape.last().copied().unwrap_or(1)
}

/// Numpy-style broadcast of two shapes.
fn broadcast_shape(a: &[usize], b: &[usize]) -> Option<Vec<usize>> {
    let rank = a.len().max(b.len());
    let mut out = vec![0; rank];
    for i in 0..rank {
        let da = if i + a.len() >= rank { a[i + a.len() - rank] } else { 1 };
        let db = if i + b.len() >= rank { b[i + b.len() - rank] } else { 1 };
        out[i] = if da == db {
            da
        } else if da == 1 {
            db
        } else if db == 1 {
            da
        } else {
            return None;
        };
    }
    Some(out)
}

/// For every flat index of `out`, the flat index of the broadcast input.
fn broadcast_map(out: &[usize], input: &[usize]) -> Vec<usize> {
    let rank = out.len();
    let mut strides = vec![0usize; rank];
    let mut acc = 1;
    for i in (0..input.len()).rev() {
        let oi = i + rank - input.len();
        strides[oi] = if input[i] == 1 { 0 } else { acc };
        acc *= input[i];
    }
    let n = numel(out);
    let mut map = Vec::with_capacity(n);
    let mut idx = vec![0usize; rank];
    for _ in 0..n {
        map.push(idx.iter().zip(&strides).map(|(i, s)| i * s).sum());
        for d in (0..rank).rev() {
            idx[d] += 1;
            if idx[d] < out[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    map
}

/// `c[m,n] += a[m,k] * b[k,n]`
fn gemm_nn<T: Real>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let crow = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == T::zero() {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (cv, &bv) in crow.iter_mut().zip(brow) {
                *cv = *cv + aip * bv;
            }
        }
    }
}

/// `c[m,k] += a[m,n] * b[k,n]^T`
fn gemm_nt<T: Real>(a: &[T], b: &[T], c: &mut [T], m: usize, n: usize, k: usize) {
    for i in 0..m {
        let arow = &a[i * n..(i + 1) * n];
        for p in 0..k {
            let brow = &b[p * n..(p + 1) * n];
            let dot = arow
                .iter()
                .zip(brow)
                .fold(T::zero(), |s, (&x, &y)| s + x * y);
            c[i * k + p] = c[i * k + p] + dot;
        }
    }
}

/// `c[k,n] += a[m,k]^T * b[m,n]`
fn gemm_tn<T: Real>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let brow = &b[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == T::zero() {
                continue;
            }
            let crow = &mut c[p * n..(p + 1) * n];
            for (cv, &bv) in crow.iter_mut().zip(brow) {
                *cv = *cv + aip * bv;
            }
        }
    }
}

/// Naive `[m,k] x [k,n]` product, exposed for callers that hold plain slices.
pub fn matmul_values<T: Real>(a: &[T], b: &[T], m: usize, k: usize, n: usize) -> Vec<T> {
    let mut c = vec![T::zero(); m * n];
    gemm_nn(a, b, &mut c, m, k, n);
    c
}

fn accumulate<T: Real>(slot: &mut Option<Vec<T>>, g: Vec<T>) {
    match slot {
        Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, &b)| *a = *a + b),
        None => *slot = Some(g),
    }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    pub fn value(&self, v: Var) -> &[T] {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Copies a node out as a standalone tensor.
    pub fn tensor(&self, v: Var) -> Tensor<T> {
        let n = &self.nodes[v.0];
        Tensor::new(n.shape.clone(), n.value.clone()).expect("node shape is consistent")
    }

    /// Scalar value of a single-element node.
    pub fn item(&self, v: Var) -> T {
        self.nodes[v.0].value[0]
    }

    fn push(&mut self, shape: Vec<usize>, value: Vec<T>, op: Op<T>, requires_grad: bool) -> Var {
        debug_assert_eq!(numel(&shape), value.len());
        self.nodes.push(Node {
            shape,
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    /// Records a leaf; gradients flow into it when `tensor.requires_grad()`.
    pub fn leaf(&mut self, tensor: &Tensor<T>) -> Var {
        self.push(
            tensor.shape().to_vec(),
            tensor.values().to_vec(),
            Op::Leaf,
            tensor.requires_grad(),
        )
    }

    /// Records a constant (never differentiated).
    pub fn constant(&mut self, shape: impl Into<Vec<usize>>, values: Vec<T>) -> Result<Var> {
        let shape = shape.into();
        if numel(&shape) != values.len() {
            return Err(Error::Shape {
                op: "constant",
                lhs: shape,
                rhs: vec![values.len()],
            });
        }
        Ok(self.push(shape, values, Op::Leaf, false))
    }

    pub fn scalar(&mut self, value: T) -> Var {
        self.push(Vec::new(), vec![value], Op::Leaf, false)
    }

    fn binary(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(T, T) -> T,
        op: Op<T>,
    ) -> Result<Var> {
        let (sa, sb) = (&self.nodes[a.0].shape, &self.nodes[b.0].shape);
        let out = broadcast_shape(sa, sb).ok_or_else(|| Error::Shape {
            op: name,
            lhs: sa.clone(),
            rhs: sb.clone(),
        })?;
        let va = &self.nodes[a.0].value;
        let vb = &self.nodes[b.0].value;
        let value: Vec<T> = if *sa == out && *sb == out {
            va.iter().zip(vb).map(|(&x, &y)| f(x, y)).collect()
        } else if *sa == out && vb.len() == 1 {
            va.iter().map(|&x| f(x, vb[0])).collect()
        } else {
            let ma = broadcast_map(&out, sa);
            let mb = broadcast_map(&out, sb);
            ma.iter().zip(&mb).map(|(&i, &j)| f(va[i], vb[j])).collect()
        };
        let rg = self.rg(&[a, b]);
        Ok(self.push(out, value, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise (Hadamard) product with broadcasting.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("div", a, b, |x, y| x / y, Op::Div(a, b))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (&self.nodes[a.0].shape, &self.nodes[b.0].shape);
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::Shape {
                op: "matmul",
                lhs: sa.clone(),
                rhs: sb.clone(),
            });
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let value = matmul_values(&self.nodes[a.0].value, &self.nodes[b.0].value, m, k, n);
        let rg = self.rg(&[a, b]);
        Ok(self.push(vec![m, n], value, Op::MatMul(a, b), rg))
    }

    /// `x · w + b` with `x: [m, k]`, `w: [k, n]`, `b: [n]` or `[1, n]`.
    pub fn affine(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let (sx, sw, sb) = (
            &self.nodes[x.0].shape,
            &self.nodes[w.0].shape,
            &self.nodes[b.0].shape,
        );
        let bias_ok = sw.len() == 2 && self.nodes[b.0].value.len() == sw[1] && sb.len() <= 2;
        if sx.len() != 2 || sw.len() != 2 || sx[1] != sw[0] || !bias_ok {
            return Err(Error::Shape {
                op: "affine",
                lhs: sx.clone(),
                rhs: sw.iter().chain(sb.iter()).copied().collect(),
            });
        }
        let (m, k, n) = (sx[0], sx[1], sw[1]);
        let bias = &self.nodes[b.0].value;
        let mut value = Vec::with_capacity(m * n);
        for _ in 0..m {
            value.extend_from_slice(bias);
        }
        gemm_nn(
            &self.nodes[x.0].value,
            &self.nodes[w.0].value,
            &mut value,
            m,
            k,
            n,
        );
        let rg = self.rg(&[x, w, b]);
        Ok(self.push(vec![m, n], value, Op::Affine(x, w, b), rg))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.nodes[a.0].value.iter().copied().sum();
        let rg = self.rg(&[a]);
        self.push(Vec::new(), vec![s], Op::Sum(a), rg)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let v = &self.nodes[a.0].value;
        let s = v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len().max(1));
        let rg = self.rg(&[a]);
        self.push(Vec::new(), vec![s], Op::Mean(a), rg)
    }

    fn reduce_last(&mut self, a: Var, mean: bool) -> Var {
        let shape = self.nodes[a.0].shape.clone();
        let d = last_dim(&shape);
        let scale = if mean {
            T::one() / T::from_usize_lossy(d.max(1))
        } else {
            T::one()
        };
        let value: Vec<T> = self.nodes[a.0]
            .value
            .chunks(d.max(1))
            .map(|c| c.iter().copied().sum::<T>() * scale)
            .collect();
        let mut out = shape;
        if let Some(l) = out.last_mut() {
            *l = 1;
        }
        let rg = self.rg(&[a]);
        let op = if mean { Op::MeanLast(a) } else { Op::SumLast(a) };
        self.push(out, value, op, rg)
    }

    /// Sum over the last axis, keeping it with size 1.
    pub fn sum_last(&mut self, a: Var) -> Var {
        self.reduce_last(a, false)
    }

    /// Mean over the last axis, keeping it with size 1.
    pub fn mean_last(&mut self, a: Var) -> Var {
        self.reduce_last(a, true)
    }

    fn unary(&mut self, a: Var, f: impl Fn(T) -> T, op: Op<T>) -> Var {
        let value = self.nodes[a.0].value.iter().map(|&x| f(x)).collect();
        let shape = self.nodes[a.0].shape.clone();
        let rg = self.rg(&[a]);
        self.push(shape, value, op, rg)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.unary(a, |x| -x, Op::Neg(a))
    }

    /// Multiplies by a constant.
    pub fn scale(&mut self, a: Var, c: T) -> Var {
        self.unary(a, |x| x * c, Op::Scale(a, c))
    }

    /// Adds a constant.
    pub fn offset(&mut self, a: Var, c: T) -> Var {
        self.unary(a, |x| x + c, Op::Offset(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.tanh(), Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(a, |x| if x < T::zero() { T::zero() } else { x }, Op::Relu(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(a, |x| T::one() / (T::one() + (-x).exp()), Op::Sigmoid(a))
    }

    pub fn sin(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.sin(), Op::Sin(a))
    }

    pub fn cos(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.cos(), Op::Cos(a))
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.unary(a, |x| x * x, Op::Square(a))
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.sqrt(), Op::Sqrt(a))
    }

    /// Softmax over the last axis.
    pub fn softmax(&mut self, a: Var) -> Var {
        let shape = self.nodes[a.0].shape.clone();
        let d = last_dim(&shape).max(1);
        let mut value = self.nodes[a.0].value.clone();
        for row in value.chunks_mut(d) {
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            let mut total = T::zero();
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                total = total + *v;
            }
            for v in row.iter_mut() {
                *v = *v / total;
            }
        }
        let rg = self.rg(&[a]);
        self.push(shape, value, Op::Softmax(a), rg)
    }

    /// Concatenates along the last axis; leading dimensions must agree.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("concat of zero tensors"))?;
        let lead: Vec<usize> = {
            let s = &self.nodes[first.0].shape;
            s[..s.len().saturating_sub(1)].to_vec()
        };
        let rows = numel(&lead);
        let mut widths = Vec::with_capacity(parts.len());
        for p in parts {
            let s = &self.nodes[p.0].shape;
            if s.len() != lead.len() + 1 || s[..lead.len()] != lead[..] {
                return Err(Error::Shape {
                    op: "concat",
                    lhs: self.nodes[first.0].shape.clone(),
                    rhs: s.clone(),
                });
            }
            widths.push(last_dim(s));
        }
        let total: usize = widths.iter().sum();
        let mut value = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for (p, &w) in parts.iter().zip(&widths) {
                value.extend_from_slice(&self.nodes[p.0].value[r * w..(r + 1) * w]);
            }
        }
        let mut shape = lead;
        shape.push(total);
        let rg = self.rg(parts);
        Ok(self.push(shape, value, Op::Concat(parts.to_vec()), rg))
    }

    /// Columns `start..start+len` of the last axis.
    pub fn slice_last(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let shape = self.nodes[a.0].shape.clone();
        let d = last_dim(&shape);
        if shape.is_empty() || start + len > d {
            return Err(Error::Shape {
                op: "slice_last",
                lhs: shape,
                rhs: vec![start, len],
            });
        }
        let value: Vec<T> = self.nodes[a.0]
            .value
            .chunks(d)
            .flat_map(|row| row[start..start + len].iter().copied())
            .collect();
        let mut out = shape;
        *out.last_mut().expect("non-empty shape") = len;
        let rg = self.rg(&[a]);
        Ok(self.push(out, value, Op::Slice(a, start), rg))
    }

    pub fn reshape(&mut self, a: Var, shape: impl Into<Vec<usize>>) -> Result<Var> {
        let shape = shape.into();
        if numel(&shape) != self.nodes[a.0].value.len() {
            return Err(Error::Shape {
                op: "reshape",
                lhs: self.nodes[a.0].shape.clone(),
                rhs: shape,
            });
        }
        let value = self.nodes[a.0].value.clone();
        let rg = self.rg(&[a]);
        Ok(self.push(shape, value, Op::Reshape(a), rg))
    }

    /// Reverse sweep from a scalar `loss`; empties the tape.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients<T>> {
        if self.nodes.is_empty() {
            return Err(Error::EmptyTape);
        }
        if loss.0 >= self.nodes.len() {
            return Err(Error::invalid("loss is not on this tape"));
        }
        if self.nodes[loss.0].value.len() != 1 {
            return Err(Error::NonScalarLoss(self.nodes[loss.0].shape.clone()));
        }
        let nodes = std::mem::take(&mut self.nodes);
        let mut grads: Vec<Option<Vec<T>>> = vec![None; nodes.len()];
        grads[loss.0] = Some(vec![T::one()]);

        for i in (0..=loss.0).rev() {
            let node = &nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            backprop_node(&nodes, node, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }
}

fn reduce_broadcast<T: Real>(g: &[T], out: &[usize], input: &[usize]) -> Vec<T> {
    if out == input {
        return g.to_vec();
    }
    let n = numel(input);
    let mut r = vec![T::zero(); n];
    if n == 1 {
        r[0] = g.iter().copied().sum();
        return r;
    }
    for (o, i) in broadcast_map(out, input).into_iter().enumerate() {
        r[i] = r[i] + g[o];
    }
    r
}

fn backprop_node<T: Real>(
    nodes: &[Node<T>],
    node: &Node<T>,
    g: &[T],
    grads: &mut [Option<Vec<T>>],
) {
    let needs = |v: &Var| nodes[v.0].requires_grad;
    let val = |v: &Var| &nodes[v.0].value;
    let shp = |v: &Var| &nodes[v.0].shape;
    let elementwise = |v: &Var, f: &dyn Fn(T, T, T) -> T| -> Vec<T> {
        // f(grad_out, input, output)
        g.iter()
            .zip(val(v))
            .zip(&node.value)
            .map(|((&go, &x), &y)| f(go, x, y))
            .collect()
    };
    match &node.op {
        Op::Leaf => {}
        Op::Add(a, b) | Op::Sub(a, b) => {
            if needs(a) {
                accumulate(&mut grads[a.0], reduce_broadcast(g, &node.shape, shp(a)));
            }
            if needs(b) {
                let mut gb = reduce_broadcast(g, &node.shape, shp(b));
                if matches!(node.op, Op::Sub(..)) {
                    gb.iter_mut().for_each(|v| *v = -*v);
                }
                accumulate(&mut grads[b.0], gb);
            }
        }
        Op::Mul(a, b) | Op::Div(a, b) => {
            let is_div = matches!(node.op, Op::Div(..));
            let out = &node.shape;
            let (va, vb) = (val(a), val(b));
            let ma = (shp(a) != out).then(|| broadcast_map(out, shp(a)));
            let mb = (shp(b) != out).then(|| broadcast_map(out, shp(b)));
            let ia = |o: usize| ma.as_ref().map_or(o, |m| m[o]);
            let ib = |o: usize| mb.as_ref().map_or(o, |m| m[o]);
            if needs(a) {
                let mut ga = vec![T::zero(); va.len()];
                for (o, &go) in g.iter().enumerate() {
                    let y = vb[ib(o)];
                    let d = if is_div { go / y } else { go * y };
                    ga[ia(o)] = ga[ia(o)] + d;
                }
                accumulate(&mut grads[a.0], ga);
            }
            if needs(b) {
                let mut gb = vec![T::zero(); vb.len()];
                for (o, &go) in g.iter().enumerate() {
                    let (x, y) = (va[ia(o)], vb[ib(o)]);
                    let d = if is_div { -go * x / (y * y) } else { go * x };
                    gb[ib(o)] = gb[ib(o)] + d;
                }
                accumulate(&mut grads[b.0], gb);
            }
        }
        Op::MatMul(a, b) => {
            let (m, k, n) = (shp(a)[0], shp(a)[1], shp(b)[1]);
            if needs(a) {
                let mut ga = vec![T::zero(); m * k];
                gemm_nt(g, val(b), &mut ga, m, n, k);
                accumulate(&mut grads[a.0], ga);
            }
            if needs(b) {
                let mut gb = vec![T::zero(); k * n];
                gemm_tn(val(a), g, &mut gb, m, k, n);
                accumulate(&mut grads[b.0], gb);
            }
        }
        Op::Affine(x, w, b) => {
            let (m, k, n) = (shp(x)[0], shp(x)[1], shp(w)[1]);
            if needs(x) {
                let mut gx = vec![T::zero(); m * k];
                gemm_nt(g, val(w), &mut gx, m, n, k);
                accumulate(&mut grads[x.0], gx);
            }
            if needs(w) {
                let mut gw = vec![T::zero(); k * n];
                gemm_tn(val(x), g, &mut gw, m, k, n);
                accumulate(&mut grads[w.0], gw);
            }
            if needs(b) {
                let mut gb = vec![T::zero(); n];
                for row in g.chunks(n) {
                    gb.iter_mut().zip(row).for_each(|(a, &v)| *a = *a + v);
                }
                accumulate(&mut grads[b.0], gb);
            }
        }
        Op::Sum(a) | Op::Mean(a) => {
            if needs(a) {
                let len = val(a).len();
                let s = if matches!(node.op, Op::Mean(_)) {
                    g[0] / T::from_usize_lossy(len.max(1))
                } else {
                    g[0]
                };
                accumulate(&mut grads[a.0], vec![s; len]);
            }
        }
        Op::SumLast(a) | Op::MeanLast(a) => {
            if needs(a) {
                let d = last_dim(shp(a)).max(1);
                let scale = if matches!(node.op, Op::MeanLast(_)) {
                    T::one() / T::from_usize_lossy(d)
                } else {
                    T::one()
                };
                let ga = g
                    .iter()
                    .flat_map(|&v| std::iter::repeat_n(v * scale, d))
                    .collect();
                accumulate(&mut grads[a.0], ga);
            }
        }
        Op::Neg(a) => {
            if needs(a) {
                accumulate(&mut grads[a.0], g.iter().map(|&v| -v).collect());
            }
        }
        Op::Scale(a, c) => {
            if needs(a) {
                accumulate(&mut grads[a.0], g.iter().map(|&v| v * *c).collect());
            }
        }
        Op::Offset(a) | Op::Reshape(a) => {
            if needs(a) {
                accumulate(&mut grads[a.0], g.to_vec());
            }
        }
        Op::Tanh(a) => {
            if needs(a) {
                let ga = elementwise(a, &|go, _, y| go * (T::one() - y * y));
                accumulate(&mut grads[a.0], ga);
            }
        }
        Op::Relu(a) => {
            if needs(a) {
                let ga = elementwise(a, &|go, x, _| if x > T::zero() { go } else { T::zero() });
                accumulate(&mut grads[a.0], ga);
            }
        }
        Op::Sigmoid(a) => {
            if needs(a) {
                let ga = elementwise(a, &|go, _, y| go * y * (T::one() - y));
                accumulate(&mut grads[a.0], ga);
            }
        }
        Op::Sin(a) => {
            if needs(a) {
                let ga = elementwise(a, &|go, x, _| go * x.cos());
                accumulate(&mut grads[a.0], ga);
            }
        }
        Op::Cos(a) => {
            if needs(a) {
                let ga = elementwise(a, &|go, x, _| -go * x.sin());
                accumulate(&mut grads[a.0], ga);
            }
        }
        Op::Square(a) => {
            if needs(a) {
                let two = T::lit(2.0);
                let ga = elementwise(a, &|go, x, _| go * two * x);
                accumulate(&mut grads[a.0], ga);
            }
        }
        Op::Sqrt(a) => {
            if needs(a) {
                let half = T::lit(0.5);
                let ga = elementwise(a, &|go, _, y| go * half / y);
                accumulate(&mut grads[a.0], ga);
            }
        }
        Op::Softmax(a) => {
            if needs(a) {
                let d = last_dim(&node.shape).max(1);
                let mut ga = Vec::with_capacity(g.len());
                for (gr, yr) in g.chunks(d).zip(node.value.chunks(d)) {
                    let dot = gr.iter().zip(yr).fold(T::zero(), |s, (&x, &y)| s + x * y);
                    ga.extend(gr.iter().zip(yr).map(|(&x, &y)| y * (x - dot)));
                }
                accumulate(&mut grads[a.0], ga);
            }
        }
        Op::Concat(parts) => {
            let total = last_dim(&node.shape).max(1);
            let rows = g.len() / total;
            let mut col = 0;
            for p in parts {
                let w = last_dim(shp(p));
                if needs(p) {
                    let mut gp = Vec::with_capacity(rows * w);
                    for r in 0..rows {
                        gp.extend_from_slice(&g[r * total + col..r * total + col + w]);
                    }
                    accumulate(&mut grads[p.0], gp);
                }
                col += w;
            }
        }
        Op::Slice(a, start) => {
            if needs(a) {
                let d = last_dim(shp(a));
                let w = last_dim(&node.shape).max(1);
                let mut ga = vec![T::zero(); val(a).len()];
                for (r, row) in g.chunks(w).enumerate() {
                    ga[r * d + start..r * d + start + w].copy_from_slice(row);
                }
                accumulate(&mut grads[a.0], ga);
            }
        }
    }
}
