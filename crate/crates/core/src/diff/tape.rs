//! Scalar reverse-mode tape.
//!
//! Nodes are appended in evaluation order, so parents always precede
//! children and a reverse sweep over the node list is a valid
//! topological order. The backward pass can either accumulate plain
//! `f64` adjoints ([`Tape::gradient`]) or record the adjoint computation
//! on the tape itself ([`Tape::gradient_vars`]); the latter makes the
//! gradient differentiable again, which is how Hessian-vector products
//! are formed.

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Supported primitives. The set is closed: a function can only be built
/// from these, so unsupported operations are rejected by construction.
#[derive(Debug, Clone, Copy)]
enum Op {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Neg(usize),
    Scale(usize, f64),
    Tanh(usize),
    Softplus(usize),
    Sigmoid(usize),
}

#[derive(Debug, Default)]
pub struct Tape {
    ops: Vec<Op>,
    values: Vec<f64>,
}

fn stable_softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

fn stable_sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize) -> Self {
        Tape {
            ops: Vec::with_capacity(nodes),
            values: Vec::with_capacity(nodes),
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn push(&mut self, op: Op, value: f64) -> Var {
        self.ops.push(op);
        self.values.push(value);
        Var(self.ops.len() - 1)
    }

    pub fn value(&self, v: Var) -> f64 {
        self.values[v.0]
    }

    /// Independent variable or constant; the two differ only in whether a
    /// gradient is requested for them.
    pub fn input(&mut self, value: f64) -> Var {
        self.push(Op::Leaf, value)
    }

    pub fn constant(&mut self, value: f64) -> Var {
        self.push(Op::Leaf, value)
    }

    pub fn inputs(&mut self, values: &[f64]) -> Vec<Var> {
        values.iter().map(|&v| self.input(v)).collect()
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.values[a.0] + self.values[b.0];
        self.push(Op::Add(a.0, b.0), v)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.values[a.0] - self.values[b.0];
        self.push(Op::Sub(a.0, b.0), v)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.values[a.0] * self.values[b.0];
        self.push(Op::Mul(a.0, b.0), v)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        let v = -self.values[a.0];
        self.push(Op::Neg(a.0), v)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let v = c * self.values[a.0];
        self.push(Op::Scale(a.0, c), v)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.values[a.0].tanh();
        self.push(Op::Tanh(a.0), v)
    }

    /// `log(1 + exp(a))`
    pub fn softplus(&mut self, a: Var) -> Var {
        let v = stable_softplus(self.values[a.0]);
        self.push(Op::Softplus(a.0), v)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = stable_sigmoid(self.values[a.0]);
        self.push(Op::Sigmoid(a.0), v)
    }

    /// Sum of a non-empty slice, left to right.
    pub fn sum(&mut self, xs: &[Var]) -> Var {
        let (first, rest) = xs.split_first().expect("sum of empty slice");
        rest.iter().fold(*first, |acc, &x| self.add(acc, x))
    }

    pub fn dot(&mut self, a: &[Var], b: &[Var]) -> Var {
        assert_eq!(a.len(), b.len(), "dot length mismatch");
        let products: Vec<Var> = a.iter().zip(b).map(|(&x, &y)| self.mul(x, y)).collect();
        self.sum(&products)
    }

    /// `W·x + b` with `W` given row-major as `rows × x.len()` variables.
    pub fn affine(&mut self, weights: &[Var], x: &[Var], bias: &[Var]) -> Vec<Var> {
        let cols = x.len();
        assert_eq!(weights.len(), bias.len() * cols, "affine shape mismatch");
        bias.iter()
            .enumerate()
            .map(|(i, &b)| {
                let row = &weights[i * cols..(i + 1) * cols];
                let d = self.dot(row, x);
                self.add(d, b)
            })
            .collect()
    }

    /// Reverse sweep with `f64` adjoints; returns `∂output/∂wrt`.
    pub fn gradient(&self, output: Var, wrt: &[Var]) -> Vec<f64> {
        let mut adj = vec![0.0; output.0 + 1];
        adj[output.0] = 1.0;
        for i in (0..=output.0).rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            match self.ops[i] {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    adj[a] += g;
                    adj[b] += g;
                }
                Op::Sub(a, b) => {
                    adj[a] += g;
                    adj[b] -= g;
                }
                Op::Mul(a, b) => {
                    adj[a] += g * self.values[b];
                    adj[b] += g * self.values[a];
                }
                Op::Neg(a) => adj[a] -= g,
                Op::Scale(a, c) => adj[a] += c * g,
                Op::Tanh(a) => {
                    let y = self.values[i];
                    adj[a] += g * (1.0 - y * y);
                }
                Op::Softplus(a) => adj[a] += g * stable_sigmoid(self.values[a]),
                Op::Sigmoid(a) => {
                    let s = self.values[i];
                    adj[a] += g * s * (1.0 - s);
                }
            }
        }
        wrt.iter()
            .map(|v| adj.get(v.0).copied().unwrap_or(0.0))
            .collect()
    }

    fn accumulate(&mut self, adj: &mut [Option<Var>], target: usize, contribution: Var) {
        adj[target] = Some(match adj[target] {
            Some(existing) => self.add(existing, contribution),
            None => contribution,
        });
    }

    /// Reverse sweep that records every adjoint operation on the tape, so
    /// the returned gradient nodes can themselves be differentiated.
    /// Inputs that `output` does not depend on get a zero constant.
    pub fn gradient_vars(&mut self, output: Var, wrt: &[Var]) -> Vec<Var> {
        let end = output.0;
        let mut adj: Vec<Option<Var>> = vec![None; end + 1];
        adj[end] = Some(self.constant(1.0));
        let mut one: Option<Var> = None;

        for i in (0..=end).rev() {
            let Some(g) = adj[i] else { continue };
            match self.ops[i] {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    self.accumulate(&mut adj, a, g);
                    self.accumulate(&mut adj, b, g);
                }
                Op::Sub(a, b) => {
                    self.accumulate(&mut adj, a, g);
                    let ng = self.neg(g);
                    self.accumulate(&mut adj, b, ng);
                }
                Op::Mul(a, b) => {
                    let ga = self.mul(g, Var(b));
                    self.accumulate(&mut adj, a, ga);
                    let gb = self.mul(g, Var(a));
                    self.accumulate(&mut adj, b, gb);
                }
                Op::Neg(a) => {
                    let ng = self.neg(g);
                    self.accumulate(&mut adj, a, ng);
                }
                Op::Scale(a, c) => {
                    let sg = self.scale(g, c);
                    self.accumulate(&mut adj, a, sg);
                }
                Op::Tanh(a) => {
                    let one = *one.get_or_insert_with(|| self.constant(1.0));
                    let y = Var(i);
                    let y2 = self.mul(y, y);
                    let d = self.sub(one, y2);
                    let ga = self.mul(g, d);
                    self.accumulate(&mut adj, a, ga);
                }
                Op::Softplus(a) => {
                    let s = self.sigmoid(Var(a));
                    let ga = self.mul(g, s);
                    self.accumulate(&mut adj, a, ga);
                }
                Op::Sigmoid(a) => {
                    let one = *one.get_or_insert_with(|| self.constant(1.0));
                    let s = Var(i);
                    let c = self.sub(one, s);
                    let d = self.mul(s, c);
                    let ga = self.mul(g, d);
                    self.accumulate(&mut adj, a, ga);
                }
            }
        }

        wrt.iter()
            .map(|v| match adj.get(v.0).copied().flatten() {
                Some(g) => g,
                None => self.constant(0.0),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parents_precede_children() {
        let mut t = Tape::new();
        let a = t.input(1.0);
        let b = t.input(2.0);
        let c = t.mul(a, b);
        let d = t.tanh(c);
        assert!(a.index() < c.index() && b.index() < c.index() && c.index() < d.index());
    }

    #[test]
    fn softplus_and_sigmoid_are_stable() {
        let mut t = Tape::new();
        let big = t.input(800.0);
        let small = t.input(-800.0);
        let sp_big = t.softplus(big);
        let sp_small = t.softplus(small);
        let sg_small = t.sigmoid(small);
        assert_eq!(t.value(sp_big), 800.0);
        assert_eq!(t.value(sp_small), 0.0);
        assert_eq!(t.value(sg_small), 0.0);
    }

    #[test]
    fn second_order_of_cubic() {
        // f(u) = u^3, f'' = 6u
        let mut t = Tape::new();
        let u = t.input(1.5);
        let u2 = t.mul(u, u);
        let u3 = t.mul(u2, u);
        let g = t.gradient_vars(u3, &[u]);
        assert!((t.value(g[0]) - 3.0 * 1.5 * 1.5).abs() < 1e-14);
        let h = t.gradient(g[0], &[u]);
        assert!((h[0] - 9.0).abs() < 1e-14);
    }

    #[test]
    fn unreachable_input_has_zero_gradient() {
        let mut t = Tape::new();
        let a = t.input(1.0);
        let b = t.input(2.0);
        let c = t.scale(a, 3.0);
        assert_eq!(t.gradient(c, &[a, b]), vec![3.0, 0.0]);
        let g = t.gradient_vars(c, &[a, b]);
        assert_eq!(t.value(g[1]), 0.0);
    }
}
