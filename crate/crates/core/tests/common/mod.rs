//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use ddgcl_core::augment::{make_views, AugmentConfig};
use ddgcl_core::autodiff::{Tape, Tensor, Var};
use ddgcl_core::centrality::pagerank_default;
use ddgcl_core::model::{total_loss, Batch, EncoderParams, LossConfig, ModelConfig, PreparedGraph, Readout};
use ddgcl_core::topology::{topo_descriptor, TopoVector};
use ddgcl_core::graph::{Edge, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph with uniform random features.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, d_f: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push(Edge::new(u, v, 1.0));
            }
        }
    }
    let x = (0..n * d_f).map(|_| rng.random_range(-1.0..1.0)).collect();
    Graph::new(n, edges, d_f, x, None).unwrap()
}

pub fn random_tensor(rng: &mut impl Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn dense_adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.n_nodes();
    let mut a = vec![vec![false; n]; n];
    for e in g.edges() {
        a[e.u][e.v] = true;
        a[e.v][e.u] = true;
    }
    a
}

/// PageRank as the exact solution of the linear system
/// `(I - d P) x = (1 - d)/n`, where column `u` of `P` spreads `u`'s rank over
/// its neighbours (or uniformly over all nodes when `u` is isolated).
/// Solved by Gaussian elimination with partial pivoting.
pub fn pagerank_linear_solve(g: &Graph, d: f64) -> Vec<f64> {
    let n = g.n_nodes();
    let a = dense_adjacency(g);
    let deg: Vec<usize> = a.iter().map(|r| r.iter().filter(|&&b| b).count()).collect();
    let mut m = vec![vec![0.0; n + 1]; n];
    for v in 0..n {
        m[v][v] = 1.0;
        for u in 0..n {
            let p = if deg[u] == 0 {
                1.0 / n as f64
            } else if a[u][v] {
                1.0 / deg[u] as f64
            } else {
                0.0
            };
            m[v][u] -= d * p;
        }
        m[v][n] = (1.0 - d) / n as f64;
    }
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// All-pairs hop counts by Floyd–Warshall; `None` when unreachable.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<u32>>> {
    let n = g.n_nodes();
    let a = dense_adjacency(g);
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if a[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d.into_iter().map(|r| r.into_iter().map(|x| (x < inf).then_some(x)).collect()).collect()
}

/// Components of the sublevel subgraph `{v : f(v) <= t}` that contain a
/// vertex with `f(v) <= s` (the rank of H0(K_s) -> H0(K_t)), by flood fill.
fn persistent_betti0(g: &Graph, f: &[f64], s: f64, t: f64) -> usize {
    let n = g.n_nodes();
    let a = dense_adjacency(g);
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if f[start] > t || comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = start;
        let mut has_early = false;
        while let Some(u) = stack.pop() {
            has_early |= f[u] <= s;
            for v in 0..n {
                if a[u][v] && f[v] <= t && comp[v] == usize::MAX {
                    comp[v] = start;
                    stack.push(v);
                }
            }
        }
        count += usize::from(has_early);
    }
    count
}

/// H0 diagram of the lower-star filtration by inclusion–exclusion over
/// persistent Betti numbers at the critical values. Zero-length pairs are
/// recovered from vertex counts. Returns `(finite pairs sorted, essential
/// births sorted)`.
pub fn reference_h0(g: &Graph, f: &[f64]) -> (Vec<(f64, f64)>, Vec<f64>) {
    let mut vals: Vec<f64> = f.to_vec();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let m = vals.len();
    let beta = |i: isize, j: usize| -> isize {
        if i < 0 {
            0
        } else {
            persistent_betti0(g, f, vals[i as usize], vals[j]) as isize
        }
    };
    let mut pairs = Vec::new();
    let mut essential = Vec::new();
    for i in 0..m {
        let ii = i as isize;
        let mut positive_births = 0isize;
        for j in i + 1..m {
            let mu = beta(ii, j - 1) - beta(ii - 1, j - 1) - beta(ii, j) + beta(ii - 1, j);
            assert!(mu >= 0);
            positive_births += mu;
            pairs.extend(std::iter::repeat_n((vals[i], vals[j]), mu as usize));
        }
        let ess = beta(ii, m - 1) - beta(ii - 1, m - 1);
        essential.extend(std::iter::repeat_n(vals[i], ess as usize));
        let born_here = f.iter().filter(|&&x| x == vals[i]).count() as isize;
        let zero = born_here - positive_births - ess;
        assert!(zero >= 0);
        pairs.extend(std::iter::repeat_n((vals[i], vals[i]), zero as usize));
    }
    sort_pairs(&mut pairs);
    essential.sort_by(f64::total_cmp);
    (pairs, essential)
}

pub fn sort_pairs(p: &mut [(f64, f64)]) {
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
}

/// Bottleneck distance between two finite diagrams (points may also match
/// the diagonal), by testing candidate radii with bipartite matching.
pub fn bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let linf = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).abs().max((p.1 - q.1).abs());
    let diag = |p: (f64, f64)| (p.1 - p.0).abs() / 2.0;
    // Left side: a points then nb diagonal slots; right: b points then na slots.
    let size = na + nb;
    let cost = |i: usize, j: usize| -> f64 {
        match (i < na, j < nb) {
            (true, true) => linf(a[i], b[j]),
            (true, false) => diag(a[i]),
            (false, true) => diag(b[j]),
            (false, false) => 0.0,
        }
    };
    let mut cands: Vec<f64> = (0..size).flat_map(|i| (0..size).map(move |j| (i, j))).map(|(i, j)| cost(i, j)).collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let feasible = |r: f64| -> bool {
        let mut owner = vec![usize::MAX; size];
        fn augment(i: usize, r: f64, size: usize, cost: &dyn Fn(usize, usize) -> f64, seen: &mut [bool], owner: &mut [usize]) -> bool {
            for j in 0..size {
                if cost(i, j) <= r && !seen[j] {
                    seen[j] = true;
                    if owner[j] == usize::MAX || augment(owner[j], r, size, cost, seen, owner) {
                        owner[j] = i;
                        return true;
                    }
                }
            }
            false
        }
        (0..size).all(|i| augment(i, r, size, &cost, &mut vec![false; size], &mut owner))
    };
    *cands.iter().find(|&&r| feasible(r)).unwrap_or(&0.0)
}

/// Reference single-head attention `softmax(Q K^T / sqrt(d)) V` on plain
/// nested vectors.
pub fn reference_attention(q: &Tensor, k: &Tensor, v: &Tensor) -> Tensor {
    let (n, d) = (q.rows(), q.cols());
    let mut out = Tensor::zeros(n, v.cols());
    for i in 0..n {
        let logits: Vec<f64> = (0..n)
            .map(|j| (0..d).map(|c| q.get(i, c) * k.get(j, c)).sum::<f64>() / (d as f64).sqrt())
            .collect();
        let mx = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - mx).exp()).collect();
        let z: f64 = w.iter().sum();
        for c in 0..v.cols() {
            out.set(i, c, (0..n).map(|j| w[j] / z * v.get(j, c)).sum());
        }
    }
    out
}

/// Relative error floor: gradient entries smaller than this are compared
/// in absolute terms.
pub const REL_FLOOR: f64 = 1e-6;

/// Largest relative error between reverse-mode gradients of `f` and central
/// finite differences with step `h`, over every entry of every input.
pub fn gradient_check(inputs: &[Tensor], h: f64, f: impl Fn(&mut Tape, &[Var]) -> Var) -> f64 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&mut tape, &vars);
    let grads = tape.backward(out).unwrap();
    let eval = |xs: &[Tensor]| -> f64 {
        let mut t = Tape::new();
        let v: Vec<Var> = xs.iter().map(|x| t.constant(x.clone())).collect();
        let o = f(&mut t, &v);
        t.value(o).item()
    };
    let mut worst: f64 = 0.0;
    for (k, x) in inputs.iter().enumerate() {
        let analytic = grads.get_or_zeros(vars[k], x.rows(), x.cols());
        for idx in 0..x.data().len() {
            let mut plus = inputs.to_vec();
            plus[k].data_mut()[idx] += h;
            let mut minus = inputs.to_vec();
            minus[k].data_mut()[idx] -= h;
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * h);
            let a = analytic.data()[idx];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
            worst = worst.max(err);
        }
    }
    worst
}

/// Reduces an op output to a scalar with fixed random weights so that
/// every output entry carries a distinct gradient.
pub fn weighted_sum(tape: &mut Tape, x: Var, seed: u64) -> Var {
    let v = tape.value(x);
    let w = random_tensor(&mut rng(seed), v.rows(), v.cols());
    let w = tape.constant(w);
    let p = tape.mul(x, w).unwrap();
    tape.sum(p)
}

fn op_error(inputs: Vec<Tensor>, f: impl Fn(&mut Tape, &[Var]) -> Var) -> f64 {
    gradient_check(&inputs, 1e-5, |t, v| {
        let out = f(t, v);
        weighted_sum(t, out, 99)
    })
}

fn x34(seed: u64) -> Tensor {
    random_tensor(&mut rng(seed), 3, 4)
}

/// Finite-difference error of every tape op on random 3x4 inputs (with
/// compatible partner shapes), including each broadcast mode.
pub fn op_gradient_errors() -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = Vec::new();
    let partners = [("same", x34(2)), ("row", random_tensor(&mut rng(7), 1, 4)), ("scalar", random_tensor(&mut rng(8), 1, 1))];
    for (mode, other) in partners {
        out.push((format!("add/{mode}"), op_error(vec![x34(1), other.clone()], |t, v| t.add(v[0], v[1]).unwrap())));
        out.push((format!("sub/{mode}"), op_error(vec![x34(1), other.clone()], |t, v| t.sub(v[0], v[1]).unwrap())));
        out.push((format!("mul/{mode}"), op_error(vec![x34(1), other.clone()], |t, v| t.mul(v[0], v[1]).unwrap())));
    }
    let mut push = |name: &str, e: f64| out.push((name.to_string(), e));
    push("scale", op_error(vec![x34(3)], |t, v| t.scale(v[0], -1.7)));
    push("add_scalar", op_error(vec![x34(3)], |t, v| t.add_scalar(v[0], 0.3)));
    push("sigmoid", op_error(vec![x34(3)], |t, v| t.sigmoid(v[0])));
    push("relu", op_error(vec![x34(3)], |t, v| t.relu(v[0])));
    push("exp", op_error(vec![x34(3)], |t, v| t.exp(v[0])));
    push("log", op_error(vec![x34(3).map(|a| a.abs() + 0.5)], |t, v| t.log(v[0])));
    push("clamp", op_error(vec![x34(3)], |t, v| t.clamp(v[0], -0.5, 0.5)));
    push("matmul", op_error(vec![x34(1), random_tensor(&mut rng(2), 4, 3)], |t, v| t.matmul(v[0], v[1]).unwrap()));
    push("transpose", op_error(vec![x34(1)], |t, v| t.transpose(v[0])));
    push("concat_rows", op_error(vec![x34(1), random_tensor(&mut rng(2), 2, 4)], |t, v| t.concat_rows(&[v[0], v[1], v[0]]).unwrap()));
    push("concat_cols", op_error(vec![x34(1), random_tensor(&mut rng(2), 3, 2)], |t, v| t.concat_cols(&[v[1], v[0]]).unwrap()));
    push("row_mean", op_error(vec![x34(1)], |t, v| t.row_mean(v[0])));
    push("row_sums", op_error(vec![x34(1)], |t, v| t.row_sums(v[0])));
    push("sum", op_error(vec![x34(1)], |t, v| t.sum(v[0])));
    push("select_rows", op_error(vec![x34(1)], |t, v| t.select_rows(v[0], &[2, 0, 2]).unwrap()));
    push("softmax_rows", op_error(vec![x34(4)], |t, v| t.softmax_rows(v[0])));
    push("layer_norm_rows", op_error(vec![x34(4)], |t, v| t.layer_norm_rows(v[0])));
    push("l2_normalize_rows", op_error(vec![x34(4)], |t, v| t.l2_normalize_rows(v[0])));
    let mult = x34(5).map(|a| a.abs() + 0.1);
    let exclude = vec![false, true, false, false, true, true, true, true, false, false, true, false];
    push("masked_softmax_rows", op_error(vec![x34(4)], move |t, v| t.masked_softmax_rows(v[0], &mult, &exclude).unwrap()));
    out
}

pub struct Instance {
    params: EncoderParams,
    originals: Vec<PreparedGraph>,
    views_e: Vec<PreparedGraph>,
    views_f: Vec<PreparedGraph>,
    topo: (Vec<TopoVector>, Vec<TopoVector>),
    labels: Vec<u8>,
}

/// Two 5-node graphs with hidden size 8 and every loss term active.
pub fn tiny_instance(readout: Readout) -> Instance {
    let mut r = rng(41);
    let cfg = ModelConfig { d_f: 3, d_h: 8, heads: 2, layers: 2, dual_domain: true, readout };
    let params = EncoderParams::init(cfg, 17).unwrap();
    let mut inst = Instance { params, originals: vec![], views_e: vec![], views_f: vec![], topo: (vec![], vec![]), labels: vec![0, 1] };
    for k in 0..2u64 {
        let g = random_graph(&mut r, 5, 0.6, 3);
        let phi = pagerank_default(&g);
        let pair = make_views(&g, &phi, &AugmentConfig { p_e: 0.3, p_f: 0.3, p_tau: 0.5, seed: k }).unwrap();
        inst.topo.0.push(topo_descriptor(&pair.view_e, &pagerank_default(&pair.view_e), 8));
        inst.topo.1.push(topo_descriptor(&pair.view_f, &phi, 8));
        inst.originals.push(PreparedGraph::new(&g));
        inst.views_e.push(PreparedGraph::new(&pair.view_e));
        inst.views_f.push(PreparedGraph::new(&pair.view_f));
    }
    inst
}

pub fn loss_value(inst: &Instance, params: &EncoderParams, trainable: bool, tape: &mut Tape) -> Var {
    let batch = Batch {
        ce_graphs: inst.originals.iter().collect(),
        ce_labels: inst.labels.clone(),
        views: Some((inst.views_e.iter().collect(), inst.views_f.iter().collect())),
        topo: Some(inst.topo.clone()),
    };
    let cfg = LossConfig { tau: 0.5, lambda1: 0.7, lambda2: 0.3, symmetric: false };
    let b = params.bind(tape, trainable);
    total_loss(tape, &b, &batch, &cfg).unwrap().total
}

/// Largest relative error of the joint loss gradient over every scalar
/// parameter, with central differences of step `h`.
pub fn end_to_end_error(readout: Readout, h: f64) -> f64 {
    let inst = tiny_instance(readout);
    let mut tape = Tape::new();
    let out = loss_value(&inst, &inst.params, true, &mut tape);
    let grads = tape.backward(out).unwrap();
    // Parameters were bound first and in order, so their handles are 0..k.
    let analytic: Vec<Tensor> = {
        let mut t = Tape::new();
        let b = inst.params.bind(&mut t, true);
        b.vars().iter().zip(inst.params.tensors()).map(|(&v, p)| grads.get_or_zeros(v, p.rows(), p.cols())).collect()
    };
    let eval = |p: &EncoderParams| {
        let mut t = Tape::new();
        let o = loss_value(&inst, p, false, &mut t);
        t.value(o).item()
    };
    let mut worst: f64 = 0.0;
    let mut p = inst.params.clone();
    for k in 0..p.tensors().len() {
        for i in 0..p.tensors()[k].data().len() {
            let x0 = p.tensors()[k].data()[i];
            p.tensors_mut()[k].data_mut()[i] = x0 + h;
            let up = eval(&p);
            p.tensors_mut()[k].data_mut()[i] = x0 - h;
            let down = eval(&p);
            p.tensors_mut()[k].data_mut()[i] = x0;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[k].data()[i];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR));
        }
    }
    worst
}

