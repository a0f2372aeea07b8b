//! Multi-start local search over extensions of a fixed target.
//!
//! Variables are softmax logits per classical row, so that
//! `w_{xu} = p_x · softmax(a_x)_u` keeps the X-marginal exact, and a square-root
//! factor per auxiliary symbol and party with `θ = AA†/Tr AA†`, which keeps every
//! factor a density operator. For the weighted objective `λ·I(X;U) + (1−λ)·I(XQ;U)`
//! and a feasible point,
//!
//! `J = I(X;U) − (1−λ)·Σ_u p(u) Σ_l H(θ_l^u) + const`,
//!
//! because `I(XQ;U) = I(X;U) + H(Q|X)_ω − H(Q|XU)_σ`. The marginal constraint
//! `R_x = Σ_u w_{xu} ⊗_l θ_l^u − p_x ω^x = 0` enters as a quadratic penalty with a
//! growing weight. The logits and the factors are updated alternately with Adam.
//! A Gauss–Newton projection on `(√w, A)` then removes the remaining residual, and
//! the candidate is kept only if its trace-norm residual is within `τ_feas`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cq::{self, CqNetworkState, Extension, Topology};
use crate::limits::Tolerances;
use crate::linalg::{self, c, CMatrix};
use crate::qstate::{self, DensityOperator, Register};
use crate::softcover::derive_seed;

const PENALTY_SCHEDULE: [f64; 5] = [1.0, 10.0, 1e2, 1e3, 1e4];
const LEARNING_RATE: f64 = 0.05;
const EIGEN_FLOOR: f64 = 1e-12;
const PROJECTION_STEPS: usize = 60;

/// The fixed data of one optimization problem.
pub(crate) struct Problem {
    topology: Topology,
    p_x: Vec<f64>,
    /// `p_x ω^x`.
    weighted_blocks: Vec<CMatrix>,
    dims: Vec<usize>,
}

impl Problem {
    pub(crate) fn new(target: &CqNetworkState) -> Self {
        let (p_x, weighted_blocks) = target.blocks().map(|(p, rho)| (p, rho.matrix() * c(p))).unzip();
        Self { topology: target.topology(), p_x, weighted_blocks, dims: target.local_dims() }
    }

    fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Optimization variables: logits `[x][u]` and square-root factors `[u][l]`.
#[derive(Debug, Clone)]
struct Point {
    logits: Vec<Vec<f64>>,
    roots: Vec<Vec<CMatrix>>,
}

impl Point {
    fn random(problem: &Problem, u_count: usize, rng: &mut ChaCha8Rng) -> Self {
        let logits = problem.p_x.iter().map(|_| (0..u_count).map(|_| qstate::gaussian(rng)).collect()).collect();
        let roots = (0..u_count)
            .map(|_| {
                problem
                    .dims
                    .iter()
                    .map(|&d| CMatrix::from_fn(d, d, |_, _| Complex64::new(qstate::gaussian(rng), qstate::gaussian(rng))))
                    .collect()
            })
            .collect();
        Self { logits, roots }
    }

    fn u_count(&self) -> usize {
        self.roots.len()
    }
}

fn softmax(row: &[f64]) -> Vec<f64> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = row.iter().map(|a| (a - max).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

fn normalized_square(a: &CMatrix) -> (CMatrix, f64) {
    let m = a * a.adjoint();
    let t = linalg::trace(&m).re;
    (linalg::symmetrize(&(m / c(t))), t)
}

fn kron_all<'a>(ops: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    ops.into_iter().fold(CMatrix::from_element(1, 1, linalg::ONE), |acc, m| linalg::kron(&acc, m))
}

/// `tr_{¬l} m` for an operator on registers of the given dimensions.
fn keep_one(m: &CMatrix, dims: &[usize], l: usize) -> CMatrix {
    let dl = dims[l];
    let before: usize = dims[..l].iter().product();
    let after: usize = dims[l + 1..].iter().product();
    CMatrix::from_fn(dl, dl, |a, b| {
        let mut s = linalg::ZERO;
        for i in 0..before {
            for k in 0..after {
                s += m[((i * dl + a) * after + k, (i * dl + b) * after + k)];
            }
        }
        s
    })
}

fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Which gradient blocks `evaluate` should compute; the alternating updates need one at a time.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Want {
    Value,
    Logits,
    Roots,
    #[cfg(test)]
    Both,
}

impl Want {
    fn logits(self) -> bool {
        #[cfg(test)]
        if self == Want::Both {
            return true;
        }
        self == Want::Logits
    }

    fn roots(self) -> bool {
        #[cfg(test)]
        if self == Want::Both {
            return true;
        }
        self == Want::Roots
    }
}

struct Gradient {
    logits: Vec<Vec<f64>>,
    roots: Vec<Vec<CMatrix>>,
}

/// Penalized objective and, on request, gradient blocks (empty when not requested).
fn evaluate(problem: &Problem, lambda: f64, mu: f64, pt: &Point, want: Want) -> (f64, Option<Gradient>) {
    let nu = pt.u_count();
    let beta = 1.0 - lambda;
    let s: Vec<Vec<f64>> = pt.logits.iter().map(|r| softmax(r)).collect();
    let w: Vec<Vec<f64>> = s.iter().zip(&problem.p_x).map(|(row, &px)| row.iter().map(|v| px * v).collect()).collect();
    let p_u: Vec<f64> = (0..nu).map(|u| w.iter().map(|r| r[u]).sum()).collect();

    let mut thetas: Vec<Vec<CMatrix>> = Vec::with_capacity(nu);
    let mut traces: Vec<Vec<f64>> = Vec::with_capacity(nu);
    let mut logs: Vec<Vec<CMatrix>> = Vec::with_capacity(nu);
    let mut local_entropy = vec![0.0; nu];
    for u in 0..nu {
        let mut th = Vec::new();
        let mut tr = Vec::new();
        let mut lg = Vec::new();
        for a in &pt.roots[u] {
            let (theta, t) = normalized_square(a);
            let (vals, vecs) = linalg::hermitian_eigen(&theta);
            local_entropy[u] += linalg::entropy_bits(vals.iter().copied());
            if want.roots() && beta > 0.0 {
                lg.push(linalg::spectral_apply(&vals, &vecs, |v| v.max(EIGEN_FLOOR).log2()));
            }
            th.push(theta);
            tr.push(t);
        }
        thetas.push(th);
        traces.push(tr);
        logs.push(lg);
    }
    let outputs: Vec<CMatrix> =
        thetas.iter().map(|th| if th.len() == 1 { th[0].clone() } else { kron_all(th) }).collect();
    let residuals: Vec<CMatrix> = problem
        .weighted_blocks
        .iter()
        .zip(&w)
        .map(|(target, row)| {
            let mut r = -target.clone();
            for (u, out) in outputs.iter().enumerate() {
                if row[u] != 0.0 {
                    let wt = row[u];
                    r.zip_apply(out, |a, b| *a += b * wt);
                }
            }
            r
        })
        .collect();

    let h_xu = linalg::entropy_bits(w.iter().flatten().copied());
    let i_xu = linalg::entropy_bits(problem.p_x.iter().copied()) + linalg::entropy_bits(p_u.iter().copied()) - h_xu;
    let penalty: f64 = residuals.iter().map(frobenius_sq).sum();
    let value = i_xu - beta * p_u.iter().zip(&local_entropy).map(|(p, h)| p * h).sum::<f64>() + 0.5 * mu * penalty;
    if want == Want::Value {
        return (value, None);
    }

    let tiny = 1e-300;
    let g_logits = if !want.logits() {
        Vec::new()
    } else {
        (0..w.len())
        .map(|x| {
            let g: Vec<f64> = (0..nu)
                .map(|u| {
                    let overlap: f64 = residuals[x].iter().zip(outputs[u].iter()).map(|(r, o)| (r.conj() * o).re).sum();
                    (w[x][u].max(tiny) / p_u[u].max(tiny)).log2() - beta * local_entropy[u] + mu * overlap
                })
                .collect();
            let mean: f64 = s[x].iter().zip(&g).map(|(a, b)| a * b).sum();
            (0..nu).map(|u| w[x][u] * (g[u] - mean)).collect()
        })
        .collect()
    };
    if !want.roots() {
        return (value, Some(Gradient { logits: g_logits, roots: Vec::new() }));
    }

    let ident: Vec<CMatrix> = problem.dims.iter().map(|&d| CMatrix::identity(d, d)).collect();
    let g_roots = (0..nu)
        .map(|u| {
            let mut weighted_residual = CMatrix::zeros(problem.total_dim(), problem.total_dim());
            for (x, r) in residuals.iter().enumerate() {
                if w[x][u] != 0.0 {
                    let wt = w[x][u];
                    weighted_residual.zip_apply(r, |a, b| *a += b * wt);
                }
            }
            (0..problem.dims.len())
                .map(|l| {
                    let mut g = CMatrix::zeros(problem.dims[l], problem.dims[l]);
                    if beta > 0.0 {
                        g += &logs[u][l] * c(beta * p_u[u]);
                    }
                    if mu > 0.0 && problem.dims.len() == 1 {
                        g += &weighted_residual * c(mu);
                    } else if mu > 0.0 {
                        let others = kron_all((0..problem.dims.len()).map(|m| if m == l { &ident[m] } else { &thetas[u][m] }));
                        g += keep_one(&(&weighted_residual * others), &problem.dims, l) * c(mu);
                    }
                    let g = linalg::symmetrize(&g);
                    let shift = (&g * &thetas[u][l]).trace().re;
                    let centered = g - CMatrix::identity(problem.dims[l], problem.dims[l]) * c(shift);
                    centered * &pt.roots[u][l] * c(2.0 / traces[u][l])
                })
                .collect()
        })
        .collect();
    (value, Some(Gradient { logits: g_logits, roots: g_roots }))
}

/// Adam state over a flat parameter vector.
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let (c1, c2) = (1.0 - B1.powi(self.t), 1.0 - B2.powi(self.t));
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-12);
        }
    }
}

fn flatten_roots(roots: &[Vec<CMatrix>]) -> Vec<f64> {
    roots.iter().flatten().flat_map(|m| m.iter().flat_map(|z| [z.re, z.im])).collect()
}

fn unflatten_roots(flat: &[f64], roots: &mut [Vec<CMatrix>]) {
    let mut it = flat.chunks_exact(2);
    for m in roots.iter_mut().flatten() {
        for z in m.iter_mut() {
            let p = it.next().expect("length matches");
            *z = Complex64::new(p[0], p[1]);
        }
    }
}

/// Penalty phases with alternating block updates. Returns the number of iterations.
fn descend(problem: &Problem, lambda: f64, pt: &mut Point, iterations: usize) -> usize {
    let per_phase = (iterations / PENALTY_SCHEDULE.len()).max(1);
    let mut done = 0;
    for &mu in &PENALTY_SCHEDULE {
        let mut logits_flat: Vec<f64> = pt.logits.iter().flatten().copied().collect();
        let mut roots_flat = flatten_roots(&pt.roots);
        let mut adam_w = Adam::new(logits_flat.len());
        let mut adam_a = Adam::new(roots_flat.len());
        let nu = pt.u_count();
        for _ in 0..per_phase {
            let (_, g) = evaluate(problem, lambda, mu, pt, Want::Logits);
            let g = g.expect("gradient requested");
            let gw: Vec<f64> = g.logits.iter().flatten().copied().collect();
            adam_w.step(&mut logits_flat, &gw, LEARNING_RATE);
            for (row, chunk) in pt.logits.iter_mut().zip(logits_flat.chunks_exact(nu)) {
                row.copy_from_slice(chunk);
            }
            let (_, g) = evaluate(problem, lambda, mu, pt, Want::Roots);
            let ga = flatten_roots(&g.expect("gradient requested").roots);
            adam_a.step(&mut roots_flat, &ga, LEARNING_RATE);
            unflatten_roots(&roots_flat, &mut pt.roots);
            done += 1;
        }
    }
    done
}

/// Variables of the projection step: `w = t²` and the square-root factors.
struct Projection<'a> {
    problem: &'a Problem,
    t: Vec<Vec<f64>>,
    roots: Vec<Vec<CMatrix>>,
}

impl Projection<'_> {
    fn outputs(&self) -> Vec<CMatrix> {
        self.roots.iter().map(|rs| kron_all(&rs.iter().map(|a| normalized_square(a).0).collect::<Vec<_>>())).collect()
    }

    fn residual_vector(&self, outputs: &[CMatrix]) -> DVector<f64> {
        let d = self.problem.total_dim();
        let mut v = Vec::with_capacity(self.t.len() * d * d * 2);
        for (x, target) in self.problem.weighted_blocks.iter().enumerate() {
            let mut r = -target.clone();
            for (u, out) in outputs.iter().enumerate() {
                r += out * c(self.t[x][u] * self.t[x][u]);
            }
            v.extend(r.iter().flat_map(|z| [z.re, z.im]));
        }
        DVector::from_vec(v)
    }

    fn param_count(&self) -> usize {
        self.t.len() * self.roots.len() + self.roots.iter().flatten().map(|a| 2 * a.len()).sum::<usize>()
    }

    /// Jacobian of the residual vector: analytic in `t`, central differences in the factors.
    fn jacobian(&self, outputs: &[CMatrix]) -> DMatrix<f64> {
        let d = self.problem.total_dim();
        let block = 2 * d * d;
        let (nx, nu) = (self.t.len(), self.roots.len());
        let mut jac = DMatrix::zeros(nx * block, self.param_count());
        let mut col = 0;
        for x in 0..nx {
            for u in 0..nu {
                let scale = 2.0 * self.t[x][u];
                for (k, z) in outputs[u].iter().enumerate() {
                    jac[(x * block + 2 * k, col)] = scale * z.re;
                    jac[(x * block + 2 * k + 1, col)] = scale * z.im;
                }
                col += 1;
            }
        }
        const H: f64 = 1e-6;
        for u in 0..nu {
            let thetas: Vec<CMatrix> = self.roots[u].iter().map(|a| normalized_square(a).0).collect();
            for l in 0..self.roots[u].len() {
                let a = &self.roots[u][l];
                for k in 0..a.len() {
                    for part in 0..2 {
                        let delta = if part == 0 { Complex64::new(H, 0.0) } else { Complex64::new(0.0, H) };
                        let shifted = |sign: f64| {
                            let mut b = a.clone();
                            b[k] += delta * sign;
                            let mut th = thetas.clone();
                            th[l] = normalized_square(&b).0;
                            kron_all(&th)
                        };
                        let diff = (shifted(1.0) - shifted(-1.0)) / c(2.0 * H);
                        for x in 0..nx {
                            let wx = self.t[x][u] * self.t[x][u];
                            if wx == 0.0 {
                                continue;
                            }
                            for (e, z) in diff.iter().enumerate() {
                                jac[(x * block + 2 * e, col)] = wx * z.re;
                                jac[(x * block + 2 * e + 1, col)] = wx * z.im;
                            }
                        }
                        col += 1;
                    }
                }
            }
        }
        jac
    }

    fn apply(&mut self, step: &DVector<f64>, scale: f64) {
        let mut i = 0;
        for row in self.t.iter_mut() {
            for v in row.iter_mut() {
                *v += scale * step[i];
                i += 1;
            }
        }
        for a in self.roots.iter_mut().flatten() {
            for z in a.iter_mut() {
                *z += Complex64::new(scale * step[i], scale * step[i + 1]);
                i += 2;
            }
        }
    }

    /// Gauss–Newton with minimum-norm steps and backtracking.
    fn run(&mut self, target_norm: f64) {
        let mut outputs = self.outputs();
        let mut f = self.residual_vector(&outputs);
        for _ in 0..PROJECTION_STEPS {
            let norm = f.norm();
            if norm <= target_norm {
                break;
            }
            let jac = self.jacobian(&outputs);
            let svd = jac.svd(true, true);
            let Ok(step) = svd.solve(&(-&f), 1e-12) else { break };
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                self.apply(&step, scale);
                let trial_out = self.outputs();
                let trial = self.residual_vector(&trial_out);
                if trial.norm() < norm {
                    outputs = trial_out;
                    f = trial;
                    accepted = true;
                    break;
                }
                self.apply(&step, -scale);
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }
}

/// Builds an extension from (possibly slightly unnormalized) weights and factors,
/// dropping auxiliary symbols of negligible weight and restoring the exact X-marginal.
fn build_extension(problem: &Problem, w: &[Vec<f64>], thetas: &[Vec<CMatrix>]) -> Option<Extension> {
    let nu = thetas.len();
    let keep: Vec<usize> = (0..nu).filter(|&u| w.iter().map(|r| r[u]).sum::<f64>() > 1e-14).collect();
    if keep.is_empty() {
        return None;
    }
    let joint: Vec<Vec<f64>> = w
        .iter()
        .zip(&problem.p_x)
        .map(|(row, &px)| {
            let kept: Vec<f64> = keep.iter().map(|&u| row[u].max(0.0)).collect();
            let total: f64 = kept.iter().sum();
            if px == 0.0 || total == 0.0 {
                vec![0.0; kept.len()]
            } else {
                kept.iter().map(|v| v * px / total).collect()
            }
        })
        .collect();
    let labels = problem.topology.quantum_labels();
    let factors = keep
        .iter()
        .map(|&u| {
            thetas[u]
                .iter()
                .zip(labels)
                .map(|(m, name)| DensityOperator::new(m.clone(), vec![Register::new(*name, m.nrows())]).ok())
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Extension::new(problem.topology, joint, factors).ok()
}

/// One feasible extension with its information values.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub ext: Extension,
    pub i_xu: f64,
    pub i_all: f64,
    pub residual: f64,
}

impl Candidate {
    pub(crate) fn value(&self, lambda: f64) -> f64 {
        lambda * self.i_xu + (1.0 - lambda) * self.i_all
    }
}

pub(crate) fn candidate(ext: Extension, target: &CqNetworkState, tol: &Tolerances) -> (f64, Option<Candidate>) {
    let residual = match cq::feasibility_residual(&ext, target) {
        Ok(r) => r,
        Err(_) => return (f64::INFINITY, None),
    };
    if residual > tol.feas {
        return (residual, None);
    }
    let (i_xu, i_all) = cq::info_blockwise(&ext);
    (residual, Some(Candidate { ext, i_xu, i_all, residual }))
}

/// One randomized local search with `u_count` auxiliary symbols.
pub(crate) fn local_search(
    problem: &Problem,
    target: &CqNetworkState,
    lambda: f64,
    u_count: usize,
    iterations: usize,
    seed: u64,
    tol: &Tolerances,
) -> (usize, f64, Option<Candidate>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pt = Point::random(problem, u_count, &mut rng);
    let iters = descend(problem, lambda, &mut pt, iterations);
    let t = pt
        .logits
        .iter()
        .zip(&problem.p_x)
        .map(|(row, &px)| softmax(row).into_iter().map(|s| (px * s).sqrt()).collect())
        .collect();
    let mut proj = Projection { problem, t, roots: pt.roots };
    proj.run(tol.feas * 1e-4);
    let w: Vec<Vec<f64>> = proj.t.iter().map(|r| r.iter().map(|v| v * v).collect()).collect();
    let thetas: Vec<Vec<CMatrix>> = proj.roots.iter().map(|rs| rs.iter().map(|a| normalized_square(a).0).collect()).collect();
    match build_extension(problem, &w, &thetas) {
        Some(ext) => {
            let (res, cand) = candidate(ext, target, tol);
            (iters, res, cand)
        }
        None => (iters, f64::INFINITY, None),
    }
}

/// Deterministic seed of restart `index` at alphabet size `u_count`.
pub(crate) fn restart_seed(master: u64, u_count: usize, index: usize) -> u64 {
    derive_seed(master, &[u_count as u64, index as u64])
}

/// Exactly feasible starting extensions derived from the target's structure:
/// `U = X`, a single symbol carrying the marginal, and (for diagonal targets)
/// `U` = the joint computational-basis outcome.
pub(crate) fn canonical_extensions(target: &CqNetworkState) -> Vec<Extension> {
    let mut out = Vec::new();
    if target.topology() != Topology::NoComm {
        if let Ok(e) = Extension::identity(target) {
            out.push(e);
        }
    }
    let labels = target.topology().quantum_labels();
    let marginal = target.quantum_marginal();
    let locals: Option<Vec<DensityOperator>> = labels.iter().map(|l| marginal.reduce(&[l]).ok()).collect();
    if let Some(locals) = locals {
        let joint: Vec<Vec<f64>> = target.blocks().map(|(p, _)| vec![p]).collect();
        if let Ok(e) = Extension::new(target.topology(), joint, vec![locals]) {
            out.push(e);
        }
    }
    if target.conditionals().iter().all(DensityOperator::is_diagonal) {
        let dims = target.local_dims();
        let d: usize = dims.iter().product();
        let blocks: Vec<(f64, Vec<f64>)> =
            target.blocks().map(|(p, rho)| (p, rho.matrix().diagonal().iter().map(|z| z.re).collect())).collect();
        let support: Vec<usize> = (0..d).filter(|&i| blocks.iter().any(|(p, diag)| p * diag[i] > 0.0)).collect();
        let joint: Vec<Vec<f64>> = blocks.iter().map(|(p, diag)| support.iter().map(|&i| p * diag[i]).collect()).collect();
        let mut digits = vec![0; dims.len()];
        let factors: Option<Vec<Vec<DensityOperator>>> = support
            .iter()
            .map(|&i| {
                linalg::digits(i, &dims, &mut digits);
                digits
                    .iter()
                    .zip(&dims)
                    .zip(labels)
                    .map(|((&k, &dl), name)| DensityOperator::basis(k, vec![Register::new(*name, dl)]).ok())
                    .collect()
            })
            .collect();
        if let Some(f) = factors {
            if let Ok(e) = Extension::new(target.topology(), joint, f) {
                out.push(e);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::registers;

    fn ket(i: usize, name: &str) -> DensityOperator {
        DensityOperator::basis(i, registers(&[(name, 2)])).unwrap()
    }

    fn flat(pt: &Point) -> Vec<f64> {
        let mut v: Vec<f64> = pt.logits.iter().flatten().copied().collect();
        v.extend(flatten_roots(&pt.roots));
        v
    }

    fn set(pt: &mut Point, v: &[f64]) {
        let nu = pt.u_count();
        let nl = pt.logits.len() * nu;
        for (row, chunk) in pt.logits.iter_mut().zip(v[..nl].chunks_exact(nu)) {
            row.copy_from_slice(chunk);
        }
        unflatten_roots(&v[nl..], &mut pt.roots);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let plus = DensityOperator::pure(&[c(1.0), c(1.0)], registers(&[("B", 2)])).unwrap();
        let t = CqNetworkState::two_node(vec![0.3, 0.7], vec![ket(0, "B"), plus]).unwrap();
        let problem = Problem::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut pt = Point::random(&problem, 3, &mut rng);
        for &(lambda, mu) in &[(1.0, 0.0), (0.0, 0.0), (0.4, 3.0)] {
            let (_, g) = evaluate(&problem, lambda, mu, &pt, Want::Both);
            let g = g.unwrap();
            let mut analytic: Vec<f64> = g.logits.iter().flatten().copied().collect();
            analytic.extend(flatten_roots(&g.roots));
            let base = flat(&pt);
            for i in 0..base.len() {
                let h = 1e-6;
                let mut v = base.clone();
                v[i] += h;
                set(&mut pt, &v);
                let up = evaluate(&problem, lambda, mu, &pt, Want::Value).0;
                v[i] -= 2.0 * h;
                set(&mut pt, &v);
                let down = evaluate(&problem, lambda, mu, &pt, Want::Value).0;
                set(&mut pt, &base);
                let numeric = (up - down) / (2.0 * h);
                assert!((numeric - analytic[i]).abs() < 1e-5 * (1.0 + numeric.abs()), "param {i}: {numeric} vs {}", analytic[i]);
            }
        }
    }

    #[test]
    fn canonical_extensions_are_feasible() {
        let t = CqNetworkState::two_node(vec![0.5, 0.5], vec![ket(0, "B"), DensityOperator::diagonal(&[0.5, 0.5], registers(&[("B", 2)])).unwrap()])
            .unwrap();
        let seeds = canonical_extensions(&t);
        assert_eq!(seeds.len(), 3);
        let feasible: Vec<bool> = seeds.iter().map(|e| cq::feasibility_residual(e, &t).unwrap() < 1e-12).collect();
        // U = X and the basis seed are exact; the marginal seed is not (conditionals differ).
        assert_eq!(feasible, vec![true, false, true]);
    }

    #[test]
    fn local_search_finds_feasible_point_for_quantum_target() {
        let plus = DensityOperator::pure(&[c(1.0), c(1.0)], registers(&[("B", 2)])).unwrap();
        let t = CqNetworkState::two_node(vec![0.5, 0.5], vec![ket(0, "B"), plus]).unwrap();
        let problem = Problem::new(&t);
        let tol = Tolerances::default();
        let (_, residual, cand) = local_search(&problem, &t, 0.0, 2, 600, 1, &tol);
        let cand = cand.unwrap_or_else(|| panic!("residual {residual}"));
        assert!(cand.residual <= tol.feas);
        // Pure conditionals force U to determine the state: I(XB;U) ≥ I(X;B).
        let holevo = qstate::von_neumann_entropy(&t.quantum_marginal());
        assert!(cand.i_all >= holevo - 1e-6);
    }
}
