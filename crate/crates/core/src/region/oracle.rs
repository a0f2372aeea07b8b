//! Exhaustive grid search for classical targets.
//!
//! For a fully classical target the extension problem is the decomposition of
//! the joint PMF `P(z₁,…,z_L)` (coordinates: `X` and each output, or the three
//! no-comm outputs) into `Σ_u p(u) Π_i q_i^u(z_i)`. Dephasing the factors of any
//! quantum extension in the computational basis keeps it feasible and cannot
//! increase either objective, so classical factors lose nothing.
//!
//! Components other than the last have weights and factor entries on the grid
//! `k·step`; the last one is forced to equal the remaining residual and must
//! itself be a product ("marginal repair"). With a dyadic step and a dyadic
//! target every subtraction is exact in `f64`. The scan is depth-first with
//! branch and bound and canonical ordering of the free components.

use crate::cq::{CqNetworkState, Topology};
use crate::linalg;
use crate::{Error, Result};

/// Which mutual information the oracle minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleObjective {
    /// `I(X;U)`: only the first coordinate. Not defined for no-comm targets.
    ClassicalInput,
    /// `I(Z₁…Z_L;U)`: every coordinate.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub max_u: usize,
    /// Must be `1/2^k`.
    pub grid_step: f64,
    /// Maximum number of candidate components examined.
    pub budget: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { max_u: 4, grid_step: 1.0 / 64.0, budget: 500_000_000 }
    }
}

/// One component `p · Π_i q_i` of the optimal decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComponent {
    pub weight: f64,
    pub factors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub decomposition: Vec<OracleComponent>,
    pub visited: u64,
}

/// Joint PMF of a classical target with its coordinate sizes.
fn classical_joint(target: &CqNetworkState) -> Result<(Vec<usize>, Vec<f64>)> {
    if !target.is_classical() {
        return Err(Error::InvalidStructure("the oracle needs a target diagonal in the computational basis".into()));
    }
    let mut dims = Vec::new();
    if target.topology().has_classical() {
        dims.push(target.classical_size());
    }
    dims.extend(target.local_dims());
    let mut joint = Vec::new();
    for (p, rho) in target.blocks() {
        joint.extend(rho.matrix().diagonal().iter().map(|z| p * z.re));
    }
    Ok((dims, joint))
}

/// All PMFs on `d` points with entries in `{k/g}`.
fn grid_pmfs(d: usize, g: usize) -> Vec<Vec<f64>> {
    fn rec(d: usize, left: usize, g: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == d {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / g as f64).collect());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(d, left - k, g, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, g, g, &mut Vec::new(), &mut out);
    out
}

struct Search<'a> {
    dims: &'a [usize],
    /// `strides[i]` = product of dims after coordinate i.
    strides: Vec<usize>,
    lists: Vec<Vec<Vec<f64>>>,
    entropies: Vec<Vec<f64>>,
    step: f64,
    max_u: usize,
    objective: OracleObjective,
    budget: u64,
    visited: u64,
    h_total: f64,
    /// Data-processing lower bound on the objective; reaching it ends the scan.
    floor: f64,
    best: Option<(f64, Vec<OracleComponent>)>,
    stack: Vec<OracleComponent>,
    exhausted: bool,
}

const ZERO_TOL: f64 = 1e-15;

impl Search<'_> {
    fn component_entropy(&self, factors: &[Vec<f64>]) -> f64 {
        match self.objective {
            OracleObjective::ClassicalInput => linalg::entropy_bits(factors[0].iter().copied()),
            OracleObjective::All => factors.iter().map(|f| linalg::entropy_bits(f.iter().copied())).sum(),
        }
    }

    fn marginals(&self, residual: &[f64], mass: f64) -> Vec<Vec<f64>> {
        self.dims
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let mut m = vec![0.0; d];
                for (idx, &v) in residual.iter().enumerate() {
                    m[(idx / self.strides[i]) % d] += v / mass;
                }
                m
            })
            .collect()
    }

    fn record(&mut self, value: f64) {
        if self.best.as_ref().map_or(true, |(b, _)| value < *b - 1e-12) {
            self.best = Some((value, self.stack.clone()));
        }
    }

    /// Depth-first scan. `acc` is `Σ p_u H_u` over the fixed components.
    fn visit(&mut self, residual: &[f64], mass: f64, acc: f64, prev: Option<(u64, usize)>) {
        if self.exhausted {
            return;
        }
        if mass <= ZERO_TOL {
            self.record(self.h_total - acc);
            return;
        }
        // Forced last component.
        let factors = self.marginals(residual, mass);
        let first_entropy = linalg::entropy_bits(factors[0].iter().copied());
        let is_product = residual.iter().enumerate().all(|(idx, &v)| {
            let prod: f64 = factors.iter().enumerate().map(|(i, f)| f[(idx / self.strides[i]) % self.dims[i]]).product();
            (prod * mass - v).abs() <= 1e-12
        });
        if is_product {
            let h = self.component_entropy(&factors);
            self.stack.push(OracleComponent { weight: mass, factors });
            self.record(self.h_total - acc - mass * h);
            self.stack.pop();
        }
        if self.stack.len() + 1 >= self.max_u {
            return;
        }
        // The remaining components contribute at most `mass·H(R/mass)` (restricted
        // to the first coordinate for the input objective): conditioning on U
        // cannot increase entropy.
        let rest_entropy = match self.objective {
            OracleObjective::ClassicalInput => first_entropy,
            OracleObjective::All => linalg::entropy_bits(residual.iter().map(|v| v / mass)),
        };
        if let Some((best, _)) = &self.best {
            if self.h_total - acc - mass * rest_entropy >= *best - 1e-12 || *best <= self.floor + 1e-12 {
                return;
            }
        }
        let mut choice = vec![0usize; self.dims.len()];
        self.enumerate(0, &mut choice, &[1.0], residual, mass, acc, prev);
    }

    /// Chooses factor `level` for the next free component, pruning prefixes
    /// whose residual slices cannot host weight `step`.
    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &mut self,
        level: usize,
        choice: &mut Vec<usize>,
        partial: &[f64],
        residual: &[f64],
        mass: f64,
        acc: f64,
        prev: Option<(u64, usize)>,
    ) {
        let rest = self.strides[level];
        for k in 0..self.lists[level].len() {
            if self.exhausted {
                return;
            }
            self.visited += 1;
            if self.visited > self.budget {
                self.exhausted = true;
                return;
            }
            let q = &self.lists[level][k];
            let next: Vec<f64> = partial.iter().flat_map(|&a| q.iter().map(move |&b| a * b)).collect();
            // p·partial(prefix) ≤ Σ_suffix residual(prefix, suffix) must allow p = step.
            let p_cap = next
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(|(prefix, &v)| residual[prefix * rest..(prefix + 1) * rest].iter().sum::<f64>() / v)
                .fold(f64::INFINITY, f64::min);
            if p_cap < self.step - ZERO_TOL {
                continue;
            }
            choice[level] = k;
            if level + 1 < self.dims.len() {
                self.enumerate(level + 1, choice, &next, residual, mass, acc, prev);
                continue;
            }
            let key = linalg::compose(choice, &self.lists.iter().map(Vec::len).collect::<Vec<_>>()) as u64;
            let factors: Vec<Vec<f64>> = choice.iter().enumerate().map(|(i, &c)| self.lists[i][c].clone()).collect();
            let h = match self.objective {
                OracleObjective::ClassicalInput => self.entropies[0][choice[0]],
                OracleObjective::All => choice.iter().enumerate().map(|(i, &c)| self.entropies[i][c]).sum(),
            };
            let max_k = ((p_cap.min(mass) + ZERO_TOL) / self.step).floor() as usize;
            for pk in (1..=max_k).rev() {
                if let Some((pkey, ppk)) = prev {
                    if (pk, key) > (ppk, pkey) {
                        continue;
                    }
                }
                let p = pk as f64 * self.step;
                if p >= mass - ZERO_TOL {
                    continue;
                }
                let mut ok = true;
                let new_res: Vec<f64> = residual
                    .iter()
                    .zip(&next)
                    .map(|(&r, &v)| {
                        let x = r - p * v;
                        if x < -ZERO_TOL {
                            ok = false;
                        }
                        if x.abs() <= ZERO_TOL {
                            0.0
                        } else {
                            x
                        }
                    })
                    .collect();
                if !ok {
                    continue;
                }
                self.stack.push(OracleComponent { weight: p, factors: factors.clone() });
                self.visit(&new_res, mass - p, acc + p * h, Some((key, pk)));
                self.stack.pop();
                if self.exhausted {
                    return;
                }
            }
        }
    }
}

fn coordinate_marginal(dims: &[usize], strides: &[usize], joint: &[f64], i: usize) -> Vec<f64> {
    let mut m = vec![0.0; dims[i]];
    for (idx, &v) in joint.iter().enumerate() {
        m[(idx / strides[i]) % dims[i]] += v;
    }
    m
}

/// Minimum of the objective over grid decompositions of a classical target.
pub fn brute_force_oracle(target: &CqNetworkState, objective: OracleObjective, opts: &OracleOptions) -> Result<OracleResult> {
    if objective == OracleObjective::ClassicalInput && target.topology() == Topology::NoComm {
        return Err(Error::InvalidStructure("no-comm targets have no classical input".into()));
    }
    let g = (1.0 / opts.grid_step).round();
    if !(g >= 1.0 && (g as u64).is_power_of_two() && (opts.grid_step * g - 1.0).abs() < 1e-15) {
        return Err(Error::InvalidStructure(format!("grid step {} is not of the form 1/2^k", opts.grid_step)));
    }
    if opts.max_u == 0 {
        return Err(Error::InvalidStructure("max_u must be positive".into()));
    }
    let (dims, joint) = classical_joint(target)?;
    let strides: Vec<usize> = (0..dims.len()).map(|i| dims[i + 1..].iter().product()).collect();
    let lists: Vec<Vec<Vec<f64>>> = dims.iter().map(|&d| grid_pmfs(d, g as usize)).collect();
    let entropies = lists.iter().map(|l| l.iter().map(|q| linalg::entropy_bits(q.iter().copied())).collect()).collect();
    let h_total = match objective {
        OracleObjective::All => linalg::entropy_bits(joint.iter().copied()),
        OracleObjective::ClassicalInput => linalg::entropy_bits(coordinate_marginal(&dims, &strides, &joint, 0)),
    };
    // I(Z_i; Z_rest) ≤ I(Z_i; U) ≤ objective, for every i (only i = 0 for the input objective).
    let parties = if objective == OracleObjective::All { dims.len() } else { 1 };
    let h_joint = linalg::entropy_bits(joint.iter().copied());
    let floor = (0..parties)
        .map(|i| {
            let hi = linalg::entropy_bits(coordinate_marginal(&dims, &strides, &joint, i));
            let mut rest = vec![0.0; joint.len() / dims[i]];
            for (idx, &v) in joint.iter().enumerate() {
                let high = idx / (strides[i] * dims[i]);
                rest[high * strides[i] + idx % strides[i]] += v;
            }
            hi + linalg::entropy_bits(rest) - h_joint
        })
        .fold(0.0, f64::max);
    let mut search = Search {
        dims: &dims,
        strides,
        lists,
        entropies,
        step: opts.grid_step,
        max_u: opts.max_u,
        objective,
        budget: opts.budget,
        visited: 0,
        h_total,
        floor,
        best: None,
        stack: Vec::new(),
        exhausted: false,
    };
    let mass: f64 = joint.iter().sum();
    search.visit(&joint, mass, 0.0, None);
    if search.exhausted {
        return Err(Error::BudgetExceeded { budget: opts.budget, best: search.best.map(|b| b.0) });
    }
    match search.best {
        Some((value, decomposition)) => Ok(OracleResult { value: value.max(0.0), decomposition, visited: search.visited }),
        None => Err(Error::InvalidStructure(format!("no decomposition with at most {} components on the grid", opts.max_u))),
    }
}
