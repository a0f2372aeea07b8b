//! Weighted sums of tensor-product operators `Σ_m w_m ⊗_k O_{s_{m,k}}`.
//!
//! Codebook mixtures share long common prefixes once sorted, so the sum is
//! built recursively over the first symbol: `Σ_a O_a ⊗ (sum over words
//! starting with a)`. When every local operator is diagonal the whole
//! computation stays on diagonal vectors.

use std::cmp::Ordering;

use crate::linalg::{self, c, CMatrix};

#[derive(Debug, Clone)]
pub(crate) enum LocalOps {
    Dense(Vec<CMatrix>),
    Diagonal(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Operator {
    Dense(CMatrix),
    Diagonal(Vec<f64>),
}

impl LocalOps {
    /// Diagonal representation when every operator is diagonal.
    pub(crate) fn new(ops: Vec<CMatrix>) -> Self {
        if ops.iter().all(linalg::is_diagonal) {
            LocalOps::Diagonal(ops.iter().map(|m| m.diagonal().iter().map(|z| z.re).collect()).collect())
        } else {
            LocalOps::Dense(ops)
        }
    }

    pub(crate) fn is_diagonal(&self) -> bool {
        matches!(self, LocalOps::Diagonal(_))
    }

    pub(crate) fn densify(self) -> Self {
        match self {
            LocalOps::Dense(_) => self,
            LocalOps::Diagonal(v) => LocalOps::Dense(
                v.into_iter()
                    .map(|d| CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.into_iter().map(c))))
                    .collect(),
            ),
        }
    }

    /// `⊗_k O_{word[k]}`.
    pub(crate) fn tensor_word(&self, word: &[u16]) -> Operator {
        match self {
            LocalOps::Dense(ops) => {
                let mut acc = CMatrix::from_element(1, 1, linalg::ONE);
                for &s in word {
                    acc = linalg::kron(&acc, &ops[s as usize]);
                }
                Operator::Dense(acc)
            }
            LocalOps::Diagonal(ops) => {
                let mut acc = vec![1.0];
                for &s in word {
                    acc = kron_diag(&acc, &ops[s as usize]);
                }
                Operator::Diagonal(acc)
            }
        }
    }

    /// `Σ_m w_m ⊗_k O_{word_m[k]}`; all words share one length. Sorts `words` in place.
    pub(crate) fn weighted_sum(&self, words: &mut [(f64, &[u16])]) -> Operator {
        words.sort_by(|a, b| a.1.cmp(b.1).then(a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal)));
        match self {
            LocalOps::Dense(ops) => Operator::Dense(dense_rec(ops, words, 0)),
            LocalOps::Diagonal(ops) => Operator::Diagonal(diag_rec(ops, words, 0)),
        }
    }
}

fn groups<'a, 'b>(words: &'a [(f64, &'b [u16])], depth: usize) -> impl Iterator<Item = (u16, &'a [(f64, &'b [u16])])> {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= words.len() {
            return None;
        }
        let s = words[start].1[depth];
        let end = start + words[start..].iter().take_while(|w| w.1[depth] == s).count();
        let g = &words[start..end];
        start = end;
        Some((s, g))
    })
}

fn dense_rec(ops: &[CMatrix], words: &[(f64, &[u16])], depth: usize) -> CMatrix {
    let len = words[0].1.len();
    if depth == len {
        let w: f64 = words.iter().map(|w| w.0).sum();
        return CMatrix::from_element(1, 1, c(w));
    }
    let mut acc: Option<CMatrix> = None;
    for (s, g) in groups(words, depth) {
        let term = linalg::kron(&ops[s as usize], &dense_rec(ops, g, depth + 1));
        match acc.as_mut() {
            Some(a) => *a += term,
            None => acc = Some(term),
        }
    }
    acc.expect("non-empty word list")
}

fn diag_rec(ops: &[Vec<f64>], words: &[(f64, &[u16])], depth: usize) -> Vec<f64> {
    let len = words[0].1.len();
    if depth == len {
        return vec![words.iter().map(|w| w.0).sum()];
    }
    let mut acc: Option<Vec<f64>> = None;
    for (s, g) in groups(words, depth) {
        let term = kron_diag(&ops[s as usize], &diag_rec(ops, g, depth + 1));
        match acc.as_mut() {
            Some(a) => a.iter_mut().zip(&term).for_each(|(x, y)| *x += y),
            None => acc = Some(term),
        }
    }
    acc.expect("non-empty word list")
}

fn kron_diag(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

impl Operator {
    pub(crate) fn trace(&self) -> f64 {
        match self {
            Operator::Dense(m) => linalg::trace(m).re,
            Operator::Diagonal(d) => d.iter().sum(),
        }
    }

    /// `‖self − other‖₁` for Hermitian operators of the same kind and size.
    pub(crate) fn trace_distance(&self, other: &Operator) -> f64 {
        match (self, other) {
            (Operator::Diagonal(a), Operator::Diagonal(b)) => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            _ => linalg::hermitian_trace_norm(&(self.to_dense() - other.to_dense())),
        }
    }

    pub(crate) fn to_dense(&self) -> CMatrix {
        match self {
            Operator::Dense(m) => m.clone(),
            Operator::Diagonal(d) => CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&v| c(v)))),
        }
    }

    pub(crate) fn into_dense(self) -> CMatrix {
        match self {
            Operator::Dense(m) => m,
            Operator::Diagonal(_) => self.to_dense(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn plus() -> CMatrix {
        CMatrix::from_element(2, 2, c(0.5))
    }

    fn zero() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)])
    }

    #[test]
    fn recursive_sum_matches_direct_sum() {
        let ops = LocalOps::new(vec![zero(), plus(), CMatrix::from_row_slice(2, 2, &[c(0.3), Complex64::new(0.1, 0.2), Complex64::new(0.1, -0.2), c(0.7)])]);
        let words: Vec<Vec<u16>> = vec![vec![0, 1, 2], vec![2, 1, 0], vec![0, 1, 1], vec![0, 1, 2], vec![1, 1, 1]];
        let weights = [0.1, 0.2, 0.3, 0.15, 0.25];
        let mut direct = CMatrix::zeros(8, 8);
        for (w, word) in weights.iter().zip(&words) {
            direct += ops.tensor_word(word).into_dense() * c(*w);
        }
        let mut list: Vec<(f64, &[u16])> = weights.iter().copied().zip(words.iter().map(Vec::as_slice)).collect();
        let fast = ops.weighted_sum(&mut list).into_dense();
        assert!((fast - direct).norm() < 1e-14);
    }

    #[test]
    fn diagonal_path_matches_dense_path() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.2), c(0.8)]));
        let diag = LocalOps::new(vec![zero(), a]);
        assert!(diag.is_diagonal());
        let dense = diag.clone().densify();
        let words: Vec<Vec<u16>> = vec![vec![0, 1], vec![1, 1], vec![1, 0]];
        let mk = |ws: &Vec<Vec<u16>>| -> Vec<(f64, Vec<u16>)> { ws.iter().map(|w| (1.0 / 3.0, w.clone())).collect() };
        let owned = mk(&words);
        let mut l1: Vec<(f64, &[u16])> = owned.iter().map(|(w, v)| (*w, v.as_slice())).collect();
        let mut l2 = l1.clone();
        let x = diag.weighted_sum(&mut l1);
        let y = dense.weighted_sum(&mut l2);
        assert!((x.to_dense() - y.to_dense()).norm() < 1e-15);
        assert!((x.trace() - 1.0).abs() < 1e-15);
    }
}
