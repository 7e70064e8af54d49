//! `S_alpha(rho || gamma)` for `rho` block diagonal in a partition of the
//! product basis and `gamma` diagonal in that basis.
//!
//! Blocks on which `gamma` is constant reduce to classical terms built from the
//! block eigenvalues; other blocks keep their matrix and are treated with the
//! quantum formulas. The per-block terms are combined in log space.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, C64};
use crate::model::BlockStructure;

use super::renyi::{check_alpha, is_one, log_sum_exp, sandwiched_log_trace, stabilized, PROB_CUT};

#[derive(Debug, Clone)]
struct QuantumBlock {
    eigenvalues: Vec<f64>,
    /// `|U_{k i}|^2`, row `i` for eigenvector `i`, column `k` for basis member `k`.
    overlaps: Vec<Vec<f64>>,
    logq: Vec<f64>,
    matrix: DMatrix<C64>,
    diagonal: Vec<f64>,
}

/// A block-diagonal state paired with a diagonal reference state.
#[derive(Debug, Clone)]
pub struct BlockDiagonalPair {
    p: Vec<f64>,
    logq: Vec<f64>,
    quantum: Vec<QuantumBlock>,
}

fn is_constant(v: &[f64]) -> bool {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo <= 1e-12 * hi.abs().max(1.0)
}

impl BlockDiagonalPair {
    /// Splits `matrix` along `partition`; entries coupling different parts are ignored.
    pub fn new(matrix: &ComplexMatrix, partition: &BlockStructure, logq: &[f64]) -> Result<Self> {
        if matrix.dim() != partition.dimension() || logq.len() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                left: matrix.dim(),
                right: logq.len(),
            });
        }
        let mut out = Self {
            p: Vec::with_capacity(matrix.dim()),
            logq: Vec::with_capacity(matrix.dim()),
            quantum: Vec::new(),
        };
        for block in &partition.blocks {
            let idx = &block.members;
            if idx.len() == 1 {
                out.p.push(matrix.get(idx[0], idx[0]).re);
                out.logq.push(logq[idx[0]]);
                continue;
            }
            let sub = matrix.submatrix(idx);
            let lq: Vec<f64> = idx.iter().map(|&i| logq[i]).collect();
            let eig = eigh(&sub)?;
            if is_constant(&lq) {
                out.p.extend(eig.eigenvalues.iter().copied());
                out.logq.extend(std::iter::repeat(lq[0]).take(idx.len()));
                continue;
            }
            let n = idx.len();
            let overlaps = (0..n)
                .map(|i| (0..n).map(|k| eig.eigenvectors.get(k, i).norm_sqr()).collect())
                .collect();
            out.quantum.push(QuantumBlock {
                eigenvalues: eig.eigenvalues.clone(),
                overlaps,
                logq: lq,
                diagonal: sub.diagonal_real(),
                matrix: sub.into_dmatrix(),
            });
        }
        Ok(out)
    }

    /// Fully diagonal state `diag(p)` against `exp(logq)`.
    pub fn diagonal(p: &[f64], logq: &[f64]) -> Self {
        Self {
            p: p.to_vec(),
            logq: logq.to_vec(),
            quantum: Vec::new(),
        }
    }

    /// True when every block reduced to classical terms.
    pub fn is_classical(&self) -> bool {
        self.quantum.is_empty()
    }

    fn classical_terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.p
            .iter()
            .copied()
            .zip(self.logq.iter().copied())
            .filter(|(p, _)| *p > PROB_CUT)
    }

    /// `S_alpha(rho || gamma)` for `alpha ∈ [0, ∞]`.
    pub fn divergence(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.eval(alpha))
    }

    pub(crate) fn eval(&self, alpha: f64) -> f64 {
        stabilized(alpha, |a| self.eval_raw(a))
    }

    fn eval_raw(&self, alpha: f64) -> f64 {
        if alpha == 0.0 {
            let mut terms: Vec<f64> = self.classical_terms().map(|(_, lq)| lq).collect();
            for b in &self.quantum {
                for (i, &l) in b.eigenvalues.iter().enumerate() {
                    if l > PROB_CUT {
                        for (k, &o) in b.overlaps[i].iter().enumerate() {
                            if o > 0.0 {
                                terms.push(o.ln() + b.logq[k]);
                            }
                        }
                    }
                }
            }
            return -log_sum_exp(terms);
        }
        if is_one(alpha) {
            let mut acc: f64 = self.classical_terms().map(|(p, lq)| p * (p.ln() - lq)).sum();
            for b in &self.quantum {
                acc += b.eigenvalues.iter().filter(|&&l| l > PROB_CUT).map(|l| l * l.ln()).sum::<f64>();
                acc -= b.diagonal.iter().zip(&b.logq).map(|(d, lq)| d * lq).sum::<f64>();
            }
            return acc;
        }
        if alpha.is_infinite() {
            let mut best = self
                .classical_terms()
                .map(|(p, lq)| p.ln() - lq)
                .fold(f64::NEG_INFINITY, f64::max);
            for b in &self.quantum {
                best = best.max(sandwiched_log_trace(&b.matrix, &b.logq, alpha));
            }
            return best;
        }
        let mut terms: Vec<f64> = self
            .classical_terms()
            .map(|(p, lq)| alpha * p.ln() + (1.0 - alpha) * lq)
            .collect();
        for b in &self.quantum {
            if alpha < 1.0 {
                for (i, &l) in b.eigenvalues.iter().enumerate() {
                    if l > PROB_CUT {
                        for (k, &o) in b.overlaps[i].iter().enumerate() {
                            if o > 0.0 {
                                terms.push(alpha * l.ln() + o.ln() + (1.0 - alpha) * b.logq[k]);
                            }
                        }
                    }
                }
            } else {
                terms.push(sandwiched_log_trace(&b.matrix, &b.logq, alpha));
            }
        }
        log_sum_exp(terms) / (alpha - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::renyi::renyi_divergence;
    use crate::linalg::c64;
    use crate::model::Block;

    fn partition(dim: usize, parts: &[&[usize]]) -> BlockStructure {
        let blocks = parts
            .iter()
            .enumerate()
            .map(|(e, m)| Block {
                energy: e as f64,
                members: m.to_vec(),
            })
            .collect();
        BlockStructure::from_blocks(dim, blocks).unwrap()
    }

    fn sample_state() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![c64(0.3, 0.0), c64(0.1, 0.05), c64(0.0, 0.0)],
            vec![c64(0.1, -0.05), c64(0.5, 0.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(0.2, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn matches_general_divergence_with_and_without_constant_blocks() {
        let rho = sample_state();
        let part = partition(3, &[&[0, 1], &[2]]);
        for q in [[0.25, 0.25, 0.5], [0.2, 0.3, 0.5]] {
            let logq: Vec<f64> = q.iter().map(|x: &f64| x.ln()).collect();
            let pair = BlockDiagonalPair::new(&rho, &part, &logq).unwrap();
            assert_eq!(pair.is_classical(), q[0] == q[1]);
            let sigma = ComplexMatrix::from_real_diagonal(&q);
            for a in [0.0, 0.25, 0.7, 1.0, 1.8, 4.0, 60.0, f64::INFINITY] {
                let fast = pair.divergence(a).unwrap();
                let slow = renyi_divergence(&rho, &sigma, a).unwrap();
                assert!((fast - slow).abs() < 1e-10, "q={q:?} a={a}: {fast} vs {slow}");
            }
        }
    }
}
