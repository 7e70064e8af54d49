//! Rényi divergences: classical, Petz (α < 1) and sandwiched (α > 1).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{dagger, eigh, ComplexMatrix, HermitianEigensystem, C64};

/// Eigenvalues or probabilities at or below this are outside the support.
pub const PROB_CUT: f64 = 1e-12;

/// Weight of `rho` outside `supp sigma` above which `S_alpha` (α ≥ 1) is `+inf`.
pub const SUPPORT_LEAK_TOL: f64 = 1e-12;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::BadAlpha(alpha));
    }
    Ok(())
}

pub(crate) fn is_one(alpha: f64) -> bool {
    (alpha - 1.0).abs() < 1e-9
}

/// Half-width of the window around α = 1 where the generic formulas lose
/// precision to cancellation and are replaced by interpolation.
pub const NEAR_ONE: f64 = 1e-4;

/// Evaluates `f` at `alpha`, replacing points with `0 < |alpha - 1| < NEAR_ONE`
/// by the quadratic through `f(1 - NEAR_ONE)`, `f(1)`, `f(1 + NEAR_ONE)`.
pub(crate) fn stabilized(alpha: f64, f: impl Fn(f64) -> f64) -> f64 {
    let d = alpha - 1.0;
    if is_one(alpha) || d.abs() >= NEAR_ONE {
        return f(alpha);
    }
    let h = NEAR_ONE;
    let (a, b, c) = (f(1.0 - h), f(1.0), f(1.0 + h));
    let t = d / h;
    b + 0.5 * t * (c - a) + 0.5 * t * t * (c - 2.0 * b + a)
}

/// `ln Σ exp(x)`, `-inf` for an empty input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().filter(|x| *x > f64::NEG_INFINITY).collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Classical `S_alpha(p || q)` for probability vectors, `alpha ∈ [0, ∞]`.
pub fn classical_renyi(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    check_alpha(alpha)?;
    let logq: Vec<f64> = q.iter().map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY }).collect();
    Ok(classical_renyi_log(p, &logq, alpha))
}

/// Classical Rényi divergence with the reference given as log-weights.
pub fn classical_renyi_log(p: &[f64], logq: &[f64], alpha: f64) -> f64 {
    let terms = p.iter().zip(logq).filter(|(p, _)| **p > PROB_CUT);
    if alpha == 0.0 {
        return -log_sum_exp(terms.map(|(_, lq)| *lq));
    }
    if alpha.is_infinite() {
        return terms.map(|(p, lq)| p.ln() - lq).fold(f64::NEG_INFINITY, f64::max);
    }
    if is_one(alpha) {
        return terms.map(|(p, lq)| p * (p.ln() - lq)).sum();
    }
    let lt = log_sum_exp(terms.map(|(p, lq)| alpha * p.ln() + (1.0 - alpha) * lq));
    lt / (alpha - 1.0)
}

fn support_values(eig: &HermitianEigensystem) -> Vec<f64> {
    let top = eig.max_abs_eigenvalue().max(1.0);
    eig.eigenvalues
        .iter()
        .map(|&l| if l <= PROB_CUT * top { 0.0 } else { l })
        .collect()
}

/// Quantum `S_alpha(rho || sigma)`: Petz for `alpha < 1`, relative entropy at 1,
/// sandwiched for `alpha > 1`, max-relative entropy at ∞ and `-ln Tr[P_rho sigma]` at 0.
pub fn renyi_divergence(rho: &ComplexMatrix, sigma: &ComplexMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let d = alpha - 1.0;
    if !is_one(alpha) && d.abs() < NEAR_ONE {
        let (a, b, c) = (
            renyi_divergence(rho, sigma, 1.0 - NEAR_ONE)?,
            renyi_divergence(rho, sigma, 1.0)?,
            renyi_divergence(rho, sigma, 1.0 + NEAR_ONE)?,
        );
        return Ok(stabilized(alpha, |x| if x < 1.0 && !is_one(x) { a } else if is_one(x) { b } else { c }));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    check_alpha(alpha)?;
    let er = eigh(rho)?;
    let es = eigh(sigma)?;
    let lr = support_values(&er);
    let ls = support_values(&es);
    let n = rho.dim();
    // |<r_i|s_j>|^2
    let cross = &dagger(&er.eigenvectors) * &es.eigenvectors;
    let overlap = |i: usize, j: usize| cross.get(i, j).norm_sqr();

    if alpha < 1.0 && !is_one(alpha) {
        let mut terms = Vec::new();
        for i in (0..n).filter(|&i| lr[i] > 0.0) {
            for j in (0..n).filter(|&j| ls[j] > 0.0) {
                let o = overlap(i, j);
                if o > 0.0 {
                    let a = if alpha == 0.0 { 0.0 } else { alpha * lr[i].ln() };
                    terms.push(a + o.ln() + (1.0 - alpha) * ls[j].ln());
                }
            }
        }
        let lt = log_sum_exp(terms);
        if alpha == 0.0 {
            return Ok(-lt);
        }
        return Ok(lt / (alpha - 1.0));
    }

    // rho in the eigenbasis of sigma
    let rs = es.to_eigenbasis(rho);
    let leak: f64 = (0..n).filter(|&j| ls[j] == 0.0).map(|j| rs.get(j, j).re).sum();
    if leak > SUPPORT_LEAK_TOL * rho.max_abs().max(1.0) {
        return Ok(f64::INFINITY);
    }
    let supp: Vec<usize> = (0..n).filter(|&j| ls[j] > 0.0).collect();
    let logs: Vec<f64> = supp.iter().map(|&j| ls[j].ln()).collect();

    if is_one(alpha) {
        let ent: f64 = lr.iter().filter(|&&l| l > 0.0).map(|l| l * l.ln()).sum();
        let cross: f64 = supp.iter().zip(&logs).map(|(&j, lj)| rs.get(j, j).re * lj).sum();
        return Ok(ent - cross);
    }
    let rsub = rs.submatrix(&supp);
    let lt = sandwiched_log_trace(rsub.as_dmatrix(), &logs, alpha);
    if alpha.is_infinite() {
        Ok(lt)
    } else {
        Ok(lt / (alpha - 1.0))
    }
}

/// `ln Tr[(Γ^s R Γ^s)^α]` with `s = (1-α)/(2α)` for a diagonal reference
/// `Γ = exp(diag(logq))`; for `α = ∞` the log of the largest eigenvalue of
/// `Γ^{-1/2} R Γ^{-1/2}`.
pub(crate) fn sandwiched_log_trace(r: &DMatrix<C64>, logq: &[f64], alpha: f64) -> f64 {
    let n = logq.len();
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    let s = if alpha.is_infinite() {
        -0.5
    } else {
        (1.0 - alpha) / (2.0 * alpha)
    };
    let w: Vec<f64> = logq.iter().map(|lq| (s * lq).exp()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| r[(i, j)] * (w[i] * w[j]));
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    let positive = eig.eigenvalues.iter().copied().filter(|&l| l > PROB_CUT * top);
    if alpha.is_infinite() {
        return top.ln();
    }
    log_sum_exp(positive.map(|l| alpha * l.ln()))
}

/// Relative entropy `Tr rho (ln rho - ln sigma)`.
pub fn kl_divergence(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    renyi_divergence(rho, sigma, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(v)
    }

    fn naive_classical(p: &[f64], q: &[f64], a: f64) -> f64 {
        let t: f64 = p.iter().zip(q).filter(|(p, _)| **p > 0.0).map(|(p, q)| p.powf(a) * q.powf(1.0 - a)).sum();
        t.ln() / (a - 1.0)
    }

    #[test]
    fn classical_matches_direct_sum() {
        let p = [0.5, 0.3, 0.2, 0.0];
        let q = [0.1, 0.2, 0.3, 0.4];
        for a in [0.2, 0.5, 0.9, 1.5, 3.0, 10.0] {
            let v = classical_renyi(&p, &q, a).unwrap();
            assert!((v - naive_classical(&p, &q, a)).abs() < 1e-12, "a={a}");
        }
        let kl: f64 = p.iter().zip(&q).filter(|(p, _)| **p > 0.0).map(|(p, q)| p * (p / q).ln()).sum();
        assert!((classical_renyi(&p, &q, 1.0).unwrap() - kl).abs() < 1e-14);
        assert!((classical_renyi(&p, &q, 0.0).unwrap() + 0.6_f64.ln()).abs() < 1e-14);
        assert!((classical_renyi(&p, &q, f64::INFINITY).unwrap() - 5.0_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn classical_large_alpha_does_not_overflow() {
        let p = [0.999, 0.001];
        let q = [1e-6, 1.0 - 1e-6];
        let v = classical_renyi(&p, &q, 1000.0).unwrap();
        assert!(v.is_finite());
        let inf = classical_renyi(&p, &q, f64::INFINITY).unwrap();
        assert!(v <= inf + 1e-12 && v > inf - 0.01);
    }

    #[test]
    fn commuting_states_reduce_to_classical() {
        let p = [0.6, 0.3, 0.1];
        let q = [0.2, 0.5, 0.3];
        for a in [0.0, 0.3, 1.0, 2.0, 7.5, f64::INFINITY] {
            let qv = renyi_divergence(&diag(&p), &diag(&q), a).unwrap();
            let cv = classical_renyi(&p, &q, a).unwrap();
            assert!((qv - cv).abs() < 1e-12, "a={a}: {qv} vs {cv}");
        }
    }

    #[test]
    fn pure_state_against_maximally_mixed() {
        let s = 0.5_f64.sqrt();
        let plus = ComplexMatrix::outer(&[c64(s, 0.0), c64(s, 0.0)]);
        let mixed = diag(&[0.5, 0.5]);
        for a in [0.0, 0.5, 1.0, 2.0, f64::INFINITY] {
            let v = renyi_divergence(&plus, &mixed, a).unwrap();
            assert!((v - 2.0_f64.ln()).abs() < 1e-12, "a={a}: {v}");
        }
    }

    #[test]
    fn support_violation_is_infinite_above_one() {
        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[1.0, 0.0]);
        assert_eq!(renyi_divergence(&rho, &sigma, 2.0).unwrap(), f64::INFINITY);
        assert_eq!(renyi_divergence(&rho, &sigma, 1.0).unwrap(), f64::INFINITY);
        assert!(renyi_divergence(&rho, &sigma, 0.5).unwrap().is_finite());
    }

    #[test]
    fn rejects_negative_alpha() {
        let m = diag(&[1.0]);
        assert!(matches!(renyi_divergence(&m, &m, -0.1), Err(Error::BadAlpha(_))));
    }

    #[test]
    fn sandwiched_matches_definition_on_noncommuting_pair() {
        // rho = |psi><psi| mixed with identity, sigma diagonal
        let v = [c64(0.8, 0.0), c64(0.0, 0.6)];
        let rho = &ComplexMatrix::outer(&v).scale(0.7) + &diag(&[0.15, 0.15]);
        let sigma = diag(&[0.3, 0.7]);
        let a = 2.0;
        let s = (1.0 - a) / (2.0 * a);
        let ss = crate::linalg::support_pow(&eigh(&sigma).unwrap(), s);
        let m = &(&ss * &rho) * &ss;
        let t = crate::linalg::trace(&crate::linalg::mat_pow(&m, a).unwrap()).re;
        let expect = t.ln() / (a - 1.0);
        assert!((renyi_divergence(&rho, &sigma, a).unwrap() - expect).abs() < 1e-12);
    }
}
