//! Randomised and exhaustive checks of the inequalities, run as named suites.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::clock::{qfi, qfi_perturbation_bound, skew_information, variance, CovariantChannel};
use crate::divergence::w_coh;
use crate::error::Result;
use crate::ising::{degeneracy_histogram, ed_oracle, full_spectrum, ising_qfi_bounds, IsingChain};
use crate::linalg::ComplexMatrix;
use crate::model::{gibbs, CompositeSystem};
use crate::random::{ginibre_mixed, haar_pure, par_samples, random_distribution, random_hermitian_unit, sample_rng};
use crate::states::QuantumState;
use crate::tradeoff::{epsilon_tradeoff, hoeffding_frequency_bound, jensen_step, tradeoff_report, verify_binomial_inequality};

/// Absolute tolerance shared by all suites.
pub const SUITE_TOL: f64 = 1e-9;

/// Outcome of one suite. `worst_margin` is the smallest `rhs - lhs` seen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: u64,
    pub violations: u64,
    pub worst_margin: f64,
    pub first_violation: Option<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            checks: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            first_violation: None,
        }
    }

    /// Records `margin >= -tol`.
    fn check(&mut self, label: impl FnOnce() -> String, margin: f64, tol: f64) {
        self.checks += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if !(margin >= -tol) {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(format!("{} (margin {margin:e})", label()));
            }
        }
    }

    fn merge(&mut self, other: SuiteReport) {
        self.checks += other.checks;
        self.violations += other.violations;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        if self.first_violation.is_none() {
            self.first_violation = other.first_violation;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn register(n: usize, local_dim: usize) -> Result<Arc<CompositeSystem>> {
    let level: Vec<f64> = (0..local_dim).map(|k| k as f64).collect();
    Ok(Arc::new(CompositeSystem::new(vec![level; n])?))
}

/// Trade-off bounds and proof-chain ordering on Haar-random pure states of
/// `n` subsystems with levels `{0, 1, …, local_dim - 1}`.
pub fn tradeoff_suite(n: usize, local_dim: usize, samples: usize, seed: u64) -> Result<SuiteReport> {
    let sys = register(n, local_dim)?;
    let g = gibbs(&sys, 1.0)?;
    let mut rep = SuiteReport::new(&format!("tradeoff n={n} d={local_dim}"));
    let h = hoeffding_frequency_bound(&sys)?;
    for c in &h.checks {
        rep.check(|| format!("hoeffding at E={}", c.energy), c.bound - c.frequency, 1e-12);
    }
    let results = par_samples(seed, samples, |_, rng| {
        let psi = QuantumState::pure(sys.clone(), &haar_pure(sys.dimension(), rng))?;
        let report = tradeoff_report(&psi, &g)?;
        let p = random_distribution(5, rng);
        let x: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        Ok((report, jensen_step(&p, &x)))
    });
    for (i, r) in results.into_iter().enumerate() {
        let (report, (jl, jr)) = r?;
        for b in &report.bounds {
            rep.check(|| format!("sample {i}: {}", b.name), b.slack, SUITE_TOL);
        }
        rep.check(|| format!("sample {i}: jensen"), jr - jl, 1e-12);
    }
    Ok(rep)
}

/// Systems of dimension at most 16 cycled through by the monotonicity suite.
fn small_systems() -> Result<Vec<Arc<CompositeSystem>>> {
    Ok(vec![
        register(2, 2)?,
        Arc::new(CompositeSystem::new(vec![vec![0.0, 1.0], vec![0.0, 1.0, 2.0]])?),
        register(3, 2)?,
        Arc::new(CompositeSystem::new(vec![vec![0.0, 1.0, 2.0, 3.0]])?),
        register(4, 2)?,
    ])
}

fn channels() -> Result<Vec<CovariantChannel>> {
    let mut out = vec![CovariantChannel::BlockDephase];
    for k in 1..=9 {
        let t = k as f64 / 10.0;
        out.push(CovariantChannel::partial_dephase(t)?);
        out.push(CovariantChannel::gibbs_mix(t, 1.0)?);
    }
    Ok(out)
}

/// QFI and skew information under covariant channels, the pure-state identity
/// `I_F = 4 Var = 4 I_{1/2}` and additivity on products.
pub fn monotonicity_suite(samples: usize, seed: u64) -> Result<SuiteReport> {
    let systems = small_systems()?;
    let chans = channels()?;
    let results = par_samples(seed, samples, |i, rng| -> Result<SuiteReport> {
        let mut rep = SuiteReport::new("");
        let sys = &systems[i % systems.len()];
        let h = ComplexMatrix::from_real_diagonal(sys.total_energies());
        let rho = QuantumState::new(sys.clone(), ginibre_mixed(sys.dimension(), rng))?;
        let (q0, s0) = (qfi(rho.matrix(), &h)?, skew_information(rho.matrix(), &h, 0.5)?);
        for c in &chans {
            let out = c.apply(&rho)?;
            let q = qfi(out.matrix(), &h)?;
            let s = skew_information(out.matrix(), &h, 0.5)?;
            rep.check(|| format!("sample {i}: qfi under {c:?}"), q0 - q, SUITE_TOL);
            rep.check(|| format!("sample {i}: skew under {c:?}"), s0 - s, SUITE_TOL);
        }
        let psi = QuantumState::pure(sys.clone(), &haar_pure(sys.dimension(), rng))?;
        let q = qfi(psi.matrix(), &h)?;
        let v = variance(psi.matrix(), &h)?;
        let s = skew_information(psi.matrix(), &h, 0.5)?;
        rep.check(|| format!("sample {i}: pure qfi = 4 var"), -(q - 4.0 * v).abs(), SUITE_TOL);
        rep.check(|| format!("sample {i}: pure qfi = 4 skew"), -(q - 4.0 * s).abs(), SUITE_TOL);
        let a = QuantumState::new(systems[0].clone(), ginibre_mixed(4, rng))?;
        let b = QuantumState::new(systems[0].clone(), ginibre_mixed(4, rng))?;
        let ab = a.tensor(&b)?;
        let sum = qfi(a.matrix(), &a.hamiltonian())? + qfi(b.matrix(), &b.hamiltonian())?;
        rep.check(|| format!("sample {i}: additivity"), -(qfi(ab.matrix(), &ab.hamiltonian())? - sum).abs(), SUITE_TOL);
        Ok(rep)
    });
    let mut rep = SuiteReport::new("monotonicity");
    for r in results {
        rep.merge(r?);
    }
    Ok(rep)
}

/// Energy-resolution bounds on random three-qubit states.
pub fn epsilon_suite(samples: usize, seed: u64) -> Result<SuiteReport> {
    let sys = register(3, 2)?;
    let g = gibbs(&sys, 1.0)?;
    let results = par_samples(seed, samples, |i, rng| -> Result<SuiteReport> {
        let mut rep = SuiteReport::new("");
        let d = sys.dimension();
        let rho = if i % 2 == 0 {
            QuantumState::pure(sys.clone(), &haar_pure(d, rng))?
        } else {
            QuantumState::new(sys.clone(), ginibre_mixed(d, rng))?
        };
        let w = w_coh(&rho, &g)?.value;
        for eps in [0.1, 0.3, 1.0] {
            let e = epsilon_tradeoff(&rho, &g, eps, None)?;
            if eps < 1.0 {
                rep.check(|| format!("sample {i}: W^eps = W at eps={eps}"), -(e.w_coh_eps - w).abs(), SUITE_TOL);
            }
            rep.check(|| format!("sample {i}: R bound at eps={eps}"), e.with_r.slack, SUITE_TOL);
            rep.check(|| format!("sample {i}: R~ bound at eps={eps}"), e.with_r_tilde.slack, SUITE_TOL);
            let hi = random_hermitian_unit(d, rng);
            let (lhs, rhs) = qfi_perturbation_bound(rho.matrix(), &rho.hamiltonian(), &hi, eps)?;
            rep.check(|| format!("sample {i}: qfi perturbation at eps={eps}"), rhs - lhs, SUITE_TOL);
        }
        Ok(rep)
    });
    let mut rep = SuiteReport::new("epsilon");
    for r in results {
        rep.merge(r?);
    }
    Ok(rep)
}

/// Free-fermion spectra against dense diagonalization, decoupled and
/// fully coupled histograms at `N = 16`, and the weak-coupling QFI bracket.
pub fn ising_suite(pairs: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("ising");
    for n in [2usize, 4, 6, 8, 10] {
        let results = par_samples(seed.wrapping_add(1000 * n as u64), pairs, |_, rng| -> Result<(IsingChain, f64)> {
            let chain = IsingChain::new(n, rng.random_range(0.0..2.0), rng.random_range(0.0..2.0))?;
            let a = full_spectrum(&chain)?;
            let b = ed_oracle(&chain)?;
            let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            Ok((chain, err))
        });
        for r in results {
            let (chain, err) = r?;
            rep.check(|| format!("spectrum {chain:?}"), -err, 1e-8);
        }
    }
    let decoupled = degeneracy_histogram(&IsingChain::new(16, 1.0, 0.0)?, 0.5)?;
    let mut binom = 1u64;
    for n in 0..=16u64 {
        let found = decoupled
            .iter()
            .find(|(c, _)| (c - (-16.0 + 2.0 * n as f64)).abs() < 1e-9)
            .map_or(0, |(_, k)| *k);
        rep.check(|| format!("decoupled window {n}"), -((found as f64) - binom as f64).abs(), 0.0);
        binom = binom * (16 - n) / (n + 1);
    }
    let coupled = degeneracy_histogram(&IsingChain::new(16, 0.0, 1.0)?, 0.5)?;
    let total: u64 = coupled.iter().map(|(_, k)| k).sum();
    rep.check(|| "coupled histogram total".into(), -((total as f64) - 65536.0).abs(), 0.0);

    let chain = IsingChain::new(4, 1.0, 0.05)?;
    let mut rng = sample_rng(seed, 7);
    for i in 0..20 {
        let m = if i % 2 == 0 {
            let v = haar_pure(16, &mut rng);
            ComplexMatrix::outer(&v)
        } else {
            ginibre_mixed(16, &mut rng)
        };
        let s = ising_qfi_bounds(&m, &chain)?;
        rep.check(|| format!("qfi sandwich {i} lower"), s.value - s.lower, SUITE_TOL);
        rep.check(|| format!("qfi sandwich {i} upper"), s.upper - s.value, SUITE_TOL);
    }
    Ok(rep)
}

/// `ln C(N, n) <= H_b(n/N) ln C(N, N/2)` for `N = 1, …, max_n`.
pub fn binomial_suite(max_n: usize) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("binomial");
    for n in 1..=max_n {
        let ok = verify_binomial_inequality(n)?;
        rep.check(|| format!("N={n}"), if ok { 0.0 } else { -1.0 }, 0.0);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass_and_are_deterministic() {
        let a = tradeoff_suite(2, 2, 40, 5).unwrap();
        assert!(a.passed(), "{a:?}");
        assert_eq!(a, tradeoff_suite(2, 2, 40, 5).unwrap());
        assert!(tradeoff_suite(2, 3, 10, 5).unwrap().passed());
        let m = monotonicity_suite(10, 1).unwrap();
        assert!(m.passed(), "{m:?}");
        assert!(epsilon_suite(6, 2).unwrap().passed());
        assert!(binomial_suite(30).unwrap().passed());
    }

    #[test]
    fn report_records_violation() {
        let mut r = SuiteReport::new("x");
        r.check(|| "ok".into(), 0.0, 0.0);
        r.check(|| "bad".into(), -1.0, 1e-9);
        assert_eq!((r.checks, r.violations), (2, 1));
        assert!(r.first_violation.unwrap().starts_with("bad"));
    }
}
