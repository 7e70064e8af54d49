//! Clock resources: quantum Fisher information, skew information and variance,
//! with audits of their monotonicity under covariant Gibbs-preserving maps.

use std::sync::Arc;

use serde::Serialize;

use crate::divergence::{alpha_grid, asymmetry_entropy, asymmetry_modes, free_energy, AsymmetryMode};
use crate::error::{Error, Result};
use crate::linalg::{eigh, operator_norm_hermitian, ComplexMatrix, HermitianEigensystem};
use crate::model::{gibbs, CompositeSystem, GibbsData};
use crate::states::{dephase_blocks, QuantumState};

/// Eigenvalue pairs with `lambda_i + lambda_j` below this are skipped; in the
/// skew information eigenvalues below it count as zero.
pub const QFI_PAIR_CUTOFF: f64 = 1e-14;

/// Increase above which a monotone is reported as violated.
pub const MONOTONE_TOL: f64 = 1e-9;

/// Skew-information orders reported by default.
pub const SKEW_ORDERS: [f64; 3] = [0.25, 0.5, 0.75];

fn check_dims(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<()> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: h.dim(),
        });
    }
    h.check_hermitian()
}

fn state_eig(rho: &ComplexMatrix) -> Result<(HermitianEigensystem, Vec<f64>)> {
    let eig = eigh(rho)?;
    let lambda = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    Ok((eig, lambda))
}

/// `I_F = 2 Σ (λ_i - λ_j)^2 / (λ_i + λ_j) |<i|H|j>|^2`.
pub fn qfi(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    check_dims(rho, h)?;
    let (eig, lambda) = state_eig(rho)?;
    let hh = eig.to_eigenbasis(h);
    let n = rho.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = lambda[i] + lambda[j];
            if s > QFI_PAIR_CUTOFF {
                let d = lambda[i] - lambda[j];
                acc += d * d / s * hh.get(i, j).norm_sqr();
            }
        }
    }
    Ok((2.0 * acc).max(0.0))
}

/// Wigner-Yanase-Dyson skew information `Tr(ρ H^2) - Tr(ρ^α H ρ^{1-α} H)`, `α ∈ (0, 1)`.
pub fn skew_information(rho: &ComplexMatrix, h: &ComplexMatrix, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadAlpha(alpha));
    }
    check_dims(rho, h)?;
    let (eig, lambda) = state_eig(rho)?;
    let hh = eig.to_eigenbasis(h);
    let n = rho.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a2 = hh.get(i, j).norm_sqr();
            acc += lambda[i] * a2;
            if lambda[i] > QFI_PAIR_CUTOFF && lambda[j] > QFI_PAIR_CUTOFF {
                acc -= lambda[i].powf(alpha) * lambda[j].powf(1.0 - alpha) * a2;
            }
        }
    }
    Ok(acc.max(0.0))
}

/// `Tr(ρ H^2) - Tr(ρ H)^2`.
pub fn variance(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    check_dims(rho, h)?;
    let mean = rho.trace_product(h).re;
    let h2 = h * h;
    Ok((rho.trace_product(&h2).re - mean * mean).max(0.0))
}

/// QFI, skew information at [`SKEW_ORDERS`] and variance of one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockReport {
    pub qfi: f64,
    pub skew: Vec<(f64, f64)>,
    pub variance: f64,
}

pub fn clock_report(rho: &QuantumState) -> Result<ClockReport> {
    let h = rho.hamiltonian();
    let m = rho.matrix();
    Ok(ClockReport {
        qfi: qfi(m, &h)?,
        skew: SKEW_ORDERS
            .iter()
            .map(|&a| Ok((a, skew_information(m, &h, a)?)))
            .collect::<Result<_>>()?,
        variance: variance(m, &h)?,
    })
}

/// QFI of the coherent Gibbs state next to `4 d^2/dβ^2 ln Z`, the latter by
/// central differences with step `1e-4 β`.
pub fn coherent_gibbs_qfi_identity(sys: &Arc<CompositeSystem>, beta: f64) -> Result<(f64, f64)> {
    let g = gibbs(sys, beta)?;
    let state = crate::states::coherent_gibbs(sys.clone(), &g)?;
    let q = qfi(state.matrix(), &state.hamiltonian())?;
    let h = 1e-4 * beta;
    let lz = |b: f64| gibbs(sys, b).map(|g| g.log_z);
    let second = (lz(beta + h)? - 2.0 * g.log_z + lz(beta - h)?) / (h * h);
    Ok((q, 4.0 * second))
}

/// Time-translation covariant, Gibbs-preserving channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CovariantChannel {
    /// `ρ ↦ D(ρ)`.
    BlockDephase,
    /// `ρ ↦ (1-λ) ρ + λ D(ρ)`.
    PartialDephase { lambda: f64 },
    /// `ρ ↦ (1-p) ρ + p γ`.
    GibbsMix { p: f64, beta: f64 },
}

fn unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::BadParams(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

impl CovariantChannel {
    pub fn partial_dephase(lambda: f64) -> Result<Self> {
        unit_interval("lambda", lambda)?;
        Ok(Self::PartialDephase { lambda })
    }

    pub fn gibbs_mix(p: f64, beta: f64) -> Result<Self> {
        unit_interval("p", p)?;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::BadParams(format!("beta = {beta} must be finite and > 0")));
        }
        Ok(Self::GibbsMix { p, beta })
    }

    pub fn apply(&self, rho: &QuantumState) -> Result<QuantumState> {
        let mix = |a: &ComplexMatrix, b: &ComplexMatrix, t: f64| &a.scale(1.0 - t) + &b.scale(t);
        let m = match *self {
            Self::BlockDephase => return dephase_blocks(rho),
            Self::PartialDephase { lambda } => mix(rho.matrix(), dephase_blocks(rho)?.matrix(), lambda),
            Self::GibbsMix { p, beta } => {
                let g = gibbs(rho.system(), beta)?;
                mix(rho.matrix(), &ComplexMatrix::from_real_diagonal(&g.weights), p)
            }
        };
        QuantumState::new(rho.system_arc().clone(), m)
    }
}

/// Change of one asymmetry mode between two states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeChange {
    pub gap: f64,
    pub before: f64,
    pub after: f64,
}

/// Differences `monotone(σ) - monotone(ρ)`; a positive entry forbids `ρ → σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub delta_qfi: f64,
    pub delta_skew: Vec<(f64, f64)>,
    pub delta_free_energy: Vec<(f64, f64)>,
    pub delta_asymmetry: Vec<(f64, f64)>,
    pub modes: Vec<ModeChange>,
    pub forbidden_by: Vec<String>,
}

impl MonotonicityReport {
    pub fn forbidden(&self) -> bool {
        !self.forbidden_by.is_empty()
    }
}

/// Orders at which free energies and asymmetries are compared: 0, the scan grid, 1 and ∞.
pub fn audit_orders() -> Vec<f64> {
    let mut a = vec![0.0];
    for x in alpha_grid() {
        if a.last() == Some(&0.99) {
            a.push(1.0);
        }
        a.push(x);
    }
    a.push(f64::INFINITY);
    a
}

fn merge_modes(a: &[AsymmetryMode], b: &[AsymmetryMode], tol: f64) -> Vec<ModeChange> {
    let mut gaps: Vec<f64> = a.iter().chain(b).map(|m| m.gap).collect();
    gaps.sort_by(f64::total_cmp);
    gaps.dedup_by(|x, y| (*x - *y).abs() <= tol);
    gaps.into_iter()
        .map(|gap| ModeChange {
            gap,
            before: crate::divergence::mode_amplitude(a, gap, tol),
            after: crate::divergence::mode_amplitude(b, gap, tol),
        })
        .collect()
}

/// Checks whether the transition `ρ → σ` is compatible with each monotone.
pub fn monotonicity_audit(rho: &QuantumState, sigma: &QuantumState, beta: f64) -> Result<MonotonicityReport> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let g: GibbsData = gibbs(rho.system(), beta)?;
    let h = rho.hamiltonian();
    let delta_qfi = qfi(sigma.matrix(), &h)? - qfi(rho.matrix(), &h)?;
    let delta_skew = SKEW_ORDERS
        .iter()
        .map(|&a| Ok((a, skew_information(sigma.matrix(), &h, a)? - skew_information(rho.matrix(), &h, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let orders = audit_orders();
    let delta_free_energy = orders
        .iter()
        .map(|&a| Ok((a, free_energy(sigma, &g, a)? - free_energy(rho, &g, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let delta_asymmetry = orders
        .iter()
        .map(|&a| {
            let (x, y) = (asymmetry_entropy(sigma, a)?, asymmetry_entropy(rho, a)?);
            Ok((a, if x == y { 0.0 } else { x - y }))
        })
        .collect::<Result<Vec<_>>>()?;
    let tol = rho.system().block_tolerance();
    let modes = merge_modes(&asymmetry_modes(rho)?, &asymmetry_modes(sigma)?, tol);

    let mut forbidden_by = Vec::new();
    if delta_qfi > MONOTONE_TOL {
        forbidden_by.push("qfi".to_string());
    }
    for (a, d) in &delta_skew {
        if *d > MONOTONE_TOL {
            forbidden_by.push(format!("skew({a})"));
        }
    }
    if delta_free_energy.iter().any(|(_, d)| *d > MONOTONE_TOL) {
        forbidden_by.push("free_energy".to_string());
    }
    if delta_asymmetry.iter().any(|(_, d)| *d > MONOTONE_TOL) {
        forbidden_by.push("asymmetry".to_string());
    }
    if modes.iter().any(|m| m.after - m.before > MONOTONE_TOL) {
        forbidden_by.push("modes".to_string());
    }
    Ok(MonotonicityReport {
        delta_qfi,
        delta_skew,
        delta_free_energy,
        delta_asymmetry,
        modes,
        forbidden_by,
    })
}

/// True when `I_F > k N ω0^2`, i.e. the state is certified not `k`-producible.
pub fn producibility_witness(rho: &QuantumState, k: usize) -> Result<bool> {
    let sys = rho.system();
    let omega0 = sys
        .uniform_qubit_gap()
        .ok_or_else(|| Error::WrongSystemShape("producibility witness needs qubits with a common gap".into()))?;
    let n = sys.num_subsystems() as f64;
    let f = qfi(rho.matrix(), &rho.hamiltonian())?;
    Ok(f > k as f64 * n * omega0 * omega0 + MONOTONE_TOL)
}

/// Size of the energy ladder used for the catalytic clock, `floor(2 N^{2/3})`.
pub fn catalyst_ladder(n: usize) -> usize {
    (2.0 * (n as f64).powf(2.0 / 3.0) + 1e-9).floor() as usize
}

/// QFI of the uniform superposition over excitation numbers `0..=K`:
/// four times the variance of the uniform distribution on `{0, ω0, ..., K ω0}`.
pub fn catalyst_qfi(n: usize, omega0: f64) -> f64 {
    let k = catalyst_ladder(n) as f64;
    omega0 * omega0 * ((k + 1.0) * (k + 1.0) - 1.0) / 3.0
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `(|I_F(H + ε H_I / 2) - I_F(H)|, 4 ε ||H|| + ε^2)` for `||H_I|| <= 1`.
pub fn qfi_perturbation_bound(rho: &ComplexMatrix, h: &ComplexMatrix, h_i: &ComplexMatrix, epsilon: f64) -> Result<(f64, f64)> {
    let norm_i = operator_norm_hermitian(h_i)?;
    if norm_i > 1.0 + 1e-12 {
        return Err(Error::BadParams(format!("perturbation norm {norm_i} exceeds 1")));
    }
    let perturbed = h + &h_i.scale(0.5 * epsilon);
    let lhs = (qfi(rho, &perturbed)? - qfi(rho, h)?).abs();
    let rhs = 4.0 * epsilon * operator_norm_hermitian(h)? + epsilon * epsilon;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::states::{dicke, ghz, supplemental_rho, supplemental_sigma, uniform_superposition};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // printed values are truncated to three decimals
    #[test]
    fn supplemental_values() {
        let r = supplemental_rho();
        let s = supplemental_sigma();
        let h = r.hamiltonian();
        assert!(close(qfi(r.matrix(), &h).unwrap(), 0.843, 1e-3));
        assert!(close(qfi(s.matrix(), &h).unwrap(), 0.959, 1e-3));
        assert!(close(skew_information(r.matrix(), &h, 0.5).unwrap(), 0.153, 1e-3));
        assert!(close(skew_information(s.matrix(), &h, 0.5).unwrap(), 0.163, 1e-3));
    }

    #[test]
    fn ghz_and_dicke_qfi() {
        for n in 1..=5 {
            let g = ghz(n, 0.7).unwrap();
            let f = qfi(g.matrix(), &g.hamiltonian()).unwrap();
            assert!(close(f, (n * n) as f64 * 0.49, 1e-10));
        }
        let d = dicke(4, 2, 1.0).unwrap();
        assert!(qfi(d.matrix(), &d.hamiltonian()).unwrap() < 1e-10);
    }

    #[test]
    fn plus_state() {
        let sys = Arc::new(CompositeSystem::qubits(1, 2.0).unwrap());
        let plus = QuantumState::pure(sys, &[c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap();
        let h = plus.hamiltonian();
        assert!(close(variance(plus.matrix(), &h).unwrap(), 1.0, 1e-12));
        assert!(close(qfi(plus.matrix(), &h).unwrap(), 4.0, 1e-12));
        for a in SKEW_ORDERS {
            assert!(close(skew_information(plus.matrix(), &h, a).unwrap(), 1.0, 1e-12));
        }
    }

    #[test]
    fn skew_rejects_endpoints() {
        let r = supplemental_rho();
        let h = r.hamiltonian();
        for a in [0.0, 1.0, -0.5, 2.0] {
            assert!(matches!(skew_information(r.matrix(), &h, a), Err(Error::BadAlpha(_))));
        }
    }

    #[test]
    fn coherent_gibbs_identity_single_qubit() {
        let (w0, beta) = (1.3, 0.8);
        let sys = Arc::new(CompositeSystem::qubits(1, w0).unwrap());
        let (q, fd) = coherent_gibbs_qfi_identity(&sys, beta).unwrap();
        let x = (-beta * w0).exp();
        let analytic = 4.0 * w0 * w0 * x / ((1.0 + x) * (1.0 + x));
        assert!(close(q, analytic, 1e-12));
        assert!(close(fd, analytic, 1e-6));
    }

    #[test]
    fn gibbs_state_has_no_qfi() {
        let sys = Arc::new(CompositeSystem::qubits(2, 1.0).unwrap());
        let g = gibbs(&sys, 1.0).unwrap();
        let gamma = ComplexMatrix::from_real_diagonal(&g.weights);
        let h = ComplexMatrix::from_real_diagonal(sys.total_energies());
        assert!(qfi(&gamma, &h).unwrap() < 1e-14);
    }

    #[test]
    fn supplemental_audit_is_forbidden_only_by_clock_monotones() {
        let rep = monotonicity_audit(&supplemental_rho(), &supplemental_sigma(), 1.0).unwrap();
        assert!(close(rep.delta_qfi, 0.116, 1e-3));
        assert!(rep.delta_free_energy.iter().all(|(_, d)| *d <= MONOTONE_TOL));
        assert!(rep.delta_asymmetry.iter().all(|(_, d)| *d <= MONOTONE_TOL));
        for m in rep.modes.iter().filter(|m| m.gap > 0.0) {
            assert!(close(m.before, 0.1, 1e-12) && close(m.after, 0.099, 1e-12));
        }
        assert!(rep.forbidden_by.iter().all(|n| n == "qfi" || n.starts_with("skew")));
        assert!(rep.forbidden_by.contains(&"qfi".to_string()));
    }

    #[test]
    fn identity_and_dephasing_audits() {
        let r = supplemental_rho();
        let same = monotonicity_audit(&r, &r, 1.0).unwrap();
        assert!(same.delta_qfi.abs() < 1e-15 && !same.forbidden());
        let d = CovariantChannel::BlockDephase.apply(&r).unwrap();
        assert!(!monotonicity_audit(&r, &d, 1.0).unwrap().forbidden());
    }

    #[test]
    fn channels() {
        let r = supplemental_rho();
        let id = CovariantChannel::partial_dephase(0.0).unwrap().apply(&r).unwrap();
        assert!((id.matrix() - r.matrix()).max_abs() < 1e-15);
        let g = gibbs(r.system(), 0.9).unwrap();
        let full = CovariantChannel::gibbs_mix(1.0, 0.9).unwrap().apply(&r).unwrap();
        assert!((full.matrix() - &ComplexMatrix::from_real_diagonal(&g.weights)).max_abs() < 1e-15);
        assert!(CovariantChannel::partial_dephase(1.5).is_err());
        assert!(CovariantChannel::gibbs_mix(-0.1, 1.0).is_err());
        let h = r.hamiltonian();
        let base = qfi(r.matrix(), &h).unwrap();
        for k in 1..=9 {
            let out = CovariantChannel::partial_dephase(k as f64 / 10.0).unwrap().apply(&r).unwrap();
            assert!(qfi(out.matrix(), &h).unwrap() < base);
        }
    }

    #[test]
    fn producibility() {
        let g = ghz(4, 1.0).unwrap();
        assert!(producibility_witness(&g, 3).unwrap());
        let d = dicke(4, 2, 1.0).unwrap();
        assert!(!(1..=4).any(|k| producibility_witness(&d, k).unwrap()));
        let sys = Arc::new(CompositeSystem::qubits(3, 1.0).unwrap());
        let plus_all = QuantumState::pure(sys, &[c64(1.0, 0.0); 8]).unwrap();
        assert!(!producibility_witness(&plus_all, 1).unwrap());
        let odd = supplemental_rho();
        assert!(matches!(producibility_witness(&odd, 1), Err(Error::WrongSystemShape(_))));
    }

    #[test]
    fn catalyst_formula_matches_state() {
        let n = 8;
        let k = catalyst_ladder(n);
        assert_eq!(k, 8);
        let sys = Arc::new(CompositeSystem::qubits(n, 1.0).unwrap());
        // one basis state per excitation number: the lowest `m` qubits excited
        let idx: Vec<usize> = (0..=k).map(|m| (1usize << m) - 1).collect();
        let psi = uniform_superposition(sys, &idx).unwrap();
        let f = qfi(psi.matrix(), &psi.hamiltonian()).unwrap();
        assert!(close(f, catalyst_qfi(n, 1.0), 1e-9));
    }

    #[test]
    fn perturbation_bound_on_example() {
        let r = supplemental_rho();
        let h = r.hamiltonian();
        let hi = ComplexMatrix::from_real_rows(&[
            vec![0.0, 0.5, 0.0, 0.0],
            vec![0.5, 0.0, 0.3, 0.0],
            vec![0.0, 0.3, 0.2, 0.0],
            vec![0.0, 0.0, 0.0, -0.4],
        ])
        .unwrap();
        let (lhs, rhs) = qfi_perturbation_bound(r.matrix(), &h, &hi, 0.3).unwrap();
        assert!(lhs <= rhs);
    }
}
