//! Generalized free energies and the work quantities built on them.

mod blockdiag;
mod renyi;
mod scan;
mod thermo;

pub use blockdiag::BlockDiagonalPair;
pub use renyi::{classical_renyi, classical_renyi_log, kl_divergence, log_sum_exp, renyi_divergence, NEAR_ONE, PROB_CUT};
pub use scan::{alpha_grid, golden_section, scan_infimum, AlphaScan, Infimum, REFINE_WIDTH};
pub use thermo::{thermomajorization_curve, thermomajorizes, LorenzCurve, CURVE_TOL};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{gibbs, Block, BlockStructure, CompositeSystem, EnergyWindows, GibbsData};
use crate::states::{dephase_with, reduced_state, QuantumState, BLOCK_DIAGONAL_TOL};

/// Coherence below this counts as absent in the pure-state criterion.
pub const COHERENCE_TOL: f64 = 1e-10;

/// Relative tolerance for ties between maximizing blocks.
pub const TIE_TOL: f64 = 1e-9;

/// A work value (units of `k_B T`) with the α-scan that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkValue {
    pub value: f64,
    pub scan: AlphaScan,
}

fn check_gibbs(rho: &QuantumState, g: &GibbsData) -> Result<()> {
    if g.log_weights.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: g.log_weights.len(),
        });
    }
    Ok(())
}

fn whole(dim: usize) -> BlockStructure {
    BlockStructure::from_blocks(
        dim,
        vec![Block {
            energy: 0.0,
            members: (0..dim).collect(),
        }],
    )
    .expect("single-block partition")
}

/// Pair used to evaluate `S_alpha(rho || gamma)`: the energy blocks when `rho`
/// is block diagonal, otherwise one block spanning the whole space.
fn gibbs_pair(rho: &QuantumState, g: &GibbsData) -> Result<BlockDiagonalPair> {
    check_gibbs(rho, g)?;
    let blocks = rho.system().blocks()?;
    if rho.is_block_diagonal(blocks) {
        BlockDiagonalPair::new(rho.matrix(), blocks, &g.log_weights)
    } else {
        BlockDiagonalPair::new(rho.matrix(), &whole(rho.dim()), &g.log_weights)
    }
}

fn dephased_pair(rho: &QuantumState, g: &GibbsData) -> Result<BlockDiagonalPair> {
    check_gibbs(rho, g)?;
    Ok(BlockDiagonalPair::diagonal(&rho.matrix().diagonal_real(), &g.log_weights))
}

/// `S_alpha(rho || gamma)`.
pub fn gibbs_divergence(rho: &QuantumState, g: &GibbsData, alpha: f64) -> Result<f64> {
    gibbs_pair(rho, g)?.divergence(alpha)
}

/// `beta F_alpha(rho) = S_alpha(rho || gamma) - ln Z`.
pub fn free_energy(rho: &QuantumState, g: &GibbsData, alpha: f64) -> Result<f64> {
    Ok(gibbs_divergence(rho, g, alpha)? - g.log_z)
}

fn infimum_of_difference(a: &BlockDiagonalPair, b: &BlockDiagonalPair) -> WorkValue {
    let scan = scan_infimum(|alpha| a.eval(alpha) - b.eval(alpha));
    WorkValue {
        value: scan.infimum.value.max(0.0),
        scan,
    }
}

/// Work extractable from coherence: `inf_alpha [F_alpha(D rho) - F_alpha(Pi rho)]`.
pub fn w_coh(rho: &QuantumState, g: &GibbsData) -> Result<WorkValue> {
    let blocks = rho.system().blocks()?;
    w_coh_partitioned(rho, g, blocks)
}

/// `w_coh` with the block dephasing taken over an arbitrary partition.
pub fn w_coh_partitioned(rho: &QuantumState, g: &GibbsData, partition: &BlockStructure) -> Result<WorkValue> {
    check_gibbs(rho, g)?;
    let d = BlockDiagonalPair::new(rho.matrix(), partition, &g.log_weights)?;
    let p = dephased_pair(rho, g)?;
    Ok(infimum_of_difference(&d, &p))
}

/// `W_coh^eps`: energy windows act as merged blocks for the dephasing.
pub fn w_coh_windowed(rho: &QuantumState, g: &GibbsData, windows: &EnergyWindows) -> Result<WorkValue> {
    let merged = windows.merged_blocks(rho.system().blocks()?);
    w_coh_partitioned(rho, g, &merged)
}

/// Incoherent work: `inf_alpha [F_alpha(Pi rho) - F_alpha(gamma)]`.
pub fn w_incoh(rho: &QuantumState, g: &GibbsData) -> Result<WorkValue> {
    let p = dephased_pair(rho, g)?;
    let scan = scan_infimum(|alpha| p.eval(alpha));
    Ok(WorkValue {
        value: scan.infimum.value.max(0.0),
        scan,
    })
}

/// Closed form of the incoherent work, `F_0(Pi rho) + ln Z`.
pub fn w_incoh_closed_form(rho: &QuantumState, g: &GibbsData) -> Result<f64> {
    Ok(dephased_pair(rho, g)?.eval(0.0))
}

fn require_block_diagonal(rho: &QuantumState) -> Result<&BlockStructure> {
    let blocks = rho.system().blocks()?;
    let off = rho.off_block_weight(blocks);
    if off > BLOCK_DIAGONAL_TOL {
        return Err(Error::NotBlockDiagonal { off_block: off });
    }
    Ok(blocks)
}

/// `inf_alpha [F_alpha(rho) - F_alpha(sigma)]` for block-diagonal states.
pub fn work_distance(rho: &QuantumState, sigma: &QuantumState, g: &GibbsData) -> Result<WorkValue> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    check_gibbs(rho, g)?;
    let blocks = require_block_diagonal(rho)?;
    require_block_diagonal(sigma)?;
    let a = BlockDiagonalPair::new(rho.matrix(), blocks, &g.log_weights)?;
    let b = BlockDiagonalPair::new(sigma.matrix(), blocks, &g.log_weights)?;
    Ok(infimum_of_difference(&a, &b))
}

/// Total work `D_work(D rho > gamma)`.
pub fn w_tot(rho: &QuantumState, g: &GibbsData) -> Result<WorkValue> {
    check_gibbs(rho, g)?;
    let blocks = rho.system().blocks()?;
    let d = BlockDiagonalPair::new(rho.matrix(), blocks, &g.log_weights)?;
    let scan = scan_infimum(|alpha| d.eval(alpha));
    Ok(WorkValue {
        value: scan.infimum.value.max(0.0),
        scan,
    })
}

/// Outcome of the pure-state extractability criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureStateCriterion {
    pub extractable: bool,
    /// Block energy maximizing `p_E e^{beta E}` (the first one on ties).
    pub energy: f64,
    pub maximizing_blocks: Vec<usize>,
    pub tie: bool,
}

/// Work is extractable from a pure state iff the block maximizing
/// `p_E e^{beta E}` carries internal coherence (every tied block, on ties).
pub fn observation1_criterion(psi: &QuantumState, g: &GibbsData) -> Result<PureStateCriterion> {
    check_gibbs(psi, g)?;
    psi.pure_vector()?;
    let blocks = psi.system().blocks()?;
    let m = psi.matrix();
    let diag = m.diagonal_real();
    let scores: Vec<Option<f64>> = blocks
        .blocks
        .iter()
        .map(|b| {
            let p: f64 = b.members.iter().map(|&i| diag[i]).sum();
            (p > PROB_CUT).then(|| p.ln() + g.beta * b.energy)
        })
        .collect();
    let best = scores.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let maximizing: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_some_and(|s| (s - best).abs() <= TIE_TOL * best.abs().max(1.0)))
        .map(|(k, _)| k)
        .collect();
    let coherent = |k: usize| {
        let b = &blocks.blocks[k];
        let p: f64 = b.members.iter().map(|&i| diag[i]).sum();
        b.members.iter().enumerate().any(|(x, &i)| {
            b.members[x + 1..]
                .iter()
                .any(|&j| m.get(i, j).norm() / p > COHERENCE_TOL)
        })
    };
    Ok(PureStateCriterion {
        extractable: maximizing.iter().all(|&k| coherent(k)),
        energy: blocks.blocks[maximizing[0]].energy,
        tie: maximizing.len() > 1,
        maximizing_blocks: maximizing,
    })
}

fn local_gibbs(sys: &CompositeSystem, i: usize, beta: f64) -> Result<GibbsData> {
    let local = CompositeSystem::with_tolerance(vec![sys.local_spectra()[i].clone()], Some(sys.block_tolerance()))?;
    gibbs(&local, beta)
}

/// `C_alpha = beta [F_alpha(rho) - Σ_i F_alpha(rho_i)]`.
pub fn free_energy_correlation(rho: &QuantumState, g: &GibbsData, alpha: f64) -> Result<f64> {
    let mut c = free_energy(rho, g, alpha)?;
    for i in 0..rho.system().num_subsystems() {
        let ri = reduced_state(rho, i)?;
        let gi = local_gibbs(rho.system(), i, g.beta)?;
        c -= free_energy(&ri, &gi, alpha)?;
    }
    Ok(c)
}

/// `A_alpha(rho) = S_alpha(rho || D rho)`.
pub fn asymmetry_entropy(rho: &QuantumState, alpha: f64) -> Result<f64> {
    let blocks = rho.system().blocks()?;
    let d = dephase_with(rho, blocks);
    renyi_divergence(rho.matrix(), d.matrix(), alpha)
}

/// Summed coherence magnitude at one block-energy gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymmetryMode {
    pub gap: f64,
    pub amplitude: f64,
}

/// Modes of asymmetry `Σ_{E - E' = omega} |rho_{E E'}|` for `omega >= 0`,
/// summed over index pairs `(i, j)` with `E_i >= E_j`, `i != j`.
pub fn asymmetry_modes(rho: &QuantumState) -> Result<Vec<AsymmetryMode>> {
    let sys = rho.system();
    let blocks = sys.blocks()?;
    let energies = blocks.energies();
    let tol = sys.block_tolerance();
    let m = rho.matrix();
    let n = rho.dim();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (bi, bj) = (blocks.index_to_block[i], blocks.index_to_block[j]);
            let gap = energies[bi] - energies[bj];
            if bi == bj && i > j {
                continue;
            }
            if bi != bj && gap < 0.0 {
                continue;
            }
            pairs.push((if bi == bj { 0.0 } else { gap }, m.get(i, j).norm()));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut modes: Vec<AsymmetryMode> = Vec::new();
    for (gap, amp) in pairs {
        match modes.last_mut() {
            Some(last) if (gap - last.gap).abs() <= tol * gap.abs().max(1.0) => last.amplitude += amp,
            _ => modes.push(AsymmetryMode { gap, amplitude: amp }),
        }
    }
    Ok(modes)
}

/// Amplitude of the mode at `gap`, zero when absent.
pub fn mode_amplitude(modes: &[AsymmetryMode], gap: f64, tol: f64) -> f64 {
    modes
        .iter()
        .find(|m| (m.gap - gap).abs() <= tol)
        .map(|m| m.amplitude)
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::model::CompositeSystem;
    use crate::states::{coherent_gibbs, dephase_blocks, dephase_full, dicke, ghz, supplemental_rho, supplemental_sigma, tensor_power, two_qubit_psi};
    use std::sync::Arc;

    fn ln_binom(n: u64, k: u64) -> f64 {
        (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
    }

    #[test]
    fn renyi_commuting_example() {
        let v = classical_renyi(&[0.5, 0.5], &[0.25, 0.75], 2.0).unwrap();
        assert!((v - (4.0_f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn gibbs_free_energy_is_minus_log_z() {
        let sys = Arc::new(CompositeSystem::qubits(2, 1.0).unwrap());
        let g = gibbs(&sys, 0.7).unwrap();
        let gamma = QuantumState::new(sys.clone(), ComplexMatrix::from_real_diagonal(&g.weights)).unwrap();
        for a in [0.0, 0.5, 1.0, 3.0, f64::INFINITY] {
            assert!((free_energy(&gamma, &g, a).unwrap() + g.log_z).abs() < 1e-12);
        }
    }

    #[test]
    fn excited_qubit_free_energy() {
        let sys = Arc::new(CompositeSystem::qubits(1, 1.3).unwrap());
        let g = gibbs(&sys, 0.9).unwrap();
        let e = QuantumState::new(sys, ComplexMatrix::from_real_diagonal(&[0.0, 1.0])).unwrap();
        for a in [0.0, 0.4, 1.0, 2.5, f64::INFINITY] {
            assert!((free_energy(&e, &g, a).unwrap() - 0.9 * 1.3).abs() < 1e-12, "a={a}");
        }
    }

    #[test]
    fn max_free_energy_of_block_diagonal_state() {
        let rho = dephase_blocks(&dicke(3, 1, 1.0).unwrap()).unwrap();
        let beta = 0.6;
        let g = gibbs(rho.system(), beta).unwrap();
        // eigenvalue 1 in the one-excitation block
        let expect = beta * 1.0;
        assert!((free_energy(&rho, &g, f64::INFINITY).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn dicke_w_coh_is_log_binomial() {
        for (n, k) in [(2, 1), (4, 2), (5, 2), (6, 3)] {
            let rho = dicke(n, k, 1.0).unwrap();
            let g = gibbs(rho.system(), 1.0).unwrap();
            let w = w_coh(&rho, &g).unwrap();
            assert!((w.value - ln_binom(n as u64, k as u64)).abs() < 1e-9, "n={n} k={k}: {}", w.value);
        }
    }

    #[test]
    fn ghz_and_single_coherent_gibbs_have_no_coherent_work() {
        let rho = ghz(4, 1.0).unwrap();
        let g = gibbs(rho.system(), 1.0).unwrap();
        assert!(w_coh(&rho, &g).unwrap().value.abs() < 1e-12);

        let sys = Arc::new(CompositeSystem::qubits(1, 1.0).unwrap());
        let g1 = gibbs(&sys, 1.0).unwrap();
        let cg = coherent_gibbs(sys, &g1).unwrap();
        assert!(w_coh(&cg, &g1).unwrap().value.abs() < 1e-12);
        let two = tensor_power(&cg, 2).unwrap();
        let g2 = gibbs(two.system(), 1.0).unwrap();
        assert!(w_coh(&two, &g2).unwrap().value > 1e-3);
    }

    #[test]
    fn w_coh_depends_only_on_block_dephased_state() {
        let rho = two_qubit_psi(0.2, 0.5, 0.3, 1.0).unwrap();
        let g = gibbs(rho.system(), 0.8).unwrap();
        let a = w_coh(&rho, &g).unwrap().value;
        let b = w_coh(&dephase_blocks(&rho).unwrap(), &g).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn work_quantities_vanish_on_gibbs_state() {
        let sys = Arc::new(CompositeSystem::qubits(2, 1.0).unwrap());
        let g = gibbs(&sys, 1.1).unwrap();
        let gamma = QuantumState::new(sys, ComplexMatrix::from_real_diagonal(&g.weights)).unwrap();
        assert!(w_coh(&gamma, &g).unwrap().value.abs() < 1e-12);
        assert!(w_incoh(&gamma, &g).unwrap().value.abs() < 1e-12);
        assert!(w_tot(&gamma, &g).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn ground_state_incoherent_work() {
        let sys = Arc::new(CompositeSystem::qubits(1, 1.0).unwrap());
        let g = gibbs(&sys, 2.0).unwrap();
        let ground = QuantumState::new(sys, ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let w = w_incoh(&ground, &g).unwrap().value;
        assert!((w - g.log_z).abs() < 1e-12);
        assert!((w - w_incoh_closed_form(&ground, &g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn dicke_two_one_work_sum() {
        let rho = dicke(2, 1, 1.0).unwrap();
        let g = gibbs(rho.system(), 1.0).unwrap();
        let c = w_coh(&rho, &g).unwrap();
        let i = w_incoh(&rho, &g).unwrap().value;
        let t = w_tot(&rho, &g).unwrap().value;
        assert!(c.value + i <= t + 1e-9);
        // pure block: every order gives ln 2, so the infimum is also attained at 0
        assert!((c.scan.at_zero - 2.0_f64.ln()).abs() < 1e-12);
        assert!((c.value + i - t).abs() < 1e-9);
    }

    #[test]
    fn work_distance_rejects_coherent_input() {
        let rho = two_qubit_psi(0.2, 0.5, 0.3, 1.0).unwrap();
        let g = gibbs(rho.system(), 1.0).unwrap();
        let d = dephase_full(&rho);
        assert!(matches!(work_distance(&rho, &d, &g), Err(Error::NotBlockDiagonal { .. })));
        assert!(work_distance(&dephase_blocks(&rho).unwrap(), &d, &g).is_ok());
    }

    #[test]
    fn pure_state_criterion_thresholds() {
        let (w0, beta) = (1.0, 1.0);
        let x = (beta * w0 as f64).exp();
        let suff = x / (1.0 + x);
        let rho = two_qubit_psi(0.5 * (1.0 - suff - 0.01), suff + 0.01, 0.5 * (1.0 - suff - 0.01), w0).unwrap();
        let g = gibbs(rho.system(), beta).unwrap();
        let r = observation1_criterion(&rho, &g).unwrap();
        assert!(r.extractable);
        assert!((r.energy - w0).abs() < 1e-12);

        let nec = 1.0 / (1.0 + x + 1.0 / x);
        let rho = two_qubit_psi(0.5 * (1.0 - 0.5 * nec), 0.5 * nec, 0.5 * (1.0 - 0.5 * nec), w0).unwrap();
        assert!(!observation1_criterion(&rho, &g).unwrap().extractable);

        let gz = ghz(3, 1.0).unwrap();
        let g3 = gibbs(gz.system(), beta).unwrap();
        assert!(!observation1_criterion(&gz, &g3).unwrap().extractable);
    }

    #[test]
    fn criterion_requires_pure_state() {
        let sys = Arc::new(CompositeSystem::qubits(1, 1.0).unwrap());
        let g = gibbs(&sys, 1.0).unwrap();
        let mixed = QuantumState::new(sys, ComplexMatrix::from_real_diagonal(&[0.5, 0.5])).unwrap();
        assert!(matches!(observation1_criterion(&mixed, &g), Err(Error::NotPure { .. })));
    }

    #[test]
    fn correlation_of_product_state_vanishes() {
        let sys = Arc::new(CompositeSystem::qubits(1, 1.0).unwrap());
        let g1 = gibbs(&sys, 1.0).unwrap();
        let cg = coherent_gibbs(sys, &g1).unwrap();
        let two = tensor_power(&cg, 2).unwrap();
        let g2 = gibbs(two.system(), 1.0).unwrap();
        assert!(free_energy_correlation(&two, &g2, 1.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn dicke_correlation_difference_is_log_two() {
        let rho = dicke(2, 1, 1.0).unwrap();
        let g = gibbs(rho.system(), 1.0).unwrap();
        let d = dephase_blocks(&rho).unwrap();
        let p = dephase_full(&rho);
        let diff = free_energy_correlation(&d, &g, 1.0).unwrap() - free_energy_correlation(&p, &g, 1.0).unwrap();
        assert!((diff - 2.0_f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn supplemental_modes() {
        let r = asymmetry_modes(&supplemental_rho()).unwrap();
        let s = asymmetry_modes(&supplemental_sigma()).unwrap();
        for gap in [1.0, 2.0, 3.0] {
            assert!((mode_amplitude(&r, gap, 1e-9) - 0.1).abs() < 1e-12, "gap {gap}");
            assert!((mode_amplitude(&s, gap, 1e-9) - 0.099).abs() < 1e-12, "gap {gap}");
        }
    }

    #[test]
    fn block_diagonal_state_has_no_asymmetry() {
        let rho = dephase_blocks(&two_qubit_psi(0.2, 0.5, 0.3, 1.0).unwrap()).unwrap();
        for a in [0.0, 0.5, 1.0, 2.0, f64::INFINITY] {
            assert!(asymmetry_entropy(&rho, a).unwrap().abs() < 1e-10);
        }
        let modes = asymmetry_modes(&rho).unwrap();
        assert!(modes.iter().all(|m| m.gap == 0.0 || m.amplitude < 1e-14));
    }
}
