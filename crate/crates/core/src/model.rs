//! Noninteracting composite systems, their total-energy block structure,
//! Gibbs data and ε-energy windows.
//!
//! The product basis is ordered lexicographically in the local level indices
//! with subsystem 0 as the slowest index, matching [`crate::linalg::tensor`].

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest supported product-basis dimension.
pub const MAX_DIMENSION: usize = 1 << 20;

/// Relative default for the block-grouping tolerance.
pub const DEFAULT_BLOCK_TOLERANCE: f64 = 1e-9;

/// `N` noninteracting subsystems with local spectra `E_j^(i)`.
#[derive(Debug)]
pub struct CompositeSystem {
    local_spectra: Vec<Vec<f64>>,
    dims: Vec<usize>,
    dimension: usize,
    block_tolerance: f64,
    total_energies: Vec<f64>,
    blocks: OnceLock<Result<BlockStructure>>,
}

impl Clone for CompositeSystem {
    fn clone(&self) -> Self {
        Self {
            local_spectra: self.local_spectra.clone(),
            dims: self.dims.clone(),
            dimension: self.dimension,
            block_tolerance: self.block_tolerance,
            total_energies: self.total_energies.clone(),
            blocks: OnceLock::new(),
        }
    }
}

impl PartialEq for CompositeSystem {
    fn eq(&self, other: &Self) -> bool {
        self.local_spectra == other.local_spectra && self.block_tolerance == other.block_tolerance
    }
}

impl CompositeSystem {
    /// Builds a system with the default block tolerance `1e-9 * max|E|`.
    pub fn new(local_spectra: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(local_spectra, None)
    }

    /// Builds a system; `block_tolerance = None` selects the default.
    pub fn with_tolerance(local_spectra: Vec<Vec<f64>>, block_tolerance: Option<f64>) -> Result<Self> {
        if local_spectra.is_empty() {
            return Err(Error::BadParams("at least one subsystem is required".into()));
        }
        let mut dimension: u128 = 1;
        for (i, spec) in local_spectra.iter().enumerate() {
            if spec.is_empty() {
                return Err(Error::BadParams(format!("local spectrum {i} is empty")));
            }
            if spec.iter().any(|e| !e.is_finite()) {
                return Err(Error::BadParams(format!("local spectrum {i} has non-finite energies")));
            }
            if spec.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::BadParams(format!("local spectrum {i} is not sorted ascending")));
            }
            dimension = dimension.saturating_mul(spec.len() as u128);
            if dimension > MAX_DIMENSION as u128 {
                return Err(Error::TooLarge {
                    dimension,
                    limit: MAX_DIMENSION as u128,
                });
            }
        }
        let dimension = dimension as usize;
        let dims: Vec<usize> = local_spectra.iter().map(Vec::len).collect();

        let mut total_energies = vec![0.0; dimension];
        let mut stride = dimension;
        for spec in &local_spectra {
            let d = spec.len();
            stride /= d;
            for (idx, e) in total_energies.iter_mut().enumerate() {
                *e += spec[(idx / stride) % d];
            }
        }

        let tol = match block_tolerance {
            Some(t) if t >= 0.0 && t.is_finite() => t,
            Some(t) => return Err(Error::BadParams(format!("block tolerance {t} must be >= 0"))),
            None => {
                let emax = total_energies.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
                DEFAULT_BLOCK_TOLERANCE * emax
            }
        };

        Ok(Self {
            local_spectra,
            dims,
            dimension,
            block_tolerance: tol,
            total_energies,
            blocks: OnceLock::new(),
        })
    }

    /// `N` identical qubits with levels `{0, omega0}`.
    pub fn qubits(n: usize, omega0: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParams("need at least one qubit".into()));
        }
        if !(omega0 > 0.0) {
            return Err(Error::BadParams(format!("qubit gap {omega0} must be > 0")));
        }
        Self::new(vec![vec![0.0, omega0]; n])
    }

    pub fn local_spectra(&self) -> &[Vec<f64>] {
        &self.local_spectra
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn block_tolerance(&self) -> f64 {
        self.block_tolerance
    }

    /// Total energy of every product-basis index.
    pub fn total_energies(&self) -> &[f64] {
        &self.total_energies
    }

    /// Local level indices of a product-basis index.
    pub fn local_indices(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Inverse of [`Self::local_indices`].
    pub fn product_index(&self, local: &[usize]) -> usize {
        local.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    /// Cached total-energy block structure.
    pub fn blocks(&self) -> Result<&BlockStructure> {
        self.blocks
            .get_or_init(|| build_blocks(self))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `Delta_E^(i) = E_max^(i) - E_min^(i)` for every subsystem.
    pub fn local_widths(&self) -> Vec<f64> {
        self.local_spectra
            .iter()
            .map(|s| s[s.len() - 1] - s[0])
            .collect()
    }

    /// `Delta_E^2 = sum_i (Delta_E^(i))^2`.
    pub fn width_squared(&self) -> f64 {
        self.local_widths().iter().map(|w| w * w).sum()
    }

    /// `sum_i ln d^(i)`.
    pub fn log_dimension(&self) -> f64 {
        self.dims.iter().map(|&d| (d as f64).ln()).sum()
    }

    /// Uniform-average energy `mu_E = sum_i sum_j E_j^(i) / d^(i)`.
    pub fn mean_energy_uniform(&self) -> f64 {
        self.local_spectra
            .iter()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
            .sum()
    }

    /// `Some(omega0)` when every subsystem is a two-level system with the same gap.
    pub fn uniform_qubit_gap(&self) -> Option<f64> {
        let first = self.local_spectra.first()?;
        if first.len() != 2 {
            return None;
        }
        let gap = first[1] - first[0];
        if !(gap > 0.0) {
            return None;
        }
        let tol = 1e-12 * gap.abs().max(1.0);
        self.local_spectra
            .iter()
            .all(|s| s.len() == 2 && ((s[1] - s[0]) - gap).abs() <= tol)
            .then_some(gap)
    }

    /// Whether all local spectra are identical.
    pub fn identical_subsystems(&self) -> bool {
        self.local_spectra.windows(2).all(|w| w[0] == w[1])
    }
}

/// One total-energy class of the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    /// Representative total energy (mean of the members).
    pub energy: f64,
    /// Product-basis indices, ascending.
    pub members: Vec<usize>,
}

impl Block {
    pub fn degeneracy(&self) -> usize {
        self.members.len()
    }
}

/// Partition of the product basis into total-energy classes, ascending in energy.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStructure {
    pub blocks: Vec<Block>,
    pub index_to_block: Vec<usize>,
}

impl BlockStructure {
    /// Builds a structure from an explicit partition. Blocks are sorted by energy
    /// and members sorted ascending.
    pub fn from_blocks(dimension: usize, mut blocks: Vec<Block>) -> Result<Self> {
        blocks.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        let mut index_to_block = vec![usize::MAX; dimension];
        for (b, block) in blocks.iter_mut().enumerate() {
            block.members.sort_unstable();
            for &i in &block.members {
                if i >= dimension || index_to_block[i] != usize::MAX {
                    return Err(Error::BadParams(format!("index {i} is not partitioned exactly once")));
                }
                index_to_block[i] = b;
            }
        }
        if index_to_block.iter().any(|&b| b == usize::MAX) {
            return Err(Error::BadParams("blocks do not cover the basis".into()));
        }
        Ok(Self {
            blocks,
            index_to_block,
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.index_to_block.len()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.energy).collect()
    }

    pub fn degeneracies(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::degeneracy).collect()
    }

    /// Whether `i` and `j` lie in the same block.
    #[inline]
    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.index_to_block[i] == self.index_to_block[j]
    }
}

/// Groups product-basis indices into total-energy blocks.
///
/// Sorted neighbouring energies closer than the tolerance are merged. A gap in
/// `(tol, 10 tol]` is reported as [`Error::AmbiguousBlocking`], as is a merged
/// block wider than the tolerance.
pub fn build_blocks(sys: &CompositeSystem) -> Result<BlockStructure> {
    let energies = sys.total_energies();
    let tol = sys.block_tolerance();
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));

    let mut blocks: Vec<Block> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let flush = |current: &mut Vec<usize>, blocks: &mut Vec<Block>| -> Result<()> {
        if current.is_empty() {
            return Ok(());
        }
        let lo = energies[current[0]];
        let hi = energies[*current.last().unwrap()];
        if hi - lo > tol {
            return Err(Error::AmbiguousBlocking {
                a: lo,
                b: hi,
                gap: hi - lo,
                tolerance: tol,
            });
        }
        let energy = current.iter().map(|&i| energies[i]).sum::<f64>() / current.len() as f64;
        let mut members = std::mem::take(current);
        members.sort_unstable();
        blocks.push(Block { energy, members });
        Ok(())
    };

    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 {
            let prev = energies[order[pos - 1]];
            let gap = energies[idx] - prev;
            if gap > tol {
                if gap <= 10.0 * tol {
                    return Err(Error::AmbiguousBlocking {
                        a: prev,
                        b: energies[idx],
                        gap,
                        tolerance: tol,
                    });
                }
                flush(&mut current, &mut blocks)?;
            }
        }
        current.push(idx);
    }
    flush(&mut current, &mut blocks)?;
    BlockStructure::from_blocks(energies.len(), blocks)
}

/// Thermal data at inverse temperature `beta` (energies in units where `k_B T = 1/beta`).
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsData {
    pub beta: f64,
    /// Partition function.
    pub z: f64,
    pub log_z: f64,
    /// Gibbs probability of one basis state in each block.
    pub block_weights: Vec<f64>,
    /// Gibbs probability of every product-basis index.
    pub weights: Vec<f64>,
    /// `ln` of `block_weights`, computed without underflow.
    pub log_block_weights: Vec<f64>,
    /// `ln` of `weights`, computed without underflow.
    pub log_weights: Vec<f64>,
}

impl GibbsData {
    /// Gibbs weights computed from block representative energies, so they are
    /// exactly constant within each block.
    pub fn from_blocks(blocks: &BlockStructure, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::BadParams(format!("beta = {beta} must be finite and > 0")));
        }
        let emin = blocks.blocks.first().map(|b| b.energy).unwrap_or(0.0);
        let shifted: f64 = blocks
            .blocks
            .iter()
            .map(|b| b.degeneracy() as f64 * (-beta * (b.energy - emin)).exp())
            .sum();
        let log_z = shifted.ln() - beta * emin;
        let block_weights: Vec<f64> = blocks
            .blocks
            .iter()
            .map(|b| (-beta * (b.energy - emin)).exp() / shifted)
            .collect();
        let log_block_weights: Vec<f64> = blocks
            .blocks
            .iter()
            .map(|b| -beta * (b.energy - emin) - shifted.ln())
            .collect();
        let weights = blocks
            .index_to_block
            .iter()
            .map(|&b| block_weights[b])
            .collect();
        let log_weights = blocks
            .index_to_block
            .iter()
            .map(|&b| log_block_weights[b])
            .collect();
        Ok(Self {
            beta,
            z: log_z.exp(),
            log_z,
            block_weights,
            weights,
            log_block_weights,
            log_weights,
        })
    }
}

/// Gibbs data of a composite system.
pub fn gibbs(sys: &CompositeSystem, beta: f64) -> Result<GibbsData> {
    GibbsData::from_blocks(sys.blocks()?, beta)
}

/// Window index `m` of an energy under the half-open-toward-zero convention:
/// `[mu + (m-1/2) eps, mu + (m+1/2) eps)` for `m > 0`,
/// `(mu + (m-1/2) eps, mu + (m+1/2) eps]` for `m < 0` and the open interval for `m = 0`.
pub fn window_index(energy: f64, mu: f64, epsilon: f64) -> i64 {
    let x = (energy - mu) / epsilon;
    if x >= 0.5 {
        (x + 0.5).floor() as i64
    } else if x <= -0.5 {
        (x - 0.5).ceil() as i64
    } else {
        0
    }
}

/// A single ε-window holding one or more energy blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub m: i64,
    pub center: f64,
    /// Indices into the underlying [`BlockStructure`].
    pub blocks: Vec<usize>,
    /// `g_m^ε`: number of product-basis states in the window.
    pub degeneracy: usize,
}

/// Block energies binned into ε-windows around `mu_E`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyWindows {
    pub epsilon: f64,
    pub mu: f64,
    /// Non-empty windows sorted by `m`.
    pub windows: Vec<Window>,
    pub block_to_window: Vec<usize>,
    pub dimension: usize,
}

impl EnergyWindows {
    /// `f_m^ε = g_m^ε / D` per window.
    pub fn frequencies(&self) -> Vec<f64> {
        self.windows
            .iter()
            .map(|w| w.degeneracy as f64 / self.dimension as f64)
            .collect()
    }

    /// `p_m^ε` per window from per-block populations `p_E`.
    pub fn populations(&self, block_probs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.windows.len()];
        for (b, &p) in block_probs.iter().enumerate() {
            out[self.block_to_window[b]] += p;
        }
        out
    }

    /// Windows as merged blocks (energy = window center).
    pub fn merged_blocks(&self, blocks: &BlockStructure) -> BlockStructure {
        let merged = self
            .windows
            .iter()
            .map(|w| Block {
                energy: w.center,
                members: w
                    .blocks
                    .iter()
                    .flat_map(|&b| blocks.blocks[b].members.iter().copied())
                    .collect(),
            })
            .collect();
        BlockStructure::from_blocks(blocks.dimension(), merged)
            .expect("windows partition the blocks")
    }

    /// Window center energy of every product-basis index.
    pub fn center_energies(&self, blocks: &BlockStructure) -> Vec<f64> {
        blocks
            .index_to_block
            .iter()
            .map(|&b| self.windows[self.block_to_window[b]].center)
            .collect()
    }
}

/// Bins the blocks into ε-windows centered at `mu + m eps`.
pub fn energy_windows(blocks: &BlockStructure, epsilon: f64, mu: f64) -> Result<EnergyWindows> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::BadParams(format!("epsilon = {epsilon} must be > 0")));
    }
    let mut windows: Vec<Window> = Vec::new();
    let mut block_window_m: Vec<i64> = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.blocks.iter().enumerate() {
        let m = window_index(block.energy, mu, epsilon);
        block_window_m.push(m);
        match windows.iter_mut().find(|w| w.m == m) {
            Some(w) => {
                w.blocks.push(b);
                w.degeneracy += block.degeneracy();
            }
            None => windows.push(Window {
                m,
                center: mu + m as f64 * epsilon,
                blocks: vec![b],
                degeneracy: block.degeneracy(),
            }),
        }
    }
    windows.sort_by_key(|w| w.m);
    let block_to_window = block_window_m
        .iter()
        .map(|m| windows.iter().position(|w| w.m == *m).unwrap())
        .collect();
    Ok(EnergyWindows {
        epsilon,
        mu,
        windows,
        block_to_window,
        dimension: blocks.dimension(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn two_qubit_blocks() {
        let sys = CompositeSystem::qubits(2, 1.0).unwrap();
        let b = sys.blocks().unwrap();
        assert_eq!(b.energies(), vec![0.0, 1.0, 2.0]);
        assert_eq!(b.degeneracies(), vec![1, 2, 1]);
        assert_eq!(b.blocks[1].members, vec![1, 2]);
    }

    #[test]
    fn n_qubit_degeneracies_are_binomial() {
        for n in 1..=8 {
            let sys = CompositeSystem::qubits(n, 0.7).unwrap();
            let b = sys.blocks().unwrap();
            assert_eq!(b.len(), n + 1);
            for (k, g) in b.degeneracies().into_iter().enumerate() {
                assert_eq!(g, binom(n, k));
                assert_eq!(g, binom(n, n - k));
            }
            assert_eq!(b.degeneracies().iter().sum::<usize>(), 1 << n);
        }
    }

    #[test]
    fn single_qutrit_singletons() {
        let sys = CompositeSystem::new(vec![vec![0.0, 1.0, 2.0]]).unwrap();
        assert_eq!(sys.blocks().unwrap().degeneracies(), vec![1, 1, 1]);
    }

    #[test]
    fn ambiguous_blocking_is_reported() {
        let sys = CompositeSystem::with_tolerance(vec![vec![0.0, 1.0], vec![0.0, 1.0 + 5e-9]], Some(1e-9)).unwrap();
        assert!(matches!(sys.blocks(), Err(Error::AmbiguousBlocking { .. })));
        // well separated: fine
        let sys = CompositeSystem::with_tolerance(vec![vec![0.0, 1.0], vec![0.0, 1.5]], Some(1e-9)).unwrap();
        assert_eq!(sys.blocks().unwrap().len(), 4);
    }

    #[test]
    fn rejects_bad_spectra() {
        assert!(CompositeSystem::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(CompositeSystem::new(vec![vec![]]).is_err());
        assert!(matches!(
            CompositeSystem::new(vec![vec![0.0, 1.0]; 21]),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn product_index_ordering() {
        let sys = CompositeSystem::new(vec![vec![0.0, 1.0], vec![0.0, 2.0, 3.0]]).unwrap();
        assert_eq!(sys.local_indices(4), vec![1, 1]);
        assert_eq!(sys.product_index(&[1, 2]), 5);
        assert_eq!(sys.total_energies(), &[0.0, 2.0, 3.0, 1.0, 3.0, 4.0]);
    }

    #[test]
    fn gibbs_partition_functions() {
        let beta = 0.8;
        let sys = CompositeSystem::qubits(1, 1.3).unwrap();
        let g = gibbs(&sys, beta).unwrap();
        assert!((g.z - (1.0 + (-beta * 1.3_f64).exp())).abs() < 1e-14);

        let sys = CompositeSystem::qubits(5, 1.3).unwrap();
        let g = gibbs(&sys, beta).unwrap();
        let expect = (1.0 + (-beta * 1.3_f64).exp()).powi(5);
        assert!((g.z - expect).abs() < 1e-12 * expect);
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        // three equally spaced levels: geometric sum vs direct summation
        let d = 0.45;
        let sys = CompositeSystem::new(vec![vec![0.0, d, 2.0 * d]]).unwrap();
        let g = gibbs(&sys, beta).unwrap();
        let geometric = (1.0 - (-3.0 * beta * d).exp()) / (1.0 - (-beta * d).exp());
        let direct: f64 = (0..3).map(|k| (-beta * d * k as f64).exp()).sum();
        assert!((g.z - geometric).abs() < 1e-13);
        assert!((g.z - direct).abs() < 1e-13);
    }

    #[test]
    fn gibbs_weights_block_constant_and_decreasing() {
        let sys = CompositeSystem::new(vec![vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.5, 2.0]]).unwrap();
        let g = gibbs(&sys, 1.1).unwrap();
        let b = sys.blocks().unwrap();
        for (k, block) in b.blocks.iter().enumerate() {
            for &i in &block.members {
                assert_eq!(g.weights[i], g.block_weights[k]);
            }
        }
        assert!(g.block_weights.windows(2).all(|w| w[0] > w[1]));
        assert!(gibbs(&sys, 0.0).is_err());
    }

    #[test]
    fn windows_examples() {
        let sys = CompositeSystem::qubits(2, 1.0).unwrap();
        let b = sys.blocks().unwrap();

        let w = energy_windows(b, 0.6, 1.0).unwrap();
        let ms: Vec<i64> = w.windows.iter().map(|w| w.m).collect();
        assert_eq!(ms, vec![-2, 0, 2]);
        assert_eq!(w.windows[1].blocks, vec![1]);

        let w = energy_windows(b, 10.0, sys.mean_energy_uniform()).unwrap();
        assert_eq!(w.windows.len(), 1);
        assert_eq!(w.windows[0].m, 0);
        assert_eq!(w.windows[0].degeneracy, 4);
    }

    #[test]
    fn window_boundary_convention() {
        // x = +1.5 exactly: left-closed for m > 0 -> m = 2
        assert_eq!(window_index(0.75, 0.0, 0.5), 2);
        // x = +0.5 belongs to m = 1, not m = 0
        assert_eq!(window_index(0.25, 0.0, 0.5), 1);
        // x = -0.5 belongs to m = -1 (right-closed for m < 0)
        assert_eq!(window_index(-0.25, 0.0, 0.5), -1);
        assert_eq!(window_index(-0.75, 0.0, 0.5), -2);
        assert_eq!(window_index(0.2, 0.0, 0.5), 0);
    }

    #[test]
    fn window_sums() {
        let sys = CompositeSystem::new(vec![vec![0.0, 1.0], vec![0.0, 2.0], vec![0.0, 3.0]]).unwrap();
        let b = sys.blocks().unwrap();
        let probs: Vec<f64> = (0..b.len()).map(|k| (k + 1) as f64).collect();
        let total: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        for eps in [0.05, 0.3, 0.9, 1.7, 4.0, 50.0] {
            let w = energy_windows(b, eps, sys.mean_energy_uniform()).unwrap();
            assert_eq!(w.windows.iter().map(|w| w.degeneracy).sum::<usize>(), 8);
            assert!((w.populations(&probs).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((w.frequencies().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
