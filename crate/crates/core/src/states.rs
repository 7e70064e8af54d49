//! Density matrices bound to a [`CompositeSystem`], the two dephasing maps and
//! the named states used throughout the crate.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c64, eigh, tensor, ComplexMatrix, HermitianEigensystem, C64};
use crate::model::{BlockStructure, CompositeSystem, GibbsData};

/// Tolerance on `|Tr rho - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on negative eigenvalues of a state.
pub const STATE_PSD_TOL: f64 = 1e-10;
/// Largest dimension for which dense density matrices are built.
pub const MAX_STATE_DIMENSION: usize = 4096;
/// Largest register size for pure-state vector constructors.
pub const MAX_VECTOR_QUBITS: usize = 20;
/// Off-block entries below this count as zero.
pub const BLOCK_DIAGONAL_TOL: f64 = 1e-12;

/// A density matrix on the product basis of a composite system.
#[derive(Debug, Clone)]
pub struct QuantumState {
    system: Arc<CompositeSystem>,
    matrix: ComplexMatrix,
}

impl QuantumState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(system: Arc<CompositeSystem>, matrix: ComplexMatrix) -> Result<Self> {
        let eig = validate_density(&system, &matrix)?;
        drop(eig);
        Ok(Self { system, matrix })
    }

    /// Wraps a matrix already known to be a valid state (output of a
    /// state-preserving map applied to a validated state).
    pub(crate) fn from_trusted(system: Arc<CompositeSystem>, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(system.dimension(), matrix.dim());
        Self { system, matrix }
    }

    /// Pure state from an amplitude vector; the vector is normalized.
    pub fn pure(system: Arc<CompositeSystem>, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != system.dimension() {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: system.dimension(),
            });
        }
        check_dense_size(system.dimension())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::BadParams("amplitude vector has zero or non-finite norm".into()));
        }
        let v: Vec<C64> = amplitudes.iter().map(|z| z / norm).collect();
        Ok(Self::from_trusted(system, ComplexMatrix::outer(&v)))
    }

    pub fn system(&self) -> &CompositeSystem {
        &self.system
    }

    pub fn system_arc(&self) -> &Arc<CompositeSystem> {
        &self.system
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigensystem(&self) -> Result<HermitianEigensystem> {
        eigh(&self.matrix)
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    /// The state vector when the state is rank one (largest eigenvalue within
    /// `1e-9` of one), with an arbitrary global phase.
    pub fn pure_vector(&self) -> Result<Vec<C64>> {
        let eig = self.eigensystem()?;
        let top = *eig.eigenvalues.last().unwrap();
        if (top - 1.0).abs() > 1e-9 {
            return Err(Error::NotPure {
                purity: self.purity(),
            });
        }
        Ok(eig.eigenvector(eig.dim() - 1))
    }

    /// Diagonal Hamiltonian of the bound system.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(self.system.total_energies())
    }

    /// `rho (x) sigma` on the concatenated system.
    pub fn tensor(&self, other: &QuantumState) -> Result<QuantumState> {
        let mut spectra = self.system.local_spectra().to_vec();
        spectra.extend(other.system.local_spectra().iter().cloned());
        let sys = CompositeSystem::new(spectra)?;
        check_dense_size(sys.dimension())?;
        Ok(Self::from_trusted(Arc::new(sys), tensor(&self.matrix, &other.matrix)))
    }

    /// Largest modulus of an entry connecting different blocks.
    pub fn off_block_weight(&self, blocks: &BlockStructure) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if !blocks.same_block(i, j) {
                    worst = worst.max(self.matrix.get(i, j).norm());
                }
            }
        }
        worst
    }

    pub fn is_block_diagonal(&self, blocks: &BlockStructure) -> bool {
        self.off_block_weight(blocks) <= BLOCK_DIAGONAL_TOL
    }
}

fn check_dense_size(dim: usize) -> Result<()> {
    if dim > MAX_STATE_DIMENSION {
        return Err(Error::TooLarge {
            dimension: dim as u128,
            limit: MAX_STATE_DIMENSION as u128,
        });
    }
    Ok(())
}

fn validate_density(system: &CompositeSystem, m: &ComplexMatrix) -> Result<HermitianEigensystem> {
    if m.dim() != system.dimension() {
        return Err(Error::DimensionMismatch {
            left: m.dim(),
            right: system.dimension(),
        });
    }
    check_dense_size(m.dim())?;
    let eig = eigh(m)?;
    let tr: f64 = m.diagonal_real().iter().sum();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if min < -STATE_PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig)
}

/// `Pi(rho)`: full dephasing in the product energy basis.
pub fn dephase_full(rho: &QuantumState) -> QuantumState {
    let diag = rho.matrix.diagonal_real();
    QuantumState::from_trusted(rho.system.clone(), ComplexMatrix::from_real_diagonal(&diag))
}

/// `D(rho)`: removes coherences between different total-energy blocks.
pub fn dephase_blocks(rho: &QuantumState) -> Result<QuantumState> {
    let blocks = rho.system.blocks()?;
    Ok(dephase_with(rho, blocks))
}

/// Pinching onto an arbitrary block partition of the product basis.
pub fn dephase_with(rho: &QuantumState, blocks: &BlockStructure) -> QuantumState {
    let m = &rho.matrix;
    let out = ComplexMatrix::from_fn(m.dim(), |i, j| {
        if blocks.same_block(i, j) {
            m.get(i, j)
        } else {
            c64(0.0, 0.0)
        }
    });
    QuantumState::from_trusted(rho.system.clone(), out)
}

/// Classical energy statistics of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnergyData {
    /// `P(E)` for every product-basis index.
    pub per_index: Vec<f64>,
    /// `p_E` for every block, in block order.
    pub per_block: Vec<f64>,
}

pub fn classical_data(rho: &QuantumState) -> Result<ClassicalEnergyData> {
    let blocks = rho.system.blocks()?;
    let per_index = rho.matrix.diagonal_real();
    let per_block = blocks
        .blocks
        .iter()
        .map(|b| b.members.iter().map(|&i| per_index[i]).sum())
        .collect();
    Ok(ClassicalEnergyData {
        per_index,
        per_block,
    })
}

/// Reduced state of subsystem `i`, bound to a single-subsystem system.
pub fn reduced_state(rho: &QuantumState, i: usize) -> Result<QuantumState> {
    let sys = rho.system();
    if i >= sys.num_subsystems() {
        return Err(Error::BadParams(format!(
            "subsystem {i} out of range (N = {})",
            sys.num_subsystems()
        )));
    }
    let dims = sys.local_dims();
    let d = dims[i];
    let inner: usize = dims[i + 1..].iter().product();
    let outer: usize = dims[..i].iter().product();
    let m = &rho.matrix;
    let mut out = ComplexMatrix::zeros(d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = c64(0.0, 0.0);
            for o in 0..outer {
                for n in 0..inner {
                    let ia = (o * d + a) * inner + n;
                    let ib = (o * d + b) * inner + n;
                    acc += m.get(ia, ib);
                }
            }
            out.set(a, b, acc);
        }
    }
    let local = CompositeSystem::new(vec![sys.local_spectra()[i].clone()])?;
    Ok(QuantumState::from_trusted(Arc::new(local), out))
}

/// `|GHZ_N> = (|0...0> + |1...1>)/sqrt 2` on `N` qubits with gap `omega0`.
pub fn ghz(n: usize, omega0: f64) -> Result<QuantumState> {
    check_register(n)?;
    let sys = Arc::new(CompositeSystem::qubits(n, omega0)?);
    let d = sys.dimension();
    let mut v = vec![c64(0.0, 0.0); d];
    v[0] = c64(1.0, 0.0);
    v[d - 1] = c64(1.0, 0.0);
    QuantumState::pure(sys, &v)
}

/// Dicke state `|N, k>`: uniform superposition of all strings with `k` excitations.
pub fn dicke(n: usize, k: usize, omega0: f64) -> Result<QuantumState> {
    check_register(n)?;
    if k > n {
        return Err(Error::BadParams(format!("Dicke excitation number {k} > N = {n}")));
    }
    let sys = Arc::new(CompositeSystem::qubits(n, omega0)?);
    let v: Vec<C64> = (0..sys.dimension())
        .map(|idx| {
            if (idx as u64).count_ones() as usize == k {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        })
        .collect();
    QuantumState::pure(sys, &v)
}

/// Coherent Gibbs state `sum_E sqrt(e^{-beta E}/Z) |E>` on the product basis.
pub fn coherent_gibbs(sys: Arc<CompositeSystem>, gibbs: &GibbsData) -> Result<QuantumState> {
    if gibbs.weights.len() != sys.dimension() {
        return Err(Error::DimensionMismatch {
            left: gibbs.weights.len(),
            right: sys.dimension(),
        });
    }
    let v: Vec<C64> = gibbs.weights.iter().map(|w| c64(w.sqrt(), 0.0)).collect();
    QuantumState::pure(sys, &v)
}

/// The two-qubit family `sqrt p0 |00> + sqrt p1 (|01>+|10>)/sqrt 2 + sqrt p2 |11>`.
pub fn two_qubit_psi(p0: f64, p1: f64, p2: f64, omega0: f64) -> Result<QuantumState> {
    for p in [p0, p1, p2] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParams(format!("probability {p} outside [0, 1]")));
        }
    }
    if (p0 + p1 + p2 - 1.0).abs() > 1e-12 {
        return Err(Error::BadParams(format!("p0 + p1 + p2 = {} != 1", p0 + p1 + p2)));
    }
    let sys = Arc::new(CompositeSystem::qubits(2, omega0)?);
    let s = (p1 / 2.0).sqrt();
    let v = [c64(p0.sqrt(), 0.0), c64(s, 0.0), c64(s, 0.0), c64(p2.sqrt(), 0.0)];
    QuantumState::pure(sys, &v)
}

/// `rho^{(x) n}` on `n` copies of the system.
pub fn tensor_power(rho: &QuantumState, n: usize) -> Result<QuantumState> {
    if n == 0 {
        return Err(Error::BadParams("tensor power must be >= 1".into()));
    }
    let mut acc = rho.clone();
    for _ in 1..n {
        acc = acc.tensor(rho)?;
    }
    Ok(acc)
}

/// `|M|^{-1/2} sum_{m in M} |m>` over the given product-basis indices.
pub fn uniform_superposition(sys: Arc<CompositeSystem>, indices: &[usize]) -> Result<QuantumState> {
    if indices.is_empty() {
        return Err(Error::BadParams("empty index set".into()));
    }
    let mut v = vec![c64(0.0, 0.0); sys.dimension()];
    for &i in indices {
        if i >= v.len() {
            return Err(Error::BadParams(format!("index {i} out of range")));
        }
        v[i] = c64(1.0, 0.0);
    }
    QuantumState::pure(sys, &v)
}

/// Dense state from an explicit matrix.
pub fn dense(sys: Arc<CompositeSystem>, matrix: ComplexMatrix) -> Result<QuantumState> {
    QuantumState::new(sys, matrix)
}

/// Single four-level system with `H = sum_n n omega |n><n|`, `omega = 1`.
pub fn supplemental_system() -> Arc<CompositeSystem> {
    Arc::new(CompositeSystem::new(vec![vec![0.0, 1.0, 2.0, 3.0]]).expect("valid spectrum"))
}

/// Initial state of the QFI counterexample.
pub fn supplemental_rho() -> QuantumState {
    let rows = vec![
        vec![0.5, 0.0, 0.1, 0.1],
        vec![0.0, 0.2, 0.0, 0.0],
        vec![0.1, 0.0, 0.25, 0.1],
        vec![0.1, 0.0, 0.1, 0.05],
    ];
    QuantumState::new(supplemental_system(), ComplexMatrix::from_real_rows(&rows).unwrap())
        .expect("hard-coded state is valid")
}

/// Target state of the QFI counterexample.
pub fn supplemental_sigma() -> QuantumState {
    let rows = vec![
        vec![0.5, 0.099, 0.099, 0.099],
        vec![0.099, 0.25, 0.0, 0.0],
        vec![0.099, 0.0, 0.2, 0.0],
        vec![0.099, 0.0, 0.0, 0.05],
    ];
    QuantumState::new(supplemental_system(), ComplexMatrix::from_real_rows(&rows).unwrap())
        .expect("hard-coded state is valid")
}

fn check_register(n: usize) -> Result<()> {
    if n == 0 || n > MAX_VECTOR_QUBITS {
        return Err(Error::BadParams(format!("register size {n} outside 1..={MAX_VECTOR_QUBITS}")));
    }
    if (1usize << n) > MAX_STATE_DIMENSION {
        return Err(Error::TooLarge {
            dimension: 1u128 << n,
            limit: MAX_STATE_DIMENSION as u128,
        });
    }
    Ok(())
}
