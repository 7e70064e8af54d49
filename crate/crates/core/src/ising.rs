//! Periodic transverse-field Ising chain `H = -h Σ σ_z - J Σ σ_x σ_x`:
//! free-fermion spectrum in the two fermion-parity sectors, a dense
//! diagonalization oracle, ε-window degeneracy counts and the quasiparticle
//! form of the work/clock trade-off.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::clock::qfi;
use crate::divergence::w_coh;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{gibbs, window_index, CompositeSystem};
use crate::states::QuantumState;
use crate::tradeoff::BoundEntry;

/// Largest chain for free-fermion enumeration.
pub const MAX_SECTOR_SITES: usize = 24;
/// Largest chain for dense diagonalization.
pub const MAX_ED_SITES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingChain {
    pub n: usize,
    pub h: f64,
    pub j: f64,
}

impl IsingChain {
    pub fn new(n: usize, h: f64, j: f64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::BadParams(format!("chain length {n} must be even and >= 2")));
        }
        if !(h >= 0.0 && j >= 0.0 && h.is_finite() && j.is_finite()) {
            return Err(Error::BadParams(format!("h = {h}, J = {j} must be finite and >= 0")));
        }
        Ok(Self { n, h, j })
    }

    pub fn dispersion(&self, k: f64) -> f64 {
        dispersion(self.h, self.j, k)
    }
}

/// `ℰ_k = 2 sqrt(h^2 + J^2 - 2 h J cos k)`.
pub fn dispersion(h: f64, j: f64, k: f64) -> f64 {
    2.0 * (h * h + j * j - 2.0 * h * j * k.cos()).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sector {
    /// Antiperiodic momenta, even excitation number.
    NS,
    /// Periodic momenta, odd excitation number.
    R,
}

impl Sector {
    /// `2π(n + ½)/N` or `2πn/N` for `n = -N/2, …, N/2 - 1`.
    pub fn momenta(self, n: usize) -> Vec<f64> {
        let shift = match self {
            Sector::NS => 0.5,
            Sector::R => 0.0,
        };
        let half = (n / 2) as i64;
        (-half..half)
            .map(|m| 2.0 * PI * (m as f64 + shift) / n as f64)
            .collect()
    }
}

/// A many-body level: its energy and the occupied modes as a bit mask over
/// the momentum list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    pub occupation: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorSpectrum {
    pub sector: Sector,
    pub momenta: Vec<f64>,
    pub mode_energies: Vec<f64>,
    /// Sorted ascending.
    pub levels: Vec<Level>,
}

/// Per-mode energy change on occupation and the vacuum energy of a sector.
fn sector_modes(chain: &IsingChain, sector: Sector) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
    let momenta = sector.momenta(chain.n);
    let mode_energies: Vec<f64> = momenta.iter().map(|&k| chain.dispersion(k)).collect();
    let mut steps = mode_energies.clone();
    let mut vacuum = -0.5 * mode_energies.iter().sum::<f64>();
    if sector == Sector::R {
        // zero mode: -2(J - h)(n0 - ½)
        let z = chain.n / 2;
        let signed = 2.0 * (chain.h - chain.j);
        vacuum += 0.5 * mode_energies[z] - 0.5 * signed;
        steps[z] = signed;
    }
    (momenta, mode_energies, steps, vacuum)
}

/// Sums of `steps` over all subsets of a range, indexed by the local bit mask.
fn subset_sums(steps: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << steps.len()];
    for (b, s) in steps.iter().enumerate() {
        let bit = 1usize << b;
        for m in 0..bit {
            out[m | bit] = out[m] + s;
        }
    }
    out
}

fn check_sector_size(n: usize) -> Result<()> {
    if n > MAX_SECTOR_SITES {
        return Err(Error::TooLarge {
            dimension: 1u128 << n,
            limit: 1u128 << MAX_SECTOR_SITES,
        });
    }
    Ok(())
}

/// Calls `f(energy, mask)` for every parity-valid occupation of the sector, in parallel chunks.
fn for_each_level<T, F, R>(chain: &IsingChain, sector: Sector, init: impl Fn() -> T + Sync + Send, f: F, reduce: R) -> T
where
    T: Send,
    F: Fn(T, f64, u32) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    let (_, _, steps, vacuum) = sector_modes(chain, sector);
    let n = chain.n;
    let lo_bits = n / 2;
    let lo = subset_sums(&steps[..lo_bits]);
    let hi = subset_sums(&steps[lo_bits..]);
    let want_odd = sector == Sector::R;
    (0..hi.len())
        .into_par_iter()
        .fold(&init, |mut acc, hm| {
            let hi_e = vacuum + hi[hm];
            let hi_parity = (hm as u32).count_ones() % 2 == 1;
            for (lm, le) in lo.iter().enumerate() {
                let odd = hi_parity ^ ((lm as u32).count_ones() % 2 == 1);
                if odd == want_odd {
                    acc = f(acc, hi_e + le, ((hm << lo_bits) | lm) as u32);
                }
            }
            acc
        })
        .reduce(&init, reduce)
}

/// Levels of one sector, lowest `max_levels` kept when given.
pub fn sector_spectrum(chain: &IsingChain, sector: Sector, max_levels: Option<usize>) -> Result<SectorSpectrum> {
    check_sector_size(chain.n)?;
    let mut levels = for_each_level(
        chain,
        sector,
        Vec::new,
        |mut v, energy, occupation| {
            v.push(Level { energy, occupation });
            v
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    );
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.occupation.cmp(&b.occupation)));
    if let Some(m) = max_levels {
        levels.truncate(m);
    }
    let (momenta, mode_energies, _, _) = sector_modes(chain, sector);
    Ok(SectorSpectrum {
        sector,
        momenta,
        mode_energies,
        levels,
    })
}

/// All `2^N` levels from both sectors, sorted.
pub fn full_spectrum(chain: &IsingChain) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(1 << chain.n);
    for s in [Sector::NS, Sector::R] {
        out.extend(sector_spectrum(chain, s, None)?.levels.iter().map(|l| l.energy));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn check_ed_size(n: usize) -> Result<()> {
    if n > MAX_ED_SITES {
        return Err(Error::TooLarge {
            dimension: 1u128 << n,
            limit: 1u128 << MAX_ED_SITES,
        });
    }
    Ok(())
}

/// `σ_z` eigenvalue of site `i` in basis state `s`: `|0⟩ → -1`, `|1⟩ → +1`; site 0 is the most significant bit.
fn sz(n: usize, s: usize, i: usize) -> f64 {
    if (s >> (n - 1 - i)) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn bond_flip(n: usize, i: usize) -> usize {
    (1 << (n - 1 - i)) | (1 << (n - 1 - (i + 1) % n))
}

/// Real entries `(row, col, value)` of the spin Hamiltonian, optionally without the field or the coupling.
fn spin_entries(chain: &IsingChain, field: bool, coupling: bool) -> Vec<(usize, usize, f64)> {
    let n = chain.n;
    let mut out = Vec::new();
    for s in 0..1usize << n {
        if field {
            let d: f64 = (0..n).map(|i| -chain.h * sz(n, s, i)).sum();
            out.push((s, s, d));
        }
        if coupling {
            for i in 0..n {
                out.push((s ^ bond_flip(n, i), s, -chain.j));
            }
        }
    }
    out
}

fn dense(n: usize, entries: &[(usize, usize, f64)]) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for &(r, c, v) in entries {
        m[(r, c)] += v;
    }
    ComplexMatrix::from_real_rows(&m.row_iter().map(|r| r.iter().copied().collect()).collect::<Vec<_>>())
        .expect("square matrix")
}

/// `H_Ising` in the spin basis.
pub fn ising_hamiltonian(chain: &IsingChain) -> Result<ComplexMatrix> {
    check_ed_size(chain.n)?;
    Ok(dense(chain.n, &spin_entries(chain, true, true)))
}

/// `H_0 = -h Σ σ_z` in the spin basis.
pub fn field_hamiltonian(chain: &IsingChain) -> Result<ComplexMatrix> {
    check_ed_size(chain.n)?;
    Ok(dense(chain.n, &spin_entries(chain, true, false)))
}

/// Sorted eigenvalues of the dense spin Hamiltonian, diagonalized per `Π σ_z` parity block.
pub fn ed_oracle(chain: &IsingChain) -> Result<Vec<f64>> {
    check_ed_size(chain.n)?;
    let n = chain.n;
    let mut out = Vec::with_capacity(1 << n);
    for parity in [0u32, 1] {
        let states: Vec<usize> = (0..1usize << n).filter(|s| s.count_ones() % 2 == parity).collect();
        let mut pos = vec![usize::MAX; 1 << n];
        for (k, &s) in states.iter().enumerate() {
            pos[s] = k;
        }
        let mut m = DMatrix::<f64>::zeros(states.len(), states.len());
        for (r, c, v) in spin_entries(chain, true, true) {
            if pos[c] != usize::MAX {
                m[(pos[r], pos[c])] += v;
            }
        }
        out.extend(SymmetricEigen::new(m).eigenvalues.iter().copied());
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Number of levels per ε-window `(center, count)`, windows centred at `m ε` (μ = 0).
pub fn degeneracy_histogram(chain: &IsingChain, epsilon: f64) -> Result<Vec<(f64, u64)>> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::BadParams(format!("epsilon = {epsilon} must be finite and > 0")));
    }
    check_sector_size(chain.n)?;
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for s in [Sector::NS, Sector::R] {
        let part = for_each_level(
            chain,
            s,
            BTreeMap::new,
            |mut m: BTreeMap<i64, u64>, e, _| {
                *m.entry(window_index(e, 0.0, epsilon)).or_default() += 1;
                m
            },
            |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            },
        );
        for (k, v) in part {
            *counts.entry(k).or_default() += v;
        }
    }
    Ok(counts.into_iter().map(|(m, c)| (m as f64 * epsilon, c)).collect())
}

/// Writes histogram rows `h,J,epsilon,window_center,count`.
pub fn write_histogram_csv<W: Write>(rows: &[(IsingChain, f64, Vec<(f64, u64)>)], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "J", "epsilon", "window_center", "count"])?;
    for (chain, eps, hist) in rows {
        for (center, count) in hist {
            w.write_record([
                crate::io::fmt_num(chain.h),
                crate::io::fmt_num(chain.j),
                crate::io::fmt_num(*eps),
                crate::io::fmt_num(*center),
                count.to_string(),
            ])?;
        }
    }
    w.flush()
}

/// Non-interacting registers with levels `{-ℰ_{k_n}/2, +ℰ_{k_n}/2}` over the antiperiodic momenta.
pub fn quasiparticle_system(chain: &IsingChain) -> Result<CompositeSystem> {
    if chain.h == 0.0 && chain.j == 0.0 {
        return Err(Error::BadParams("h = J = 0 gives a degenerate quasiparticle spectrum".into()));
    }
    let spectra = Sector::NS
        .momenta(chain.n)
        .iter()
        .map(|&k| {
            let e = chain.dispersion(k);
            vec![-0.5 * e, 0.5 * e]
        })
        .collect();
    CompositeSystem::new(spectra)
}

/// `W_coh + I_F / (8 N (h^2 + J^2)) <= N ln 2` for a state on the quasiparticle registers.
pub fn ising_tradeoff(rho: &QuantumState, chain: &IsingChain, beta: f64) -> Result<BoundEntry> {
    let expected = quasiparticle_system(chain)?;
    let same = rho.system().local_spectra().len() == expected.local_spectra().len()
        && rho
            .system()
            .local_spectra()
            .iter()
            .zip(expected.local_spectra())
            .all(|(a, b)| a.len() == 2 && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * y.abs().max(1.0)));
    if !same {
        return Err(Error::WrongSystemShape(
            "state is not defined on the quasiparticle registers of this chain".into(),
        ));
    }
    let g = gibbs(rho.system(), beta)?;
    let w = w_coh(rho, &g)?.value;
    let f = qfi(rho.matrix(), &rho.hamiltonian())?;
    let n = chain.n as f64;
    let width2 = 4.0 * n * (chain.h * chain.h + chain.j * chain.j);
    Ok(BoundEntry::new(
        "ising_tradeoff",
        w + f / (2.0 * width2),
        n * std::f64::consts::LN_2,
    ))
}

/// QFI of a spin-basis state under `H_Ising` with the bracket from `H_0 = -h Σ σ_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiSandwich {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl QfiSandwich {
    pub fn holds(&self) -> bool {
        let tol = 1e-9 * self.value.abs().max(1.0);
        self.lower <= self.value + tol && self.value <= self.upper + tol
    }
}

/// `I_F(H_0) - 8hJN^2 <= I_F(H_Ising) <= I_F(H_0) + 8hJN^2 + 4J^2N^2`.
pub fn ising_qfi_bounds(rho: &ComplexMatrix, chain: &IsingChain) -> Result<QfiSandwich> {
    if chain.n > 10 {
        return Err(Error::TooLarge {
            dimension: 1u128 << chain.n,
            limit: 1 << 10,
        });
    }
    if rho.dim() != 1 << chain.n {
        return Err(Error::WrongSystemShape(format!(
            "state of dimension {} on a chain of {} spins",
            rho.dim(),
            chain.n
        )));
    }
    let f0 = qfi(rho, &field_hamiltonian(chain)?)?;
    let f = qfi(rho, &ising_hamiltonian(chain)?)?;
    let n2 = (chain.n * chain.n) as f64;
    let cross = 8.0 * chain.h * chain.j * n2;
    Ok(QfiSandwich {
        lower: f0 - cross,
        value: f,
        upper: f0 + cross + 4.0 * chain.j * chain.j * n2,
    })
}

/// The `N = 2` weak-coupling example: eigenpairs of the two middle levels.
pub fn weak_coupling_pair(h: f64, j: f64) -> Result<[(f64, ComplexMatrix); 2]> {
    let chain = IsingChain::new(2, h, j)?;
    let eig = crate::linalg::eigh(&ising_hamiltonian(&chain)?)?;
    let vec = |i: usize| {
        let col: Vec<_> = (0..4).map(|r| eig.eigenvectors.get(r, i)).collect();
        ComplexMatrix::outer(&col)
    };
    Ok([(eig.eigenvalues[1], vec(1)), (eig.eigenvalues[2], vec(2))])
}

/// Shared handle for states on [`quasiparticle_system`].
pub fn quasiparticle_system_arc(chain: &IsingChain) -> Result<Arc<CompositeSystem>> {
    quasiparticle_system(chain).map(Arc::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn same_multiset(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn dispersion_limits() {
        assert!((dispersion(1.0, 0.3, 0.0) - 1.4).abs() < 1e-14);
        assert!((dispersion(1.0, 0.3, PI) - 2.6).abs() < 1e-14);
        assert!((dispersion(0.0, 0.7, 1.1) - 1.4).abs() < 1e-14);
    }

    #[test]
    fn n2_spectra() {
        let c = IsingChain::new(2, 1.0, 0.0).unwrap();
        assert_eq!(ed_oracle(&c).unwrap(), vec![-2.0, 0.0, 0.0, 2.0]);
        assert!(same_multiset(&full_spectrum(&c).unwrap(), &[-2.0, 0.0, 0.0, 2.0], 1e-14));
        let c = IsingChain::new(2, 1.0, 0.1).unwrap();
        assert!(same_multiset(&full_spectrum(&c).unwrap(), &ed_oracle(&c).unwrap(), 1e-10));
    }

    #[test]
    fn sectors_match_ed_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 4, 6, 8] {
            for _ in 0..5 {
                let c = IsingChain::new(n, rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)).unwrap();
                let a = full_spectrum(&c).unwrap();
                let b = ed_oracle(&c).unwrap();
                assert!(same_multiset(&a, &b, 1e-8), "{c:?}");
            }
        }
    }

    #[test]
    fn ns_ground_energy_decoupled() {
        let c = IsingChain::new(6, 1.0, 0.0).unwrap();
        let s = sector_spectrum(&c, Sector::NS, Some(1)).unwrap();
        assert!((s.levels[0].energy + 6.0).abs() < 1e-12);
        assert!(s.levels.iter().all(|l| l.occupation.count_ones() % 2 == 0));
        let r = sector_spectrum(&c, Sector::R, None).unwrap();
        assert!(r.levels.iter().all(|l| l.occupation.count_ones() % 2 == 1));
        assert_eq!(r.levels.len(), 32);
    }

    #[test]
    fn weak_coupling_middle_levels() {
        let j = 0.01;
        let [(e_minus, p_minus), (e_plus, p_plus)] = weak_coupling_pair(1.0, j).unwrap();
        assert!((e_minus + 2.0 * j).abs() < 1e-12 && (e_plus - 2.0 * j).abs() < 1e-12);
        // |01⟩ + |10⟩ at -2J, |01⟩ - |10⟩ at +2J
        let s = 0.5_f64.sqrt();
        let plus = [c64(0.0, 0.0), c64(s, 0.0), c64(s, 0.0), c64(0.0, 0.0)];
        let minus = [c64(0.0, 0.0), c64(s, 0.0), c64(-s, 0.0), c64(0.0, 0.0)];
        assert!((p_minus.trace_product(&ComplexMatrix::outer(&plus)).re - 1.0).abs() < 1e-12);
        assert!((p_plus.trace_product(&ComplexMatrix::outer(&minus)).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_decoupled_is_binomial() {
        let c = IsingChain::new(10, 1.0, 0.0).unwrap();
        let hist = degeneracy_histogram(&c, 0.5).unwrap();
        assert_eq!(hist.len(), 11);
        let mut binom = 1u64;
        for (n, (center, count)) in hist.iter().enumerate() {
            assert!((center - (-10.0 + 2.0 * n as f64)).abs() < 1e-12);
            assert_eq!(*count, binom);
            binom = binom * (10 - n as u64) / (n as u64 + 1);
        }
    }

    #[test]
    fn gap_closes_at_self_dual_point() {
        let gap = |n| {
            let s = full_spectrum(&IsingChain::new(n, 1.0, 1.0).unwrap()).unwrap();
            s[1] - s[0]
        };
        assert!(gap(16) < gap(8));
    }

    #[test]
    fn size_limits() {
        let c = IsingChain::new(26, 1.0, 1.0).unwrap();
        assert!(matches!(sector_spectrum(&c, Sector::NS, None), Err(Error::TooLarge { .. })));
        assert!(matches!(ed_oracle(&IsingChain::new(14, 1.0, 1.0).unwrap()), Err(Error::TooLarge { .. })));
        assert!(IsingChain::new(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn quasiparticle_ghz_tradeoff() {
        let c = IsingChain::new(4, 1.0, 0.4).unwrap();
        let sys = quasiparticle_system_arc(&c).unwrap();
        let d = sys.dimension();
        let s = 0.5_f64.sqrt();
        let mut v = vec![c64(0.0, 0.0); d];
        v[0] = c64(s, 0.0);
        v[d - 1] = c64(s, 0.0);
        let rho = QuantumState::pure(sys.clone(), &v).unwrap();
        let sum: f64 = Sector::NS.momenta(4).iter().map(|&k| c.dispersion(k)).sum();
        assert!((qfi(rho.matrix(), &rho.hamiltonian()).unwrap() - sum * sum).abs() < 1e-9);
        let e = ising_tradeoff(&rho, &c, 1.0).unwrap();
        assert!(e.holds);
        let other = QuantumState::new(
            Arc::new(CompositeSystem::qubits(4, 1.0).unwrap()),
            ComplexMatrix::from_real_diagonal(&[1.0 / 16.0; 16]),
        )
        .unwrap();
        assert!(matches!(ising_tradeoff(&other, &c, 1.0), Err(Error::WrongSystemShape(_))));
    }
}
