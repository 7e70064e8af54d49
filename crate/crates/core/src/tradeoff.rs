//! Trade-off bounds between coherent work and clock resources, together with
//! the intermediate inequalities of their proofs.

use std::io::Write;

use serde::Serialize;

use crate::clock::qfi;
use crate::divergence::{w_coh, w_coh_windowed};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm_hermitian, ComplexMatrix};
use crate::model::{energy_windows, CompositeSystem, GibbsData};
use crate::states::{classical_data, QuantumState};

/// Slack below `-BOUND_TOL` counts as a violation; `|slack| <= BOUND_TOL` as saturation.
pub const BOUND_TOL: f64 = 1e-9;

/// Largest `N` for which the binomial inequality is claimed to be verified.
pub const BINOMIAL_VERIFIED_MAX: usize = 100;

/// One inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub saturated: bool,
    pub holds: bool,
}

impl BoundEntry {
    pub fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            saturated: slack.abs() <= BOUND_TOL,
            holds: slack >= -BOUND_TOL,
        }
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(r: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    if !(0.0..=1.0).contains(&r) {
        return f64::NAN;
    }
    h(r) + h(1.0 - r)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `ln C(n, k)` through `ln Γ`; `k` may be non-integer.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// `ln C(N, N/2)` with the Γ-function definition for odd `N`.
pub fn ln_central_binomial(n: usize) -> f64 {
    let n = n as f64;
    ln_gamma(n + 1.0) - 2.0 * ln_gamma(n / 2.0 + 1.0)
}

/// Checks `ln C(N, n) <= H_b(n/N) ln C(N, N/2)` for every integer `n ∈ [0, N]`.
pub fn binomial_inequality_holds(n: usize) -> bool {
    let central = ln_central_binomial(n);
    (0..=n).all(|k| {
        let lhs = ln_binomial(n as f64, k as f64);
        let rhs = binary_entropy(k as f64 / n as f64) * central;
        lhs <= rhs + 1e-10 * rhs.abs().max(1.0)
    })
}

/// [`binomial_inequality_holds`] restricted to the verified range `N <= 100`.
pub fn verify_binomial_inequality(n: usize) -> Result<bool> {
    if n > BINOMIAL_VERIFIED_MAX {
        return Err(Error::RangeExceeded {
            n,
            limit: BINOMIAL_VERIFIED_MAX,
        });
    }
    if n == 0 {
        return Err(Error::BadParams("N must be >= 1".into()));
    }
    Ok(binomial_inequality_holds(n))
}

fn qubit_shape(sys: &CompositeSystem) -> Result<(usize, f64)> {
    let omega0 = sys
        .uniform_qubit_gap()
        .ok_or_else(|| Error::WrongSystemShape("bound needs two-level subsystems with a common gap".into()))?;
    Ok((sys.num_subsystems(), omega0))
}

/// `r = ½[1 - sqrt(I_F / (N^2 ω0^2))]`, guarding the range of `I_F`.
fn clock_ratio(n: usize, omega0: f64, qfi: f64) -> Result<f64> {
    let max = (n * n) as f64 * omega0 * omega0;
    if qfi > max * (1.0 + BOUND_TOL) {
        return Err(Error::QfiOutOfRange { qfi, max });
    }
    let x = (qfi / max).clamp(0.0, 1.0);
    Ok(0.5 * (1.0 - x.sqrt()))
}

/// Right-hand side `N ln 2 H_b(½[1 - sqrt(I_F/(N^2 ω0^2))])`.
pub fn theorem1_rhs(n: usize, omega0: f64, qfi: f64) -> Result<f64> {
    Ok(n as f64 * std::f64::consts::LN_2 * binary_entropy(clock_ratio(n, omega0, qfi)?))
}

/// Right-hand side with `ln C(N, N/2)` in place of `N ln 2`.
pub fn tight_binomial_rhs(n: usize, omega0: f64, qfi: f64) -> Result<f64> {
    Ok(ln_central_binomial(n) * binary_entropy(clock_ratio(n, omega0, qfi)?))
}

/// Two-qubit bound: `W + ln 2 · I_F/(4 ω0^2) <= ln 2`.
pub fn eq4_entry(w: f64, omega0: f64, qfi: f64) -> BoundEntry {
    let ln2 = std::f64::consts::LN_2;
    BoundEntry::new("eq4", w + ln2 * qfi / (4.0 * omega0 * omega0), ln2)
}

/// General bound: `W + I_F/(2 Δ^2) <= Σ ln d`.
pub fn theorem2_entry(sys: &CompositeSystem, w: f64, qfi: f64) -> BoundEntry {
    let d2 = sys.width_squared();
    let clock = if d2 > 0.0 { qfi / (2.0 * d2) } else { 0.0 };
    BoundEntry::new("theorem2", w + clock, sys.log_dimension())
}

/// Per-particle form for identical subsystems:
/// `W/N + I_F/(2 N^2 Δ0^2) <= ln d`.
pub fn eq6_entry(sys: &CompositeSystem, w: f64, qfi: f64) -> Option<BoundEntry> {
    if !sys.identical_subsystems() {
        return None;
    }
    let n = sys.num_subsystems() as f64;
    let d0 = sys.local_widths()[0];
    let clock = if d0 > 0.0 { qfi / (2.0 * n * n * d0 * d0) } else { 0.0 };
    let d = sys.local_dims()[0] as f64;
    Some(BoundEntry::new("eq6", w / n + clock, d.ln()))
}

/// `Σ_E p_E ln g_E`.
pub fn prop1_rhs(rho: &QuantumState) -> Result<f64> {
    let blocks = rho.system().blocks()?;
    let data = classical_data(rho)?;
    Ok(data
        .per_block
        .iter()
        .zip(blocks.degeneracies())
        .map(|(p, g)| p.max(0.0) * (g as f64).ln())
        .sum())
}

/// `N ln 2 Σ_E p_E H_b(n/N)` for `N` qubits, the step between the two bounds.
pub fn binary_entropy_chain_rhs(rho: &QuantumState) -> Result<f64> {
    let (n, omega0) = qubit_shape(rho.system())?;
    let blocks = rho.system().blocks()?;
    let data = classical_data(rho)?;
    let e0 = rho.system().total_energies().iter().copied().fold(f64::INFINITY, f64::min);
    Ok(n as f64
        * std::f64::consts::LN_2
        * data
            .per_block
            .iter()
            .zip(&blocks.blocks)
            .map(|(p, b)| {
                let k = ((b.energy - e0) / omega0).round();
                p.max(0.0) * binary_entropy((k / n as f64).clamp(0.0, 1.0))
            })
            .sum::<f64>())
}

/// `(Σ p_x H_b(x), H_b(y))` with `y = ½[1 - sqrt((1-2 x̄)^2 + 4 Var_x)]`.
pub fn jensen_step(p: &[f64], x: &[f64]) -> (f64, f64) {
    let mean: f64 = p.iter().zip(x).map(|(p, x)| p * x).sum();
    let var: f64 = p.iter().zip(x).map(|(p, x)| p * (x - mean) * (x - mean)).sum();
    let lhs = p.iter().zip(x).map(|(p, x)| p * binary_entropy(*x)).sum();
    let s = ((1.0 - 2.0 * mean).powi(2) + 4.0 * var).clamp(0.0, 1.0);
    (lhs, binary_entropy(0.5 * (1.0 - s.sqrt())))
}

/// Work and clock resources of one state with every applicable bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffReport {
    pub w_coh: f64,
    pub w_coh_alpha: f64,
    pub qfi: f64,
    pub width_squared: f64,
    pub dims: Vec<usize>,
    pub bounds: Vec<BoundEntry>,
}

impl TradeoffReport {
    pub fn bound(&self, name: &str) -> Option<&BoundEntry> {
        self.bounds.iter().find(|b| b.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.bounds.iter().all(|b| b.holds)
    }
}

/// Evaluates `W_coh`, `I_F` and all bounds valid for the state's system.
///
/// For qubit registers the proof chain is reported as the entries
/// `chain_theorem1_vs_binary`, `chain_binary_vs_prop1` and `prop1`.
pub fn tradeoff_report(rho: &QuantumState, g: &GibbsData) -> Result<TradeoffReport> {
    let sys = rho.system();
    let w = w_coh(rho, g)?;
    let f = qfi(rho.matrix(), &rho.hamiltonian())?;
    let p1 = prop1_rhs(rho)?;
    let mut bounds = vec![BoundEntry::new("prop1", w.value, p1), theorem2_entry(sys, w.value, f)];
    if let Some(e) = eq6_entry(sys, w.value, f) {
        bounds.push(e);
    }
    if let Ok((n, omega0)) = qubit_shape(sys) {
        let t1 = theorem1_rhs(n, omega0, f)?;
        let chain = binary_entropy_chain_rhs(rho)?;
        bounds.push(BoundEntry::new("theorem1", w.value, t1));
        bounds.push(BoundEntry::new("tight_binomial", w.value, tight_binomial_rhs(n, omega0, f)?));
        bounds.push(BoundEntry::new("chain_theorem1_vs_binary", chain, t1));
        bounds.push(BoundEntry::new("chain_binary_vs_prop1", p1, chain));
        if n == 2 {
            bounds.push(eq4_entry(w.value, omega0, f));
        }
    }
    Ok(TradeoffReport {
        w_coh: w.value,
        w_coh_alpha: w.scan.infimum.alpha,
        qfi: f,
        width_squared: sys.width_squared(),
        dims: sys.local_dims().to_vec(),
        bounds,
    })
}

/// `Σ_E p_E ln g_E` bound on `W_coh`.
pub fn prop1_bound(rho: &QuantumState, g: &GibbsData) -> Result<BoundEntry> {
    Ok(BoundEntry::new("prop1", w_coh(rho, g)?.value, prop1_rhs(rho)?))
}

/// Qubit trade-off bound.
pub fn theorem1_bound(rho: &QuantumState, g: &GibbsData) -> Result<BoundEntry> {
    let (n, omega0) = qubit_shape(rho.system())?;
    let f = qfi(rho.matrix(), &rho.hamiltonian())?;
    Ok(BoundEntry::new("theorem1", w_coh(rho, g)?.value, theorem1_rhs(n, omega0, f)?))
}

/// Qubit trade-off bound with the central binomial coefficient.
pub fn tight_binomial_bound(rho: &QuantumState, g: &GibbsData) -> Result<BoundEntry> {
    let (n, omega0) = qubit_shape(rho.system())?;
    let f = qfi(rho.matrix(), &rho.hamiltonian())?;
    Ok(BoundEntry::new("tight_binomial", w_coh(rho, g)?.value, tight_binomial_rhs(n, omega0, f)?))
}

/// Two-qubit bound.
pub fn eq4_bound(rho: &QuantumState, g: &GibbsData) -> Result<BoundEntry> {
    let (n, omega0) = qubit_shape(rho.system())?;
    if n != 2 {
        return Err(Error::WrongSystemShape(format!("two-qubit bound applied to {n} subsystems")));
    }
    let f = qfi(rho.matrix(), &rho.hamiltonian())?;
    Ok(eq4_entry(w_coh(rho, g)?.value, omega0, f))
}

/// General-spectrum bound.
pub fn theorem2_bound(rho: &QuantumState, g: &GibbsData) -> Result<BoundEntry> {
    let f = qfi(rho.matrix(), &rho.hamiltonian())?;
    Ok(theorem2_entry(rho.system(), w_coh(rho, g)?.value, f))
}

/// Frequency of one block against its concentration bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyCheck {
    pub energy: f64,
    pub frequency: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoeffdingVerdict {
    pub holds: bool,
    pub mu: f64,
    pub checks: Vec<FrequencyCheck>,
}

/// Checks `g_E / D <= exp(-2 (E - μ)^2 / Δ^2)` on every block.
pub fn hoeffding_frequency_bound(sys: &CompositeSystem) -> Result<HoeffdingVerdict> {
    let blocks = sys.blocks()?;
    let mu = sys.mean_energy_uniform();
    let d2 = sys.width_squared();
    let dim = sys.dimension() as f64;
    let checks: Vec<FrequencyCheck> = blocks
        .blocks
        .iter()
        .map(|b| FrequencyCheck {
            energy: b.energy,
            frequency: b.degeneracy() as f64 / dim,
            bound: if d2 > 0.0 {
                (-2.0 * (b.energy - mu).powi(2) / d2).exp()
            } else {
                1.0
            },
        })
        .collect();
    Ok(HoeffdingVerdict {
        holds: checks.iter().all(|c| c.frequency <= c.bound * (1.0 + 1e-12)),
        mu,
        checks,
    })
}

/// Energy-resolution variant of the general bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub epsilon: f64,
    pub w_coh_eps: f64,
    pub qfi: f64,
    pub qfi_eps: f64,
    pub r: f64,
    pub r_tilde: f64,
    pub with_r: BoundEntry,
    pub with_r_tilde: BoundEntry,
    pub qfi_perturbation: BoundEntry,
}

/// `W_coh^ε` with the corrections `R(ε)`, `R̃(ε)` and the QFI perturbation bound.
///
/// `h_i` is the gap-filling perturbation with `||h_i|| <= 1`; by default each
/// level is moved to the centre of its window.
pub fn epsilon_tradeoff(rho: &QuantumState, g: &GibbsData, epsilon: f64, h_i: Option<&ComplexMatrix>) -> Result<EpsilonReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::BadParams(format!("epsilon = {epsilon} must be finite and > 0")));
    }
    let sys = rho.system();
    let blocks = sys.blocks()?;
    let windows = energy_windows(blocks, epsilon, sys.mean_energy_uniform())?;
    let data = classical_data(rho)?;
    let pops = windows.populations(&data.per_block);
    let abs_m: f64 = windows.windows.iter().zip(&pops).map(|(w, p)| p * w.m.unsigned_abs() as f64).sum();
    let p0: f64 = windows
        .windows
        .iter()
        .zip(&pops)
        .filter(|(w, _)| w.m == 0)
        .map(|(_, p)| *p)
        .sum();
    let h = rho.hamiltonian();
    let h_norm = operator_norm_hermitian(&h)?;
    let d2 = sys.width_squared();
    let r = (2.0 * epsilon * abs_m - epsilon * epsilon * p0) / d2;
    let r_tilde = (2.0 * epsilon * (abs_m + h_norm) + epsilon * epsilon * (0.5 - p0)) / d2;

    let default_hi;
    let h_i = match h_i {
        Some(m) => m,
        None => {
            let centers = windows.center_energies(blocks);
            let shift: Vec<f64> = centers
                .iter()
                .zip(sys.total_energies())
                .map(|(c, e)| (2.0 * (c - e) / epsilon).clamp(-1.0, 1.0))
                .collect();
            default_hi = ComplexMatrix::from_real_diagonal(&shift);
            &default_hi
        }
    };
    let (delta, allowed) = crate::clock::qfi_perturbation_bound(rho.matrix(), &h, h_i, epsilon)?;
    let f = qfi(rho.matrix(), &h)?;
    let f_eps = qfi(rho.matrix(), &(&h + &h_i.scale(0.5 * epsilon)))?;
    let w = w_coh_windowed(rho, g, &windows)?.value;
    let logd = sys.log_dimension();
    Ok(EpsilonReport {
        epsilon,
        w_coh_eps: w,
        qfi: f,
        qfi_eps: f_eps,
        r,
        r_tilde,
        with_r: BoundEntry::new("epsilon_r", w + f / (2.0 * d2), logd + r),
        with_r_tilde: BoundEntry::new("epsilon_r_tilde", w + f_eps / (2.0 * d2), logd + r_tilde),
        qfi_perturbation: BoundEntry::new("qfi_perturbation", delta, allowed),
    })
}

/// One sweep row per bound: `state_id,w_coh,qfi,bound_name,lhs,rhs,slack`.
pub fn write_sweep_csv<W: Write>(rows: &[(usize, TradeoffReport)], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["state_id", "w_coh", "qfi", "bound_name", "lhs", "rhs", "slack"])?;
    for (id, rep) in rows {
        for b in &rep.bounds {
            w.write_record([
                id.to_string(),
                crate::io::fmt_num(rep.w_coh),
                crate::io::fmt_num(rep.qfi),
                b.name.clone(),
                crate::io::fmt_num(b.lhs),
                crate::io::fmt_num(b.rhs),
                crate::io::fmt_num(b.slack),
            ])?;
        }
    }
    w.flush()
}
