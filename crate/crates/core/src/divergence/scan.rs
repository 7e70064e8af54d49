//! Infimum over the Rényi order α ∈ [0, ∞].
//!
//! The objective is sampled at the closed-form endpoints α = 0, 1, ∞ and on a
//! fixed grid; the grid minimum is then refined by golden-section search on the
//! bracket formed by its two neighbours.

use serde::Serialize;

/// Target bracket width of the golden-section refinement.
pub const REFINE_WIDTH: f64 = 1e-6;

/// Fixed scan grid: `0.01 k` (k = 1..99), `1 + 0.1 k` (k = 1..90) and
/// `{20, 50, 100, 1000}` (10 is already on the second leg).
pub fn alpha_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=99).map(|k| 0.01 * k as f64).collect();
    grid.extend((1..=90).map(|k| 1.0 + 0.1 * k as f64));
    grid.extend([20.0, 50.0, 100.0, 1000.0]);
    grid
}

/// Located infimum of an α-scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Infimum {
    /// Minimizing order; `f64::INFINITY` when the α → ∞ limit wins.
    pub alpha: f64,
    pub value: f64,
    /// Spread of the objective over the final refinement bracket.
    pub refinement_error: f64,
}

/// Sampled curve `α ↦ f(α)` with its endpoint values and located infimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaScan {
    /// Finite samples in ascending α, including the closed-form α = 0 and α = 1.
    pub samples: Vec<(f64, f64)>,
    pub at_zero: f64,
    pub at_one: f64,
    pub at_infinity: f64,
    pub infimum: Infimum,
}

impl AlphaScan {
    /// Smallest sampled value over finite α.
    pub fn min_sample(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)
    }
}

fn key(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Scans `f` over α ∈ [0, ∞]. `f` must handle `0.0`, `1.0` and
/// `f64::INFINITY` with their closed forms.
pub fn scan_infimum(f: impl Fn(f64) -> f64) -> AlphaScan {
    let at_zero = f(0.0);
    let at_one = f(1.0);
    let at_infinity = f(f64::INFINITY);

    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(200);
    samples.push((0.0, at_zero));
    for a in alpha_grid() {
        if samples.last().map(|s| s.0) == Some(0.99) {
            samples.push((1.0, at_one));
        }
        samples.push((a, f(a)));
    }

    let (imin, _) = samples
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |(bi, bv), (i, s)| {
            if key(s.1) < bv {
                (i, key(s.1))
            } else {
                (bi, bv)
            }
        });
    let lo = samples[imin.saturating_sub(1)].0;
    let hi = samples[(imin + 1).min(samples.len() - 1)].0;
    let (refined_alpha, refined_value, spread) = golden_section(&f, lo, hi, REFINE_WIDTH);

    let mut best = Infimum {
        alpha: samples[imin].0,
        value: key(samples[imin].1),
        refinement_error: spread,
    };
    if key(refined_value) < best.value {
        best.alpha = refined_alpha;
        best.value = refined_value;
    }
    if key(at_infinity) < best.value {
        best.alpha = f64::INFINITY;
        best.value = at_infinity;
    }

    AlphaScan {
        samples,
        at_zero,
        at_one,
        at_infinity,
        infimum: best,
    }
}

/// Golden-section minimization on `[a, b]` down to width `tol`.
/// Returns `(argmin, min, |f(x1) - f(x2)|)` at the last step.
pub fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if !(b > a) {
        let v = key(f(a));
        return (a, v, 0.0);
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = key(f(x1));
    let mut f2 = key(f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = key(f(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = key(f(x2));
        }
    }
    let spread = if f1.is_finite() && f2.is_finite() {
        (f1 - f2).abs()
    } else {
        0.0
    };
    if f1 <= f2 {
        (x1, f1, spread)
    } else {
        (x2, f2, spread)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = alpha_grid();
        assert_eq!(g.len(), 99 + 90 + 4);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.last().unwrap(), 1000.0);
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, v, _) = golden_section(&|a: f64| (a - 0.377).powi(2) + 2.0, 0.0, 1.0, 1e-9);
        assert!((x - 0.377).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interior_minimum_is_refined() {
        let f = |a: f64| if a.is_infinite() { 10.0 } else { (a - 2.345).powi(2) };
        let s = scan_infimum(f);
        assert!((s.infimum.alpha - 2.345).abs() < 1e-5);
        assert!(s.infimum.value < 1e-10);
        assert!(s.samples.iter().all(|p| s.infimum.value <= p.1));
        assert!(s.samples.iter().any(|p| p.0 == 1.0));
    }

    #[test]
    fn endpoint_minima() {
        let s = scan_infimum(|a: f64| if a.is_infinite() { 0.0 } else { 1.0 / (1.0 + a) });
        assert!(s.infimum.alpha.is_infinite());
        assert_eq!(s.infimum.value, 0.0);

        let s = scan_infimum(|a: f64| if a.is_infinite() { 5.0 } else { 1.0 + a });
        assert_eq!(s.infimum.alpha, 0.0);
        assert_eq!(s.infimum.value, 1.0);
    }
}
