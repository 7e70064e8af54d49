//! Random states and operators, and index-seeded parallel sampling.
//!
//! Sample `i` of a sweep with seed `s` always draws from a generator seeded
//! with `s + i`, so results do not depend on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::linalg::{c64, operator_norm_hermitian, ComplexMatrix, C64};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "COHERENCE_LEDGER_THREADS";

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

/// Haar-random unit vector.
pub fn haar_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| gaussian_c64(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// `G G† / Tr(G G†)` for a square complex Ginibre matrix `G` (Hilbert-Schmidt measure).
pub fn ginibre_mixed<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let rows: Vec<Vec<C64>> = (0..dim).map(|_| (0..dim).map(|_| gaussian_c64(rng)).collect()).collect();
    let g = ComplexMatrix::from_rows(&rows).expect("square");
    let gg = &g * &crate::linalg::dagger(&g);
    let t = crate::linalg::trace(&gg).re;
    hermitize(&gg.scale(1.0 / t))
}

/// Random Hermitian matrix with operator norm exactly 1 (0 for `dim == 0`).
pub fn random_hermitian_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let rows: Vec<Vec<C64>> = (0..dim).map(|_| (0..dim).map(|_| gaussian_c64(rng)).collect()).collect();
    let g = ComplexMatrix::from_rows(&rows).expect("square");
    let h = hermitize(&g);
    let norm = operator_norm_hermitian(&h).unwrap_or(1.0);
    hermitize(&h.scale(1.0 / norm.max(1e-300)))
}

/// Uniform point on the probability simplex.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = x.iter().sum();
    x.into_iter().map(|v| v / s).collect()
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &crate::linalg::dagger(m)).scale(0.5)
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` inside a pool sized by [`thread_cap`] (rayon's default otherwise).
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// `f(i, rng_i)` for `i in 0..count`, results in index order.
pub fn par_samples<T, F>(seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync + Send,
{
    with_pool(|| {
        (0..count)
            .into_par_iter()
            .map(|i| f(i, &mut sample_rng(seed, i as u64)))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;

    #[test]
    fn pure_states_are_normalised() {
        let mut rng = sample_rng(1, 0);
        for d in [1, 2, 7] {
            let v = haar_pure(d, &mut rng);
            assert!((v.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn mixed_states_are_valid() {
        let mut rng = sample_rng(2, 0);
        for d in [2, 4, 9] {
            let m = ginibre_mixed(d, &mut rng);
            let e = eigh(&m).unwrap();
            assert!(e.eigenvalues.iter().all(|&l| l > -1e-14));
            assert!((crate::linalg::trace(&m).re - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn hermitian_has_unit_norm() {
        let mut rng = sample_rng(3, 0);
        let h = random_hermitian_unit(5, &mut rng);
        assert!((operator_norm_hermitian(&h).unwrap() - 1.0).abs() < 1e-12);
        assert!(h.check_hermitian().is_ok());
    }

    #[test]
    fn samples_independent_of_thread_count() {
        let f = |_: usize, r: &mut ChaCha8Rng| r.random::<u64>();
        let a = par_samples(9, 64, f);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| par_samples(9, 64, f));
        assert_eq!(a, b);
        let direct: Vec<u64> = (0..64).map(|i| sample_rng(9, i).random()).collect();
        assert_eq!(a, direct);
    }

    #[test]
    fn simplex_points() {
        let p = random_distribution(6, &mut sample_rng(4, 0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14 && p.iter().all(|&x| x >= 0.0));
    }
}
