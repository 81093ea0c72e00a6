//! Sturm-sequence bisection for real symmetric tridiagonal matrices.
//!
//! This is the reference solver both continued-fraction routes are checked
//! against. It shares no code with them: counts come from the top-down
//! `LDLᵀ` pivots of `T − E`, brackets from Gershgorin discs.

use alloc::vec::Vec;

use crate::model::ChainCoefficients;
use crate::spectrum::{Level, Method, SpectrumApproximation};

/// Result of a Sturm count, with the number of zero pivots that had to be
/// nudged off zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SturmCount {
    pub below: usize,
    pub perturbed_pivots: usize,
}

/// Number of eigenvalues strictly below `energy`.
pub fn sturm_count(energy: f64, chain: &ChainCoefficients) -> usize {
    sturm_count_detailed(energy, chain).below
}

pub fn sturm_count_detailed(energy: f64, chain: &ChainCoefficients) -> SturmCount {
    let d = chain.diag();
    let e = chain.offdiag();
    let scale = d.iter().fold(energy.abs(), |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let nudge = f64::EPSILON * scale;

    let mut below = 0;
    let mut perturbed = 0;
    let mut pivot = 0.0;
    for i in 0..d.len() {
        pivot = if i == 0 {
            d[0] - energy
        } else {
            (d[i] - energy) - e[i - 1] * e[i - 1] / pivot
        };
        if pivot == 0.0 {
            // an exact zero pivot counts the eigenvalue at `energy` as not below
            pivot = nudge;
            perturbed += 1;
        }
        if pivot < 0.0 {
            below += 1;
        }
    }
    SturmCount { below, perturbed_pivots: perturbed }
}

/// The `k`-th smallest eigenvalue (0-based) by bisection to bracket width
/// below `tol`. Returns `(energy, final_width)`.
pub fn eigenvalue(chain: &ChainCoefficients, k: usize, tol: f64) -> (f64, f64) {
    assert!(k < chain.dim(), "eigenvalue index {k} out of range");
    let (lo, hi) = chain.gershgorin();
    let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    bisect(chain, k, lo - pad, hi + pad, tol)
}

fn bisect(chain: &ChainCoefficients, k: usize, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    // invariant: count(lo) <= k < count(hi)
    for _ in 0..2200 {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(mid, chain) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi), hi - lo)
}

/// The `first_k` smallest eigenvalues, each bisected to width below `tol`.
/// `gap` is the near-degeneracy threshold used to flag pairs.
pub fn eigenvalues(chain: &ChainCoefficients, first_k: usize, tol: f64, gap: f64) -> SpectrumApproximation {
    let k = first_k.min(chain.dim());
    let (glo, ghi) = chain.gershgorin();
    let pad = f64::EPSILON * glo.abs().max(ghi.abs()).max(1.0);
    let mut levels = Vec::with_capacity(k);
    let mut lo = glo - pad;
    for i in 0..k {
        let (energy, width) = bisect(chain, i, lo, ghi + pad, tol);
        // the next eigenvalue is not below the current bracket start
        lo = (energy - width).max(lo);
        levels.push(Level {
            index: i,
            energy,
            residual: width,
            parity: Some(chain.parity()),
            near_degenerate: false,
        });
    }
    SpectrumApproximation::new(Method::Oracle, Some(chain.parity()), chain.order(), levels, gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_chain, ModelParams, Parity, TruncationOrder};
    use proptest::prelude::*;

    fn fixture() -> ModelParams {
        ModelParams::new(1.0, 0.7, 0.4).unwrap()
    }

    #[test]
    fn gershgorin_extremes() {
        let c = build_chain(&fixture(), Parity::Plus, TruncationOrder(30));
        let dmin = c.diag().iter().cloned().fold(f64::INFINITY, f64::min);
        let dmax = c.diag().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let emax = c.offdiag().iter().cloned().fold(0.0, f64::max);
        assert_eq!(sturm_count(dmin - 2.0 * emax - 1e-9, &c), 0);
        assert_eq!(sturm_count(dmax + 2.0 * emax + 1e-9, &c), 31);
    }

    #[test]
    fn two_state_count() {
        let c = build_chain(&fixture(), Parity::Plus, TruncationOrder(1));
        assert_eq!(sturm_count(0.0, &c), 1);
    }

    #[test]
    fn diagonal_spectrum() {
        let p = ModelParams::new(1.0, 0.0, 0.4).unwrap();
        let c = build_chain(&p, Parity::Plus, TruncationOrder(10));
        let s = eigenvalues(&c, 3, 1e-13, 1e-10);
        for (e, w) in s.energies().iter().zip([0.4, 0.6, 2.4]) {
            assert!((e - w).abs() < 1e-12, "{e} vs {w}");
        }
    }

    #[test]
    fn displaced_oscillator_limit() {
        let p = ModelParams::new(1.0, 0.7, 0.0).unwrap();
        let c = build_chain(&p, Parity::Plus, TruncationOrder(300));
        let s = eigenvalues(&c, 5, 1e-11, 1e-10);
        for (n, e) in s.energies().iter().enumerate() {
            assert!((e - (n as f64 - 0.49)).abs() < 1e-8, "level {n}: {e}");
        }
    }

    #[test]
    fn parity_chains_coincide_without_splitting() {
        let p = ModelParams::new(1.0, 0.9, 0.0).unwrap();
        let a = eigenvalues(&build_chain(&p, Parity::Plus, TruncationOrder(80)), 8, 1e-11, 1e-10);
        let b = eigenvalues(&build_chain(&p, Parity::Minus, TruncationOrder(80)), 8, 1e-11, 1e-10);
        for (x, y) in a.energies().iter().zip(b.energies()) {
            assert!((x - y).abs() <= 2e-11);
        }
    }

    proptest! {
        #[test]
        fn count_is_monotone_and_matches_bisection(
            g in 0.05f64..1.5,
            delta in 0.0f64..1.0,
            n in 1usize..40,
            probes in proptest::collection::vec(-3.0f64..20.0, 1..12),
        ) {
            let p = ModelParams::new(1.0, g, delta).unwrap();
            let c = build_chain(&p, Parity::Minus, TruncationOrder(n));
            let all = eigenvalues(&c, n + 1, 1e-12, 1e-10).energies();
            let mut probes = probes;
            probes.sort_by(f64::total_cmp);
            let mut last = 0;
            for e in probes {
                let k = sturm_count(e, &c);
                prop_assert!(k >= last);
                last = k;
                // skip probes within bisection tolerance of an eigenvalue
                if all.iter().all(|x| (x - e).abs() > 1e-9) {
                    prop_assert_eq!(k, all.iter().filter(|x| **x < e).count());
                }
            }
        }

        #[test]
        fn eigenvalues_interlace(
            g in 0.05f64..1.5,
            delta in 0.0f64..1.0,
            n in 1usize..40,
        ) {
            let p = ModelParams::new(1.0, g, delta).unwrap();
            let big = build_chain(&p, Parity::Plus, TruncationOrder(n + 1));
            let small = big.truncate(TruncationOrder(n));
            let outer = eigenvalues(&big, n + 2, 1e-12, 1e-10).energies();
            let inner = eigenvalues(&small, n + 1, 1e-12, 1e-10).energies();
            for k in 0..inner.len() {
                prop_assert!(outer[k] <= inner[k] + 1e-11);
                prop_assert!(inner[k] <= outer[k + 1] + 1e-11);
            }
        }
    }
}
