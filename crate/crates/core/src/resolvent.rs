//! Resolvent continued fraction of a truncated parity chain.
//!
//! With `b_j(E) = E − H_jj` and `a_j = H_{j−1,j}²`, the minors `M_j` of
//! `E − H` obtained by deleting the first `j` rows and columns obey
//! `det M_j = b_j det M_{j+1} − a_{j+1} det M_{j+2}`, and
//! `G_j = det M_{j+1} / det M_j` obeys `G_j = 1/(b_j − a_{j+1} G_{j+1})`.
//! `G_0 = ⟨0|(E − H)^{-1}|0⟩` has its poles at the chain eigenvalues.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::ChainCoefficients;
use crate::search::{bracket_roots, refine_root, Interval, SegmentedWindow};
use crate::spectrum::{Level, Method, SpectrumApproximation};
use crate::DEN_FLOOR;

const RESCALE_EXP: i32 = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventStatus {
    Converged,
    /// `|b_0 − a_1 G_1|` fell below the denominator floor.
    PoleHit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventValue {
    /// `G_0(E)`, in inverse energy units.
    pub value: f64,
    /// `1/G_0(E) = b_0 − a_1 G_1`; its zeros are the poles.
    pub reciprocal: f64,
    pub status: ResolventStatus,
}

/// `det M_j` for `j = 0..=N+1`, each stored as mantissa times `2^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolySequence {
    values: Vec<f64>,
    scale_exponents: Vec<i32>,
}

impl CharPolySequence {
    /// Index of the last stored minor, `N + 1` (the empty minor, equal to 1).
    pub fn last(&self) -> usize {
        self.values.len() - 1
    }

    pub fn mantissa(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn exponent(&self, j: usize) -> i32 {
        self.scale_exponents[j]
    }

    /// `det M_j` as an `f64`; may overflow where the mantissa does not.
    pub fn det(&self, j: usize) -> f64 {
        libm::scalbn(self.values[j], self.scale_exponents[j])
    }

    /// `det M_j` in units of `2^reference`.
    pub fn scaled(&self, j: usize, reference: i32) -> f64 {
        libm::scalbn(self.values[j], self.scale_exponents[j] - reference)
    }

    /// `det(E − H)`, the `j = 0` entry.
    pub fn determinant(&self) -> f64 {
        self.det(0)
    }

    /// `G_0 = det M_1 / det M_0`.
    pub fn resolvent(&self) -> f64 {
        let r = self.scale_exponents[0];
        self.scaled(1, r) / self.values[0]
    }
}

/// Downward minor recurrence with power-of-two rescaling. Calls `visit(j, det_j, exp)`
/// for `j = N+1` down to 0 and returns `(det_0, det_1)` in the shared final scale.
fn minors<F: FnMut(usize, f64, i32)>(energy: f64, chain: &ChainCoefficients, mut visit: F) -> (f64, f64) {
    let n = chain.order().n();
    // det_{j+1}, det_{j+2}
    let (mut d1, mut d2) = (1.0, 0.0);
    let mut exp = 0;
    visit(n + 1, 1.0, 0);
    for j in (0..=n).rev() {
        let a = if j < n { chain.numerator(j + 1) } else { 0.0 };
        let d = chain.shifted_diag(j, energy) * d1 - a * d2;
        d2 = d1;
        d1 = d;
        let m = d1.abs().max(d2.abs());
        if m > libm::scalbn(1.0, RESCALE_EXP) {
            d1 = libm::scalbn(d1, -RESCALE_EXP);
            d2 = libm::scalbn(d2, -RESCALE_EXP);
            exp += RESCALE_EXP;
        } else if m != 0.0 && m < libm::scalbn(1.0, -RESCALE_EXP) {
            d1 = libm::scalbn(d1, RESCALE_EXP);
            d2 = libm::scalbn(d2, RESCALE_EXP);
            exp -= RESCALE_EXP;
        }
        visit(j, d1, exp);
    }
    (d1, d2)
}

/// Characteristic minors of `E − H^{(N)}` from the seeds `det M_{N+1} = 1`,
/// `det M_{N+2} = 0`.
pub fn char_poly(energy: f64, chain: &ChainCoefficients) -> CharPolySequence {
    let len = chain.order().n() + 2;
    let mut values = alloc::vec![0.0; len];
    let mut scale_exponents = alloc::vec![0; len];
    minors(energy, chain, |j, d, e| {
        values[j] = d;
        scale_exponents[j] = e;
    });
    CharPolySequence { values, scale_exponents }
}

/// Sign of `det(E − H)`: −1, 0 or 1.
pub fn determinant_sign(energy: f64, chain: &ChainCoefficients) -> f64 {
    let (d0, _) = minors(energy, chain, |_, _, _| {});
    if d0 == 0.0 {
        0.0
    } else {
        d0.signum()
    }
}

/// `G_0^{(N)}(E)` by the backward recurrence from `G_N = 1/b_N(E)`.
///
/// An interior pole (`G_{j+1}` infinite for `j ≥ 0`) is passed through as its
/// exact limit `G_j = 0`; only a vanishing final denominator is reported as
/// [`ResolventStatus::PoleHit`].
pub fn resolvent_cf(energy: f64, chain: &ChainCoefficients) -> ResolventValue {
    let n = chain.order().n();
    // G_{j+1}; None stands for an infinite value
    let mut next: Option<f64> = Some(0.0);
    let mut reciprocal = 0.0;
    for j in (0..=n).rev() {
        let den = match next {
            Some(g) if j < n => chain.shifted_diag(j, energy) - chain.numerator(j + 1) * g,
            Some(_) => chain.shifted_diag(j, energy),
            None => f64::NEG_INFINITY,
        };
        if j == 0 {
            reciprocal = den;
            break;
        }
        next = if den.abs() < DEN_FLOOR { None } else { Some(1.0 / den) };
    }
    if reciprocal.abs() < DEN_FLOOR {
        return ResolventValue { value: f64::INFINITY, reciprocal, status: ResolventStatus::PoleHit };
    }
    let value = if reciprocal.is_infinite() { 0.0 } else { 1.0 / reciprocal };
    ResolventValue { value, reciprocal, status: ResolventStatus::Converged }
}

/// Pole-free companion of the reciprocal, `det M_0 / hypot(det M_0, det M_1)`.
///
/// It vanishes exactly where `1/G_0` does, carries the sign of the
/// characteristic determinant, and stays in `[−1, 1]`, so it can be sampled
/// and refined without the near-coincident zero/pole pairs of `1/G_0` itself.
pub fn regularized_reciprocal(energy: f64, chain: &ChainCoefficients) -> Option<f64> {
    let (d0, d1) = minors(energy, chain, |_, _, _| {});
    let h = libm::hypot(d0, d1);
    (h > 0.0).then(|| d0 / h)
}

/// Root-search settings for [`poles_of_resolvent_with`], in energy units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventOptions {
    /// Sign-change samples per unit energy.
    pub samples_per_unit: usize,
    /// Bracket width at which refinement stops.
    pub tol: f64,
}

impl Default for ResolventOptions {
    fn default() -> Self {
        Self { samples_per_unit: 2000, tol: 1e-13 }
    }
}

/// Poles of `G_0^{(N)}` in `window`, lowest `max_levels` of them, with default
/// search settings.
pub fn poles_of_resolvent(
    chain: &ChainCoefficients,
    window: Interval,
    max_levels: usize,
) -> Result<SpectrumApproximation> {
    poles_of_resolvent_with(chain, window, max_levels, &ResolventOptions::default())
}

/// Zeros of `1/G_0` in `window`. Sign changes of the characteristic
/// determinant bracket them; each bracket is refined with Brent's method on
/// [`regularized_reciprocal`] and kept only if the determinant changes sign
/// across the refined point's bracket. The residual is `|1/G_0|` there.
pub fn poles_of_resolvent_with(
    chain: &ChainCoefficients,
    window: Interval,
    max_levels: usize,
    opts: &ResolventOptions,
) -> Result<SpectrumApproximation> {
    let seg = SegmentedWindow::whole(window);
    let grid = libm::ceil(window.width() * opts.samples_per_unit as f64) as usize;
    let f = |e: f64| regularized_reciprocal(e, chain);
    let scan = bracket_roots(f, &seg, grid.max(2));

    let mut levels = Vec::new();
    for br in scan.brackets {
        if levels.len() == max_levels {
            break;
        }
        let verified = br.lo == br.hi || determinant_sign(br.lo, chain) * determinant_sign(br.hi, chain) < 0.0;
        if !verified {
            continue;
        }
        let (energy, _) = refine_root(f, br, opts.tol)?;
        let residual = resolvent_cf(energy, chain).reciprocal.abs();
        levels.push(Level { index: 0, energy, residual, parity: Some(chain.parity()), near_degenerate: false });
    }
    if levels.is_empty() {
        return Err(Error::WindowEmpty);
    }
    Ok(SpectrumApproximation::new(Method::MethodB, Some(chain.parity()), chain.order(), levels, 1e-10))
}
