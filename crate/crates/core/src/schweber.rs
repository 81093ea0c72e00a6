//! Bargmann-space (Schweber) continued fraction.
//!
//! Expanding the spin-up component around `z = −g/ω` gives coefficients that
//! obey `n K_n = f_{n−1}(E) K_{n−1} − K_{n−2}` with
//! `f_n(E) = 2g/ω + (nω − x + Δ²/(x − nω)) / 2g`, `x = E + g²/ω`.
//! Eigenvalues are the energies at which the seed `K_1 = f_0(E)` coincides with
//! the minimal solution, i.e. `f_0(E) = F_∞(E)`; truncating the recurrence
//! after `K_N` gives the finite condition `f_0(E) = F_N(E)` with
//! `F_N = 1/(f_1 − 2/(f_2 − … N/f_N))`.
//!
//! The condition depends on Δ only through Δ², so it cannot tell the two
//! parity chains apart: its roots are the union of both chain spectra.

use alloc::vec::Vec;

use crate::convergence::tail_depth_bound;
use crate::error::{Error, Result};
use crate::model::{shifted_energy, ModelParams, TruncationOrder};
use crate::search::{find_roots, Interval, SegmentedWindow};
use crate::spectrum::{Level, Method, SpectrumApproximation};
use crate::{DEFAULT_POLE_GUARD, DEN_FLOOR};

// power-of-two rescaling keeps ratios bit-exact
const RESCALE_EXP: i32 = 600;
const PAIR_RESCALE_EXP: i32 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Converged,
    HitPole,
    Overflow,
}

/// A finite continued fraction together with how its evaluation went.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfValue {
    pub value: f64,
    pub status: CfStatus,
    /// Number of partial-fraction levels used.
    pub depth: usize,
}

impl CfValue {
    pub fn converged(&self) -> Option<f64> {
        (self.status == CfStatus::Converged).then_some(self.value)
    }

    fn failed(status: CfStatus, depth: usize) -> Self {
        Self { value: f64::NAN, status, depth }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchweberCoefficient {
    pub n: usize,
    pub value: f64,
    pub at_pole: bool,
}

/// `f_n(E)` with the default pole guard `1e−9·ω`.
pub fn coeff_f(n: usize, energy: f64, params: &ModelParams) -> Result<SchweberCoefficient> {
    coeff_f_guarded(n, energy, params, DEFAULT_POLE_GUARD)
}

/// `f_n(E)`; `at_pole` is set when `|x(E) − nω| < guard·ω`.
pub fn coeff_f_guarded(
    n: usize,
    energy: f64,
    params: &ModelParams,
    guard: f64,
) -> Result<SchweberCoefficient> {
    let g = params.g();
    if g == 0.0 {
        return Err(Error::GZero);
    }
    let w = params.omega();
    let x = shifted_energy(params, energy);
    let detuning = x - n as f64 * w;
    if detuning.abs() < guard * w {
        return Ok(SchweberCoefficient { n, value: f64::NAN, at_pole: true });
    }
    let d2 = params.delta() * params.delta();
    let value = 2.0 * g / w + (-detuning + d2 / detuning) / (2.0 * g);
    Ok(SchweberCoefficient { n, value, at_pole: false })
}

fn f_value(n: usize, energy: f64, params: &ModelParams, guard: f64) -> Result<f64> {
    let c = coeff_f_guarded(n, energy, params, guard)?;
    if c.at_pole {
        Err(Error::PoleAt(n))
    } else {
        Ok(c.value)
    }
}

/// Coefficients `K_0..K_N` stored as mantissa and binary exponent, so that
/// ratios stay available far beyond the range of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    mantissas: Vec<f64>,
    exponents: Vec<i32>,
}

impl CoefficientSequence {
    fn with_capacity(n: usize) -> Self {
        Self { mantissas: Vec::with_capacity(n), exponents: Vec::with_capacity(n) }
    }

    fn push(&mut self, mantissa: f64, exponent: i32) {
        self.mantissas.push(mantissa);
        self.exponents.push(exponent);
    }

    pub fn len(&self) -> usize {
        self.mantissas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissas.is_empty()
    }

    /// `K_n` as an `f64`; may over- or underflow, unlike [`Self::ratio`].
    pub fn value(&self, n: usize) -> f64 {
        libm::scalbn(self.mantissas[n], self.exponents[n])
    }

    /// `K_n` expressed in units of `2^reference`.
    pub fn scaled(&self, n: usize, reference: i32) -> f64 {
        libm::scalbn(self.mantissas[n], self.exponents[n] - reference)
    }

    /// `K_{n+1} / K_n`.
    pub fn ratio(&self, n: usize) -> f64 {
        let e = self.exponents[n + 1] - self.exponents[n];
        libm::scalbn(self.mantissas[n + 1] / self.mantissas[n], e)
    }

    pub fn ratios(&self) -> Vec<f64> {
        (0..self.len().saturating_sub(1)).map(|n| self.ratio(n)).collect()
    }

    /// Largest relative defect `|nK_n − f_{n−1}K_{n−1} + K_{n−2}| / (|f_{n−1}K_{n−1}| + |K_{n−2}|)`
    /// over the stored range.
    pub fn recurrence_defect(&self, energy: f64, params: &ModelParams) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for n in 2..self.len() {
            let f = f_value(n - 1, energy, params, DEFAULT_POLE_GUARD)?;
            let r = self.exponents[n];
            let (k, k1, k2) = (self.scaled(n, r), self.scaled(n - 1, r), self.scaled(n - 2, r));
            let scale = (f * k1).abs() + k2.abs();
            if scale > 0.0 {
                worst = worst.max((n as f64 * k - f * k1 + k2).abs() / scale);
            }
        }
        Ok(worst)
    }
}

struct ScaledRecurrence {
    prev: f64,
    cur: f64,
    exp: i32,
}

impl ScaledRecurrence {
    fn rebalance(&mut self) {
        let m = self.prev.abs().max(self.cur.abs());
        if m > libm::scalbn(1.0, RESCALE_EXP) {
            self.prev = libm::scalbn(self.prev, -RESCALE_EXP);
            self.cur = libm::scalbn(self.cur, -RESCALE_EXP);
            self.exp += RESCALE_EXP;
        } else if m != 0.0 && m < libm::scalbn(1.0, -RESCALE_EXP) {
            self.prev = libm::scalbn(self.prev, RESCALE_EXP);
            self.cur = libm::scalbn(self.cur, RESCALE_EXP);
            self.exp -= RESCALE_EXP;
        }
    }
}

/// Runs `n K_n = f_{n−1} K_{n−1} − K_{n−2}` upward from `K_0 = 1, K_1 = k1`.
///
/// Forward evaluation follows the dominant solution: even at an eigenvalue,
/// rounding in `E` and `k1` lets the dominant component take over after a few
/// dozen terms. Use [`minimal_solution`] for the minimal one.
pub fn forward_recurrence(
    energy: f64,
    params: &ModelParams,
    order: TruncationOrder,
    k1: f64,
) -> Result<CoefficientSequence> {
    if params.g() == 0.0 {
        return Err(Error::GZero);
    }
    let n_max = order.n();
    let mut seq = CoefficientSequence::with_capacity(n_max + 1);
    seq.push(1.0, 0);
    if n_max == 0 {
        return Ok(seq);
    }
    seq.push(k1, 0);
    let mut st = ScaledRecurrence { prev: 1.0, cur: k1, exp: 0 };
    for n in 2..=n_max {
        let f = f_value(n - 1, energy, params, DEFAULT_POLE_GUARD)?;
        let next = (f * st.cur - st.prev) / n as f64;
        st.prev = st.cur;
        st.cur = next;
        st.rebalance();
        seq.push(st.cur, st.exp);
    }
    Ok(seq)
}

/// The minimal solution `K_n^min` (normalized to `K_0 = 1`) for `n ≤ N`.
///
/// Ratios `ξ_n = n K_n / K_{n−1}` come from the backward recurrence
/// `ξ_n = n / (f_n − ξ_{n+1})` started at depth `2N + 20` with `ξ = 0`;
/// the coefficients are then rebuilt upward from the ratios. `K_1^min` equals
/// `F_∞(E)` and does not involve `f_0`.
pub fn minimal_solution(
    energy: f64,
    params: &ModelParams,
    order: TruncationOrder,
) -> Result<CoefficientSequence> {
    if params.g() == 0.0 {
        return Err(Error::GZero);
    }
    let n_max = order.n();
    let depth = 2 * n_max + 20;
    let mut xi = alloc::vec![0.0; depth + 2];
    for n in (1..=depth).rev() {
        let den = f_value(n, energy, params, DEFAULT_POLE_GUARD)? - xi[n + 1];
        if den.abs() < DEN_FLOOR {
            return Err(Error::DegenerateDenominator { index: n });
        }
        xi[n] = n as f64 / den;
    }
    let mut seq = CoefficientSequence::with_capacity(n_max + 1);
    seq.push(1.0, 0);
    let mut st = ScaledRecurrence { prev: 0.0, cur: 1.0, exp: 0 };
    for n in 1..=n_max {
        let next = st.cur * xi[n] / n as f64;
        st.prev = st.cur;
        st.cur = next;
        st.rebalance();
        seq.push(st.cur, st.exp);
    }
    Ok(seq)
}

fn finite_cf_guarded(energy: f64, params: &ModelParams, order: TruncationOrder, guard: f64) -> Result<CfValue> {
    if params.g() == 0.0 {
        return Err(Error::GZero);
    }
    let n = order.n();
    if n == 0 {
        return Ok(CfValue { value: 0.0, status: CfStatus::Converged, depth: 0 });
    }
    let mut f = alloc::vec![0.0; n + 1];
    for (k, slot) in f.iter_mut().enumerate().skip(1) {
        let c = coeff_f_guarded(k, energy, params, guard)?;
        if c.at_pole {
            return Ok(CfValue::failed(CfStatus::HitPole, n));
        }
        *slot = c.value;
    }
    let mut t = f[n];
    for k in (1..n).rev() {
        if t.abs() < DEN_FLOOR {
            return Ok(CfValue::failed(CfStatus::Overflow, n));
        }
        t = f[k] - (k + 1) as f64 / t;
    }
    if t.abs() < DEN_FLOOR {
        return Ok(CfValue::failed(CfStatus::Overflow, n));
    }
    Ok(CfValue { value: 1.0 / t, status: CfStatus::Converged, depth: n })
}

/// `F_N(E) = 1/(f_1 − 2/(f_2 − … N/f_N))`, evaluated from the tail.
pub fn finite_cf(energy: f64, params: &ModelParams, order: TruncationOrder) -> Result<CfValue> {
    finite_cf_guarded(energy, params, order, DEFAULT_POLE_GUARD)
}

fn spectral_function_guarded(
    energy: f64,
    params: &ModelParams,
    order: TruncationOrder,
    guard: f64,
) -> Result<CfValue> {
    let f0 = coeff_f_guarded(0, energy, params, guard)?;
    let tail = finite_cf_guarded(energy, params, order, guard)?;
    if f0.at_pole {
        return Ok(CfValue::failed(CfStatus::HitPole, tail.depth));
    }
    if tail.status != CfStatus::Converged {
        return Ok(tail);
    }
    Ok(CfValue { value: f0.value - tail.value, status: CfStatus::Converged, depth: tail.depth })
}

/// `f_0(E) − F_N(E)`; its zeros approximate the spectrum.
pub fn spectral_function_a(energy: f64, params: &ModelParams, order: TruncationOrder) -> Result<CfValue> {
    spectral_function_guarded(energy, params, order, DEFAULT_POLE_GUARD)
}

/// Numerator and denominator of the `n`-th convergent, `F_n = a / b`.
///
/// Both follow `C_n = f_n C_{n−1} − n C_{n−2}` from `A_0 = 0, A_{−1} = 1`,
/// `B_0 = 1, B_{−1} = 0`. The pair is divided by powers of two whenever it grows
/// large; `rescale_exp` records the accumulated exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergentPair {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub rescale_exp: i32,
}

impl ConvergentPair {
    pub fn ratio(&self) -> f64 {
        self.a / self.b
    }
}

fn convergents_guarded(energy: f64, params: &ModelParams, n: usize, guard: f64) -> Result<ConvergentPair> {
    if params.g() == 0.0 {
        return Err(Error::GZero);
    }
    let (mut a_prev, mut a) = (1.0, 0.0);
    let (mut b_prev, mut b) = (0.0, 1.0);
    let mut exp = 0;
    for k in 1..=n {
        let f = f_value(k, energy, params, guard)?;
        // first partial numerator is +1, later ones −k
        let num = if k == 1 { -1.0 } else { k as f64 };
        let a_next = f * a - num * a_prev;
        let b_next = f * b - num * b_prev;
        a_prev = a;
        a = a_next;
        b_prev = b;
        b = b_next;
        let m = a.abs().max(b.abs());
        if m > libm::scalbn(1.0, PAIR_RESCALE_EXP) {
            a = libm::scalbn(a, -PAIR_RESCALE_EXP);
            b = libm::scalbn(b, -PAIR_RESCALE_EXP);
            a_prev = libm::scalbn(a_prev, -PAIR_RESCALE_EXP);
            b_prev = libm::scalbn(b_prev, -PAIR_RESCALE_EXP);
            exp += PAIR_RESCALE_EXP;
        }
    }
    Ok(ConvergentPair { a, b, n, rescale_exp: exp })
}

/// The `n`-th convergent pair; errors if some `f_k` (`1 ≤ k ≤ n`) is at a pole or
/// if `B_n` vanishes.
pub fn convergent_pair(energy: f64, params: &ModelParams, n: usize) -> Result<ConvergentPair> {
    let pair = convergents_guarded(energy, params, n, DEFAULT_POLE_GUARD)?;
    if pair.b == 0.0 || pair.b.abs() < DEN_FLOOR * pair.a.abs() {
        return Err(Error::DegenerateDenominator { index: n });
    }
    Ok(pair)
}

/// Pole-free form of the spectral condition, `(f_0 B_N − A_N) / hypot(A_N, B_N)`.
///
/// It has the zeros of [`spectral_function_a`] but none of the poles of `F_N`,
/// and stays bounded by `|f_0| + 1`. Returns `None` inside a pole guard.
pub fn regularized_spectral_function(
    energy: f64,
    params: &ModelParams,
    order: TruncationOrder,
    guard: f64,
) -> Result<Option<f64>> {
    let f0 = coeff_f_guarded(0, energy, params, guard)?;
    if f0.at_pole {
        return Ok(None);
    }
    match convergents_guarded(energy, params, order.n(), guard) {
        Ok(p) => Ok(Some((f0.value * p.b - p.a) / libm::hypot(p.a, p.b))),
        Err(Error::PoleAt(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Asymptotic type of a solution of the coefficient recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionClass {
    /// Ratios `K_{n+1}/K_n` tend to zero.
    MinimalLike,
    /// Ratios tend to `ω/2g`.
    DominantLike,
    Undetermined,
}

/// Classifies from the last ten ratios: dominant if all lie within 20 % of
/// `ω/2g`, minimal if they decrease strictly in magnitude and all stay below
/// `0.1·ω/2g`.
pub fn classify_solution(seq: &CoefficientSequence, params: &ModelParams) -> Result<SolutionClass> {
    const MIN_LEN: usize = 20;
    if seq.len() < MIN_LEN {
        return Err(Error::TooShort { len: seq.len(), min: MIN_LEN });
    }
    if params.g() == 0.0 {
        return Err(Error::GZero);
    }
    let limit = params.omega() / (2.0 * params.g());
    let last = seq.len() - 1;
    let ratios: Vec<f64> = (last - 10..last).map(|n| seq.ratio(n)).collect();
    if ratios.iter().any(|r| !r.is_finite()) {
        return Ok(SolutionClass::Undetermined);
    }
    if ratios.iter().all(|r| (r - limit).abs() <= 0.2 * limit) {
        return Ok(SolutionClass::DominantLike);
    }
    let decreasing = ratios.windows(2).all(|w| w[1].abs() < w[0].abs());
    if decreasing && ratios.iter().all(|r| r.abs() < 0.1 * limit) {
        return Ok(SolutionClass::MinimalLike);
    }
    Ok(SolutionClass::Undetermined)
}

/// Root-search settings for [`solve_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodAOptions {
    /// Pole guard around `x = nω`, in units of ω.
    pub eps_pole: f64,
    /// Sign-change samples per unit ω of window.
    pub samples_per_omega: usize,
    /// Bracket width at which refinement stops, in units of ω.
    pub tol: f64,
}

impl Default for MethodAOptions {
    fn default() -> Self {
        Self { eps_pole: DEFAULT_POLE_GUARD, samples_per_omega: 2000, tol: 1e-13 }
    }
}

/// Truncation order used when none is given: the larger of the tail-depth bound
/// at the largest `|E|` in the window, four times the number of levels, and 50.
pub fn default_order(params: &ModelParams, window: Interval, levels: usize) -> TruncationOrder {
    let e = window.lo.abs().max(window.hi.abs());
    TruncationOrder(tail_depth_bound(e, params).max(4 * levels).max(50))
}

/// Roots of `f_0(E) = F_N(E)` in `window`, lowest `max_levels` of them.
///
/// Refuses `g = 0` and `Δ = 0`. Sign changes are located on the pole-free form
/// of the condition, sampled between the cut points `x = kω`; cuts across which
/// the sign flips are listed as pole candidates. The residual of each level is
/// `|f_0 − F_N|` at the refined energy.
pub fn solve_spectrum(
    params: &ModelParams,
    order: TruncationOrder,
    window: Interval,
    max_levels: usize,
    opts: &MethodAOptions,
) -> Result<SpectrumApproximation> {
    if params.g() == 0.0 {
        return Err(Error::GZero);
    }
    if params.delta() == 0.0 {
        return Err(Error::SingularDelta);
    }
    let w = params.omega();
    let seg = SegmentedWindow::schweber(params, window, opts.eps_pole * w);
    let grid = libm::ceil(window.width() / w * opts.samples_per_omega as f64) as usize;
    let f = |e: f64| regularized_spectral_function(e, params, order, opts.eps_pole).ok().flatten();
    let (roots, scan) = find_roots(f, &seg, grid.max(2), opts.tol * w)?;

    let mut levels = Vec::with_capacity(roots.len());
    for e in roots.into_iter().take(max_levels) {
        let residual = spectral_function_guarded(e, params, order, opts.eps_pole)?
            .converged()
            .map_or(f64::INFINITY, f64::abs);
        levels.push(Level { index: 0, energy: e, residual, parity: None, near_degenerate: false });
    }
    let mut s = SpectrumApproximation::new(Method::MethodA, None, order, levels, 1e-10 * w);
    s.pole_candidates = scan.pole_candidates;
    Ok(s)
}
