//! Truncations that plant a fictitious pole.
//!
//! Running the resolvent recurrence upward, `G_{j+1} = b_j/a_{j+1} − 1/(a_{j+1} G_j)`,
//! from the pole condition `G_1(E_0) = b_0(E_0)/a_1` gives the tail `G_N(E_0)`
//! that the last diagonal entry would have to reproduce for `G_0` to have a
//! pole at `E_0`. Setting `H̃_NN = E_0 − 1/G_N(E_0)` does exactly that, while
//! every other entry of the chain stays untouched. For large `N` the tail tends
//! to `−ω/g²`, so the modification is a finite, innocuous-looking change of a
//! single matrix element.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{build_chain, ChainCoefficients, ModelParams, Parity, TruncationOrder};
use crate::resolvent::resolvent_cf;
use crate::spectrum::{Method, SpectrumApproximation};
use crate::tridiag;
use crate::DEN_FLOOR;

/// Minimum distance between the planted energy and every eigenvalue of the
/// unmodified chain.
pub const MIN_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathologicalVariant {
    /// Only `H̃_NN = E_0 − 1/G_N(E_0)`.
    DiagOnly,
    /// `H̃_NN = E_0 − N/G_N(E_0)` and `H̃_{N−1,N} = g·N`.
    DiagAndOffdiag,
}

impl PathologicalVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            PathologicalVariant::DiagOnly => "diag",
            PathologicalVariant::DiagAndOffdiag => "diag-offdiag",
        }
    }
}

/// `G_1(E_0), …, G_N(E_0)` from the upward recurrence seeded by the pole
/// condition at `E_0`. Element `k` holds `G_{k+1}`.
pub fn inverse_recurrence_sequence(e0: f64, chain: &ChainCoefficients) -> Result<Vec<f64>> {
    let n = chain.order().n();
    if n == 0 {
        return Err(Error::InvalidOrder { order: 0, min: 1 });
    }
    if chain.offdiag().contains(&0.0) {
        return Err(Error::GZero);
    }
    let mut out = Vec::with_capacity(n);
    let mut g = chain.shifted_diag(0, e0) / chain.numerator(1);
    out.push(g);
    for j in 1..n {
        if g.abs() < DEN_FLOOR {
            return Err(Error::DivergedTail { index: j });
        }
        let a = chain.numerator(j + 1);
        g = chain.shifted_diag(j, e0) / a - 1.0 / (a * g);
        out.push(g);
    }
    if !g.is_finite() {
        return Err(Error::DivergedTail { index: n });
    }
    Ok(out)
}

/// `G_N(E_0)` from the upward recurrence.
pub fn inverse_recurrence_tail(e0: f64, chain: &ChainCoefficients) -> Result<f64> {
    inverse_recurrence_sequence(e0, chain).map(|s| s[s.len() - 1])
}

/// A chain with its last entries rewritten so that `G_0` has a pole at
/// `target_energy`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedChain {
    pub params: ModelParams,
    pub base: ChainCoefficients,
    pub chain: ChainCoefficients,
    pub target_energy: f64,
    pub variant: PathologicalVariant,
    /// `G_N(E_0)` of the unmodified chain.
    pub tail: f64,
    /// New `H̃_NN`.
    pub modified_diag: f64,
    /// New `H̃_{N−1,N}`, for the variant that changes it.
    pub modified_offdiag: Option<f64>,
}

/// Planted-pole checks at `E_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedResidual {
    /// `|1/G̃_0(E_0)|` in floating point on the stored chain.
    pub float: f64,
    /// `|1/G̃_0(E_0)|` with the construction repeated in exact arithmetic.
    pub exact: f64,
    /// Eigenvalues of the stored chain within `±window` of `E_0`, by Sturm count.
    pub eigenvalues_near: usize,
    pub window: f64,
}

impl ModifiedChain {
    pub fn order(&self) -> TruncationOrder {
        self.chain.order()
    }

    /// `|G_N(E_0) + ω/g²|`, the distance of the tail from its large-`N` limit.
    pub fn limit_distance(&self) -> f64 {
        (self.tail + self.params.omega() / (self.params.g() * self.params.g())).abs()
    }

    /// `N·(G_N + ω/g²)`; the offdiagonal variant only yields a low-lying state
    /// when this stays bounded.
    pub fn offdiag_diagnostic(&self) -> Option<f64> {
        let w = self.params.omega() / (self.params.g() * self.params.g());
        (self.variant == PathologicalVariant::DiagAndOffdiag)
            .then(|| self.order().n() as f64 * (self.tail + w))
    }

    /// Verifies the planted pole three ways.
    ///
    /// The residue of the planted pole shrinks like the overlap of its
    /// eigenvector with state 0, which drops below `f64` resolution for chains
    /// longer than about 20 states: rounding `H̃_NN` by one ulp then moves the
    /// pole far enough that `1/G̃_0(E_0)` in floating point sees only the regular
    /// part. The exact evaluation repeats the construction without rounding;
    /// the Sturm count confirms that the stored matrix has an eigenvalue at
    /// `E_0` regardless of its overlap with state 0.
    pub fn planted_residual(&self) -> Result<PlantedResidual> {
        let e0 = self.target_energy;
        let window = 1e-9 * self.params.omega();
        let exact = exact_planted_reciprocal(e0, &self.params, self.chain.parity(), self.order(), self.variant)?;
        Ok(PlantedResidual {
            float: resolvent_cf(e0, &self.chain).reciprocal.abs(),
            exact: exact.abs(),
            eigenvalues_near: tridiag::sturm_count(e0 + window, &self.chain)
                - tridiag::sturm_count(e0 - window, &self.chain),
            window,
        })
    }

    /// Indices of the entries that differ from the base chain, as
    /// `(diagonal indices, offdiagonal indices)`.
    pub fn changed_entries(&self) -> (Vec<usize>, Vec<usize>) {
        let d = (0..self.chain.dim())
            .filter(|&j| self.chain.diag()[j].to_bits() != self.base.diag()[j].to_bits())
            .collect();
        let o = (0..self.chain.order().n())
            .filter(|&j| self.chain.offdiag()[j].to_bits() != self.base.offdiag()[j].to_bits())
            .collect();
        (d, o)
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// `1/G̃_0(E_0)` of the modified chain with the whole construction carried
/// out in exact rational arithmetic from the `f64` inputs `ω, g, Δ, E_0`:
/// `a_j = j g²`, the upward tail, the modified entries and the backward
/// evaluation. Zero means the construction plants the pole exactly.
pub fn exact_planted_reciprocal(
    e0: f64,
    params: &ModelParams,
    parity: Parity,
    order: TruncationOrder,
    variant: PathologicalVariant,
) -> Result<f64> {
    let n = order.n();
    if n == 0 {
        return Err(Error::InvalidOrder { order: 0, min: 1 });
    }
    if params.g() == 0.0 {
        return Err(Error::GZero);
    }
    let e = exact(e0);
    let w = exact(params.omega());
    let d = exact(params.delta());
    let g = exact(params.g());
    let g2 = &g * &g;
    let int = |k: usize| BigRational::from_integer(BigInt::from(k));
    let b = |j: usize| {
        let h = &w * int(j);
        let sign_plus = j.is_multiple_of(2) == (parity == Parity::Plus);
        let h = if sign_plus { h + &d } else { h - &d };
        &e - h
    };
    let a = |j: usize| &g2 * int(j);

    // upward tail G_N(E_0)
    let mut tail = b(0) / a(1);
    for j in 1..n {
        if tail.is_zero() {
            return Err(Error::DivergedTail { index: j });
        }
        let aj = a(j + 1);
        tail = b(j) / &aj - (&aj * &tail).recip();
    }
    if tail.is_zero() {
        return Err(Error::DivergedTail { index: n });
    }
    let (h_nn, a_n) = match variant {
        PathologicalVariant::DiagOnly => (&e - tail.recip(), a(n)),
        PathologicalVariant::DiagAndOffdiag => (&e - int(n) / &tail, &g2 * int(n) * int(n)),
    };

    // backward evaluation on the modified chain; None stands for an infinite G
    let mut next: Option<BigRational> = None;
    for j in (0..=n).rev() {
        let bj = if j == n { &e - &h_nn } else { b(j) };
        let den = if j == n {
            bj
        } else {
            let aj = if j + 1 == n { a_n.clone() } else { a(j + 1) };
            match next.take() {
                Some(gn) => bj - aj * gn,
                None if j == 0 => return Ok(f64::INFINITY),
                None => {
                    next = Some(BigRational::zero());
                    continue;
                }
            }
        };
        if j == 0 {
            return Ok(ratio_to_f64(&den));
        }
        next = if den.is_zero() { None } else { Some(den.recip()) };
    }
    unreachable!("loop returns at j = 0")
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or_else(|| {
        // huge or tiny: fall back to the ratio of leading bits
        let bits = |x: &BigInt| x.bits() as i64;
        let shift = bits(r.numer()) - bits(r.denom());
        libm::scalbn(if r.numer() < &BigInt::zero() { -1.0 } else { 1.0 }, shift as i32)
    })
}

/// Builds the modified truncation of order `order` planting a pole at `e0`.
///
/// Refuses `g = 0`, orders below 1, and energies within [`MIN_SEPARATION`] of
/// an eigenvalue of the unmodified chain.
pub fn build_pathological(
    e0: f64,
    params: &ModelParams,
    parity: Parity,
    order: TruncationOrder,
    variant: PathologicalVariant,
) -> Result<ModifiedChain> {
    if params.g() == 0.0 {
        return Err(Error::GZero);
    }
    if order.n() == 0 {
        return Err(Error::InvalidOrder { order: 0, min: 1 });
    }
    if !e0.is_finite() {
        return Err(Error::InvalidParameter { name: "e0", value: e0 });
    }
    let base = build_chain(params, parity, order);
    let separation = genuine_separation(e0, &base);
    if separation < MIN_SEPARATION {
        return Err(Error::PoleTooClose { energy: e0, separation });
    }
    let tail = inverse_recurrence_tail(e0, &base)?;
    let n = order.n();
    let mut diag = base.diag().to_vec();
    let mut offdiag = base.offdiag().to_vec();
    let modified_offdiag = match variant {
        PathologicalVariant::DiagOnly => {
            diag[n] = e0 - 1.0 / tail;
            None
        }
        PathologicalVariant::DiagAndOffdiag => {
            diag[n] = e0 - n as f64 / tail;
            offdiag[n - 1] = params.g() * n as f64;
            Some(offdiag[n - 1])
        }
    };
    let modified_diag = diag[n];
    let chain = ChainCoefficients::from_parts(parity, order, diag, offdiag);
    Ok(ModifiedChain {
        params: *params,
        base,
        chain,
        target_energy: e0,
        variant,
        tail,
        modified_diag,
        modified_offdiag,
    })
}

/// Distance from `e0` to the nearest eigenvalue of `chain`.
pub fn genuine_separation(e0: f64, chain: &ChainCoefficients) -> f64 {
    let below = tridiag::sturm_count(e0, chain);
    let tol = 1e-3 * MIN_SEPARATION;
    let mut d = f64::INFINITY;
    if below > 0 {
        d = d.min((e0 - tridiag::eigenvalue(chain, below - 1, tol).0).abs());
    }
    if below < chain.dim() {
        d = d.min((tridiag::eigenvalue(chain, below, tol).0 - e0).abs());
    }
    d
}

/// Lowest `first_k` eigenvalues of the modified chain by Sturm bisection.
pub fn pathological_spectrum(m: &ModifiedChain, first_k: usize, tol: f64) -> SpectrumApproximation {
    let mut s = tridiag::eigenvalues(&m.chain, first_k, tol, 1e-10 * m.params.omega());
    s.method = Method::Pathological;
    s
}
