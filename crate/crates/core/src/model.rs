//! Model parameters and truncated parity chains.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Couplings of the Rabi Hamiltonian, all in the same energy unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    omega: f64,
    g: f64,
    delta: f64,
}

impl ModelParams {
    /// Negative `g` or `delta` are replaced by their absolute values; the
    /// spectrum is invariant under either sign flip.
    pub fn new(omega: f64, g: f64, delta: f64) -> Result<Self> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::InvalidParameter { name: "omega", value: omega });
        }
        if !g.is_finite() {
            return Err(Error::InvalidParameter { name: "g", value: g });
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter { name: "delta", value: delta });
        }
        Ok(Self { omega, g: g.abs(), delta: delta.abs() })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(self.omega, g, self.delta)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.omega, self.g, delta)
    }

    /// `g²/ω`, the polaron shift.
    pub fn polaron_shift(&self) -> f64 {
        self.g * self.g / self.omega
    }
}

/// `x(E) = E + g²/ω`.
pub fn shifted_energy(params: &ModelParams, energy: f64) -> f64 {
    energy + params.polaron_shift()
}

/// One of the two invariant subspaces of the ℤ₂ symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Plus, Parity::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Plus => "plus",
            Parity::Minus => "minus",
        }
    }
}

/// Index of the last retained basis state; the chain has `n + 1` states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TruncationOrder(pub usize);

impl TruncationOrder {
    pub fn n(self) -> usize {
        self.0
    }

    pub fn dim(self) -> usize {
        self.0 + 1
    }
}

/// Real symmetric tridiagonal matrix of a truncated parity chain.
///
/// `diag[j] = jω ± (−1)^j Δ` and `offdiag[j - 1] = g√j` couples states
/// `j - 1` and `j`. Modified chains (see [`crate::pathological`]) reuse the
/// type with a few entries replaced.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCoefficients {
    parity: Parity,
    order: TruncationOrder,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl ChainCoefficients {
    pub(crate) fn from_parts(
        parity: Parity,
        order: TruncationOrder,
        diag: Vec<f64>,
        offdiag: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(diag.len(), order.dim());
        debug_assert_eq!(offdiag.len(), order.n());
        Self { parity, order, diag, offdiag }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn order(&self) -> TruncationOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries; element `k` couples states `k` and `k + 1`.
    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Continued-fraction numerator `a_j` (the squared matrix entry), `1 ≤ j ≤ N`.
    pub fn numerator(&self, j: usize) -> f64 {
        let e = self.offdiag[j - 1];
        e * e
    }

    /// `b_j(E) = E − H_jj`.
    pub fn shifted_diag(&self, j: usize, energy: f64) -> f64 {
        energy - self.diag[j]
    }

    /// Principal submatrix on the first `order + 1` states.
    pub fn truncate(&self, order: TruncationOrder) -> Self {
        let m = order.n().min(self.order.n());
        Self {
            parity: self.parity,
            order: TruncationOrder(m),
            diag: self.diag[..=m].to_vec(),
            offdiag: self.offdiag[..m].to_vec(),
        }
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }
}

/// Unperturbed diagonal entry `jω ± (−1)^j Δ` of a parity chain.
pub fn chain_diag(params: &ModelParams, parity: Parity, j: usize) -> f64 {
    let alternating = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    j as f64 * params.omega + parity.sign() * alternating * params.delta
}

/// Builds the projection of the Hamiltonian onto the first `order + 1` states
/// of a parity chain.
pub fn build_chain(params: &ModelParams, parity: Parity, order: TruncationOrder) -> ChainCoefficients {
    let n = order.n();
    let diag = (0..=n).map(|j| chain_diag(params, parity, j)).collect();
    let offdiag = (1..=n).map(|j| params.g * libm::sqrt(j as f64)).collect();
    ChainCoefficients { parity, order, diag, offdiag }
}
