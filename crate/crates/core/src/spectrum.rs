use alloc::vec::Vec;

use crate::model::{Parity, TruncationOrder};

/// Which route produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Schweber continued fraction `f0(E) = F_N(E)`.
    MethodA,
    /// Poles of the resolvent continued fraction `G0(E)`.
    MethodB,
    /// Sturm bisection on the truncated chain.
    Oracle,
    /// Oracle spectrum of a modified (pathological) chain.
    Pathological,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MethodA => "a",
            Method::MethodB => "b",
            Method::Oracle => "diag",
            Method::Pathological => "pathological",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub index: usize,
    pub energy: f64,
    /// Convergence witness of the producing method: `|f0 − F_N|` for method A,
    /// `|1/G0|` for method B, final bracket width for the oracle.
    pub residual: f64,
    /// Parity of the chain the level came from, when known.
    pub parity: Option<Parity>,
    /// Set on both members of a pair closer than the near-degeneracy gap.
    pub near_degenerate: bool,
}

/// Ascending list of approximate eigenvalues `E_n^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumApproximation {
    pub method: Method,
    pub parity: Option<Parity>,
    pub order: TruncationOrder,
    pub levels: Vec<Level>,
    /// Cut points where a sign change was seen but no root was reported
    /// (method A only).
    pub pole_candidates: Vec<f64>,
}

impl SpectrumApproximation {
    /// Sorts `levels`, renumbers them and flags pairs closer than `gap`.
    pub fn new(
        method: Method,
        parity: Option<Parity>,
        order: TruncationOrder,
        mut levels: Vec<Level>,
        gap: f64,
    ) -> Self {
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        for (i, level) in levels.iter_mut().enumerate() {
            level.index = i;
            level.near_degenerate = false;
        }
        for i in 1..levels.len() {
            if levels[i].energy - levels[i - 1].energy < gap {
                levels[i].near_degenerate = true;
                levels[i - 1].near_degenerate = true;
            }
        }
        Self { method, parity, order, levels, pole_candidates: Vec::new() }
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Keeps the lowest `k` levels.
    pub fn truncate(&mut self, k: usize) {
        self.levels.truncate(k);
    }

    /// Merges two spectra (typically the two parity chains) into one sorted list.
    pub fn union(a: &Self, b: &Self, gap: f64) -> Self {
        let mut levels = a.levels.clone();
        levels.extend_from_slice(&b.levels);
        let parity = if a.parity == b.parity { a.parity } else { None };
        let order = a.order.max(b.order);
        Self::new(a.method, parity, order, levels, gap)
    }
}
