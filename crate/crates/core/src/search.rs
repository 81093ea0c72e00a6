//! One-dimensional root localization around known singularities, and the
//! parameter scan that locates crossings between the two parity chains.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{build_chain, ModelParams, Parity, TruncationOrder};
use crate::tridiag;

/// Closed energy interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A window cut at known singular abscissae, minus a guard band around each.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedWindow {
    pub window: Interval,
    pub cut_points: Vec<f64>,
    pub guard: f64,
    pub segments: Vec<Interval>,
}

impl SegmentedWindow {
    pub fn new(window: Interval, mut cut_points: Vec<f64>, guard: f64) -> Self {
        cut_points.retain(|c| window.contains(*c));
        cut_points.sort_by(f64::total_cmp);
        cut_points.dedup();
        let mut segments = Vec::with_capacity(cut_points.len() + 1);
        let mut start = window.lo;
        for &c in &cut_points {
            if c - guard > start {
                segments.push(Interval { lo: start, hi: c - guard });
            }
            start = start.max(c + guard);
        }
        if window.hi > start {
            segments.push(Interval { lo: start, hi: window.hi });
        }
        Self { window, cut_points, guard, segments }
    }

    /// A window with no cuts.
    pub fn whole(window: Interval) -> Self {
        Self::new(window, Vec::new(), 0.0)
    }

    /// Method-A cuts: every `E = kω − g²/ω` inside the window.
    pub fn schweber(params: &ModelParams, window: Interval, guard: f64) -> Self {
        let w = params.omega();
        let shift = params.polaron_shift();
        let k_lo = libm::ceil((window.lo + shift) / w).max(0.0) as usize;
        let k_hi = libm::floor((window.hi + shift) / w);
        let mut cuts = Vec::new();
        if k_hi >= 0.0 {
            for k in k_lo..=(k_hi as usize) {
                cuts.push(k as f64 * w - shift);
            }
        }
        Self::new(window, cuts, guard)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BracketScan {
    pub brackets: Vec<Bracket>,
    /// Cut points across which the sampled function changed sign.
    pub pole_candidates: Vec<f64>,
}

/// Samples `f` on `grid` points spread over the segments (at least two per
/// segment, proportional to segment length) and returns every sign change.
/// Samples where `f` returns `None` are skipped. A sign change between the last
/// sample of one segment and the first of the next is reported as a pole
/// candidate at the cut between them.
pub fn bracket_roots<F>(f: F, seg: &SegmentedWindow, grid: usize) -> BracketScan
where
    F: Fn(f64) -> Option<f64>,
{
    let total: f64 = seg.segments.iter().map(Interval::width).sum();
    let mut out = BracketScan::default();
    let mut previous_tail: Option<(f64, f64)> = None;

    for s in &seg.segments {
        let share = if total > 0.0 { s.width() / total } else { 0.0 };
        let n = ((grid as f64 * share) as usize).max(2);
        let mut last: Option<(f64, f64)> = None;
        for i in 0..n {
            let x = if i + 1 == n {
                s.hi
            } else {
                s.lo + s.width() * (i as f64 / (n - 1) as f64)
            };
            let Some(y) = f(x).filter(|y| y.is_finite()) else {
                continue;
            };
            match last {
                Some((x0, y0)) => {
                    if y == 0.0 {
                        out.brackets.push(Bracket { lo: x, hi: x });
                    } else if y0 != 0.0 && (y0 < 0.0) != (y < 0.0) {
                        out.brackets.push(Bracket { lo: x0, hi: x });
                    }
                }
                None => {
                    if y == 0.0 {
                        out.brackets.push(Bracket { lo: x, hi: x });
                    }
                    if let Some((x0, y0)) = previous_tail {
                        if y0 != 0.0 && y != 0.0 && (y0 < 0.0) != (y < 0.0) {
                            let cut = seg
                                .cut_points
                                .iter()
                                .copied()
                                .find(|c| *c > x0 && *c < x)
                                .unwrap_or(0.5 * (x0 + x));
                            out.pole_candidates.push(cut);
                        }
                    }
                }
            }
            last = Some((x, y));
        }
        if last.is_some() {
            previous_tail = last;
        }
    }
    out
}

/// Brent refinement of a sign-changing bracket until its width drops below
/// `tol`. Returns the final bracket midpoint and `|f|` there.
pub fn refine_root<F>(f: F, bracket: Bracket, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Option<f64>,
{
    let eval = |x: f64| f(x).filter(|y| y.is_finite()).ok_or(Error::LostBracket { at: x });

    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = eval(a)?;
    if a == b || fa == 0.0 {
        return Ok((a, fa.abs()));
    }
    let mut fb = eval(b)?;
    if fb == 0.0 {
        return Ok((b, 0.0));
    }
    if (fa < 0.0) == (fb < 0.0) {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if (fb < 0.0) == (fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.25 * tol;
        let xm = 0.5 * (c - b);
        if (c - b).abs() < tol || xm.abs() <= tol1 || fb == 0.0 {
            break;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = eval(b)?;
    }
    let mid = if fb == 0.0 { b } else { 0.5 * (b + c) };
    let residual = if mid == b { fb.abs() } else { eval(mid)?.abs() };
    Ok((mid, residual))
}

/// Bracket and refine every root of `f` on a segmented window. Brackets whose
/// refined point has a larger `|f|` than both ends are treated as poles and
/// dropped.
pub fn find_roots<F>(f: F, seg: &SegmentedWindow, grid: usize, tol: f64) -> Result<(Vec<f64>, BracketScan)>
where
    F: Fn(f64) -> Option<f64>,
{
    let scan = bracket_roots(&f, seg, grid);
    let mut roots = Vec::with_capacity(scan.brackets.len());
    for br in &scan.brackets {
        let (x, r) = refine_root(&f, *br, tol)?;
        let ends = f(br.lo).unwrap_or(f64::INFINITY).abs().max(f(br.hi).unwrap_or(f64::INFINITY).abs());
        if br.lo == br.hi || r <= ends {
            roots.push(x);
        }
    }
    Ok((roots, scan))
}

/// Parameter swept by [`scan_crossings`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParameter {
    G,
    Delta,
}

impl ScanParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanParameter::G => "g",
            ScanParameter::Delta => "delta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub parameter: ScanParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl ScanSpec {
    pub fn validate(&self, base: &ModelParams) -> Result<()> {
        if !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::InvalidScan("range must be finite"));
        }
        if self.steps < 10 {
            return Err(Error::InvalidScan("at least 10 steps are required"));
        }
        let degenerate = match self.parameter {
            ScanParameter::G => base.delta() == 0.0,
            ScanParameter::Delta => self.from.min(self.to) <= 0.0 && self.from.max(self.to) >= 0.0,
        };
        if degenerate {
            return Err(Error::DegenerateScan);
        }
        Ok(())
    }

    /// Scan abscissae; a single point when the range is empty.
    pub fn points(&self) -> Vec<f64> {
        if self.from == self.to {
            return alloc::vec![self.from];
        }
        (0..=self.steps)
            .map(|s| self.from + (self.to - self.from) * (s as f64 / self.steps as f64))
            .collect()
    }

    pub fn params_at(&self, base: &ModelParams, value: f64) -> Result<ModelParams> {
        match self.parameter {
            ScanParameter::G => base.with_g(value),
            ScanParameter::Delta => base.with_delta(value),
        }
    }
}

/// Lowest levels of both parity chains at one scan point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoint {
    pub value: f64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

/// A crossing between level `plus_level` of the plus chain and level
/// `minus_level` of the minus chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    pub parameter: ScanParameter,
    pub value: f64,
    pub energy: f64,
    pub plus_level: usize,
    pub minus_level: usize,
    pub parities: (Parity, Parity),
    /// `x* = E* + g*²/ω`.
    pub shifted: f64,
    pub nearest_multiple: i64,
    /// `|x* − kω|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub events: Vec<CrossingEvent>,
    pub track: Vec<TrackPoint>,
}

/// Lowest `levels` oracle eigenvalues of both chains at one scan point.
pub fn track_point(
    base: &ModelParams,
    scan: &ScanSpec,
    value: f64,
    levels: usize,
    order: TruncationOrder,
    tol: f64,
) -> Result<TrackPoint> {
    let p = scan.params_at(base, value)?;
    let plus = tridiag::eigenvalues(&build_chain(&p, Parity::Plus, order), levels, tol * p.omega(), 0.0).energies();
    let minus = tridiag::eigenvalues(&build_chain(&p, Parity::Minus, order), levels, tol * p.omega(), 0.0).energies();
    Ok(TrackPoint { value, plus, minus })
}

fn gap_at(
    base: &ModelParams,
    scan: &ScanSpec,
    value: f64,
    pair: (usize, usize),
    order: TruncationOrder,
) -> Result<(f64, f64)> {
    let p = scan.params_at(base, value)?;
    let tol = 1e-14 * p.omega();
    let (ep, _) = tridiag::eigenvalue(&build_chain(&p, Parity::Plus, order), pair.0, tol);
    let (em, _) = tridiag::eigenvalue(&build_chain(&p, Parity::Minus, order), pair.1, tol);
    Ok((ep - em, 0.5 * (ep + em)))
}

/// Finds sign changes of `E_i^+ − E_j^−` between neighbouring track points,
/// refines each by bisection in the scanned parameter and records how far
/// `x* = E* + g*²/ω` lies from the nearest multiple of ω.
pub fn detect_crossings(
    base: &ModelParams,
    scan: &ScanSpec,
    order: TruncationOrder,
    track: &[TrackPoint],
) -> Result<Vec<CrossingEvent>> {
    let mut events: Vec<CrossingEvent> = Vec::new();
    let resolution = if scan.steps > 0 { (scan.to - scan.from).abs() / scan.steps as f64 } else { 0.0 };

    for w in track.windows(2) {
        let (p0, p1) = (&w[0], &w[1]);
        let levels = p0.plus.len().min(p0.minus.len()).min(p1.plus.len()).min(p1.minus.len());
        for i in 0..levels {
            for j in 0..levels {
                let h0 = p0.plus[i] - p0.minus[j];
                let h1 = p1.plus[i] - p1.minus[j];
                if h0 == 0.0 || (h0 < 0.0) == (h1 < 0.0) {
                    // exact zeros are picked up from the other side
                    if h0 != 0.0 || h1 == 0.0 {
                        continue;
                    }
                }
                let (mut a, mut b) = (p0.value, p1.value);
                let negative_at_a = h0 < 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid == a || mid == b || (b - a).abs() < 1e-13 * a.abs().max(1.0) {
                        break;
                    }
                    let (h, _) = gap_at(base, scan, mid, (i, j), order)?;
                    if h == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if (h < 0.0) == negative_at_a {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let value = 0.5 * (a + b);
                let (_, energy) = gap_at(base, scan, value, (i, j), order)?;
                let p = scan.params_at(base, value)?;
                let shifted = energy + p.polaron_shift();
                let k = libm::round(shifted / p.omega());
                let duplicate = events.iter().any(|ev| {
                    ev.plus_level == i && ev.minus_level == j && (ev.value - value).abs() <= resolution
                });
                if duplicate {
                    continue;
                }
                events.push(CrossingEvent {
                    parameter: scan.parameter,
                    value,
                    energy,
                    plus_level: i,
                    minus_level: j,
                    parities: (Parity::Plus, Parity::Minus),
                    shifted,
                    nearest_multiple: k as i64,
                    deviation: (shifted - k * p.omega()).abs(),
                });
            }
        }
    }
    events.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.energy.total_cmp(&b.energy)));
    Ok(events)
}

/// Tracks the lowest `levels` eigenvalues of both parity chains over the scan
/// and reports every crossing between levels of opposite parity.
pub fn scan_crossings(
    base: &ModelParams,
    scan: &ScanSpec,
    levels: usize,
    order: TruncationOrder,
) -> Result<ScanResult> {
    scan.validate(base)?;
    let track = scan
        .points()
        .into_iter()
        .map(|v| track_point(base, scan, v, levels, order, crate::DEFAULT_EIG_TOL))
        .collect::<Result<Vec<_>>>()?;
    let events = detect_crossings(base, scan, order, &track)?;
    Ok(ScanResult { events, track })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn linear(x: f64) -> Option<f64> {
        Some(x - 1.0)
    }

    #[test]
    fn single_bracket_for_linear_function() {
        let seg = SegmentedWindow::whole(Interval::new(0.0, 2.0).unwrap());
        let scan = bracket_roots(linear, &seg, 10);
        assert_eq!(scan.brackets.len(), 1);
        let b = scan.brackets[0];
        assert!(b.lo <= 1.0 && 1.0 <= b.hi);
    }

    #[test]
    fn no_sign_change_no_brackets() {
        let seg = SegmentedWindow::whole(Interval::new(0.0, 2.0).unwrap());
        let scan = bracket_roots(|x| Some(x * x + 1.0), &seg, 50);
        assert!(scan.brackets.is_empty());
        assert!(scan.pole_candidates.is_empty());
    }

    #[test]
    fn sign_change_across_cut_is_a_pole_candidate() {
        let seg = SegmentedWindow::new(Interval::new(0.0, 2.0).unwrap(), vec![1.0], 1e-9);
        assert_eq!(seg.segments.len(), 2);
        let scan = bracket_roots(|x| Some(1.0 / (x - 1.0)), &seg, 100);
        assert!(scan.brackets.is_empty());
        assert_eq!(scan.pole_candidates, vec![1.0]);
    }

    #[test]
    fn failed_samples_are_skipped() {
        let seg = SegmentedWindow::whole(Interval::new(0.0, 2.0).unwrap());
        let scan = bracket_roots(|x| if x > 0.3 && x < 0.5 { None } else { Some(x - 1.0) }, &seg, 21);
        assert_eq!(scan.brackets.len(), 1);
    }

    #[test]
    fn refine_linear() {
        let (x, r) = refine_root(linear, Bracket { lo: 0.0, hi: 2.0 }, 1e-12).unwrap();
        assert!((x - 1.0).abs() <= 1e-12);
        assert!(r <= 1e-12);
    }

    #[test]
    fn refine_odd_multiplicity() {
        let f = |x: f64| Some((x - 0.5) * (x - 0.5) * (x - 0.5));
        let (x, _) = refine_root(f, Bracket { lo: 0.0, hi: 2.0 }, 1e-10).unwrap();
        assert!((x - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn refine_reports_lost_bracket() {
        let f = |x: f64| if (x - 1.0).abs() < 0.1 { None } else { Some(x - 1.0) };
        assert!(matches!(
            refine_root(f, Bracket { lo: 0.0, hi: 2.0 }, 1e-12),
            Err(Error::LostBracket { .. })
        ));
    }

    #[test]
    fn refine_requires_sign_change() {
        assert!(matches!(
            refine_root(|x| Some(x * x + 1.0), Bracket { lo: 0.0, hi: 2.0 }, 1e-12),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn find_roots_drops_poles() {
        // tan-like: a pole at 1 and a root at 2 inside one segment
        let f = |x: f64| Some((x - 2.0) / (x - 1.0));
        let seg = SegmentedWindow::whole(Interval::new(0.1, 3.0).unwrap());
        let (roots, scan) = find_roots(f, &seg, 97, 1e-13).unwrap();
        assert_eq!(scan.brackets.len(), 2);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn schweber_cuts_lie_on_pole_lattice() {
        let p = ModelParams::new(1.0, 0.7, 0.4).unwrap();
        let seg = SegmentedWindow::schweber(&p, Interval::new(-1.0, 6.0).unwrap(), 1e-9);
        assert_eq!(seg.cut_points.len(), 7);
        for (k, c) in seg.cut_points.iter().enumerate() {
            assert!((c - (k as f64 - 0.49)).abs() < 1e-14);
        }
        for s in &seg.segments {
            for c in &seg.cut_points {
                assert!(s.hi <= c - 1e-9 + 1e-15 || s.lo >= c + 1e-9 - 1e-15);
            }
        }
    }

    #[test]
    fn scan_rejects_degenerate_chains() {
        let p = ModelParams::new(1.0, 0.5, 0.0).unwrap();
        let spec = ScanSpec { parameter: ScanParameter::G, from: 0.1, to: 1.0, steps: 20 };
        assert_eq!(scan_crossings(&p, &spec, 4, TruncationOrder(40)), Err(Error::DegenerateScan));
    }

    #[test]
    fn scan_rejects_too_few_steps() {
        let p = ModelParams::new(1.0, 0.5, 0.4).unwrap();
        let spec = ScanSpec { parameter: ScanParameter::G, from: 0.1, to: 1.0, steps: 5 };
        assert!(matches!(scan_crossings(&p, &spec, 4, TruncationOrder(40)), Err(Error::InvalidScan(_))));
    }

    #[test]
    fn empty_range_has_no_events() {
        let p = ModelParams::new(1.0, 0.5, 0.4).unwrap();
        let spec = ScanSpec { parameter: ScanParameter::G, from: 0.3, to: 0.3, steps: 10 };
        let r = scan_crossings(&p, &spec, 4, TruncationOrder(60)).unwrap();
        assert!(r.events.is_empty());
        assert_eq!(r.track.len(), 1);
    }

    #[test]
    fn short_scan_without_crossings() {
        let p = ModelParams::new(1.0, 0.05, 0.4).unwrap();
        let spec = ScanSpec { parameter: ScanParameter::G, from: 0.05, to: 0.1, steps: 20 };
        let r = scan_crossings(&p, &spec, 8, TruncationOrder(120)).unwrap();
        assert!(r.events.iter().all(|e| e.deviation < 1e-4));
    }

    #[test]
    fn first_juddian_crossing() {
        // the lowest crossing at Δ = 0.4 sits where x = ω, g = sqrt(0.21)
        let p = ModelParams::new(1.0, 0.4, 0.4).unwrap();
        let spec = ScanSpec { parameter: ScanParameter::G, from: 0.4, to: 0.5, steps: 20 };
        let r = scan_crossings(&p, &spec, 2, TruncationOrder(120)).unwrap();
        assert_eq!(r.events.len(), 1);
        let ev = r.events[0];
        assert_eq!(ev.nearest_multiple, 1);
        assert!((ev.value - libm::sqrt(0.21)).abs() < 1e-9, "{}", ev.value);
        assert!(ev.deviation < 1e-10);
    }

    proptest! {
        #[test]
        fn refine_stable_under_endpoint_jitter(root in 0.2f64..1.8, da in 0.0f64..0.15, db in 0.0f64..0.15) {
            let f = |x: f64| Some(libm::tanh(3.0 * (x - root)) + 0.1 * (x - root));
            let tol = 1e-12;
            let (x0, _) = refine_root(f, Bracket { lo: 0.0, hi: 2.0 }, tol).unwrap();
            let (x1, _) = refine_root(f, Bracket { lo: da, hi: 2.0 - db }, tol).unwrap();
            prop_assert!((x0 - x1).abs() < tol);
        }
    }
}
