use std::fs::File;
use std::io::{BufWriter, Write};

use rabi_cf::convergence::{compare_spectra, optimal_c, search_certificate, tail_depth_bound, tail_value};
use rabi_cf::pathological::{build_pathological, genuine_separation, PathologicalVariant};
use rabi_cf::resolvent::{poles_of_resolvent_with, ResolventOptions};
use rabi_cf::schweber::{self, MethodAOptions};
use rabi_cf::search::{detect_crossings, track_point, Interval, ScanParameter, ScanSpec};
use rabi_cf::{build_chain, tridiag, Error, ModelParams, Parity, SpectrumApproximation, TruncationOrder};
use rayon::prelude::*;

use crate::args::{
    BoundArgs, ChainArg, Command, CompareArgs, MethodArg, ModelArgs, OutputArgs, ParityArg, PathologicalArgs,
    ScanArgs, ScanParamArg, SolverArgs, SpectrumArgs, VariantArg,
};
use crate::output::{Cell, Table};
use crate::{Failure, EXIT_OK, EXIT_TOLERANCE};

/// Relative gap (times ω) below which two levels are flagged as near-degenerate.
const NEAR_DEGENERATE_GAP: f64 = 1e-10;

pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Spectrum(a) => spectrum(&a, out),
        Command::Compare(a) => compare(&a, out),
        Command::Pathological(a) => pathological(&a, out),
        Command::Bound(a) => bound(&a, out),
        Command::Scan(a) => scan(&a, out),
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::A => "a",
        MethodArg::B => "b",
        MethodArg::Diag => "diag",
    }
}

fn parity_name(p: ParityArg) -> &'static str {
    match p {
        ParityArg::Plus => "plus",
        ParityArg::Minus => "minus",
        ParityArg::Both => "both",
    }
}

fn chains(p: ParityArg) -> &'static [Parity] {
    match p {
        ParityArg::Plus => &[Parity::Plus],
        ParityArg::Minus => &[Parity::Minus],
        ParityArg::Both => &Parity::BOTH,
    }
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        let g = self.g.ok_or_else(|| Failure::usage("--g is required"))?;
        let delta = self.delta.ok_or_else(|| Failure::usage("--delta is required"))?;
        Ok(ModelParams::new(self.omega, g, delta)?)
    }
}

fn model_metadata(t: &mut Table, p: &ModelParams) {
    t.meta("omega", p.omega());
    t.meta("g", p.g());
    t.meta("delta", p.delta());
}

fn output_metadata(t: &mut Table, command: &str, o: &OutputArgs) {
    t.meta("command", command);
    t.meta("version", env!("CARGO_PKG_VERSION"));
    t.meta("deterministic", true);
    t.meta("seedless_flag", o.seedless);
}

/// `[−g²/ω − Δ − ω, (levels + 2)·ω]`: below the lowest level and above the
/// first `levels` levels in both the `g = 0` and `Δ = 0` limits.
pub fn default_window(p: &ModelParams, levels: usize) -> Interval {
    let w = p.omega();
    Interval::new(-p.polaron_shift() - p.delta() - w, (levels as f64 + 2.0) * w).expect("finite window")
}

pub struct SpectrumRun {
    pub spectrum: SpectrumApproximation,
    pub order: TruncationOrder,
    pub window: Interval,
    pub tol: f64,
    pub note: Option<&'static str>,
}

/// Lowest `levels` levels of the requested chain(s) from one solver.
pub fn compute_spectrum(
    p: &ModelParams,
    method: MethodArg,
    parity: ParityArg,
    levels: usize,
    order: Option<usize>,
    s: &SolverArgs,
) -> Result<SpectrumRun, Failure> {
    if levels == 0 {
        return Err(Failure::usage("--levels must be positive"));
    }
    if !(s.eps_pole > 0.0 && s.eps_pole < 1.0) {
        return Err(Failure::usage("--eps-pole must lie in (0, 1)"));
    }
    if s.samples < 2 {
        return Err(Failure::usage("--samples must be at least 2"));
    }
    if let Some(t) = s.solver_tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::usage("--solver-tol must be positive"));
        }
    }
    let window = match s.window {
        Some(w) => Interval::new(w.lo, w.hi)?,
        None => default_window(p, levels),
    };
    let order = match order {
        Some(0) => return Err(Failure::usage("--order must be at least 1")),
        Some(n) => TruncationOrder(n),
        None => schweber::default_order(p, window, levels),
    };
    let w = p.omega();
    let gap = NEAR_DEGENERATE_GAP * w;
    let mut note = None;
    let (spectrum, tol) = match method {
        MethodArg::A => {
            if p.g() == 0.0 {
                return Err(Failure::usage(
                    "method a needs g > 0 (its coefficients divide by 2g); use --method b or diag",
                ));
            }
            note = Some(if parity == ParityArg::Both {
                "method a does not resolve parity; levels of both chains are reported together"
            } else {
                "method a does not resolve parity; --parity is ignored and levels of both chains are reported"
            });
            let tol = s.solver_tol.unwrap_or(1e-13);
            let opts = MethodAOptions { eps_pole: s.eps_pole, samples_per_omega: s.samples, tol };
            let mut sp = schweber::solve_spectrum(p, order, window, levels, &opts)?;
            sp.truncate(levels);
            (sp, tol)
        }
        MethodArg::B => {
            let tol = s.solver_tol.unwrap_or(1e-13);
            let opts = ResolventOptions {
                samples_per_unit: (s.samples as f64 / w).ceil() as usize,
                tol: tol * w,
            };
            let mut parts = Vec::new();
            for &parity in chains(parity) {
                match poles_of_resolvent_with(&build_chain(p, parity, order), window, levels, &opts) {
                    Ok(sp) => parts.push(sp),
                    Err(Error::WindowEmpty) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            let sp = merge(parts, levels, gap).ok_or(Error::WindowEmpty)?;
            (sp, tol)
        }
        MethodArg::Diag => {
            let tol = s.solver_tol.unwrap_or(rabi_cf::DEFAULT_EIG_TOL);
            let parts = chains(parity)
                .iter()
                .map(|&parity| tridiag::eigenvalues(&build_chain(p, parity, order), levels, tol * w, gap))
                .collect();
            (merge(parts, levels, gap).expect("at least one chain"), tol)
        }
    };
    Ok(SpectrumRun { spectrum, order, window, tol, note })
}

fn merge(parts: Vec<SpectrumApproximation>, levels: usize, gap: f64) -> Option<SpectrumApproximation> {
    let mut it = parts.into_iter();
    let first = it.next()?;
    let mut sp = it.fold(first, |acc, s| SpectrumApproximation::union(&acc, &s, gap));
    sp.truncate(levels);
    Some(sp)
}

fn spectrum_metadata(t: &mut Table, prefix: &str, method: MethodArg, run: &SpectrumRun, s: &SolverArgs) {
    let key = |k: &str| format!("{prefix}{k}");
    t.meta(&key("method"), method_name(method));
    t.meta(&key("order"), run.order.n());
    t.meta(&key("solver_tol"), run.tol);
    match method {
        MethodArg::Diag => t.meta(&key("window"), "not used by diag"),
        _ => t.meta(&key("window"), format!("{},{}", run.window.lo, run.window.hi)),
    }
    if method == MethodArg::A {
        t.meta(&key("eps_pole"), s.eps_pole);
    }
    if method != MethodArg::Diag {
        t.meta(&key("samples_per_omega"), s.samples);
    }
    t.meta(&key("levels_found"), run.spectrum.len());
    if let Some(n) = run.note {
        t.meta(&key("note"), n);
    }
}

fn level_parity(l: &rabi_cf::Level) -> &'static str {
    l.parity.map_or("both", Parity::as_str)
}

fn spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = a.model.params()?;
    let run = compute_spectrum(&p, a.method, a.parity, a.levels, a.solver.order, &a.solver)?;

    let mut t = Table::new(&["index", "energy", "residual", "method", "order", "parity", "near_degenerate"]);
    output_metadata(&mut t, "spectrum", &a.output);
    model_metadata(&mut t, &p);
    t.meta("parity", parity_name(a.parity));
    t.meta("levels", a.levels);
    t.meta("near_degenerate_gap", NEAR_DEGENERATE_GAP * p.omega());
    spectrum_metadata(&mut t, "", a.method, &run, &a.solver);
    if !run.spectrum.pole_candidates.is_empty() {
        let list: Vec<String> = run.spectrum.pole_candidates.iter().map(|c| format!("{c:?}")).collect();
        t.meta("pole_candidates", list.join(" "));
        t.meta(
            "pole_candidates_note",
            "sign changes across x(E) = k*omega outside the eps_pole guard; candidate degeneracies by heuristic, not verified roots",
        );
    }
    for l in &run.spectrum.levels {
        t.push(vec![
            l.index.into(),
            l.energy.into(),
            l.residual.into(),
            method_name(a.method).into(),
            run.order.n().into(),
            level_parity(l).into(),
            l.near_degenerate.into(),
        ]);
    }
    t.write(a.output.format, out)?;
    Ok(EXIT_OK)
}

fn compare(a: &CompareArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = a.model.params()?;
    if a.m == 0 {
        return Err(Failure::usage("--m must be positive"));
    }
    if a.parity != ParityArg::Both && (a.first == MethodArg::A || a.second == MethodArg::A) {
        return Err(Failure::usage("method a yields both parities at once; compare with --parity both"));
    }
    let first = compute_spectrum(&p, a.first, a.parity, a.m, a.first_order.or(a.solver.order), &a.solver)?;
    let second = compute_spectrum(&p, a.second, a.parity, a.m, a.second_order.or(a.solver.order), &a.solver)?;
    let max = compare_spectra(&first.spectrum, &second.spectrum, a.m)?;
    let pass = max < a.tol;

    let mut t = Table::new(&["index", "first_energy", "second_energy", "deviation", "first_parity", "second_parity"]);
    output_metadata(&mut t, "compare", &a.output);
    model_metadata(&mut t, &p);
    t.meta("parity", parity_name(a.parity));
    t.meta("m", a.m);
    spectrum_metadata(&mut t, "first_", a.first, &first, &a.solver);
    spectrum_metadata(&mut t, "second_", a.second, &second, &a.solver);
    t.meta("tol", a.tol);
    t.meta("max_deviation", max);
    t.meta("pass", pass);
    for (x, y) in first.spectrum.levels.iter().zip(&second.spectrum.levels).take(a.m) {
        t.push(vec![
            x.index.into(),
            x.energy.into(),
            y.energy.into(),
            (x.energy - y.energy).abs().into(),
            level_parity(x).into(),
            level_parity(y).into(),
        ]);
    }
    t.write(a.output.format, out)?;
    Ok(if pass { EXIT_OK } else { EXIT_TOLERANCE })
}

fn pathological(a: &PathologicalArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = a.model.params()?;
    let parity = match a.parity {
        ChainArg::Plus => Parity::Plus,
        ChainArg::Minus => Parity::Minus,
    };
    let variant = match a.variant {
        VariantArg::Diag => PathologicalVariant::DiagOnly,
        VariantArg::DiagOffdiag => PathologicalVariant::DiagAndOffdiag,
    };
    let orders = a.sweep.as_ref().map_or_else(|| vec![a.order], |l| l.0.clone());
    if orders.is_empty() {
        return Err(Failure::usage("--sweep needs at least one order"));
    }

    let mut t = Table::new(&[
        "order",
        "e0",
        "variant",
        "modified_diag",
        "modified_offdiag",
        "tail_gn",
        "limit",
        "limit_distance",
        "offdiag_diagnostic",
        "separation",
        "residual_float",
        "residual_exact",
        "eigenvalues_near_e0",
        "planted",
    ]);
    output_metadata(&mut t, "pathological", &a.output);
    model_metadata(&mut t, &p);
    t.meta("parity", parity.as_str());
    t.meta("variant", variant.as_str());
    t.meta("e0", a.e0);
    t.meta("tol", a.tol);
    t.meta("min_separation", rabi_cf::pathological::MIN_SEPARATION);
    t.meta(
        "residual_note",
        "residual_exact repeats the construction in exact rational arithmetic; \
         eigenvalues_near_e0 counts eigenvalues of the stored chain within 1e-9*omega of e0",
    );

    let mut all_planted = true;
    let mut distances = Vec::with_capacity(orders.len());
    let limit = -p.omega() / (p.g() * p.g());
    for &n in &orders {
        let m = build_pathological(a.e0, &p, parity, TruncationOrder(n), variant)?;
        let r = m.planted_residual()?;
        let planted = r.exact < a.tol && r.eigenvalues_near == 1;
        all_planted &= planted;
        distances.push(m.limit_distance());
        t.push(vec![
            n.into(),
            a.e0.into(),
            variant.as_str().into(),
            m.modified_diag.into(),
            m.modified_offdiag.into(),
            m.tail.into(),
            limit.into(),
            m.limit_distance().into(),
            m.offdiag_diagnostic().into(),
            genuine_separation(a.e0, &m.base).into(),
            r.float.into(),
            r.exact.into(),
            r.eigenvalues_near.into(),
            planted.into(),
        ]);
    }
    if distances.len() > 1 {
        t.meta("distance_decreasing", distances.windows(2).all(|w| w[1] < w[0]));
        t.meta("distance_first_to_last_decreased", distances[distances.len() - 1] < distances[0]);
    }
    t.meta("all_planted", all_planted);
    t.write(a.output.format, out)?;
    Ok(if all_planted { EXIT_OK } else { EXIT_TOLERANCE })
}

fn bound(a: &BoundArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let p = a.model.params()?;
    if a.depth == 0 {
        return Err(Failure::usage("--depth must be positive"));
    }
    let n = tail_depth_bound(a.energy, &p);
    let j_max = a.j_max.unwrap_or(10 * n);
    if j_max < n {
        return Err(Failure::usage(format!("--j-max {j_max} is below the bound {n}")));
    }

    let mut t = Table::new(&[
        "parity",
        "energy",
        "bound",
        "c",
        "start_index",
        "verified_up_to",
        "holds",
        "margin",
        "product_unbounded",
        "tail_depth",
        "tail_value",
        "tail_value_double_depth",
        "tail_change",
        "tail_within_c",
    ]);
    output_metadata(&mut t, "bound", &a.output);
    model_metadata(&mut t, &p);
    t.meta("energy", a.energy);
    t.meta("bound", n);
    t.meta("j_max", j_max);
    t.meta("c_search", "log grid of 201 points over [g^2/omega, n*omega] plus the analytic optimum");
    if p.g() == 0.0 {
        t.meta("note", "g = 0: every tail numerator vanishes, the bound degenerates to 1 and c = min |b_j|");
    } else {
        t.meta("optimal_c", optimal_c(a.energy, &p));
    }
    t.meta("certificate_scope", "finite check over [bound, j_max]; applies to the tail only");

    let mut all_hold = true;
    for &parity in chains(a.parity) {
        let cert = search_certificate(a.energy, &p, parity, n, j_max)?;
        let v1 = tail_value(a.energy, &p, parity, n, a.depth)?;
        let v2 = tail_value(a.energy, &p, parity, n, 2 * a.depth)?;
        all_hold &= cert.holds;
        t.push(vec![
            parity.as_str().into(),
            a.energy.into(),
            n.into(),
            cert.c.into(),
            cert.start_index.into(),
            cert.verified_up_to.into(),
            cert.holds.into(),
            cert.margin.into(),
            cert.product_unbounded.into(),
            a.depth.into(),
            v1.value.into(),
            v2.value.into(),
            (v1.value - v2.value).abs().into(),
            (v1.value.abs() <= cert.c).into(),
        ]);
    }
    t.meta("all_hold", all_hold);
    t.write(a.output.format, out)?;
    Ok(if all_hold { EXIT_OK } else { EXIT_TOLERANCE })
}

fn scan(a: &ScanArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let parameter = match a.param {
        ScanParamArg::G => ScanParameter::G,
        ScanParamArg::Delta => ScanParameter::Delta,
    };
    // the scanned parameter may be omitted; the other one is required
    let g = match (parameter, a.model.g) {
        (_, Some(g)) => g,
        (ScanParameter::G, None) => a.from,
        (ScanParameter::Delta, None) => return Err(Failure::usage("--g is required when scanning delta")),
    };
    let delta = match (parameter, a.model.delta) {
        (_, Some(d)) => d,
        (ScanParameter::Delta, None) => a.from,
        (ScanParameter::G, None) => return Err(Failure::usage("--delta is required when scanning g")),
    };
    let base = ModelParams::new(a.model.omega, g, delta)?;
    if a.levels == 0 || a.order == 0 {
        return Err(Failure::usage("--levels and --order must be positive"));
    }
    let order = TruncationOrder(a.order);
    let spec = ScanSpec { parameter, from: a.from, to: a.to, steps: a.steps };
    spec.validate(&base)?;

    let track = spec
        .points()
        .par_iter()
        .map(|&v| track_point(&base, &spec, v, a.levels, order, a.solver_tol))
        .collect::<Result<Vec<_>, _>>()?;
    let events = detect_crossings(&base, &spec, order, &track)?;

    let w = base.omega();
    let max_dev = events.iter().map(|e| e.deviation / w).fold(0.0, f64::max);
    let pass = events.iter().all(|e| e.deviation < a.tol * w);

    let mut t = Table::new(&[
        "parameter",
        "value",
        "energy",
        "shifted_energy",
        "nearest_k",
        "deviation",
        "plus_level",
        "minus_level",
    ]);
    output_metadata(&mut t, "scan", &a.output);
    t.meta("omega", w);
    match parameter {
        ScanParameter::G => t.meta("delta", base.delta()),
        ScanParameter::Delta => t.meta("g", base.g()),
    }
    t.meta("param", parameter.as_str());
    t.meta("from", a.from);
    t.meta("to", a.to);
    t.meta("steps", a.steps);
    t.meta("levels", a.levels);
    t.meta("order", a.order);
    t.meta("solver_tol", a.solver_tol);
    t.meta("refinement", "bisection in the scanned parameter on E+ - E- with eigenvalue tol 1e-14*omega");
    t.meta("tol", a.tol);
    t.meta("events", events.len());
    t.meta("max_relative_deviation", max_dev);
    t.meta("pass", pass);
    for e in &events {
        t.push(vec![
            parameter.as_str().into(),
            e.value.into(),
            e.energy.into(),
            e.shifted.into(),
            e.nearest_multiple.into(),
            e.deviation.into(),
            e.plus_level.into(),
            e.minus_level.into(),
        ]);
    }
    t.write(a.output.format, out)?;

    if let Some(path) = &a.track_out {
        let mut tt = Table::new(&["value", "parity", "level", "energy"]);
        tt.meta("command", "scan-track");
        tt.meta("param", parameter.as_str());
        tt.meta("order", a.order);
        for pt in &track {
            for (parity, levels) in [(Parity::Plus, &pt.plus), (Parity::Minus, &pt.minus)] {
                for (k, e) in levels.iter().enumerate() {
                    tt.push(vec![pt.value.into(), parity.as_str().into(), k.into(), Cell::Float(*e)]);
                }
            }
        }
        let file = File::create(path).map_err(|e| Failure::usage(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        tt.write(a.output.format, &mut w)?;
        w.flush()?;
    }
    Ok(if pass { EXIT_OK } else { EXIT_TOLERANCE })
}
