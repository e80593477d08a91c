use std::f64::consts::FRAC_PI_2;

use anyhow::Result;
use rayon::prelude::*;

use berger_cgc::geometry::BergerParams;
use berger_cgc::mesh::build_mesh;
use berger_cgc::phase::{
    energy_value, level_one_connectivity, sphere_exists, trace_level_curve, Direction, LevelCurve,
    PhaseError, PhasePoint, TraceOptions,
};
use berger_cgc::sphere::{
    build_sphere_with, half_length, scan_embeddedness_boundary, vertical_radius,
    Embedding, SphereError, SphereOptions,
};
use berger_cgc::{Params64, SphereSolution64};

use crate::config::{Format, RunConfig};
use crate::output::{self, csv, num, tag, Polyline};
use crate::Failure;

/// Energy drift allowed in emitted profiles: 1e-8 at default tolerances,
/// growing with a looser integrator tolerance.
pub fn energy_budget(tol: Option<f64>) -> f64 {
    tol.map_or(1e-8, |t| (10.0 * t).max(1e-8))
}

fn params(tau: f64) -> Result<Params64> {
    BergerParams::new(tau).map_err(|e| Failure::Config(e.to_string()).into())
}

fn pairs(cfg: &RunConfig) -> Vec<(f64, f64)> {
    cfg.taus
        .iter()
        .flat_map(|&t| cfg.ks.iter().map(move |&k| (t, k)))
        .collect()
}

pub const DEFAULT_TAUS: [f64; 4] = [0.5, 0.75, 1.0, 2.0];

pub fn thresholds(cfg: &RunConfig) -> Result<()> {
    let taus = if cfg.taus.is_empty() {
        DEFAULT_TAUS.to_vec()
    } else {
        cfg.taus.clone()
    };
    let mut rows = Vec::new();
    println!("{:>10} {:>10} {:>10} {:>10}  Pogorelov gap", "tau", "lambda", "k0", "kP");
    for &tau in &taus {
        let p = params(tau)?;
        let gap = p.pogorelov_gap();
        println!(
            "{:>10} {:>10} {:>10} {:>10}  {}",
            tau,
            p.lambda(),
            p.k0(),
            p.kp(),
            gap.map_or("none".to_string(), |(a, b)| format!("{a} <= K <= {b}"))
        );
        rows.push(vec![
            num(tau),
            num(p.lambda()),
            num(p.k0()),
            num(p.kp()),
            gap.map_or(String::new(), |g| num(g.0)),
            gap.map_or(String::new(), |g| num(g.1)),
        ]);
    }
    if let Some(dir) = &cfg.out {
        if cfg.wants(Format::Csv) {
            let header = ["tau", "lambda", "k0", "kP", "gap_lo", "gap_hi"];
            output::write(&dir.join("thresholds.csv"), &csv(&header, &rows))?;
        }
    }
    Ok(())
}

/// Points of the rectangle boundary where `F = level`, walking the
/// perimeter with `n` samples per edge.
fn boundary_crossings(p: &Params64, k: f64, level: f64, n: usize) -> Vec<PhasePoint<f64>> {
    let at = |u: f64| -> PhasePoint<f64> {
        // perimeter parameter in [0, 4): X = 0 down, Y = -1 right, X = 1 up,
        // Y = 1 left
        let (e, t) = ((u.floor() as usize).min(3), u - u.floor().min(3.0));
        match e {
            0 => PhasePoint { x: 0.0, y: 1.0 - 2.0 * t },
            1 => PhasePoint { x: t, y: -1.0 },
            2 => PhasePoint { x: 1.0, y: -1.0 + 2.0 * t },
            _ => PhasePoint { x: 1.0 - t, y: 1.0 },
        }
    };
    let g = |u: f64| energy_value(p, k, at(u)) - level;
    let m = 4 * (n - 1);
    let us: Vec<f64> = (0..=m).map(|i| 4.0 * i as f64 / m as f64).collect();
    let gs: Vec<f64> = us.iter().map(|&u| g(u)).collect();
    let zero = |v: f64| v.abs() <= 1e-12;
    let mut out: Vec<PhasePoint<f64>> = Vec::new();
    let push = |q: PhasePoint<f64>, out: &mut Vec<PhasePoint<f64>>| {
        if !out.iter().any(|o| o.dist(&q) < 1e-9) {
            out.push(q);
        }
    };
    for i in 0..m {
        if zero(gs[i]) {
            // interior samples of an edge lying on the level are skipped
            let prev = if i == 0 { gs[m - 1] } else { gs[i - 1] };
            if !zero(prev) || !zero(gs[i + 1]) {
                push(at(us[i]), &mut out);
            }
        } else if !zero(gs[i + 1]) && gs[i].signum() != gs[i + 1].signum() {
            let (mut a, mut b, mut ga) = (us[i], us[i + 1], gs[i]);
            for _ in 0..100 {
                let c = 0.5 * (a + b);
                let gc = g(c);
                if gc.signum() == ga.signum() {
                    a = c;
                    ga = gc;
                } else {
                    b = c;
                }
            }
            push(at(0.5 * (a + b)), &mut out);
        }
    }
    out
}

struct Contours {
    curves: Vec<Polyline>,
    notes: Vec<String>,
}

fn trace_levels(p: &Params64, k: f64, levels: &[f64], n: usize) -> Contours {
    let opts = TraceOptions::default();
    let mut curves = Vec::new();
    let mut notes = Vec::new();
    for &level in levels {
        let mut found: Vec<LevelCurve<f64>> = Vec::new();
        for start in boundary_crossings(p, k, level, n) {
            let known = found.iter().any(|c| {
                c.points.first().is_some_and(|q| q.dist(&start) < 1e-6)
                    || c.points.last().is_some_and(|q| q.dist(&start) < 1e-6)
            });
            if known {
                continue;
            }
            let mut best: Option<LevelCurve<f64>> = None;
            for dir in [Direction::Forward, Direction::Backward] {
                let curve = match trace_level_curve(p, k, level, start, dir, &opts) {
                    Ok(c) => c,
                    Err(PhaseError::CriticalPoint { partial, x, y }) => {
                        notes.push(format!("level {level}: critical point near ({x:.6}, {y:.6})"));
                        *partial
                    }
                    Err(PhaseError::StepUnderflow { partial, x, y }) => {
                        notes.push(format!("level {level}: step underflow near ({x:.6}, {y:.6})"));
                        *partial
                    }
                    Err(e) => {
                        notes.push(format!("level {level}: {e}"));
                        continue;
                    }
                };
                if best.as_ref().is_none_or(|b| curve.points.len() > b.points.len()) {
                    best = Some(curve);
                }
            }
            if let Some(c) = best.filter(|c| c.points.len() > 2) {
                found.push(c);
            }
        }
        curves.extend(found.into_iter().map(|c| Polyline {
            level,
            bold: level == 1.0,
            points: c.points.iter().map(|q| (q.x, q.y)).collect(),
        }));
    }
    Contours { curves, notes }
}

fn contour_levels(fmin: f64, fmax: f64) -> Vec<f64> {
    let mut levels = vec![1.0];
    let n = 8;
    for i in 1..=n {
        let l = fmin + (fmax - fmin) * i as f64 / (n + 1) as f64;
        if (l - 1.0).abs() > 1e-6 {
            levels.push(l);
        }
    }
    levels
}

struct PhaseResult {
    tau: f64,
    k: f64,
    k0: f64,
    connected: bool,
    grid_csv: String,
    contour_csv: String,
    svg: String,
    notes: Vec<String>,
}

fn verdict(k: f64, k0: f64, connected: bool) -> &'static str {
    if (k - k0).abs() <= 1e-9 * k0.abs().max(1.0) {
        "boundary"
    } else if connected {
        "true"
    } else {
        "false"
    }
}

fn phase_one(tau: f64, k: f64, n: usize) -> Result<PhaseResult> {
    let p = params(tau)?;
    let mut rows = Vec::with_capacity(n * n);
    let (mut fmin, mut fmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let x = i as f64 / (n - 1) as f64;
        for j in 0..n {
            let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            let f = energy_value(&p, k, PhasePoint { x, y });
            fmin = fmin.min(f);
            fmax = fmax.max(f);
            rows.push(vec![num(x), num(y), num(f)]);
        }
    }
    let contours = trace_levels(&p, k, &contour_levels(fmin, fmax), n);
    let connected = level_one_connectivity(&p, k, &TraceOptions::default())
        .map(|c| c.connected)
        .unwrap_or(false);
    let mut crow = Vec::new();
    for c in &contours.curves {
        for (seq, (x, y)) in c.points.iter().enumerate() {
            crow.push(vec![num(c.level), seq.to_string(), num(*x), num(*y)]);
        }
    }
    Ok(PhaseResult {
        tau,
        k,
        k0: p.k0(),
        connected,
        grid_csv: csv(&["X", "Y", "F"], &rows),
        contour_csv: csv(&["level", "seq", "X", "Y"], &crow),
        svg: output::phase_svg(&format!("F for tau = {tau}, K = {k}"), &contours.curves),
        notes: contours.notes,
    })
}

pub fn phase(cfg: &RunConfig) -> Result<()> {
    let results: Vec<Result<PhaseResult>> = pairs(cfg)
        .into_par_iter()
        .map(|(tau, k)| phase_one(tau, k, cfg.grid))
        .collect();
    let dir = cfg.out_dir();
    let mut summary = Vec::new();
    println!("{:>8} {:>8} {:>10} {:>10}", "tau", "K", "k0", "connected");
    for r in results {
        let r = r?;
        let t = tag(r.tau, r.k);
        if cfg.wants(Format::Csv) {
            output::write(&dir.join(format!("phase_{t}.csv")), &r.grid_csv)?;
            output::write(&dir.join(format!("contour_{t}.csv")), &r.contour_csv)?;
        }
        if cfg.wants(Format::Svg) {
            output::write(&dir.join(format!("phase_{t}.svg")), &r.svg)?;
        }
        for note in &r.notes {
            eprintln!("tau = {}, K = {}: {note}", r.tau, r.k);
        }
        let v = verdict(r.k, r.k0, r.connected);
        println!("{:>8} {:>8} {:>10} {:>10}", r.tau, r.k, r.k0, v);
        let p = params(r.tau)?;
        summary.push(vec![
            num(r.tau),
            num(r.k),
            num(r.k0),
            v.to_string(),
            sphere_exists(&p, r.k).to_string(),
        ]);
    }
    if cfg.wants(Format::Csv) {
        let header = ["tau", "K", "k0", "connected", "sphere_exists"];
        output::write(&dir.join("phase_summary.csv"), &csv(&header, &summary))?;
    }
    Ok(())
}

enum SphereOutcome {
    Built(Box<SphereSolution64>),
    Pole { half: f64 },
    NoSphere { k0: f64 },
    Failed(String),
}

fn sphere_one(tau: f64, k: f64, cfg: &RunConfig) -> Result<SphereOutcome> {
    let p = params(tau)?;
    let mut opts = SphereOptions::with_samples(cfg.samples);
    if let Some(t) = cfg.tol {
        opts.rtol = t;
        opts.atol = t * 1e-2;
    }
    Ok(match build_sphere_with(&p, k, &opts) {
        Ok(sol) => SphereOutcome::Built(Box::new(sol)),
        Err(SphereError::NoSphere { k0, .. }) => SphereOutcome::NoSphere { k0 },
        Err(SphereError::PoleLimit { .. }) => SphereOutcome::Pole {
            half: half_length(&p, k).unwrap_or(f64::NAN),
        },
        Err(e) => SphereOutcome::Failed(e.to_string()),
    })
}

pub fn sphere(cfg: &RunConfig) -> Result<()> {
    let list = pairs(cfg);
    let outcomes: Vec<Result<SphereOutcome>> = list
        .par_iter()
        .map(|&(tau, k)| sphere_one(tau, k, cfg))
        .collect();
    let dir = cfg.out_dir();
    let budget = energy_budget(cfg.tol);
    let mut report = Vec::new();
    let mut missing = Vec::new();
    let mut failed = Vec::new();
    println!(
        "{:>8} {:>8} {:>20} {:>20} {:>10} {:>20}",
        "tau", "K", "r", "h", "embedded", "T"
    );
    for (&(tau, k), outcome) in list.iter().zip(outcomes) {
        let t = tag(tau, k);
        let k0 = params(tau)?.k0();
        match outcome? {
            SphereOutcome::Built(sol) => {
                let drift = sol.profile.max_energy_drift;
                if !(drift <= budget) {
                    failed.push(format!("tau = {tau}, K = {k}: energy drift {drift:e} exceeds {budget:e}"));
                    continue;
                }
                if cfg.wants(Format::Csv) {
                    let rows: Vec<Vec<String>> = sol
                        .profile
                        .states
                        .iter()
                        .enumerate()
                        .map(|(i, st)| {
                            vec![
                                num(st.s),
                                num(st.x),
                                num(st.y),
                                num(st.alpha),
                                num(sol.profile.energy_drift(i)),
                            ]
                        })
                        .collect();
                    let header = ["s", "x", "y", "alpha", "energy_drift"];
                    output::write(&dir.join(format!("profile_{t}.csv")), &csv(&header, &rows))?;
                }
                if cfg.wants(Format::Svg) {
                    let title = format!("profile for tau = {tau}, K = {k}");
                    output::write(
                        &dir.join(format!("profile_{t}.svg")),
                        &output::profile_svg(&title, &sol.profile.states),
                    )?;
                }
                if cfg.wants(Format::Obj) {
                    let mesh = build_mesh(&sol, cfg.n_t)?;
                    output::write(&dir.join(format!("mesh_{t}.obj")), &output::obj(&mesh, tau, k))?;
                }
                println!(
                    "{:>8} {:>8} {:>20} {:>20} {:>10} {:>20}",
                    tau,
                    k,
                    num(sol.r),
                    num(sol.h),
                    sol.embedded.as_str(),
                    num(sol.total_length)
                );
                report.push(vec![
                    num(tau),
                    num(k),
                    num(k0),
                    num(sol.r),
                    num(sol.h),
                    sol.embedded.as_str().into(),
                    num(sol.total_length),
                    "ok".into(),
                ]);
            }
            SphereOutcome::Pole { half } => {
                println!(
                    "{:>8} {:>8} {:>20} {:>20} {:>10} {:>20}  (reaches the pole; no profile)",
                    tau,
                    k,
                    num(FRAC_PI_2),
                    "inf",
                    Embedding::NotEmbedded.as_str(),
                    num(2.0 * half)
                );
                report.push(vec![
                    num(tau),
                    num(k),
                    num(k0),
                    num(FRAC_PI_2),
                    num(f64::INFINITY),
                    Embedding::NotEmbedded.as_str().into(),
                    num(2.0 * half),
                    "pole".into(),
                ]);
            }
            SphereOutcome::NoSphere { k0 } => {
                eprintln!("tau = {tau}, K = {k}: no sphere, K must be at least k0 = {k0}");
                missing.push(format!("tau = {tau}, K = {k} (k0 = {k0})"));
                report.push(vec![
                    num(tau),
                    num(k),
                    num(k0),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "no-sphere".into(),
                ]);
            }
            SphereOutcome::Failed(msg) => failed.push(format!("tau = {tau}, K = {k}: {msg}")),
        }
    }
    if cfg.wants(Format::Csv) {
        let header = ["tau", "K", "k0", "r", "h", "embedded", "T", "status"];
        output::write(&dir.join("sphere_report.csv"), &csv(&header, &report))?;
    }
    if !failed.is_empty() {
        return Err(Failure::Numerical(failed.join("; ")).into());
    }
    if !missing.is_empty() {
        return Err(Failure::NoSphere(missing.join("; ")).into());
    }
    Ok(())
}

struct RegionPoint {
    tau: f64,
    k: f64,
    h: Result<f64, String>,
}

pub fn embed_region(cfg: &RunConfig) -> Result<()> {
    let mut taus = cfg.taus.clone();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let mut ks = cfg.ks.clone();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let grid: Vec<(f64, f64)> = ks
        .iter()
        .flat_map(|&k| taus.iter().map(move |&t| (t, k)))
        .collect();
    let points: Vec<Option<RegionPoint>> = grid
        .par_iter()
        .map(|&(tau, k)| {
            let p = BergerParams::new(tau).ok()?;
            sphere_exists(&p, k).then(|| RegionPoint {
                tau,
                k,
                h: vertical_radius(&p, k).map_err(|e| e.to_string()),
            })
        })
        .collect();
    let skipped = points.iter().filter(|p| p.is_none()).count();

    let slices: Vec<(f64, Result<Vec<f64>, String>)> = ks
        .par_iter()
        .map(|&k| {
            let inside: Vec<f64> = taus
                .iter()
                .copied()
                .filter(|&t| BergerParams::new(t).is_ok_and(|p| sphere_exists(&p, k)))
                .collect();
            let roots = if inside.len() < 2 {
                Ok(Vec::new())
            } else {
                scan_embeddedness_boundary(k, &inside).map_err(|e| e.to_string())
            };
            (k, roots)
        })
        .collect();

    let mut rows = Vec::new();
    let mut dots = Vec::new();
    let mut failures = Vec::new();
    for pt in points.iter().flatten() {
        match &pt.h {
            Ok(h) => {
                let e = Embedding::from_height(*h);
                rows.push(vec![num(pt.tau), num(pt.k), num(*h), e.as_str().into()]);
                dots.push((pt.tau, pt.k, e != Embedding::Embedded));
            }
            Err(msg) => failures.push(format!("tau = {}, K = {}: {msg}", pt.tau, pt.k)),
        }
    }
    let mut brows = Vec::new();
    let mut line = Vec::new();
    println!("{:>10} {:>22} {:>12}  status", "K", "tau*", "|h - pi|");
    for (k, roots) in &slices {
        match roots {
            Ok(r) if r.is_empty() => {
                // the whole slice lies on one side of h = pi
                let status = points
                    .iter()
                    .flatten()
                    .filter(|p| p.k == *k)
                    .filter_map(|p| p.h.as_ref().ok())
                    .all(|h| *h < std::f64::consts::PI);
                let s = if status { "fully embedded" } else { "fully non-embedded" };
                println!("{:>10} {:>22} {:>12}  {s}", k, "-", "-");
                brows.push(vec![num(*k), String::new(), String::new(), s.into()]);
            }
            Ok(r) => {
                for &t in r {
                    let gap = params(t)
                        .ok()
                        .and_then(|p| vertical_radius(&p, *k).ok())
                        .map_or(f64::NAN, |h| (h - std::f64::consts::PI).abs());
                    println!("{:>10} {:>22} {:>12.3e}  boundary", k, num(t), gap);
                    brows.push(vec![num(*k), num(t), num(gap), "boundary".into()]);
                    line.push((t, *k));
                }
            }
            Err(msg) => failures.push(format!("K = {k}: {msg}")),
        }
    }
    if skipped > 0 {
        eprintln!("{skipped} grid points below k0 skipped");
    }
    let dir = cfg.out_dir();
    if cfg.wants(Format::Csv) {
        output::write(
            &dir.join("region.csv"),
            &csv(&["tau", "K", "h", "embedded"], &rows),
        )?;
        output::write(
            &dir.join("boundary.csv"),
            &csv(&["K", "tau_star", "abs_h_minus_pi", "status"], &brows),
        )?;
    }
    if cfg.wants(Format::Svg) {
        output::write(
            &dir.join("region.svg"),
            &output::plane_svg("embeddedness region (filled: not embedded)", &[line], &dots),
        )?;
    }
    if !failures.is_empty() {
        return Err(Failure::Numerical(failures.join("; ")).into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossings_of_level_one_include_corners() {
        let p = params(0.75).unwrap();
        let c = boundary_crossings(&p, 3.0, 1.0, 101);
        assert!(c.iter().any(|q| q.x == 0.0 && q.y == 1.0));
        assert!(c.iter().any(|q| q.x == 0.0 && q.y == -1.0));
        for q in &c {
            assert!((energy_value(&p, 3.0, *q) - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn level_one_is_bold_and_joins_corners() {
        let p = params(0.75).unwrap();
        let c = trace_levels(&p, 3.0, &[1.0], 101);
        let bold: Vec<_> = c.curves.iter().filter(|c| c.bold).collect();
        assert!(!bold.is_empty());
        let joined = bold.iter().any(|c| {
            let (a, b) = (c.points[0], *c.points.last().unwrap());
            let near = |q: (f64, f64), y: f64| q.0.abs() < 1e-6 && (q.1 - y).abs() < 1e-6;
            (near(a, 1.0) && near(b, -1.0)) || (near(a, -1.0) && near(b, 1.0))
        });
        assert!(joined);
    }

    #[test]
    fn budget_scales() {
        assert_eq!(energy_budget(None), 1e-8);
        assert_eq!(energy_budget(Some(1e-12)), 1e-8);
        assert_eq!(energy_budget(Some(1e-2)), 0.1);
    }
}
