//! Invariant suites behind `verify`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use berger_cgc::geometry::BergerParams;
use berger_cgc::phase::{energy_value, PhasePoint};
use berger_cgc::profile::{
    apply_symmetry, frobenius_residual, integrate, ode_residual, turning_point_defect,
    IntegrateOptions, ProfileState, Symmetry, Termination, Trajectory,
};
use berger_cgc::sphere::{build_sphere_with, half_length, samples_for_spacing, SphereOptions};
use berger_cgc::{DoubleDouble, Params64, Real};

use crate::commands::energy_budget;

/// The phase function under test; replaceable so that a corrupted version
/// can be checked to fail.
pub type EnergyFn = fn(&Params64, f64, PhasePoint<f64>) -> f64;

#[derive(Clone, Copy)]
pub struct VerifyOptions {
    pub tol: Option<f64>,
    pub energy: EnergyFn,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: None,
            energy: energy_value::<f64>,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub budget: f64,
    pub detail: String,
}

pub const PAIRS: [(f64, f64); 4] = [(0.75, 3.0), (0.5, 4.0), (2.0, 0.5), (1.0, 2.0)];

fn params(tau: f64) -> Params64 {
    BergerParams::new(tau).expect("suite parameters are valid")
}

fn sphere_options(tol: Option<f64>, samples: usize) -> SphereOptions<f64> {
    let mut o = SphereOptions::with_samples(samples);
    if let Some(t) = tol {
        o.rtol = t;
        o.atol = t * 1e-2;
    }
    o
}

fn suite(name: &'static str, value: f64, budget: f64, ok: bool, detail: String) -> SuiteResult {
    SuiteResult {
        name,
        passed: ok && value <= budget,
        value,
        budget,
        detail,
    }
}

fn energy(opts: &VerifyOptions) -> SuiteResult {
    let budget = energy_budget(opts.tol);
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for (tau, k) in PAIRS {
        match build_sphere_with(&params(tau), k, &sphere_options(opts.tol, 512)) {
            Ok(sol) => worst = worst.max(sol.profile.max_energy_drift),
            Err(e) => errors.push(format!("({tau}, {k}): {e}")),
        }
    }
    suite("energy", worst, budget, errors.is_empty(), errors.join("; "))
}

fn frobenius_at<T: Real>(tau: f64, k: f64, spacing: f64) -> Option<f64> {
    let p = BergerParams::new(T::of(tau)).ok()?;
    let k = T::of(k);
    let n = samples_for_spacing(T::lit(2) * half_length(&p, k).ok()?, T::of(spacing));
    let sol = build_sphere_with(&p, k, &SphereOptions::with_samples(n)).ok()?;
    frobenius_residual(&sol.profile).ok().map(|r| r.as_f64())
}

/// Residual at 1e-3 spacing and its reduction under halving, the latter in
/// double-double arithmetic where round-off stays below the truncation term.
fn frobenius() -> SuiteResult {
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    let mut ok = true;
    for (tau, k) in PAIRS {
        let plain = frobenius_at::<f64>(tau, k, 1e-3);
        let coarse = frobenius_at::<DoubleDouble>(tau, k, 1e-3);
        let fine = frobenius_at::<DoubleDouble>(tau, k, 5e-4);
        match (plain, coarse, fine) {
            (Some(r), Some(c), Some(f)) => {
                worst = worst.max(r);
                let ratio = c / f;
                ok &= ratio >= 3.0;
                ratios.push(format!("{ratio:.3}"));
            }
            _ => {
                ok = false;
                ratios.push("failed".into());
            }
        }
    }
    suite("frobenius", worst, 1e-5, ok, format!("halving ratios {}", ratios.join(" ")))
}

fn grid_run(p: &Params64, k: f64, init: ProfileState<f64>, s_end: f64) -> Option<Trajectory<f64>> {
    let opts = IntegrateOptions::until(s_end)
        .with_grid(0.0, 1e-3)
        .with_tol(1e-12, 1e-14);
    integrate(p, k, init, &opts).ok()
}

fn symmetry() -> SuiteResult {
    let mut worst = 0.0f64;
    let mut ok = true;
    let p = params(0.75);
    let k = 3.0;
    let turn = ProfileState::new(0.0, 0.5, 0.0, PI / 2.0);
    let (Some(fwd), Some(bwd)) = (grid_run(&p, k, turn, 0.8), grid_run(&p, k, turn, -0.8)) else {
        return suite("symmetry", f64::NAN, 1e-8, false, "integration failed".into());
    };
    let defect = turning_point_defect(&fwd, &bwd);
    let base = ode_residual(&fwd).unwrap_or(f64::NAN);
    for sym in [
        Symmetry::YTranslate(1.5),
        Symmetry::AlphaShift(1),
        Symmetry::Reverse(0.3),
        Symmetry::Reflect(0.0),
        Symmetry::TurningReflect(0.0),
    ] {
        match apply_symmetry(&fwd, sym).ok().and_then(|t| ode_residual(&t).ok()) {
            Some(r) => worst = worst.max((r - base).abs()),
            None => ok = false,
        }
    }
    // the level K (1 - lambda) runs into the pole circle
    let (tau, k, x0) = (1.5, 1.0, 1.0f64);
    let q = params(tau);
    let l = q.lambda();
    let xx = x0.sin().powi(2);
    let g = (1.0 - 2.0 * l * xx).powi(2) / (1.0 - l * xx) * (1.0 - xx);
    let ca = ((k * (1.0 - l) - k * (1.0 - l * xx) * xx) / g).sqrt();
    match grid_run(&q, k, ProfileState::new(0.0, x0, 0.0, ca.acos()), 5.0) {
        Some(run) if run.termination == Termination::BoundaryPole => {
            let b = ode_residual(&run).unwrap_or(f64::NAN);
            match apply_symmetry(&run, Symmetry::PoleContinue).ok().and_then(|t| ode_residual(&t).ok()) {
                Some(r) => worst = worst.max((r - b).abs()),
                None => ok = false,
            }
        }
        _ => ok = false,
    }
    ok &= defect <= 1e-7;
    suite(
        "symmetry",
        worst,
        1e-8,
        ok,
        format!("turning-point defect {defect:.2e} (budget 1e-7)"),
    )
}

fn route(opts: &VerifyOptions) -> SuiteResult {
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for (tau, k) in PAIRS {
        match build_sphere_with(&params(tau), k, &sphere_options(opts.tol, 512)) {
            Ok(sol) => worst = worst.max((sol.h - sol.h_profile).abs()),
            Err(e) => errors.push(format!("({tau}, {k}): {e}")),
        }
    }
    suite("route", worst, 1e-7, errors.is_empty(), errors.join("; "))
}

fn boundary(opts: &VerifyOptions) -> SuiteResult {
    let f = opts.energy;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let tau = rng.gen_range(0.1..3.0);
        let p = params(tau);
        let l = p.lambda();
        let k = rng.gen_range(0.0..8.0);
        let x = rng.gen_range(0.0..=1.0);
        let y = rng.gen_range(-1.0..=1.0);
        let at = |x, y| f(&p, k, PhasePoint { x, y });
        let errs = [
            at(0.0, 1.0) - 1.0,
            at(0.0, -1.0) - 1.0,
            at(0.0, y) - y * y,
            at(1.0, y) - k * (1.0 - l),
            at(x, 0.0) - k * (1.0 - l * x) * x,
            at(x, y) - at(x, -y),
        ];
        worst = errs.iter().fold(worst, |w, e| w.max(e.abs()));
        if l > 0.5 {
            worst = worst.max((at(1.0 / (2.0 * l), y) - k / (4.0 * l)).abs());
        }
    }
    suite("boundary", worst, 1e-12, true, String::new())
}

pub fn run_suites(opts: &VerifyOptions) -> Vec<SuiteResult> {
    vec![
        energy(opts),
        frobenius(),
        symmetry(),
        route(opts),
        boundary(opts),
    ]
}
