//! Acceptance suite. Each criterion prints one PASS/FAIL line with the
//! measured quantity, its budget and the wall time; the test fails if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use berger_cgc::geometry::BergerParams;
use berger_cgc::phase::{energy_value, level_one_connectivity, sphere_exists, PhasePoint, TraceOptions};
use berger_cgc::profile::{
    apply_symmetry, cleared_residual, clifford_solution, embedding, frobenius_residual,
    fundamental_form, integrate, ode_residual, turning_point_defect, unit_speed_rates, Derivative,
    IntegrateOptions, ProfileState, Symmetry, Termination, Trajectory,
};
use berger_cgc::sphere::{
    build_sphere, embeddedness_boundary, half_length, samples_for_spacing, sin2_horizontal_radius,
    vertical_radius,
};
use berger_cgc::{DoubleDouble, Real};

const PAIRS: [(f64, f64); 4] = [(0.75, 3.0), (0.5, 4.0), (2.0, 0.5), (1.0, 2.0)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "criterion {id:>2} {:<28} {}  {} [{:.2?} of {:.0?}]",
        name,
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed,
        budget
    );
    pass
}

fn params(tau: f64) -> BergerParams<f64> {
    BergerParams::new(tau).unwrap()
}

fn thresholds() -> Outcome {
    let taus = [Rational64::new(1, 2), Rational64::new(3, 4), Rational64::from(1), Rational64::from(2)];
    let k0 = [3.25, 2.3125, 1.0, 0.25];
    let kp = [3.25, 2.3125, 1.0, 4.0];
    let mut pass = true;
    for (i, tau) in taus.iter().enumerate() {
        let exact = BergerParams::new(*tau).unwrap();
        let float = params(*tau.numer() as f64 / *tau.denom() as f64);
        // exact rationals against the closed form, then f64 bit-for-bit
        let (ek0, ekp) = (exact.k0(), exact.kp());
        pass &= *ek0.numer() as f64 / *ek0.denom() as f64 == k0[i];
        pass &= *ekp.numer() as f64 / *ekp.denom() as f64 == kp[i];
        pass &= float.k0().to_bits() == k0[i].to_bits();
        pass &= float.kp().to_bits() == kp[i].to_bits();
    }
    Outcome {
        pass,
        detail: format!("k0 = {k0:?}, kP = {kp:?}"),
    }
}

fn boundary_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 10_000;
    let mut worst = [0.0f64; 4];
    for _ in 0..n {
        let tau = rng.gen_range(0.1..3.0);
        let p = params(tau);
        let l = p.lambda();
        let k = rng.gen_range(0.0..8.0);
        let x = rng.gen_range(0.0..=1.0);
        let y = rng.gen_range(-1.0..=1.0);
        let f = |x, y| energy_value(&p, k, PhasePoint { x, y });
        worst[0] = worst[0].max((f(0.0, 1.0) - 1.0).abs()).max((f(0.0, -1.0) - 1.0).abs());
        worst[1] = worst[1].max((f(1.0, y) - k * (1.0 - l)).abs());
        worst[2] = worst[2].max((f(x, 0.0) - k * (1.0 - l * x) * x).abs());
        // lambda > 1/2 needs tau < 1/sqrt(2)
        let tau_small = rng.gen_range(0.05..0.7);
        let q = params(tau_small);
        let lq = q.lambda();
        let v = energy_value(&q, k, PhasePoint { x: 1.0 / (2.0 * lq), y });
        worst[3] = worst[3].max((v - k / (4.0 * lq)).abs());
    }
    Outcome {
        pass: worst.iter().all(|w| *w <= 1e-12),
        detail: format!(
            "max errors {:.1e} {:.1e} {:.1e} {:.1e} <= 1e-12 on {n} points each",
            worst[0], worst[1], worst[2], worst[3]
        ),
    }
}

fn existence() -> Outcome {
    let opts = TraceOptions::default();
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for i in 0..20 {
        let tau = 0.4 + 2.1 * i as f64 / 19.0;
        let p = params(tau);
        for j in 0..20 {
            let k = 0.1 + 5.9 * j as f64 / 19.0;
            if (k - p.k0()).abs() < 1e-3 {
                continue;
            }
            checked += 1;
            let connected = level_one_connectivity(&p, k, &opts)
                .map(|c| c.connected)
                .unwrap_or(false);
            if connected != sphere_exists(&p, k) {
                mismatches.push((tau, k));
            }
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!("{checked} grid points, mismatches {mismatches:?}"),
    }
}

fn energy_conservation() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    for (tau, k) in PAIRS {
        match build_sphere(&params(tau), k, 512) {
            Ok(sol) => {
                for st in &sol.profile.states {
                    let e = berger_cgc::profile::energy(&sol.params, k, st);
                    worst = worst.max((e - 1.0).abs());
                }
            }
            Err(_) => ok = false,
        }
    }
    Outcome {
        pass: ok && worst <= 1e-8,
        detail: format!("max |E - 1| = {worst:.2e} <= 1e-8"),
    }
}

fn frobenius_at<T: Real>(tau: f64, k: f64, spacing: f64) -> Option<f64> {
    let p = BergerParams::new(T::of(tau)).ok()?;
    let k = T::of(k);
    let total = T::lit(2) * half_length(&p, k).ok()?;
    let n = samples_for_spacing(total, T::of(spacing));
    let sol = build_sphere(&p, k, n).ok()?;
    frobenius_residual(&sol.profile).ok().map(|r| r.as_f64())
}

fn frobenius() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (tau, k) in PAIRS {
        let coarse = frobenius_at::<DoubleDouble>(tau, k, 1e-3);
        let fine = frobenius_at::<DoubleDouble>(tau, k, 5e-4);
        let plain = frobenius_at::<f64>(tau, k, 1e-3);
        match (coarse, fine) {
            (Some(c), Some(f)) => {
                let ratio = c / f;
                pass &= c <= 1e-5 && ratio >= 3.0;
                parts.push(format!(
                    "({tau},{k}) {c:.2e} ratio {ratio:.3} [f64 {:.2e}]",
                    plain.unwrap_or(f64::NAN)
                ));
            }
            _ => {
                pass = false;
                parts.push(format!("({tau},{k}) build failed"));
            }
        }
    }
    Outcome {
        pass,
        detail: format!("double-double, residual <= 1e-5, ratio >= 3: {}", parts.join("; ")),
    }
}

fn route_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    for (tau, k) in PAIRS {
        let p = params(tau);
        match (vertical_radius(&p, k), build_sphere(&p, k, 512)) {
            (Ok(h), Ok(sol)) => {
                let last = sol.profile.states.len() - 1;
                let span = (sol.profile.states[last].y - sol.profile.states[0].y) / 2.0;
                worst = worst.max((h - span).abs()).max((h - sol.h_profile).abs());
            }
            _ => ok = false,
        }
    }
    Outcome {
        pass: ok && worst <= 1e-7,
        detail: format!("max |h - y-span/2| = {worst:.2e} <= 1e-7"),
    }
}

fn embeddedness() -> Outcome {
    let h1 = vertical_radius(&params(0.1), 5.0).unwrap_or(f64::NAN);
    let h2 = vertical_radius(&params(0.2), 5.0).unwrap_or(f64::NAN);
    let (root, gap) = match embeddedness_boundary(5.0, 0.1, 0.2) {
        Ok(t) => (t, (vertical_radius(&params(t), 5.0).unwrap_or(f64::NAN) - PI).abs()),
        Err(_) => (f64::NAN, f64::NAN),
    };
    Outcome {
        pass: h1 > PI && h2 < PI && root > 0.1 && root < 0.2 && gap <= 1e-8,
        detail: format!("h(0.1) = {h1:.6}, h(0.2) = {h2:.6}, tau* = {root:.10}, |h - pi| = {gap:.1e}"),
    }
}

fn radius() -> Outcome {
    let round = sin2_horizontal_radius(&params(1.0), 4.0).unwrap_or(f64::NAN);
    let pole = sin2_horizontal_radius(&params(2.0), 0.25).unwrap_or(f64::NAN);
    // exact oracle: (1 / (2 lambda)) (1 - sqrt(1 - 4 lambda / K)) at lambda = -3,
    // K = 1/4 is (-1/6)(1 - 7) = 1
    let oracle = {
        let l = Rational64::from(-3);
        let inside = Rational64::from(1) - Rational64::from(4) * l / Rational64::new(1, 4);
        assert_eq!(inside, Rational64::from(49));
        (Rational64::from(1) - Rational64::from(7)) / (Rational64::from(2) * l)
    };
    let tau_small = (1.0f64 - 1e-10).sqrt();
    let p = params(tau_small);
    let cont = (sin2_horizontal_radius(&p, 4.0).unwrap_or(f64::NAN) - 0.25).abs();
    Outcome {
        pass: round == 0.25 && oracle == Rational64::from(1) && (pole - 1.0).abs() <= 1e-12 && cont <= 1e-8,
        detail: format!(
            "sin^2 r(round, 4) = {round}, sin^2 r(2, 1/4) = {pole:.17}, continuity gap {cont:.1e} at lambda = {:.1e}",
            p.lambda()
        ),
    }
}

fn residual_gap(orig: f64, t: &Trajectory<f64>) -> f64 {
    (ode_residual(t).unwrap_or(f64::NAN) - orig).abs()
}

fn symmetries() -> Outcome {
    let mut worst = 0.0f64;
    let mut names = Vec::new();

    // a sphere half from its turning point, forward and backward
    let (tau, k) = (0.75, 3.0);
    let p = params(tau);
    let sol = build_sphere(&p, k, 1025).unwrap();
    let mid = sol.midpoint;
    let spacing = 1e-3;
    let span = 1.0;
    let fwd = integrate(
        &p,
        k,
        ProfileState::new(0.0, mid.x, 0.0, mid.alpha),
        &IntegrateOptions::until(span).with_grid(0.0, spacing).with_tol(1e-12, 1e-14),
    )
    .unwrap();
    let bwd = integrate(
        &p,
        k,
        ProfileState::new(0.0, mid.x, 0.0, mid.alpha),
        &IntegrateOptions::until(-span).with_grid(0.0, spacing).with_tol(1e-12, 1e-14),
    )
    .unwrap();
    let turning = turning_point_defect(&fwd, &bwd);

    let base = ode_residual(&fwd).unwrap();
    let transforms = [
        ("y-translate", Symmetry::YTranslate(1.5)),
        ("alpha-shift", Symmetry::AlphaShift(1)),
        ("reverse", Symmetry::Reverse(0.3)),
        ("reflect", Symmetry::Reflect(0.0)),
        ("turning-reflect", Symmetry::TurningReflect(0.0)),
    ];
    for (name, sym) in transforms {
        let out = apply_symmetry(&fwd, sym).map(|t| residual_gap(base, &t));
        let gap = out.unwrap_or(f64::NAN);
        worst = if gap.is_nan() { f64::NAN } else { worst.max(gap) };
        names.push(format!("{name} {gap:.1e}"));
    }

    // pole continuation needs a run that ends on the pole circle: energy
    // K (1 - lambda) is the level through X = 1
    let (tau, k, x0) = (1.5, 1.0, 1.0);
    let q = params(tau);
    let l = q.lambda();
    let xx = f64::sin(x0).powi(2);
    let a = (1.0 - 2.0 * l * xx).powi(2) / (1.0 - l * xx) * (1.0 - xx);
    let cos_alpha = ((k * (1.0 - l) - k * (1.0 - l * xx) * xx) / a).sqrt();
    let to_pole = integrate(
        &q,
        k,
        ProfileState::new(0.0, x0, 0.0, cos_alpha.acos()),
        &IntegrateOptions::until(5.0).with_grid(0.0, spacing),
    )
    .unwrap();
    let pole_gap = if to_pole.termination == Termination::BoundaryPole {
        let b = ode_residual(&to_pole).unwrap();
        apply_symmetry(&to_pole, Symmetry::PoleContinue)
            .map(|t| residual_gap(b, &t))
            .unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    worst = if pole_gap.is_nan() { f64::NAN } else { worst.max(pole_gap) };
    names.push(format!("pole-continue {pole_gap:.1e}"));

    Outcome {
        pass: worst <= 1e-8 && turning <= 1e-7,
        detail: format!(
            "residual changes <= 1e-8 ({}), turning-point defect {turning:.1e} <= 1e-7",
            names.join(", ")
        ),
    }
}

fn constant_solutions() -> Outcome {
    let mut worst_rhs = 0.0f64;
    let mut worst_frob = 0.0f64;
    for (tau, x0) in [(0.5, 0.3), (0.75, 0.7), (1.0, 1.0), (2.0, 1.2)] {
        let p = params(tau);
        let traj = clifford_solution(&p, x0, 200).unwrap();
        let c = (1.0 - p.lambda() * x0.sin().powi(2)).sqrt() / (tau * x0.cos());
        let exact = Derivative {
            dx: 0.0,
            dy: c,
            dalpha: 0.0,
        };
        for st in &traj.states {
            worst_rhs = worst_rhs.max(cleared_residual(&p, 0.0, st, &exact));
        }
        worst_frob = worst_frob.max(frobenius_residual(&traj).unwrap());
    }
    // totally geodesic sphere: (s, y0, 0) at tau = 1 with K = 1
    let round = params(1.0);
    let mut worst_geo = 0.0f64;
    for i in 1..100 {
        let s = FRAC_PI_2 * i as f64 / 100.0;
        let st = ProfileState::new(s, s, 0.4, 0.0);
        let d = Derivative {
            dx: 1.0,
            dy: 0.0,
            dalpha: 0.0,
        };
        worst_geo = worst_geo.max(cleared_residual(&round, 1.0, &st, &d));
    }
    Outcome {
        pass: worst_rhs <= 1e-15 && worst_frob == 0.0 && worst_geo == 0.0,
        detail: format!(
            "Clifford rhs residual {worst_rhs:.1e} (cos(pi/2) rounding), Frobenius {worst_frob:e}, geodesic sphere {worst_geo:e}"
        ),
    }
}

fn fundamental_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst_fd, mut worst_det) = (0.0f64, 0.0f64);
    let h = 1e-5;
    for _ in 0..100 {
        let tau = rng.gen_range(0.3..2.5);
        let p = params(tau);
        let st = ProfileState::new(
            0.0,
            rng.gen_range(0.05..FRAC_PI_2 - 0.05),
            rng.gen_range(-PI..PI),
            rng.gen_range(-PI..PI),
        );
        let t = rng.gen_range(0.0..2.0 * PI);
        let (xp, yp) = unit_speed_rates(&p, &st);
        let ff = fundamental_form(&p, &st, xp, yp);
        worst_det = worst_det.max((ff.e * ff.g - ff.f * ff.f - ff.g).abs());

        let at = |ds: f64, dt: f64| {
            let moved = ProfileState::new(0.0, st.x + ds * xp, st.y + ds * yp, st.alpha);
            embedding(&moved, t + dt).to_real()
        };
        let diff = |a: [f64; 4], b: [f64; 4]| std::array::from_fn::<f64, 4, _>(|i| (a[i] - b[i]) / (2.0 * h));
        let phi_s = diff(at(h, 0.0), at(-h, 0.0));
        let phi_t = diff(at(0.0, h), at(0.0, -h));
        let fd = fd_metric(&p, &embedding(&st, t), &phi_s, &phi_t);
        let scale = ff.e.abs().max(ff.g.abs());
        for (a, b) in [(fd.0, ff.e), (fd.1, ff.f), (fd.2, ff.g)] {
            worst_fd = worst_fd.max((a - b).abs() / scale);
        }
    }
    Outcome {
        pass: worst_fd <= 1e-6 && worst_det <= 1e-10,
        detail: format!("finite differences {worst_fd:.1e} <= 1e-6 (relative), |EG - F^2 - G| {worst_det:.1e} <= 1e-10"),
    }
}

fn fd_metric(
    p: &BergerParams<f64>,
    base: &berger_cgc::geometry::AmbientPoint<f64>,
    u: &[f64; 4],
    v: &[f64; 4],
) -> (f64, f64, f64) {
    use berger_cgc::geometry::{metric, TangentVector};
    let a = TangentVector::projected(*base, *u);
    let b = TangentVector::projected(*base, *v);
    (
        metric(p, &a, &a).unwrap(),
        metric(p, &a, &b).unwrap(),
        metric(p, &b, &b).unwrap(),
    )
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        run(1, "threshold exactness", s(1), thresholds),
        run(2, "boundary identities", s(1), boundary_identities),
        run(3, "existence classification", s(30), existence),
        run(4, "energy conservation", s(10), energy_conservation),
        run(5, "Frobenius convergence", s(10), frobenius),
        run(6, "route equivalence", s(10), route_equivalence),
        run(7, "embeddedness (K = 5)", s(30), embeddedness),
        run(8, "radius closed form", s(1), radius),
        run(9, "symmetry suite", s(10), symmetries),
        run(10, "constant solutions", s(1), constant_solutions),
        run(11, "fundamental form", s(1), fundamental_forms),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    println!("acceptance: {} of 11 passed", 11 - failed.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
