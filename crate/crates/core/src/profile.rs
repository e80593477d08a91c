//! Profile curves of rotationally invariant surfaces.
//!
//! A surface invariant under `(z, w) -> (z, e^{it} w)` is swept out by a
//! profile `(x(s), y(s))` in the orbit space, parametrized as
//!
//! ```text
//! Phi(s, t) = (e^{i y} cos x, e^{i t} sin x)
//! ```
//!
//! with `x` the colatitude from the axis `w = 0` and `y` the fiber angle.
//! Constant Gauss curvature `K` reduces to a first-order system in
//! `(x, y, alpha)` with conserved energy `F(sin^2 x, cos alpha)`.

use std::fmt;

use num_complex::Complex;
use thiserror::Error;

use crate::geometry::{AmbientPoint, BergerParams};
use crate::ode::{Dopri5, OdeError, OdeOptions};
use crate::phase::{energy_value, PhasePoint};
use crate::scalar::Real;

/// Threshold below which a vanishing factor in [`rhs`] is reported as a
/// singularity. Kept far below the integration event thresholds so stage
/// evaluations next to an event do not fail.
pub const SINGULAR_TOL: f64 = 1e-14;
pub const EPS_AXIS: f64 = 1e-9;
pub const EPS_POLE: f64 = 1e-9;
pub const EPS_SING: f64 = 1e-8;
/// Events are located to this accuracy in `s`.
pub const EVENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState<T> {
    pub s: T,
    pub x: T,
    pub y: T,
    /// Unwrapped turning angle.
    pub alpha: T,
}

impl<T: Real> ProfileState<T> {
    pub fn new(s: T, x: T, y: T, alpha: T) -> Self {
        Self { s, x, y, alpha }
    }

    fn from_vec(s: T, u: &[T; 3]) -> Self {
        Self::new(s, u[0], u[1], u[2])
    }

    fn to_vec(self) -> [T; 3] {
        [self.x, self.y, self.alpha]
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.x.is_finite() && self.y.is_finite() && self.alpha.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative<T> {
    pub dx: T,
    pub dy: T,
    pub dalpha: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularFactor {
    SinAlpha,
    CosX,
    /// `1 - 2 lambda sin^2 x`, only possible for `lambda > 1/2`.
    OneMinusTwoLambdaSin2,
}

impl fmt::Display for SingularFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SingularFactor::SinAlpha => "sin(alpha)",
            SingularFactor::CosX => "cos(x)",
            SingularFactor::OneMinusTwoLambdaSin2 => "1 - 2 lambda sin^2(x)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Reached the rotation axis, `sin x <= eps_axis`.
    BoundaryAxis,
    /// Reached the pole circle, `sin x >= 1 - eps_pole`.
    BoundaryPole,
    StepLimit,
    /// `|sin alpha| <= eps_sing` away from the axis.
    SingularAlpha,
    /// Reached the requested end of the parameter span.
    SpanEnd,
    /// Reached the requested turning angle.
    AlphaReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub params: BergerParams<T>,
    pub k: T,
    /// Strictly increasing in `s`.
    pub states: Vec<ProfileState<T>>,
    pub energy0: T,
    pub max_energy_drift: T,
    pub termination: Termination,
}

impl<T: Real> Trajectory<T> {
    /// Builds a trajectory, measuring drift against `energy0`.
    pub fn from_states(
        params: BergerParams<T>,
        k: T,
        states: Vec<ProfileState<T>>,
        energy0: T,
        termination: Termination,
    ) -> Self {
        let max_energy_drift = states
            .iter()
            .map(|st| (energy(&params, k, st) - energy0).abs())
            .fold(T::zero(), T::max);
        Self {
            params,
            k,
            states,
            energy0,
            max_energy_drift,
            termination,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> Option<&ProfileState<T>> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&ProfileState<T>> {
        self.states.last()
    }

    pub fn energy_drift(&self, i: usize) -> T {
        (energy(&self.params, self.k, &self.states[i]) - self.energy0).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError<T> {
    #[error("singular right-hand side at s = {s}: {factor} vanishes")]
    Singular { factor: SingularFactor, s: f64 },
    #[error("step size underflow at s = {s}")]
    StepUnderflow { s: f64, partial: Box<Trajectory<T>> },
    #[error("{0}")]
    Domain(String),
}

/// Energy `F(sin^2 x, cos alpha)` of a state.
pub fn energy<T: Real>(params: &BergerParams<T>, k: T, state: &ProfileState<T>) -> T {
    let sx = state.x.sin();
    energy_value(
        params,
        k,
        PhasePoint {
            x: sx * sx,
            y: state.alpha.cos(),
        },
    )
}

/// Bracket of the `alpha` equation, `alpha' = tan x / sin alpha * bracket`.
pub fn bracket<T: Real>(params: &BergerParams<T>, k: T, x: T, alpha: T) -> T {
    let l = params.lambda();
    let (sx, cx) = x.sin_cos();
    let s2 = sx * sx;
    let ca = alpha.cos();
    let one = T::one();
    let a = one - T::lit(2) * l * s2;
    let b = one - l * s2;
    b / a * k - ca * ca * ((one - l) / b + T::lit(4) * l * cx * cx / a)
}

/// Speed of the fiber angle per unit `sin alpha`: `y' = c(x) sin alpha`.
pub fn fiber_rate<T: Real>(params: &BergerParams<T>, x: T) -> T {
    let sx = x.sin();
    (T::one() - params.lambda() * sx * sx).sqrt() / (params.tau() * x.cos())
}

/// Right-hand side of the profile system.
pub fn rhs<T: Real>(
    params: &BergerParams<T>,
    k: T,
    state: &ProfileState<T>,
) -> Result<Derivative<T>, ProfileError<T>> {
    let tol = T::of(SINGULAR_TOL);
    let (sx, cx) = state.x.sin_cos();
    let (sa, ca) = state.alpha.sin_cos();
    let sing = |factor| ProfileError::Singular {
        factor,
        s: state.s.as_f64(),
    };
    if cx.abs() < tol {
        return Err(sing(SingularFactor::CosX));
    }
    if sa.abs() < tol {
        return Err(sing(SingularFactor::SinAlpha));
    }
    if (T::one() - T::lit(2) * params.lambda() * sx * sx).abs() < tol {
        return Err(sing(SingularFactor::OneMinusTwoLambdaSin2));
    }
    Ok(Derivative {
        dx: ca,
        dy: fiber_rate(params, state.x) * sa,
        dalpha: sx / cx / sa * bracket(params, k, state.x, state.alpha),
    })
}

/// Residual of the system with denominators cleared, so it is defined on
/// the singular loci too: the largest of `|x' - cos a|`,
/// `|y' cos x - sqrt(1 - lambda sin^2 x) sin a / tau|` and
/// `|a' sin a cos x - sin x B|` with `B` the [`bracket`].
pub fn cleared_residual<T: Real>(
    params: &BergerParams<T>,
    k: T,
    state: &ProfileState<T>,
    d: &Derivative<T>,
) -> T {
    let (sx, cx) = state.x.sin_cos();
    let (sa, ca) = state.alpha.sin_cos();
    let root = (T::one() - params.lambda() * sx * sx).sqrt() / params.tau();
    let r1 = (d.dx - ca).abs();
    let r2 = (d.dy * cx - root * sa).abs();
    let r3 = (d.dalpha * sa * cx - sx * bracket(params, k, state.x, state.alpha)).abs();
    r1.max(r2).max(r3)
}

/// Sampling of an integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling<T> {
    /// Every accepted step.
    Steps,
    /// Exactly at `origin + j * spacing`; steps are clipped to land there.
    Grid { origin: T, spacing: T },
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// End of the span; may lie before the initial `s` for backward runs.
    pub s_end: T,
    pub sampling: Sampling<T>,
    /// Stop when `alpha` reaches this value.
    pub stop_alpha: Option<T>,
    pub eps_axis: T,
    pub eps_pole: T,
    pub eps_sing: T,
    pub h_max: T,
    pub max_steps: usize,
}

impl<T: Real> IntegrateOptions<T> {
    pub fn until(s_end: T) -> Self {
        Self {
            rtol: T::of(1e-10),
            atol: T::of(1e-12),
            s_end,
            sampling: Sampling::Steps,
            stop_alpha: None,
            eps_axis: T::of(EPS_AXIS),
            eps_pole: T::of(EPS_POLE),
            eps_sing: T::of(EPS_SING),
            h_max: T::of(0.1),
            max_steps: 1_000_000,
        }
    }

    pub fn with_grid(mut self, origin: T, spacing: T) -> Self {
        self.sampling = Sampling::Grid { origin, spacing };
        self
    }

    pub fn with_tol(mut self, rtol: T, atol: T) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }
}

#[derive(Clone, Copy)]
enum Event {
    Axis,
    Pole,
    Sing,
    Alpha,
}

impl Event {
    fn termination(self) -> Termination {
        match self {
            Event::Axis => Termination::BoundaryAxis,
            Event::Pole => Termination::BoundaryPole,
            Event::Sing => Termination::SingularAlpha,
            Event::Alpha => Termination::AlphaReached,
        }
    }
}

/// Integrates the profile system from `init` towards `opts.s_end`.
pub fn integrate<T: Real>(
    params: &BergerParams<T>,
    k: T,
    init: ProfileState<T>,
    opts: &IntegrateOptions<T>,
) -> Result<Trajectory<T>, ProfileError<T>> {
    if !init.is_finite() || !k.is_finite() || !opts.s_end.is_finite() {
        return Err(ProfileError::Domain("non-finite initial data".into()));
    }
    rhs(params, k, &init)?;
    let dir = if opts.s_end >= init.s { T::one() } else { -T::one() };
    let energy0 = energy(params, k, &init);

    let alpha_sign = opts.stop_alpha.map(|a| (a - init.alpha).signum());
    let g = |ev: Event, u: &[T; 3]| -> T {
        match ev {
            Event::Axis => u[0].sin() - opts.eps_axis,
            Event::Pole => T::one() - opts.eps_pole - u[0].sin(),
            Event::Sing => u[2].sin().abs() - opts.eps_sing,
            Event::Alpha => (opts.stop_alpha.unwrap() - u[2]) * alpha_sign.unwrap(),
        }
    };
    let u0 = init.to_vec();
    // Events already satisfied at the start are not armed.
    let mut events = Vec::new();
    for ev in [Event::Axis, Event::Pole, Event::Sing] {
        if g(ev, &u0) > T::zero() {
            events.push(ev);
        }
    }
    if opts.stop_alpha.is_some() && g(Event::Alpha, &u0) > T::zero() {
        events.push(Event::Alpha);
    }

    let mut grid = match opts.sampling {
        Sampling::Steps => None,
        Sampling::Grid { origin, spacing } => {
            if !(spacing > T::zero()) {
                return Err(ProfileError::Domain("grid spacing must be positive".into()));
            }
            let q = (init.s - origin) / spacing;
            let j = if dir > T::zero() {
                q.floor().to_i64().unwrap_or(0) + 1
            } else {
                q.ceil().to_i64().unwrap_or(0) - 1
            };
            Some((origin, spacing, j))
        }
    };
    let grid_point = |o: T, h: T, j: i64| o + T::of(j as f64) * h;

    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: None,
        h_max: opts.h_max,
        h_min: T::of(1e-14),
        max_steps: opts.max_steps,
    };
    let f = |s: T, u: &[T; 3]| {
        rhs(params, k, &ProfileState::from_vec(s, u)).map(|d| [d.dx, d.dy, d.dalpha])
    };
    let mut solver = Dopri5::new(f, init.s, u0, opts.s_end, ode_opts).map_err(|_| {
        ProfileError::Domain("right-hand side failed at the initial state".into())
    })?;

    let mut states = vec![init];
    let finish = |states: Vec<ProfileState<T>>, term| {
        let mut states = states;
        if dir < T::zero() {
            states.reverse();
        }
        Trajectory::from_states(*params, k, states, energy0, term)
    };

    loop {
        let mut limit = opts.s_end;
        if let Some((o, h, j)) = grid {
            let p = grid_point(o, h, j);
            if (p - limit) * dir < T::zero() {
                limit = p;
            }
        }
        let step = match solver.step_to(limit) {
            Ok(step) => step,
            Err(OdeError::StepLimit(_)) => return Ok(finish(states, Termination::StepLimit)),
            Err(OdeError::StepUnderflow { t }) | Err(OdeError::Rhs { t }) => {
                return Err(ProfileError::StepUnderflow {
                    s: t,
                    partial: Box::new(finish(states, Termination::StepLimit)),
                })
            }
        };

        // earliest triggered event inside this step
        let mut hit: Option<(T, Event)> = None;
        for &ev in &events {
            if g(ev, &step.y1) > T::zero() {
                continue;
            }
            let (mut lo, mut hi) = (step.t0, step.t1);
            for _ in 0..200 {
                if (hi - lo).abs() <= T::of(EVENT_TOL) {
                    break;
                }
                let mid = lo + (hi - lo) * T::of(0.5);
                if g(ev, &step.eval(mid)) > T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if hit.is_none_or(|(t, _)| (hi - t) * dir < T::zero()) {
                hit = Some((hi, ev));
            }
        }
        if let Some((t, ev)) = hit {
            states.push(ProfileState::from_vec(t, &step.eval(t)));
            return Ok(finish(states, ev.termination()));
        }

        let here = ProfileState::from_vec(step.t1, &step.y1);
        let at_end = step.t1 == opts.s_end;
        match &mut grid {
            None => states.push(here),
            Some((o, h, j)) => {
                if step.t1 == grid_point(*o, *h, *j) {
                    states.push(here);
                    *j += if dir > T::zero() { 1 } else { -1 };
                } else if at_end {
                    states.push(here);
                }
            }
        }
        if at_end {
            return Ok(finish(states, Termination::SpanEnd));
        }
    }
}

/// The symmetries of the profile system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symmetry<T> {
    /// `(x, y + y0, alpha)`.
    YTranslate(T),
    /// `(x, y, alpha + 2 k pi)`.
    AlphaShift(i32),
    /// `s -> 2 s0 - s` with `alpha + pi`.
    Reverse(T),
    /// `(x, 2 y0 - y, -alpha)`.
    Reflect(T),
    /// Mirror through a turning point `s0` where `cos alpha(s0) = 0`:
    /// `(x(2s0 - s), 2y(s0) - y(2s0 - s), 2alpha(s0) - alpha(2s0 - s))`.
    TurningReflect(T),
    /// Continue through the pole circle, `(x, y + pi, alpha)`.
    PoleContinue,
}

pub fn apply_symmetry<T: Real>(
    traj: &Trajectory<T>,
    sym: Symmetry<T>,
) -> Result<Trajectory<T>, ProfileError<T>> {
    let map = |f: &dyn Fn(&ProfileState<T>) -> ProfileState<T>| -> Vec<ProfileState<T>> {
        traj.states.iter().map(f).collect()
    };
    let two = T::lit(2);
    let pi = T::PI();
    let states = match sym {
        Symmetry::YTranslate(y0) => map(&|st| ProfileState { y: st.y + y0, ..*st }),
        Symmetry::AlphaShift(n) => {
            let shift = two * pi * T::of(n as f64);
            map(&|st| ProfileState {
                alpha: st.alpha + shift,
                ..*st
            })
        }
        Symmetry::Reverse(s0) => {
            let mut v = map(&|st| ProfileState {
                s: two * s0 - st.s,
                alpha: st.alpha + pi,
                ..*st
            });
            v.reverse();
            v
        }
        Symmetry::Reflect(y0) => map(&|st| ProfileState {
            y: two * y0 - st.y,
            alpha: -st.alpha,
            ..*st
        }),
        Symmetry::TurningReflect(s0) => {
            let pivot = traj
                .states
                .iter()
                .find(|st| (st.s - s0).abs() <= T::of(1e-9))
                .ok_or_else(|| ProfileError::Domain("turning point is not a sample".into()))?;
            if pivot.alpha.cos().abs() > T::of(1e-7) {
                return Err(ProfileError::Domain(format!(
                    "not a turning point: cos alpha = {:e}",
                    pivot.alpha.cos()
                )));
            }
            // nearest odd multiple of pi/2
            let half = pi / two;
            let a0 = ((pivot.alpha - half) / pi).round() * pi + half;
            let (y0, s0) = (pivot.y, pivot.s);
            let mut v = map(&|st| ProfileState {
                s: two * s0 - st.s,
                x: st.x,
                y: two * y0 - st.y,
                alpha: two * a0 - st.alpha,
            });
            v.reverse();
            v
        }
        Symmetry::PoleContinue => {
            let last = traj
                .last()
                .ok_or_else(|| ProfileError::Domain("empty trajectory".into()))?;
            if last.x.sin() < T::one() - T::of(EPS_POLE) {
                return Err(ProfileError::Domain(format!(
                    "trajectory does not end at the pole: sin x = {}",
                    last.x.sin()
                )));
            }
            map(&|st| ProfileState { y: st.y + pi, ..*st })
        }
    };
    Ok(Trajectory::from_states(
        traj.params,
        traj.k,
        states,
        traj.energy0,
        traj.termination,
    ))
}

/// Three-point derivative weights on a non-uniform stencil, evaluated at the
/// middle node.
fn fd_weights<T: Real>(h1: T, h2: T) -> (T, T, T) {
    let w0 = -h2 / (h1 * (h1 + h2));
    let w1 = (h2 - h1) / (h1 * h2);
    let w2 = h1 / (h2 * (h1 + h2));
    (w0, w1, w2)
}

/// Maximum cleared residual over interior samples, with derivatives from
/// three-point finite differences of the stored states.
pub fn ode_residual<T: Real>(traj: &Trajectory<T>) -> Result<T, ProfileError<T>> {
    let st = &traj.states;
    if st.len() < 3 {
        return Err(ProfileError::Domain(format!(
            "need at least 3 samples, got {}",
            st.len()
        )));
    }
    let mut worst = T::zero();
    for i in 1..st.len() - 1 {
        let (w0, w1, w2) = fd_weights(st[i].s - st[i - 1].s, st[i + 1].s - st[i].s);
        let d = |f: fn(&ProfileState<T>) -> T| w0 * f(&st[i - 1]) + w1 * f(&st[i]) + w2 * f(&st[i + 1]);
        let der = Derivative {
            dx: d(|p| p.x),
            dy: d(|p| p.y),
            dalpha: d(|p| p.alpha),
        };
        worst = worst.max(cleared_residual(&traj.params, traj.k, &st[i], &der));
    }
    Ok(worst)
}

/// Clifford torus profile `(x0, c(x0) s, pi/2)` over one period of `y`,
/// sampled at `samples` equally spaced parameters (both ends included).
pub fn clifford_solution<T: Real>(
    params: &BergerParams<T>,
    x0: T,
    samples: usize,
) -> Result<Trajectory<T>, ProfileError<T>> {
    let half = T::FRAC_PI_2();
    let m = (x0 / half).round();
    if !x0.is_finite() || (x0 - m * half).abs() < T::of(1e-12) {
        return Err(ProfileError::Domain(format!(
            "x0 = {x0} is an integer multiple of pi/2"
        )));
    }
    if samples < 2 {
        return Err(ProfileError::Domain("need at least 2 samples".into()));
    }
    let c = fiber_rate(params, x0);
    let period = T::lit(2) * T::PI() / c.abs();
    let n = T::of_usize(samples - 1);
    let states = (0..samples)
        .map(|j| {
            let s = period * T::of_usize(j) / n;
            ProfileState::new(s, x0, c * s, half)
        })
        .collect::<Vec<_>>();
    let k = T::zero();
    let e0 = energy(params, k, &states[0]);
    Ok(Trajectory::from_states(*params, k, states, e0, Termination::SpanEnd))
}

/// Curvature forced by a constant turning angle `alpha0` at colatitude `x`.
/// A constant solution needs this to be independent of `x` along the line
/// `x = x0 + s cos alpha0`.
pub fn constant_alpha_curvature<T: Real>(params: &BergerParams<T>, x: T, alpha0: T) -> T {
    let l = params.lambda();
    let sx = x.sin();
    let s2 = sx * sx;
    let ca = alpha0.cos();
    let b = T::one() - l * s2;
    ca * ca / (b * b)
        * (T::lit(4) * l * l * s2 * s2 - T::lit(2) * l * (l + T::lit(3)) * s2 + T::lit(3) * l + T::one())
}

/// First fundamental form of `Phi` in the coordinates `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForm<T> {
    pub e: T,
    pub f: T,
    pub g: T,
}

/// Closed-form `E, F, G` at a state moving with rates `(x', y')`. The
/// components do not depend on the curvature.
pub fn fundamental_form<T: Real>(
    params: &BergerParams<T>,
    state: &ProfileState<T>,
    xprime: T,
    yprime: T,
) -> FundamentalForm<T> {
    let l = params.lambda();
    let (sx, cx) = state.x.sin_cos();
    let (s2, c2) = (sx * sx, cx * cx);
    FundamentalForm {
        e: xprime * xprime + c2 * (T::one() - l * c2) * yprime * yprime,
        f: -l * s2 * c2 * yprime,
        g: (T::one() - l * s2) * s2,
    }
}

/// Unit-speed rates `(x', y')` at a state.
pub fn unit_speed_rates<T: Real>(params: &BergerParams<T>, state: &ProfileState<T>) -> (T, T) {
    let (sa, ca) = state.alpha.sin_cos();
    (ca, fiber_rate(params, state.x) * sa)
}

/// Maximum of `|phi'' + K phi|` over interior samples, `phi = sqrt(G)`, with
/// three-point second differences.
pub fn frobenius_residual<T: Real>(traj: &Trajectory<T>) -> Result<T, ProfileError<T>> {
    let st = &traj.states;
    if st.len() < 3 {
        return Err(ProfileError::Domain(format!(
            "need at least 3 samples, got {}",
            st.len()
        )));
    }
    let l = traj.params.lambda();
    let phi: Vec<T> = st
        .iter()
        .map(|p| {
            let s2 = p.x.sin().powi(2);
            ((T::one() - l * s2) * s2).sqrt()
        })
        .collect();
    let two = T::lit(2);
    let mut worst = T::zero();
    for i in 1..st.len() - 1 {
        let h1 = st[i].s - st[i - 1].s;
        let h2 = st[i + 1].s - st[i].s;
        let dd = two * (h2 * (phi[i - 1] - phi[i]) + h1 * (phi[i + 1] - phi[i])) / (h1 * h2 * (h1 + h2));
        worst = worst.max((dd + traj.k * phi[i]).abs());
    }
    Ok(worst)
}

/// The surface point `Phi(s, t)` of a state.
pub fn embedding<T: Real>(state: &ProfileState<T>, t: T) -> AmbientPoint<T> {
    let (sx, cx) = state.x.sin_cos();
    AmbientPoint::new_unchecked(Complex::from_polar(cx, state.y), Complex::from_polar(sx, t))
}

/// Largest mismatch of the mirror relation around a turning point, given
/// the forward and backward runs from it sampled at the same spacing:
/// `x(s0 + d) = x(s0 - d)` and `y(s0 + d) + y(s0 - d) = 2 y(s0)`.
pub fn turning_point_defect<T: Real>(forward: &Trajectory<T>, backward: &Trajectory<T>) -> T {
    let f = &forward.states;
    let b = &backward.states;
    let (Some(f0), Some(b0)) = (f.first(), b.last()) else {
        return T::nan();
    };
    let (s0, y0) = (f0.s, f0.y);
    let mut worst = (b0.s - s0).abs();
    for (p, q) in f.iter().zip(b.iter().rev()) {
        let sigma_f = p.s - s0;
        let sigma_b = s0 - q.s;
        if (sigma_f - sigma_b).abs() > T::of(1e-9) {
            break;
        }
        worst = worst
            .max((p.x - q.x).abs())
            .max((p.y + q.y - T::lit(2) * y0).abs());
    }
    worst
}
