//! The phase function on the rectangle `[0, 1] x [-1, 1]`.
//!
//! With `X = sin^2 x` and `Y = cos alpha`, the conserved energy of the profile
//! system becomes
//!
//! ```text
//! F(X, Y) = (1 - 2 lambda X)^2 / (1 - lambda X) * (1 - X) * Y^2 + K (1 - lambda X) X
//! ```
//!
//! Profile curves live on level sets of `F`; spheres on the level `F = 1`
//! joining the corners `(0, 1)` and `(0, -1)`.

use thiserror::Error;

use crate::geometry::BergerParams;
use crate::scalar::{Real, Scalar};

/// Points within this distance of the rectangle boundary are snapped onto it.
pub const CLIP_TOL: f64 = 1e-12;
/// A traced point is on its level when `|F - level|` is below this.
pub const TRACE_TOL: f64 = 1e-9;
/// Gradient norm below which tracing reports a critical point.
pub const CRITICAL_GRAD: f64 = 1e-12;
/// Endpoint matching tolerance for the corner-to-corner connectivity test.
pub const CORNER_TOL: f64 = 1e-6;

/// A point `(X, Y) = (sin^2 x, cos alpha)` of the phase rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> PhasePoint<T> {
    pub fn new(x: T, y: T) -> Result<Self, PhaseError<T>> {
        let p = Self { x, y };
        if !p.in_rectangle() {
            return Err(PhaseError::OutsideRectangle {
                x: x.as_f64(),
                y: y.as_f64(),
            });
        }
        Ok(p)
    }

    pub fn in_rectangle(&self) -> bool {
        self.x >= T::zero() && self.x <= T::one() && self.y >= -T::one() && self.y <= T::one()
    }
}

impl<T: Real> PhasePoint<T> {
    pub fn dist(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Where a level trace stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEnd {
    /// Reached the rectangle boundary.
    Boundary,
    /// Returned to the starting point.
    Closed,
    /// Ran out of steps.
    StepLimit,
}

/// An ordered polyline on a level set of the phase function.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurve<T> {
    pub level: T,
    pub points: Vec<PhasePoint<T>>,
    pub closed: bool,
    /// First and last point when the curve ends on the rectangle boundary at
    /// both ends (or starts there).
    pub endpoints: Option<(PhasePoint<T>, PhasePoint<T>)>,
    pub termination: TraceEnd,
    /// The start point was a degenerate corner (vanishing X-derivative);
    /// the trace is best effort.
    pub degenerate_start: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError<T> {
    #[error("point ({x}, {y}) is outside the phase rectangle")]
    OutsideRectangle { x: f64, y: f64 },
    #[error("start point has F = {value}, not on level {level}")]
    OffLevel { value: f64, level: f64 },
    #[error("critical point of F encountered near ({x}, {y})")]
    CriticalPoint {
        x: f64,
        y: f64,
        partial: Box<LevelCurve<T>>,
    },
    #[error("trace step size underflow near ({x}, {y})")]
    StepUnderflow {
        x: f64,
        y: f64,
        partial: Box<LevelCurve<T>>,
    },
    #[error("K = 0 is degenerate: F loses its X-growth term")]
    DegenerateCurvature,
}

/// Value of the phase function.
pub fn energy_value<T: Scalar>(params: &BergerParams<T>, k: T, p: PhasePoint<T>) -> T {
    let l = params.lambda();
    let one = T::one();
    let a = one - T::lit(2) * l * p.x;
    let b = one - l * p.x;
    a * a / b * (one - p.x) * p.y * p.y + k * b * p.x
}

/// Analytic gradient `(dF/dX, dF/dY)`.
pub fn energy_gradient<T: Scalar>(params: &BergerParams<T>, k: T, p: PhasePoint<T>) -> (T, T) {
    let l = params.lambda();
    let one = T::one();
    let two = T::lit(2);
    let a = one - two * l * p.x;
    let b = one - l * p.x;
    let g = a * a * (one - p.x) / b;
    let dg = -T::lit(4) * l * a * (one - p.x) / b + a * a * (l - one) / (b * b);
    let y2 = p.y * p.y;
    (dg * y2 + k * (one - two * l * p.x), two * g * p.y)
}

/// A connected set of interior critical points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalLocus<T> {
    Point(PhasePoint<T>),
    /// The whole vertical segment `{x} x (-1, 1)`, on which `F = K / (4 lambda)`.
    Segment { x: T },
}

/// Interior critical points of `F`.
///
/// `dF/dY = 2 g(X) Y` vanishes only on `Y = 0` or where `(1 - 2 lambda X)^2`
/// does; on `Y = 0`, `dF/dX = K (1 - 2 lambda X)`. So critical points exist
/// only on `X = 1 / (2 lambda)`, which lies inside the rectangle iff
/// `lambda > 1/2`.
pub fn interior_critical_points<T: Scalar>(
    params: &BergerParams<T>,
    k: T,
) -> Result<Vec<CriticalLocus<T>>, PhaseError<T>> {
    if k == T::zero() {
        return Err(PhaseError::DegenerateCurvature);
    }
    let l = params.lambda();
    if l > T::ratio(1, 2) {
        Ok(vec![CriticalLocus::Segment {
            x: T::one() / (T::lit(2) * l),
        }])
    } else {
        Ok(Vec::new())
    }
}

/// Closed-form existence criterion for rotational spheres: `K >= k0`.
pub fn sphere_exists<T: Scalar>(params: &BergerParams<T>, k: T) -> bool {
    k.finite() && k >= params.k0()
}

/// Orientation of a trace relative to the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Tangent `(dF/dY, -dF/dX)`: from the corner `(0, 1)` this heads into
    /// the rectangle.
    Forward,
    Backward,
}

impl Direction {
    fn sign<T: Real>(self) -> T {
        match self {
            Direction::Forward => T::one(),
            Direction::Backward => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions<T> {
    pub initial_step: T,
    pub max_step: T,
    pub min_step: T,
    pub max_steps: usize,
    /// Corrector target for `|F - level|`.
    pub corrector_tol: T,
    /// Maximum turning angle (radians) accepted in one step.
    pub max_turn: T,
}

impl<T: Real> Default for TraceOptions<T> {
    fn default() -> Self {
        Self {
            initial_step: T::of(1e-3),
            max_step: T::of(1e-2),
            min_step: T::of(1e-13),
            max_steps: 200_000,
            corrector_tol: T::of(1e-13),
            max_turn: T::of(0.1),
        }
    }
}

struct Tracer<'a, T> {
    params: &'a BergerParams<T>,
    k: T,
    level: T,
    opts: TraceOptions<T>,
}

impl<T: Real> Tracer<'_, T> {
    fn residual(&self, p: PhasePoint<T>) -> T {
        energy_value(self.params, self.k, p) - self.level
    }

    fn grad(&self, p: PhasePoint<T>) -> (T, T) {
        energy_gradient(self.params, self.k, p)
    }

    fn tangent(&self, p: PhasePoint<T>, sign: T) -> Option<(T, T)> {
        let (gx, gy) = self.grad(p);
        let n = gx.hypot(gy);
        if n < T::of(CRITICAL_GRAD) {
            return None;
        }
        Some((sign * gy / n, -sign * gx / n))
    }

    fn tol(&self) -> T {
        self.opts.corrector_tol * T::one().max(self.level.abs())
    }

    /// Newton iteration along the gradient back onto the level set.
    fn correct(&self, mut q: PhasePoint<T>) -> Option<(PhasePoint<T>, usize)> {
        for it in 0..16 {
            let r = self.residual(q);
            if r.abs() <= self.tol() {
                return Some((q, it));
            }
            let (gx, gy) = self.grad(q);
            let n2 = gx * gx + gy * gy;
            if !(n2 > T::zero()) || !n2.is_finite() {
                return None;
            }
            q = PhasePoint {
                x: q.x - r * gx / n2,
                y: q.y - r * gy / n2,
            };
        }
        None
    }

    /// Predictor plus corrector for a step of length `h` along `t`.
    fn advance(&self, p: PhasePoint<T>, t: (T, T), h: T) -> Option<(PhasePoint<T>, usize)> {
        let pred = PhasePoint {
            x: p.x + h * t.0,
            y: p.y + h * t.1,
        };
        let (q, it) = self.correct(pred)?;
        let moved = (q.x - p.x) * t.0 + (q.y - p.y) * t.1;
        if q.dist(&pred) > T::of(0.5) * h || moved <= T::zero() {
            return None;
        }
        Some((q, it))
    }

    fn inside(q: &PhasePoint<T>) -> bool {
        let tol = T::of(CLIP_TOL);
        q.x >= -tol && q.x <= T::one() + tol && q.y >= -T::one() - tol && q.y <= T::one() + tol
    }

    fn snap(mut q: PhasePoint<T>) -> PhasePoint<T> {
        let tol = T::of(CLIP_TOL);
        let one = T::one();
        if q.x.abs() <= tol {
            q.x = T::zero();
        }
        if (q.x - one).abs() <= tol {
            q.x = one;
        }
        if (q.y - one).abs() <= tol {
            q.y = one;
        }
        if (q.y + one).abs() <= tol {
            q.y = -one;
        }
        q
    }

    /// Places the exit point exactly on the violated edge, then solves
    /// `F = level` along that edge.
    fn land_on_boundary(&self, inside: PhasePoint<T>, outside: PhasePoint<T>) -> PhasePoint<T> {
        let one = T::one();
        let fix_x = if outside.x < T::zero() {
            Some(T::zero())
        } else if outside.x > one {
            Some(one)
        } else {
            None
        };
        let fix_y = if outside.y < -one {
            Some(-one)
        } else if outside.y > one {
            Some(one)
        } else {
            None
        };
        match (fix_x, fix_y) {
            (Some(x), Some(y)) => PhasePoint { x, y },
            (Some(x), None) => {
                let mut q = PhasePoint { x, y: inside.y };
                for _ in 0..30 {
                    let r = self.residual(q);
                    let (_, gy) = self.grad(q);
                    if r.abs() <= self.tol() || gy.abs() < T::of(CRITICAL_GRAD) {
                        break;
                    }
                    q.y = (q.y - r / gy).max(-one).min(one);
                }
                q
            }
            (None, Some(y)) => {
                let mut q = PhasePoint { x: inside.x, y };
                for _ in 0..30 {
                    let r = self.residual(q);
                    let (gx, _) = self.grad(q);
                    if r.abs() <= self.tol() || gx.abs() < T::of(CRITICAL_GRAD) {
                        break;
                    }
                    q.x = (q.x - r / gx).max(T::zero()).min(one);
                }
                q
            }
            (None, None) => Self::snap(inside),
        }
    }

    /// Bisects on the step length for the point where the corrected step
    /// leaves the rectangle.
    fn exit_point(&self, p: PhasePoint<T>, t: (T, T), h: T, out: PhasePoint<T>) -> PhasePoint<T> {
        let (mut lo, mut hi) = (T::zero(), h);
        let mut q_in = p;
        let mut q_out = out;
        for _ in 0..80 {
            if hi - lo <= T::unit_roundoff() * h {
                break;
            }
            let mid = T::of(0.5) * (lo + hi);
            match self.advance(p, t, mid) {
                Some((q, _)) if Self::inside(&q) => {
                    lo = mid;
                    q_in = q;
                }
                Some((q, _)) => {
                    hi = mid;
                    q_out = q;
                }
                None => hi = mid,
            }
        }
        self.land_on_boundary(q_in, q_out)
    }

    fn on_boundary(q: &PhasePoint<T>) -> bool {
        let one = T::one();
        q.x == T::zero() || q.x == one || q.y == one || q.y == -one
    }

    fn run(&self, start: PhasePoint<T>, dir: Direction) -> Result<LevelCurve<T>, PhaseError<T>> {
        let r0 = self.residual(start);
        if !(r0.abs() <= T::of(TRACE_TOL)) {
            return Err(PhaseError::OffLevel {
                value: (r0 + self.level).as_f64(),
                level: self.level.as_f64(),
            });
        }
        let sign = dir.sign::<T>();
        let (gx0, _) = self.grad(start);
        let degenerate_start =
            Self::on_boundary(&start) && gx0.abs() < T::of(1e-6) && start.x == T::zero();

        let mut curve = LevelCurve {
            level: self.level,
            points: vec![start],
            closed: false,
            endpoints: None,
            termination: TraceEnd::StepLimit,
            degenerate_start,
        };
        let start_on_boundary = Self::on_boundary(&start);
        let mut h = self.opts.initial_step.min(self.opts.max_step);
        let mut prev_t: Option<(T, T)> = None;
        let mut travelled = T::zero();

        for _ in 0..self.opts.max_steps {
            let p = *curve.points.last().expect("non-empty");
            let Some(mut t) = self.tangent(p, sign) else {
                return Err(PhaseError::CriticalPoint {
                    x: p.x.as_f64(),
                    y: p.y.as_f64(),
                    partial: Box::new(curve),
                });
            };
            if let Some(pt) = prev_t {
                if t.0 * pt.0 + t.1 * pt.1 < T::zero() {
                    t = (-t.0, -t.1);
                }
            }

            let (q, iters) = loop {
                if h < self.opts.min_step {
                    return Err(PhaseError::StepUnderflow {
                        x: p.x.as_f64(),
                        y: p.y.as_f64(),
                        partial: Box::new(curve),
                    });
                }
                let Some((q, iters)) = self.advance(p, t, h) else {
                    h = h * T::of(0.5);
                    continue;
                };
                if let Some(tq) = self.tangent(q, sign) {
                    let c = (t.0 * tq.0 + t.1 * tq.1).abs().min(T::one());
                    if c.acos() > self.opts.max_turn {
                        h = h * T::of(0.5);
                        continue;
                    }
                }
                break (q, iters);
            };

            if !Self::inside(&q) {
                let end = self.exit_point(p, t, h, q);
                if end.dist(&p) > T::zero() || curve.points.len() == 1 {
                    curve.points.push(end);
                }
                curve.termination = TraceEnd::Boundary;
                curve.endpoints = Some((start, end));
                return Ok(curve);
            }
            let q = Self::snap(q);
            let step = q.dist(&p);
            travelled = travelled + step;

            if !start_on_boundary && curve.points.len() > 4 && travelled > T::of(4.0) * h {
                let d = q.dist(&start);
                if d <= h {
                    curve.points.push(q);
                    curve.points.push(start);
                    curve.closed = true;
                    curve.termination = TraceEnd::Closed;
                    return Ok(curve);
                }
            }

            curve.points.push(q);
            prev_t = Some(t);
            if Self::on_boundary(&q) && curve.points.len() > 2 {
                curve.termination = TraceEnd::Boundary;
                curve.endpoints = Some((start, q));
                return Ok(curve);
            }
            if iters <= 3 {
                h = (h * T::of(1.5)).min(self.opts.max_step);
            }
        }
        Ok(curve)
    }
}

/// Traces the level set of `F` through `start` in one direction with an
/// arc-length predictor and a Newton corrector, clipped to the rectangle.
pub fn trace_level_curve<T: Real>(
    params: &BergerParams<T>,
    k: T,
    level: T,
    start: PhasePoint<T>,
    direction: Direction,
    opts: &TraceOptions<T>,
) -> Result<LevelCurve<T>, PhaseError<T>> {
    Tracer {
        params,
        k,
        level,
        opts: *opts,
    }
    .run(start, direction)
}

/// Traces the whole connected component through an interior seed: forward
/// until closure or the boundary, then backward if the curve is open.
pub fn trace_component<T: Real>(
    params: &BergerParams<T>,
    k: T,
    level: T,
    seed: PhasePoint<T>,
    opts: &TraceOptions<T>,
) -> Result<LevelCurve<T>, PhaseError<T>> {
    let fwd = trace_level_curve(params, k, level, seed, Direction::Forward, opts)?;
    if fwd.closed || fwd.termination == TraceEnd::StepLimit {
        return Ok(fwd);
    }
    let bwd = trace_level_curve(params, k, level, seed, Direction::Backward, opts)?;
    let mut points: Vec<_> = bwd.points.iter().rev().copied().collect();
    points.extend(fwd.points.iter().skip(1).copied());
    let first = points[0];
    let last = *points.last().expect("non-empty");
    let termination = if bwd.termination == TraceEnd::StepLimit {
        TraceEnd::StepLimit
    } else {
        TraceEnd::Boundary
    };
    Ok(LevelCurve {
        level,
        points,
        closed: false,
        endpoints: Some((first, last)),
        termination,
        degenerate_start: false,
    })
}

/// Result of tracing the level-1 curve from the corner `(0, 1)`.
#[derive(Debug, Clone)]
pub struct Connectivity<T> {
    pub connected: bool,
    pub curve: LevelCurve<T>,
}

/// Traces `F = 1` from `(0, 1)` into the rectangle and reports whether it
/// reaches `(0, -1)`.
pub fn level_one_connectivity<T: Real>(
    params: &BergerParams<T>,
    k: T,
    opts: &TraceOptions<T>,
) -> Result<Connectivity<T>, PhaseError<T>> {
    let start = PhasePoint {
        x: T::zero(),
        y: T::one(),
    };
    let target = PhasePoint {
        x: T::zero(),
        y: -T::one(),
    };
    match trace_level_curve(params, k, T::one(), start, Direction::Forward, opts) {
        Ok(curve) => {
            let connected = curve.termination == TraceEnd::Boundary
                && curve
                    .points
                    .last()
                    .is_some_and(|e| e.dist(&target) <= T::of(CORNER_TOL));
            Ok(Connectivity { connected, curve })
        }
        Err(PhaseError::CriticalPoint { partial, .. }) => Ok(Connectivity {
            connected: false,
            curve: *partial,
        }),
        Err(e) => Err(e),
    }
}
