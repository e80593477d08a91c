//! Rotational spheres of constant Gauss curvature `K >= k0`.
//!
//! On the monotone half of the profile, `x` runs from the axis to the
//! horizontal radius `r` and the level relation `F(sin^2 x, cos alpha) = 1`
//! expresses `alpha`, `ds/dx` and `dy/dx` in closed form. Writing
//! `X = sin^2 x`,
//!
//! ```text
//! D(X) = 1 - K (1 - lambda X) X
//!      = K sin(r - x) sin(r + x) (1 - lambda (X + sin^2 r))
//! P(X) = (K - 3 lambda - 1) + 2 lambda (2 lambda + 2 - K) X + lambda^2 (K - 4) X^2
//! sin^2 alpha = X P / ((1 - 2 lambda X)^2 (1 - X))
//! ```
//!
//! The factored forms avoid the cancellation in the textbook integrand
//! next to `x = 0` and `x = r`; both quadratures below have an inverse
//! square root singularity at `x = r`, absorbed by tanh-sinh.

use thiserror::Error;

use crate::geometry::BergerParams;
use crate::phase::{level_one_connectivity, TraceOptions};
use crate::profile::{
    integrate, IntegrateOptions, ProfileState, Termination, Trajectory,
};
use crate::quadrature::TanhSinh;
use crate::scalar::Real;

/// Half-width of the indeterminate band around `h = pi`.
pub const EMBED_BAND: f64 = 1e-8;
/// `|lambda|` below which the round-sphere branch of the radius is used.
pub const LAMBDA_ZERO: f64 = 1e-14;
/// Curvatures within this distance of `k0` count as the degenerate corner.
pub const DEGENERATE_BAND: f64 = 1e-6;
/// Quadrature results with a larger error estimate are rejected.
pub const QUAD_ACCEPT: f64 = 1e-10;
const POLE_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphereError {
    #[error("no rotational sphere for tau = {tau}, K = {k}: need K >= k0 = {k0}")]
    NoSphere { tau: f64, k: f64, k0: f64 },
    #[error("quadrature did not converge: estimate {estimate}, error {error:e}")]
    Accuracy { estimate: f64, error: f64 },
    #[error(
        "tau = {tau}, K = {k} reaches the pole: the profile spirals into it \
         with unbounded vertical radius (half length {half_length})"
    )]
    PoleLimit { tau: f64, k: f64, half_length: f64 },
    #[error("h - pi does not change sign on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("level-1 curve does not join the corners although K >= k0")]
    Disconnected,
    #[error("profile integration failed: {0}")]
    Profile(String),
    #[error("{0}")]
    Domain(String),
}

fn check_exists<T: Real>(params: &BergerParams<T>, k: T) -> Result<(), SphereError> {
    if !k.is_finite() || k < params.k0() {
        return Err(SphereError::NoSphere {
            tau: params.tau().as_f64(),
            k: k.as_f64(),
            k0: params.k0().as_f64(),
        });
    }
    Ok(())
}

/// `sin^2 r`, in the cancellation-free form `(2/K) / (1 + sqrt(1 - 4 lambda / K))`.
pub fn sin2_horizontal_radius<T: Real>(params: &BergerParams<T>, k: T) -> Result<T, SphereError> {
    check_exists(params, k)?;
    let l = params.lambda();
    if l.abs() < T::of(LAMBDA_ZERO) {
        return Ok(T::one() / k);
    }
    let disc = (T::one() - T::lit(4) * l / k).max(T::zero());
    Ok((T::lit(2) / k / (T::one() + disc.sqrt())).min(T::one()))
}

/// The horizontal radius `r = x(T/2)` in `[0, pi/2]`.
pub fn horizontal_radius<T: Real>(params: &BergerParams<T>, k: T) -> Result<T, SphereError> {
    Ok(sin2_horizontal_radius(params, k)?.sqrt().asin())
}

struct Level<T> {
    lambda: T,
    k: T,
    tau: T,
    r: T,
    xr: T,
}

impl<T: Real> Level<T> {
    fn new(params: &BergerParams<T>, k: T) -> Result<Self, SphereError> {
        let xr = sin2_horizontal_radius(params, k)?;
        Ok(Self {
            lambda: params.lambda(),
            k,
            tau: params.tau(),
            r: xr.sqrt().asin(),
            xr,
        })
    }

    fn at_pole(&self) -> bool {
        self.xr >= T::one() - T::of(POLE_GAP)
    }

    fn p(&self, x2: T) -> T {
        let l = self.lambda;
        let k = self.k;
        let two = T::lit(2);
        let c0 = k - T::lit(3) * l - T::one();
        let c1 = two * l * (two * l + two - k);
        let c2 = l * l * (k - T::lit(4));
        (c0 + (c1 + c2 * x2) * x2).max(T::zero())
    }

    /// `D` from the factored form, given `x` and its gap `r - x`.
    fn d(&self, x: T, gap: T, x2: T) -> T {
        self.k * gap.sin() * (self.r + x).sin() * (T::one() - self.lambda * (x2 + self.xr))
    }

    /// `dy/dx` on the monotone half.
    fn dy_dx(&self, x: T, gap: T) -> T {
        let sx = x.sin();
        let x2 = sx * sx;
        sx * self.p(x2).sqrt() / (self.tau * x.cos() * self.d(x, gap, x2).sqrt())
    }

    /// `ds/dx = 1 / cos alpha` on the monotone half.
    fn ds_dx(&self, x: T, gap: T) -> T {
        let sx = x.sin();
        let x2 = sx * sx;
        let a = (T::one() - T::lit(2) * self.lambda * x2).abs();
        a * x.cos() / (self.d(x, gap, x2) * (T::one() - self.lambda * x2)).sqrt()
    }

    /// `(sin alpha, cos alpha)` on the level at colatitude `x < r`.
    fn alpha(&self, x: T) -> (T, T) {
        let sx = x.sin();
        let x2 = sx * sx;
        let a = T::one() - T::lit(2) * self.lambda * x2;
        let den = a * a * (T::one() - x2);
        let sin2 = x2 * self.p(x2) / den;
        let cos2 = self.d(x, self.r - x, x2) * (T::one() - self.lambda * x2) / den;
        (sin2.max(T::zero()).sqrt(), cos2.max(T::zero()).sqrt())
    }

    fn quad<F: Fn(T, T) -> T>(&self, f: F, b: T) -> Result<T, SphereError> {
        let gap_to_r = self.r - b;
        let est = TanhSinh::default().integrate(|x, _, gb| f(x, gb + gap_to_r), T::zero(), b);
        if !est.value.is_finite() || (!est.converged && est.error > T::of(QUAD_ACCEPT)) {
            return Err(SphereError::Accuracy {
                estimate: est.value.as_f64(),
                error: est.error.as_f64(),
            });
        }
        Ok(est.value)
    }
}

/// Vertical radius `h = y(T/2) - y(0)`.
///
/// At the pole limit (`sin^2 r = 1`) the integral diverges logarithmically
/// unless the sphere is the totally geodesic one of the round case, where
/// it vanishes; `+inf` and `0` are returned there.
pub fn vertical_radius<T: Real>(params: &BergerParams<T>, k: T) -> Result<T, SphereError> {
    let lv: Level<T> = Level::new(params, k)?;
    if lv.at_pole() {
        return Ok(if lv.lambda.abs() < T::of(LAMBDA_ZERO) {
            T::zero()
        } else {
            T::infinity()
        });
    }
    lv.quad(|x, gap| lv.dy_dx(x, gap), lv.r)
}

/// Half the total parameter length, `T/2 = int_0^r ds/dx dx`.
pub fn half_length<T: Real>(params: &BergerParams<T>, k: T) -> Result<T, SphereError> {
    let lv: Level<T> = Level::new(params, k)?;
    if lv.at_pole() {
        // with sin^2 r = 1, D = K cos^2 x (1 - lambda (1 + X)) and the cos x
        // factors cancel, leaving a regular integrand
        let est = TanhSinh::default().integrate(
            |x, _, _| {
                let x2 = x.sin().powi(2);
                let a = (T::one() - T::lit(2) * lv.lambda * x2).abs();
                let b = (T::one() - lv.lambda * (T::one() + x2)) * (T::one() - lv.lambda * x2);
                a / (lv.k * b).sqrt()
            },
            T::zero(),
            T::FRAC_PI_2(),
        );
        return Ok(est.value);
    }
    lv.quad(|x, gap| lv.ds_dx(x, gap), lv.r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    Embedded,
    NotEmbedded,
    /// `|h - pi|` inside the indeterminate band.
    Boundary,
}

impl Embedding {
    pub fn from_height<T: Real>(h: T) -> Self {
        let pi = T::PI();
        if (h - pi).abs() < T::of(EMBED_BAND) {
            Embedding::Boundary
        } else if h < pi {
            Embedding::Embedded
        } else {
            Embedding::NotEmbedded
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Embedding::Embedded => "true",
            Embedding::NotEmbedded => "false",
            Embedding::Boundary => "boundary",
        }
    }
}

pub fn is_embedded<T: Real>(params: &BergerParams<T>, k: T) -> Result<Embedding, SphereError> {
    Ok(Embedding::from_height(vertical_radius(params, k)?))
}

fn height_gap<T: Real>(tau: T, k: T) -> Result<T, SphereError> {
    let p = BergerParams::new(tau).map_err(|e| SphereError::Domain(e.to_string()))?;
    Ok(vertical_radius(&p, k)? - T::PI())
}

/// Root `tau*` of `h(tau, K) = pi` in `[tau_lo, tau_hi]`.
pub fn embeddedness_boundary<T: Real>(k: T, tau_lo: T, tau_hi: T) -> Result<T, SphereError> {
    let (mut a, mut b) = (tau_lo, tau_hi);
    let mut fa = height_gap(a, k)?;
    let mut fb = height_gap(b, k)?;
    let tol = T::of(EMBED_BAND);
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(SphereError::Bracket {
            lo: tau_lo.as_f64(),
            hi: tau_hi.as_f64(),
        });
    }
    // bisection until the bracket is small, then safeguarded secant
    for _ in 0..200 {
        let width = (b - a).abs();
        let mid = if width > T::of(1e-3) {
            a + (b - a) * T::of(0.5)
        } else {
            let c = b - fb * (b - a) / (fb - fa);
            let lo = a.min(b);
            let hi = a.max(b);
            if c > lo && c < hi {
                c
            } else {
                a + (b - a) * T::of(0.5)
            }
        };
        let fm = height_gap(mid, k)?;
        if fm.abs() <= tol || width < T::of(1e-15) {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    Err(SphereError::Domain("boundary refinement did not converge".into()))
}

/// Scans `h - pi` over an increasing list of `tau` values and refines every
/// sign change. Slices without a sign change yield no roots.
pub fn scan_embeddedness_boundary<T: Real>(k: T, taus: &[T]) -> Result<Vec<T>, SphereError> {
    let gaps = taus
        .iter()
        .map(|&t| height_gap(t, k))
        .collect::<Result<Vec<_>, _>>()?;
    let mut roots = Vec::new();
    for i in 1..taus.len() {
        if gaps[i - 1].signum() != gaps[i].signum() {
            roots.push(embeddedness_boundary(k, taus[i - 1], taus[i])?);
        }
    }
    Ok(roots)
}

#[derive(Debug, Clone, Copy)]
pub struct SphereOptions<T> {
    /// Profile samples over `[0, T]`, both axis points included.
    pub samples: usize,
    pub rtol: T,
    pub atol: T,
    /// Certify existence by tracing the level-1 curve first.
    pub trace_check: bool,
}

impl<T: Real> Default for SphereOptions<T> {
    fn default() -> Self {
        Self {
            samples: 512,
            rtol: T::of(1e-12),
            atol: T::of(1e-14),
            trace_check: true,
        }
    }
}

impl<T: Real> SphereOptions<T> {
    pub fn with_samples(samples: usize) -> Self {
        Self {
            samples,
            ..Self::default()
        }
    }
}

/// Smallest sample count whose uniform spacing over `[0, T]` is at most
/// `spacing`.
pub fn samples_for_spacing<T: Real>(total_length: T, spacing: T) -> usize {
    (total_length / spacing).ceil().to_usize().unwrap_or(0) + 1
}

#[derive(Debug, Clone)]
pub struct SphereSolution<T> {
    pub params: BergerParams<T>,
    pub k: T,
    /// Horizontal radius.
    pub r: T,
    /// Vertical radius from quadrature.
    pub h: T,
    /// Vertical radius from the integrated profile.
    pub h_profile: T,
    pub embedded: Embedding,
    /// Full profile on `[0, T]`, uniformly sampled, `y(T/2) = 0`.
    pub profile: Trajectory<T>,
    /// Total parameter length.
    pub total_length: T,
    /// Integrated state at `s = T/2`.
    pub midpoint: ProfileState<T>,
    /// Colatitude where the integration was launched from the level curve.
    pub seed_x: T,
    /// `K` within the degenerate band of `k0`.
    pub degenerate: bool,
}

const SEED_X: f64 = 1e-5;
const SEED_SIN_ALPHA: f64 = 1e-6;

pub fn build_sphere<T: Real>(
    params: &BergerParams<T>,
    k: T,
    samples: usize,
) -> Result<SphereSolution<T>, SphereError> {
    build_sphere_with(params, k, &SphereOptions::with_samples(samples))
}

pub fn build_sphere_with<T: Real>(
    params: &BergerParams<T>,
    k: T,
    opts: &SphereOptions<T>,
) -> Result<SphereSolution<T>, SphereError> {
    let lv: Level<T> = Level::new(params, k)?;
    let n = opts.samples;
    if n < 3 {
        return Err(SphereError::Domain(format!("need at least 3 samples, got {n}")));
    }
    let degenerate = (k - params.k0()).abs() < T::of(DEGENERATE_BAND);
    if lv.at_pole() {
        return Err(SphereError::PoleLimit {
            tau: params.tau().as_f64(),
            k: k.as_f64(),
            half_length: half_length(params, k)?.as_f64(),
        });
    }
    if opts.trace_check && !degenerate {
        let conn = level_one_connectivity(params, k, &TraceOptions::default())
            .map_err(|e| SphereError::Domain(e.to_string()))?;
        if !conn.connected {
            return Err(SphereError::Disconnected);
        }
    }

    let half = half_length(params, k)?;
    let total = T::lit(2) * half;
    let h = vertical_radius(params, k)?;
    let step = total / T::of_usize(n - 1);

    // launch point on the level curve, moved off the axis until alpha is
    // resolvable
    let mut x_s = T::of(SEED_X);
    let mut sa = lv.alpha(x_s).0;
    while sa < T::of(SEED_SIN_ALPHA) && x_s < lv.r * T::of(0.25) {
        x_s = x_s * T::lit(2);
        sa = lv.alpha(x_s).0;
    }
    let (sa, ca) = lv.alpha(x_s);
    let s_seed = lv.quad(|x, gap| lv.ds_dx(x, gap), x_s)?;
    let y_seed = lv.quad(|x, gap| lv.dy_dx(x, gap), x_s)?;
    if s_seed >= step {
        return Err(SphereError::Domain(format!(
            "sample spacing {step} is finer than the launch offset {s_seed}"
        )));
    }
    let seed = ProfileState::new(s_seed, x_s, y_seed, sa.atan2(ca));

    let mut iopts = IntegrateOptions::until(half)
        .with_grid(T::zero(), step)
        .with_tol(opts.rtol, opts.atol);
    iopts.h_max = step;
    let run = integrate(params, k, seed, &iopts).map_err(|e| SphereError::Profile(e.to_string()))?;
    if run.termination != Termination::SpanEnd {
        return Err(SphereError::Profile(format!(
            "integration stopped early: {:?} at s = {}",
            run.termination,
            run.last().map_or(f64::NAN, |s| s.s.as_f64())
        )));
    }
    let mid = *run.last().expect("span end state");
    let h_profile = mid.y;

    // half grid: the axis, the grid samples strictly below T/2, and the
    // midpoint itself when the sample count is odd
    let m = (n - 1) / 2;
    let mut first = Vec::with_capacity(m + 1);
    first.push(ProfileState::new(T::zero(), T::zero(), T::zero(), T::zero()));
    let cutoff = half - step * T::of(1e-6);
    first.extend(run.states[1..].iter().filter(|st| st.s < cutoff).copied());
    if (n - 1).is_multiple_of(2) {
        first.push(ProfileState {
            s: T::of_usize(m) * step,
            ..mid
        });
    }
    if first.len() != m + 1 {
        return Err(SphereError::Profile(format!(
            "expected {} half samples, integrated {}",
            m + 1,
            first.len()
        )));
    }

    let pi = T::PI();
    let mut states = Vec::with_capacity(n);
    for st in &first {
        states.push(ProfileState { y: st.y - mid.y, ..*st });
    }
    for kk in (m + 1)..n {
        let src = &first[n - 1 - kk];
        states.push(ProfileState {
            s: T::of_usize(kk) * step,
            x: src.x,
            y: mid.y - src.y,
            alpha: pi - src.alpha,
        });
    }
    // land the last sample exactly on T
    if let Some(last) = states.last_mut() {
        last.s = total;
    }
    let profile = Trajectory::from_states(*params, k, states, T::one(), Termination::BoundaryAxis);

    Ok(SphereSolution {
        params: *params,
        k,
        r: lv.r,
        h,
        h_profile,
        embedded: Embedding::from_height(h),
        profile,
        total_length: total,
        midpoint: ProfileState { y: T::zero(), ..mid },
        seed_x: x_s,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(tau: f64) -> BergerParams<f64> {
        BergerParams::new(tau).unwrap()
    }

    #[test]
    fn round_radius_branch() {
        let p = params(1.0);
        assert_eq!(sin2_horizontal_radius(&p, 4.0).unwrap(), 0.25);
        assert!((horizontal_radius(&p, 4.0).unwrap() - PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn radius_requires_existence() {
        let p = params(0.75);
        assert!(matches!(
            sin2_horizontal_radius(&p, 2.0),
            Err(SphereError::NoSphere { .. })
        ));
    }

    #[test]
    fn pole_limit_radius() {
        let p = params(2.0);
        assert_eq!(sin2_horizontal_radius(&p, 0.25).unwrap(), 1.0);
        assert_eq!(horizontal_radius(&p, 0.25).unwrap(), PI / 2.0);
        assert_eq!(vertical_radius(&p, 0.25).unwrap(), f64::INFINITY);
        assert_eq!(is_embedded(&p, 0.25).unwrap(), Embedding::NotEmbedded);
        assert!(matches!(build_sphere(&p, 0.25, 64), Err(SphereError::PoleLimit { .. })));
        // T/2 still equals the closed form pi / (2 sqrt K)
        assert!((half_length(&p, 0.25).unwrap() - PI).abs() < 1e-9);
    }

    #[test]
    fn half_length_closed_form() {
        // T = pi / sqrt(K) for every tau
        for &(tau, k) in &[(0.75, 3.0), (0.5, 4.0), (2.0, 0.5), (1.0, 2.0), (0.3, 9.0)] {
            let t = 2.0 * half_length(&params(tau), k).unwrap();
            assert!((t - PI / k.sqrt()).abs() < 1e-11, "tau {tau} K {k}: {t}");
        }
    }

    #[test]
    fn round_vertical_radius() {
        // tau = 1, K = 2: h = pi/4 (high-precision quadrature reference)
        let h = vertical_radius(&params(1.0), 2.0).unwrap();
        assert!((h - PI / 4.0).abs() < 1e-11, "{h}");
    }

    #[test]
    fn level_alpha_on_unit_circle() {
        let lv: Level<f64> = Level::new(&params(0.75), 3.0).unwrap();
        for &x in &[1e-4, 0.1, 0.4, 0.68] {
            let (s, c) = lv.alpha(x);
            assert!((s * s + c * c - 1.0).abs() < 1e-12, "x {x}");
        }
    }

    #[test]
    fn embedding_band() {
        assert_eq!(Embedding::from_height(PI + 5e-9), Embedding::Boundary);
        assert_eq!(Embedding::from_height(3.0), Embedding::Embedded);
        assert_eq!(Embedding::from_height(f64::INFINITY), Embedding::NotEmbedded);
    }

    #[test]
    fn bracket_error() {
        assert!(matches!(
            embeddedness_boundary(5.0, 0.3, 0.5),
            Err(SphereError::Bracket { .. })
        ));
    }

    #[test]
    fn small_sphere_assembles() {
        let sol = build_sphere(&params(0.75), 3.0, 65).unwrap();
        assert_eq!(sol.profile.len(), 65);
        let first = sol.profile.first().unwrap();
        let last = sol.profile.last().unwrap();
        assert_eq!((first.x, first.alpha), (0.0, 0.0));
        assert!(last.x.abs() < 1e-9 && (last.alpha - PI).abs() < 1e-9);
        assert!((sol.h - sol.h_profile).abs() < 1e-8);
        assert!(sol.profile.max_energy_drift < 1e-8);
    }
}
