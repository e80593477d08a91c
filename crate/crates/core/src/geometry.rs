//! Ambient Berger-sphere primitives.
//!
//! The Berger sphere of parameter `tau` is the unit sphere of `C^2` with the
//! round metric rescaled by `tau^2` along the Hopf fibers:
//!
//! ```text
//! g(u, v) = <u, v> - (1 - tau^2) <u, V> <v, V>,   V(z, w) = (iz, iw)
//! ```
//!
//! Points live in `C^2`; tangent vectors are plain `R^4` quadruples
//! `(Re z, Im z, Re w, Im w)` since the metric only needs real inner products.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{Real, Scalar};

/// Unit-sphere tolerance for [`AmbientPoint::new`].
pub const POINT_TOL: f64 = 1e-12;
/// Orthogonality tolerance for [`TangentVector::new`].
pub const TANGENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("fiber scaling tau must be positive and finite, got {0}")]
    InvalidTau(f64),
    #[error("point is off the unit sphere: |z|^2 + |w|^2 = {0}")]
    OffSphere(f64),
    #[error("vector is not tangent at its base point: <v, p> = {0}")]
    NotTangent(f64),
    #[error("tangent vectors have different base points")]
    BaseMismatch,
    #[error("normal component nu = {0} is outside [-1, 1]")]
    InvalidNu(f64),
}

/// Ambient geometry of a Berger sphere together with its two curvature
/// thresholds.
///
/// `k0` is the sharp existence threshold for rotational constant Gauss
/// curvature spheres, `kp` is the supremum of the ambient sectional curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BergerParams<T> {
    tau: T,
    lambda: T,
    k0: T,
    kp: T,
}

impl<T: Scalar> BergerParams<T> {
    /// Builds the parameter set for fiber scaling `tau > 0`.
    pub fn new(tau: T) -> Result<Self, GeometryError> {
        if !tau.finite() || !(tau > T::zero()) {
            return Err(GeometryError::InvalidTau(tau.as_f64()));
        }
        let tau2 = tau * tau;
        let lambda = T::one() - tau2;
        let round_branch = T::lit(4) - T::lit(3) * tau2;
        let (k0, kp) = if tau <= T::one() {
            (round_branch, round_branch)
        } else {
            (T::one() / tau2, tau2)
        };
        Ok(Self { tau, lambda, k0, kp })
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// `1 - tau^2`.
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn k0(&self) -> T {
        self.k0
    }

    pub fn kp(&self) -> T {
        self.kp
    }

    /// True on the round sphere `tau = 1`.
    pub fn is_round(&self) -> bool {
        self.lambda == T::zero()
    }

    /// For `tau > 1` the curvatures in `[k0, kp]` admit rotational spheres
    /// that the Pogorelov bound does not reach. Empty (`None`) for `tau <= 1`.
    pub fn pogorelov_gap(&self) -> Option<(T, T)> {
        if self.k0 < self.kp {
            Some((self.k0, self.kp))
        } else {
            None
        }
    }
}

/// Same as [`BergerParams::new`].
pub fn make_params<T: Scalar>(tau: T) -> Result<BergerParams<T>, GeometryError> {
    BergerParams::new(tau)
}

/// A point `(z, w)` of the unit sphere in `C^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint<T> {
    pub z: Complex<T>,
    pub w: Complex<T>,
}

impl<T: Scalar> AmbientPoint<T> {
    pub fn new(z: Complex<T>, w: Complex<T>) -> Result<Self, GeometryError> {
        let p = Self { z, w };
        let n = p.norm_sqr();
        if !n.finite() || (n.as_f64() - 1.0).abs() > POINT_TOL {
            return Err(GeometryError::OffSphere(n.as_f64()));
        }
        Ok(p)
    }

    pub(crate) fn new_unchecked(z: Complex<T>, w: Complex<T>) -> Self {
        Self { z, w }
    }

    pub fn norm_sqr(&self) -> T {
        self.z.norm_sqr() + self.w.norm_sqr()
    }

    /// Real coordinates `(Re z, Im z, Re w, Im w)`.
    pub fn to_real(&self) -> [T; 4] {
        [self.z.re, self.z.im, self.w.re, self.w.im]
    }

    /// The fiber field `V = (iz, iw)` in real coordinates.
    pub fn fiber_field(&self) -> [T; 4] {
        [-self.z.im, self.z.re, -self.w.im, self.w.re]
    }

    /// Hopf action `(z, w) -> (e^{i theta} z, e^{i theta} w)`.
    pub fn fiber_rotate(&self, theta: T) -> Self
    where
        T: Real,
    {
        let phase = Complex::from_polar(T::one(), theta);
        Self::new_unchecked(phase * self.z, phase * self.w)
    }
}

/// A tangent vector of the unit 3-sphere, stored in real coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector<T> {
    pub base: AmbientPoint<T>,
    pub components: [T; 4],
}

impl<T: Scalar> TangentVector<T> {
    pub fn new(base: AmbientPoint<T>, components: [T; 4]) -> Result<Self, GeometryError> {
        let radial = dot(&components, &base.to_real());
        let scale = components
            .iter()
            .map(|c| c.as_f64().abs())
            .fold(1.0, f64::max);
        if (radial.as_f64()).abs() > TANGENT_TOL * scale {
            return Err(GeometryError::NotTangent(radial.as_f64()));
        }
        Ok(Self { base, components })
    }

    /// The fiber field `V` at `base`.
    pub fn fiber(base: AmbientPoint<T>) -> Self {
        Self {
            base,
            components: base.fiber_field(),
        }
    }
}

impl<T: Real> TangentVector<T> {
    /// Drops the radial component so the result is tangent at `base`.
    pub fn projected(base: AmbientPoint<T>, components: [T; 4]) -> Self {
        let p = base.to_real();
        let radial = dot(&components, &p) / dot(&p, &p);
        let mut c = components;
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci = *ci - radial * pi;
        }
        Self { base, components: c }
    }

    /// The unit Killing field `xi = V / tau` tangent to the fibers.
    pub fn unit_fiber(params: &BergerParams<T>, base: AmbientPoint<T>) -> Self {
        let v = base.fiber_field();
        Self {
            base,
            components: v.map(|c| c / params.tau()),
        }
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T; 4], b: &[T; 4]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn same_base<T: Scalar>(a: &AmbientPoint<T>, b: &AmbientPoint<T>) -> bool {
    a.to_real()
        .iter()
        .zip(b.to_real())
        .all(|(&x, y)| (x - y).abs_val().as_f64() <= POINT_TOL)
}

/// Berger metric `g_tau(u, v)`.
pub fn metric<T: Scalar>(
    params: &BergerParams<T>,
    u: &TangentVector<T>,
    v: &TangentVector<T>,
) -> Result<T, GeometryError> {
    if !same_base(&u.base, &v.base) {
        return Err(GeometryError::BaseMismatch);
    }
    let fiber = u.base.fiber_field();
    let euclid = dot(&u.components, &v.components);
    let uv = dot(&u.components, &fiber);
    let vv = dot(&v.components, &fiber);
    Ok(euclid - params.lambda() * uv * vv)
}

/// Hopf projection onto the sphere of radius 1/2 in `C x R`, returned as
/// `(Re(z conj w), Im(z conj w), (|z|^2 - |w|^2) / 2)`.
pub fn hopf_project<T: Scalar>(p: &AmbientPoint<T>) -> [T; 3] {
    let zw = p.z * p.w.conj();
    let half = T::ratio(1, 2);
    [zw.re, zw.im, (p.z.norm_sqr() - p.w.norm_sqr()) * half]
}

/// Sectional curvature of a plane whose unit normal `N` has `g(N, xi) = nu`.
pub fn sectional_curvature<T: Scalar>(params: &BergerParams<T>, nu: T) -> Result<T, GeometryError> {
    if !nu.finite() || nu.abs_val() > T::one() {
        return Err(GeometryError::InvalidNu(nu.as_f64()));
    }
    let tau2 = params.tau() * params.tau();
    Ok(tau2 + T::lit(4) * params.lambda() * nu * nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn c64(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn params_examples() {
        let p = make_params(1.0).unwrap();
        assert_eq!((p.lambda(), p.k0(), p.kp()), (0.0, 1.0, 1.0));

        let p = make_params(Rational64::new(3, 4)).unwrap();
        assert_eq!(p.lambda(), Rational64::new(7, 16));
        assert_eq!(p.k0(), Rational64::new(37, 16));
        assert_eq!(p.kp(), Rational64::new(37, 16));
        assert!(p.pogorelov_gap().is_none());

        let p = make_params(2.0).unwrap();
        assert_eq!((p.lambda(), p.k0(), p.kp()), (-3.0, 0.25, 4.0));
        assert_eq!(p.pogorelov_gap(), Some((0.25, 4.0)));
    }

    #[test]
    fn params_reject_bad_tau() {
        for tau in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(make_params(tau), Err(GeometryError::InvalidTau(_))));
        }
        assert!(make_params(Rational64::new(-1, 2)).is_err());
    }

    #[test]
    fn fiber_has_length_tau() {
        let params = make_params(0.6).unwrap();
        let s = 0.5f64.sqrt();
        let p = AmbientPoint::new(c64(0.6 * s, 0.8 * s), c64(0.0, s)).unwrap();
        let v = TangentVector::fiber(p);
        let g = metric(&params, &v, &v).unwrap();
        assert!((g - 0.36).abs() < 1e-15);
        let xi = TangentVector::unit_fiber(&params, p);
        assert!((metric(&params, &xi, &xi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn horizontal_vector_is_orthogonal_to_fiber() {
        let params = make_params(1.7).unwrap();
        let p = AmbientPoint::new(c64(1.0, 0.0), c64(0.0, 0.0)).unwrap();
        // (0,0,1,0) is tangent at (1,0) and Euclidean-orthogonal to V = (0,1,0,0).
        let u = TangentVector::new(p, [0.0, 0.0, 1.0, 0.0]).unwrap();
        let v = TangentVector::fiber(p);
        assert_eq!(metric(&params, &u, &v).unwrap(), 0.0);
    }

    #[test]
    fn round_metric_is_euclidean() {
        let params = make_params(1.0).unwrap();
        let p = AmbientPoint::new(c64(0.0, 1.0), c64(0.0, 0.0)).unwrap();
        let u = TangentVector::new(p, [1.0, 0.0, 2.0, -1.0]).unwrap();
        let v = TangentVector::new(p, [3.0, 0.0, 0.5, 4.0]).unwrap();
        assert_eq!(metric(&params, &u, &v).unwrap(), 3.0 + 1.0 - 4.0);
    }

    #[test]
    fn metric_rejects_mismatched_bases() {
        let params = make_params(0.5).unwrap();
        let p = AmbientPoint::new(c64(1.0, 0.0), c64(0.0, 0.0)).unwrap();
        let q = AmbientPoint::new(c64(0.0, 0.0), c64(1.0, 0.0)).unwrap();
        let u = TangentVector::fiber(p);
        let v = TangentVector::fiber(q);
        assert_eq!(metric(&params, &u, &v), Err(GeometryError::BaseMismatch));
    }

    #[test]
    fn tangent_and_point_validation() {
        assert!(matches!(
            AmbientPoint::new(c64(1.0, 0.0), c64(0.1, 0.0)),
            Err(GeometryError::OffSphere(_))
        ));
        let p = AmbientPoint::new(c64(1.0, 0.0), c64(0.0, 0.0)).unwrap();
        assert!(matches!(
            TangentVector::new(p, [1.0, 0.0, 0.0, 0.0]),
            Err(GeometryError::NotTangent(_))
        ));
        let t = TangentVector::projected(p, [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(t.components, [0.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn hopf_image_of_axis_point() {
        let p = AmbientPoint::new(c64(1.0, 0.0), c64(0.0, 0.0)).unwrap();
        assert_eq!(hopf_project(&p), [0.0, 0.0, 0.5]);
    }

    #[test]
    fn hopf_image_has_radius_one_half_exactly() {
        // Rational points of S^3, evaluated without rounding.
        let r = |n, d| Rational64::new(n, d);
        let points = [
            (r(3, 13), r(4, 13), r(12, 13), r(0, 1)),
            (r(1, 2), r(1, 2), r(1, 2), r(-1, 2)),
            (r(2, 7), r(-3, 7), r(6, 7), r(0, 1)),
            (r(1, 3), r(2, 3), r(0, 1), r(-2, 3)),
        ];
        for (a, b, c, d) in points {
            let p = AmbientPoint::new(Complex::new(a, b), Complex::new(c, d)).unwrap();
            let [u, v, h] = hopf_project(&p);
            assert_eq!(u * u + v * v + h * h, r(1, 4));
        }
    }

    #[test]
    fn sectional_curvature_extremes() {
        let params = make_params(0.75).unwrap();
        assert_eq!(sectional_curvature(&params, 0.0).unwrap(), 0.5625);
        assert_eq!(sectional_curvature(&params, 1.0).unwrap(), params.kp());
        assert_eq!(sectional_curvature(&params, -1.0).unwrap(), params.kp());
        let round = make_params(1.0).unwrap();
        assert_eq!(sectional_curvature(&round, 0.3).unwrap(), 1.0);
        assert!(matches!(
            sectional_curvature(&params, 1.5),
            Err(GeometryError::InvalidNu(_))
        ));
    }

    #[test]
    fn thresholds_exact_in_rationals() {
        let p = make_params(Rational64::new(1, 2)).unwrap();
        assert_eq!(p.k0(), Rational64::new(13, 4));
        let p = make_params(Rational64::new(2, 1)).unwrap();
        assert_eq!(p.k0(), Rational64::new(1, 4));
        assert_eq!(p.kp(), Rational64::new(4, 1));
    }
}
