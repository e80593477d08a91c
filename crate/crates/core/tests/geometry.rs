use berger_cgc::geometry::{hopf_project, metric, sectional_curvature, AmbientPoint, BergerParams, TangentVector};
use num_complex::Complex;
use num_rational::Rational64;
use proptest::prelude::*;

fn point(a: f64, b: f64, c: f64) -> AmbientPoint<f64> {
    // Hopf coordinates
    AmbientPoint::new(Complex::from_polar(a.cos(), b), Complex::from_polar(a.sin(), c)).unwrap()
}

fn tangent(p: AmbientPoint<f64>, v: [f64; 4]) -> TangentVector<f64> {
    TangentVector::projected(p, v)
}

proptest! {
    #[test]
    fn metric_is_symmetric(
        tau in 0.1f64..3.0,
        a in 0.0f64..1.5, b in -3.0f64..3.0, c in -3.0f64..3.0,
        u in prop::array::uniform4(-2.0f64..2.0),
        v in prop::array::uniform4(-2.0f64..2.0),
    ) {
        let params = BergerParams::new(tau).unwrap();
        let p = point(a, b, c);
        let (tu, tv) = (tangent(p, u), tangent(p, v));
        let uv = metric(&params, &tu, &tv).unwrap();
        let vu = metric(&params, &tv, &tu).unwrap();
        prop_assert!((uv - vu).abs() <= 1e-14);
        prop_assert!(metric(&params, &tu, &tu).unwrap() >= -1e-14);
    }

    #[test]
    fn metric_is_bilinear(
        tau in 0.1f64..3.0,
        a in 0.0f64..1.5, b in -3.0f64..3.0, c in -3.0f64..3.0,
        u in prop::array::uniform4(-2.0f64..2.0),
        v in prop::array::uniform4(-2.0f64..2.0),
        s in -3.0f64..3.0,
    ) {
        let params = BergerParams::new(tau).unwrap();
        let p = point(a, b, c);
        let (tu, tv) = (tangent(p, u), tangent(p, v));
        let combo = TangentVector::projected(
            p,
            std::array::from_fn(|i| tu.components[i] + s * tv.components[i]),
        );
        let lhs = metric(&params, &combo, &tv).unwrap();
        let rhs = metric(&params, &tu, &tv).unwrap() + s * metric(&params, &tv, &tv).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn hopf_projection_is_fiber_invariant(
        a in 0.0f64..1.5, b in -3.0f64..3.0, c in -3.0f64..3.0, theta in -6.0f64..6.0,
    ) {
        let p = point(a, b, c);
        let q = p.fiber_rotate(theta);
        let (hp, hq) = (hopf_project(&p), hopf_project(&q));
        for i in 0..3 {
            prop_assert!((hp[i] - hq[i]).abs() <= 1e-14);
        }
        let r2: f64 = hp.iter().map(|v| v * v).sum();
        prop_assert!((r2 - 0.25).abs() <= 1e-14);
    }

    #[test]
    fn fiber_length_is_tau(tau in 0.1f64..3.0, a in 0.0f64..1.5, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let params = BergerParams::new(tau).unwrap();
        let v = TangentVector::fiber(point(a, b, c));
        let len2 = metric(&params, &v, &v).unwrap();
        prop_assert!((len2 - tau * tau).abs() <= 1e-13);
    }

    #[test]
    fn sectional_curvature_range(tau in 0.1f64..3.0, nu in -1.0f64..=1.0) {
        let params = BergerParams::new(tau).unwrap();
        let k = sectional_curvature(&params, nu).unwrap();
        let (lo, hi) = if tau <= 1.0 { (tau * tau, params.kp()) } else { (params.kp() + 4.0 * params.lambda(), params.kp()) };
        prop_assert!(k >= lo - 1e-12 && k <= hi + 1e-12);
    }
}

#[test]
fn thresholds_exact() {
    let cases = [
        (Rational64::new(1, 2), Rational64::new(13, 4), Rational64::new(13, 4)),
        (Rational64::new(3, 4), Rational64::new(37, 16), Rational64::new(37, 16)),
        (Rational64::from(1), Rational64::from(1), Rational64::from(1)),
        (Rational64::from(2), Rational64::new(1, 4), Rational64::from(4)),
    ];
    for (tau, k0, kp) in cases {
        let p = BergerParams::new(tau).unwrap();
        assert_eq!(p.k0(), k0);
        assert_eq!(p.kp(), kp);
    }
}

#[test]
fn pogorelov_gap_only_above_one() {
    assert!(BergerParams::new(0.5f64).unwrap().pogorelov_gap().is_none());
    let (lo, hi) = BergerParams::new(2.0f64).unwrap().pogorelov_gap().unwrap();
    assert_eq!((lo, hi), (0.25, 4.0));
}
