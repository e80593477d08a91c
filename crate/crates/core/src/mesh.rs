//! Triangulated surfaces of revolution.
//!
//! A profile is revolved through `n_t` equally spaced angles. Samples on the
//! axis collapse to a single pole vertex; a closed profile (torus) is glued
//! to itself in both directions.

use std::collections::HashMap;

use crate::geometry::AmbientPoint;
use crate::profile::{embedding, ProfileState, Trajectory};
use crate::scalar::Real;
use crate::sphere::{SphereError, SphereSolution};

/// Samples with `sin x` below this are treated as axis points.
pub const AXIS_TOL: f64 = 1e-9;
/// A trajectory closes when its end points embed within this distance.
pub const CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshVertex<T> {
    pub point: AmbientPoint<T>,
    pub s: T,
    pub t: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh<T> {
    pub vertices: Vec<MeshVertex<T>>,
    pub triangles: Vec<[usize; 3]>,
    /// Number of rings (profile samples off the axis).
    pub n_s: usize,
    pub n_t: usize,
}

impl<T: Real> SurfaceMesh<T> {
    pub fn edge_count(&self) -> usize {
        let mut edges = std::collections::HashSet::new();
        for tri in &self.triangles {
            for j in 0..3 {
                let (a, b) = (tri[j], tri[(j + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Every edge is shared by exactly two triangles that traverse it in
    /// opposite directions.
    pub fn is_closed_and_oriented(&self) -> bool {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for j in 0..3 {
                *directed.entry((tri[j], tri[(j + 1) % 3])).or_default() += 1;
            }
        }
        directed
            .iter()
            .all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1))
    }

    pub fn max_norm_defect(&self) -> T {
        self.vertices
            .iter()
            .map(|v| (v.point.norm_sqr() - T::one()).abs())
            .fold(T::zero(), T::max)
    }
}

fn ring<T: Real>(state: &ProfileState<T>, n_t: usize) -> Vec<MeshVertex<T>> {
    let two_pi = T::lit(2) * T::PI();
    (0..n_t)
        .map(|j| {
            let t = two_pi * T::of_usize(j) / T::of_usize(n_t);
            MeshVertex {
                point: embedding(state, t),
                s: state.s,
                t,
            }
        })
        .collect()
}

/// Revolves a sphere profile; its first and last samples must lie on the axis.
pub fn build_mesh<T: Real>(sol: &SphereSolution<T>, n_t: usize) -> Result<SurfaceMesh<T>, SphereError> {
    let st = &sol.profile.states;
    if st.len() < 3 {
        return Err(SphereError::Domain(format!(
            "degenerate profile with {} samples",
            st.len()
        )));
    }
    if n_t < 3 {
        return Err(SphereError::Domain(format!("n_t = {n_t} is below 3")));
    }
    let on_axis = |p: &ProfileState<T>| p.x.sin().abs() <= T::of(AXIS_TOL);
    if !on_axis(&st[0]) || !on_axis(&st[st.len() - 1]) {
        return Err(SphereError::Domain("profile does not start and end on the axis".into()));
    }
    let interior = &st[1..st.len() - 1];
    if interior.iter().any(on_axis) {
        return Err(SphereError::Domain("profile touches the axis in its interior".into()));
    }
    let n_s = interior.len();
    let mut vertices = Vec::with_capacity(n_s * n_t + 2);
    vertices.push(MeshVertex {
        point: embedding(&st[0], T::zero()),
        s: st[0].s,
        t: T::zero(),
    });
    for p in interior {
        vertices.extend(ring(p, n_t));
    }
    let last = &st[st.len() - 1];
    vertices.push(MeshVertex {
        point: embedding(last, T::zero()),
        s: last.s,
        t: T::zero(),
    });
    let south = vertices.len() - 1;
    let idx = |i: usize, j: usize| 1 + i * n_t + (j % n_t);

    let mut triangles = Vec::with_capacity(2 * n_t * n_s);
    for j in 0..n_t {
        triangles.push([0, idx(0, j), idx(0, j + 1)]);
    }
    for i in 0..n_s - 1 {
        for j in 0..n_t {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    for j in 0..n_t {
        triangles.push([south, idx(n_s - 1, j + 1), idx(n_s - 1, j)]);
    }
    Ok(SurfaceMesh {
        vertices,
        triangles,
        n_s,
        n_t,
    })
}

/// Revolves a closed profile (last sample repeating the first point, as for
/// a Clifford torus over one period) into a torus.
pub fn build_torus_mesh<T: Real>(traj: &Trajectory<T>, n_t: usize) -> Result<SurfaceMesh<T>, SphereError> {
    let st = &traj.states;
    if st.len() < 4 {
        return Err(SphereError::Domain(format!(
            "degenerate profile with {} samples",
            st.len()
        )));
    }
    if n_t < 3 {
        return Err(SphereError::Domain(format!("n_t = {n_t} is below 3")));
    }
    let a = embedding(&st[0], T::zero()).to_real();
    let b = embedding(&st[st.len() - 1], T::zero()).to_real();
    let gap = a
        .iter()
        .zip(b.iter())
        .map(|(u, v)| (*u - *v) * (*u - *v))
        .fold(T::zero(), |acc, d| acc + d)
        .sqrt();
    if gap > T::of(CLOSURE_TOL) {
        return Err(SphereError::Domain(format!("profile is not closed: gap {gap:e}")));
    }
    let rings = &st[..st.len() - 1];
    if rings.iter().any(|p| p.x.sin().abs() <= T::of(AXIS_TOL)) {
        return Err(SphereError::Domain("closed profile touches the axis".into()));
    }
    let n_s = rings.len();
    let mut vertices = Vec::with_capacity(n_s * n_t);
    for p in rings {
        vertices.extend(ring(p, n_t));
    }
    let idx = |i: usize, j: usize| (i % n_s) * n_t + (j % n_t);
    let mut triangles = Vec::with_capacity(2 * n_s * n_t);
    for i in 0..n_s {
        for j in 0..n_t {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Ok(SurfaceMesh {
        vertices,
        triangles,
        n_s,
        n_t,
    })
}

/// Stereographic projection of the unit 3-sphere from `(0, 0, 0, -1)`.
pub fn stereographic<T: Real>(p: &AmbientPoint<T>) -> [T; 3] {
    let [a, b, c, d] = p.to_real();
    let den = T::one() + d;
    [a / den, b / den, c / den]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BergerParams;
    use crate::profile::clifford_solution;
    use crate::sphere::build_sphere;

    #[test]
    fn sphere_mesh_counts() {
        let p = BergerParams::new(0.75).unwrap();
        // 66 samples: two axis points and 64 rings
        let sol = build_sphere(&p, 3.0, 66).unwrap();
        let mesh = build_mesh(&sol, 32).unwrap();
        assert_eq!(mesh.n_s, 64);
        assert_eq!(mesh.vertices.len(), 64 * 32 + 2);
        assert_eq!(mesh.triangles.len(), 2 * 64 * 32);
        assert_eq!(mesh.euler_characteristic(), 2);
        assert!(mesh.is_closed_and_oriented());
        assert!(mesh.max_norm_defect() < 1e-10);
    }

    #[test]
    fn torus_mesh_counts() {
        let p = BergerParams::new(0.6).unwrap();
        let traj = clifford_solution(&p, 0.7, 41).unwrap();
        let mesh = build_torus_mesh(&traj, 16).unwrap();
        assert_eq!(mesh.vertices.len(), 40 * 16);
        assert_eq!(mesh.euler_characteristic(), 0);
        assert!(mesh.is_closed_and_oriented());
    }

    #[test]
    fn rejects_small_inputs() {
        let p = BergerParams::new(1.0).unwrap();
        let sol = build_sphere(&p, 2.0, 16).unwrap();
        assert!(build_mesh(&sol, 2).is_err());
        let traj = clifford_solution(&p, 0.7, 3).unwrap();
        assert!(build_torus_mesh(&traj, 8).is_err());
    }

    #[test]
    fn stereographic_fixes_equator_scale() {
        let p = AmbientPoint::new_unchecked(
            num_complex::Complex::new(1.0f64, 0.0),
            num_complex::Complex::new(0.0, 0.0),
        );
        assert_eq!(stereographic(&p), [1.0, 0.0, 0.0]);
        let q = AmbientPoint::new_unchecked(
            num_complex::Complex::new(0.0f64, 0.0),
            num_complex::Complex::new(0.0, 1.0),
        );
        assert_eq!(stereographic(&q), [0.0, 0.0, 0.0]);
    }
}
