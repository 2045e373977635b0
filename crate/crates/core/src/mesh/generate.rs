use std::collections::{BTreeMap, BTreeSet};

use super::{min_angle_deg, signed_area, DomainTag, Mesh, Point, Triangle, AREA_TOL};
use crate::error::MeshError;

/// Smallest interior angle accepted on generated meshes, in degrees.
pub const MIN_ANGLE_FLOOR_DEG: f64 = 10.0;

const MAX_GENERATED_TRIANGLES: usize = 4_000_000;

/// Triangles of the lattice cell with lower-left corner `a`, counter-clockwise
/// corners `a, b, c, d`. Each triangle is listed right-angle vertex first, so
/// the hypotenuse (longest edge) is the edge opposite local vertex 0; the
/// bisection refinement below relies on that labelling.
fn cell_triangles(a: usize, b: usize, c: usize, d: usize, flip: bool) -> [[usize; 3]; 2] {
    if flip {
        // "\" diagonal b-d
        [[a, b, d], [c, d, b]]
    } else {
        // "/" diagonal a-c
        [[b, c, a], [d, a, c]]
    }
}

/// Uniform mesh of the unit square with `n` cells per side.
///
/// Diagonals point toward the nearest corner of the square: "/" in the
/// lower-left and upper-right quadrants, "\" in the other two. The mesh is
/// symmetric under the reflections of the square, every corner lies on a
/// diagonal, and every boundary triangle has exactly one boundary edge (for
/// `n >= 2`).
pub fn generate_uniform_square(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter("n must be at least 1".into()));
    }
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut points = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            points.push(Point::new(i as f64 * h, j as f64 * h));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let flip = (2 * i < n) != (2 * j < n);
            let cell = cell_triangles(idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1), flip);
            triangles.extend(cell.into_iter().map(|v| Triangle { v }));
        }
    }
    Mesh::new(points, triangles, DomainTag::Square)
}

/// Parameters of a graded L-shape mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LShapeGrading {
    /// Cells per unit length of the initial uniform mesh.
    pub n0: usize,
    /// Grading exponent `g`: elements are refined until
    /// `h_K <= scale * r_K^(1/g)`, with `r_K` the distance from the centroid
    /// of `K` to the re-entrant corner (1,1). `g = 1` means no grading:
    /// `h_K <= scale` everywhere.
    pub grading: f64,
    pub scale: f64,
}

/// The re-entrant corner of the L-shaped domain.
pub const REENTRANT_CORNER: Point = Point { x: 1.0, y: 1.0 };

/// Graded mesh of (0,2)^2 \ [1,2]^2 refined toward the re-entrant corner.
///
/// Starts from the uniform lattice mesh with `n0` cells per unit length and
/// applies newest-vertex bisection with conforming closure until every
/// element meets the size target of [`LShapeGrading`]. Bisection of right
/// isosceles triangles across the hypotenuse reproduces right isosceles
/// triangles, so all angles stay at 45 or 90 degrees, and it never gives a
/// child more boundary edges than its parent.
pub fn generate_graded_lshape(n0: usize, grading: f64, scale: f64) -> Result<Mesh, MeshError> {
    let params = LShapeGrading { n0, grading, scale };
    let (points, tris) = graded_lshape_raw(&params)?;
    let triangles: Vec<Triangle> = tris.into_iter().map(|v| Triangle { v }).collect();
    for t in &triangles {
        let p = [points[t.v[0]], points[t.v[1]], points[t.v[2]]];
        let area = signed_area(&p);
        let angle = min_angle_deg(&p);
        if area <= AREA_TOL || angle < MIN_ANGLE_FLOOR_DEG {
            return Err(MeshError::PoorQuality {
                min_angle_deg: angle,
                area,
            });
        }
    }
    Mesh::new(points, triangles, DomainTag::LShape)
}

/// Searches the size scale so that the graded mesh has close to
/// `target_elems` triangles (initial lattice `n0 = 2`).
pub fn generate_graded_lshape_with_target(
    grading: f64,
    target_elems: usize,
) -> Result<(Mesh, LShapeGrading), MeshError> {
    const N0: usize = 2;
    let count = |scale: f64| -> Result<usize, MeshError> {
        let (_, tris) = graded_lshape_raw(&LShapeGrading {
            n0: N0,
            grading,
            scale,
        })?;
        Ok(tris.len())
    };
    // count is nonincreasing in scale; bracket then bisect in log space
    let mut hi = 1.0f64;
    let mut lo = 1.0f64;
    while count(lo)? < target_elems {
        lo *= 0.5;
        if lo < 1e-6 {
            return Err(MeshError::InvalidParameter(format!(
                "cannot reach {target_elems} elements"
            )));
        }
    }
    while count(hi)? > target_elems {
        hi *= 2.0;
    }
    // (distance to target, scale); ties keep the earlier candidate
    let mut best = (usize::MAX, lo);
    let mut consider = |c: usize, scale: f64| {
        if c.abs_diff(target_elems) < best.0 {
            best = (c.abs_diff(target_elems), scale);
        }
    };
    consider(count(lo)?, lo);
    consider(count(hi)?, hi);
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        let c = count(mid)?;
        consider(c, mid);
        if c > target_elems {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-9 {
            break;
        }
    }
    let params = LShapeGrading {
        n0: N0,
        grading,
        scale: best.1,
    };
    let mesh = generate_graded_lshape(params.n0, params.grading, params.scale)?;
    Ok((mesh, params))
}

fn graded_lshape_raw(params: &LShapeGrading) -> Result<(Vec<Point>, Vec<[usize; 3]>), MeshError> {
    let LShapeGrading { n0, grading, scale } = *params;
    if n0 < 2 {
        return Err(MeshError::InvalidParameter("n0 must be at least 2".into()));
    }
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(MeshError::InvalidParameter("grading must be at least 1".into()));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(MeshError::InvalidParameter("scale must be positive".into()));
    }

    let (mut points, mut tris) = uniform_lshape(n0);
    let too_big = |p: &[Point], t: &[usize; 3]| {
        let [a, b, c] = [p[t[0]], p[t[1]], p[t[2]]];
        // hypotenuse is the longest edge
        let hk = b.dist(&c);
        if grading == 1.0 {
            return hk > scale;
        }
        let centroid = Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
        let r = centroid.dist(&REENTRANT_CORNER);
        hk > scale * r.powf(1.0 / grading)
    };

    loop {
        let marked: Vec<usize> = (0..tris.len()).filter(|&t| too_big(&points, &tris[t])).collect();
        if marked.is_empty() {
            break;
        }
        bisect_marked(&mut points, &mut tris, &marked);
        if tris.len() > MAX_GENERATED_TRIANGLES {
            return Err(MeshError::InvalidParameter(format!(
                "grading target needs more than {MAX_GENERATED_TRIANGLES} triangles"
            )));
        }
    }
    Ok((points, tris))
}

fn uniform_lshape(n0: usize) -> (Vec<Point>, Vec<[usize; 3]>) {
    let m = 2 * n0;
    let h = 1.0 / n0 as f64;
    let inside_cell = |i: usize, j: usize| !(i >= n0 && j >= n0);
    let convex_corners = [(0, 0), (m, 0), (m, n0), (n0, m), (0, m)];

    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut points = Vec::new();
    for j in 0..=m {
        for i in 0..=m {
            let touches = [
                (i, j),
                (i.wrapping_sub(1), j),
                (i, j.wrapping_sub(1)),
                (i.wrapping_sub(1), j.wrapping_sub(1)),
            ]
            .into_iter()
            .any(|(ci, cj)| ci < m && cj < m && inside_cell(ci, cj));
            if touches {
                index.insert((i, j), points.len());
                points.push(Point::new(i as f64 * h, j as f64 * h));
            }
        }
    }

    let mut tris = Vec::new();
    for j in 0..m {
        for i in 0..m {
            if !inside_cell(i, j) {
                continue;
            }
            // flip cells whose off-diagonal corner is a convex domain corner
            let flip = convex_corners.contains(&(i + 1, j)) || convex_corners.contains(&(i, j + 1));
            let cell = cell_triangles(
                index[&(i, j)],
                index[&(i + 1, j)],
                index[&(i + 1, j + 1)],
                index[&(i, j + 1)],
                flip,
            );
            tris.extend(cell);
        }
    }
    (points, tris)
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// One round of newest-vertex bisection: refines the marked triangles and
/// whatever the conforming closure requires.
fn bisect_marked(points: &mut Vec<Point>, tris: &mut Vec<[usize; 3]>, marked: &[usize]) {
    let mut edges: BTreeSet<(usize, usize)> =
        marked.iter().map(|&t| edge_key(tris[t][1], tris[t][2])).collect();

    // closure: a triangle with any marked edge must also split its
    // refinement edge
    loop {
        let mut added = false;
        for t in tris.iter() {
            let [a, b, c] = *t;
            let refine = edge_key(b, c);
            if edges.contains(&refine) {
                continue;
            }
            if edges.contains(&edge_key(a, b)) || edges.contains(&edge_key(c, a)) {
                edges.insert(refine);
                added = true;
            }
        }
        if !added {
            break;
        }
    }

    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(a, b) in &edges {
        midpoint.insert((a, b), points.len());
        let (pa, pb) = (points[a], points[b]);
        points.push(Point::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)));
    }

    fn split(t: [usize; 3], midpoint: &BTreeMap<(usize, usize), usize>, out: &mut Vec<[usize; 3]>) {
        let [v0, v1, v2] = t;
        match midpoint.get(&edge_key(v1, v2)) {
            Some(&m) => {
                split([m, v0, v1], midpoint, out);
                split([m, v2, v0], midpoint, out);
            }
            None => out.push(t),
        }
    }

    let mut refined = Vec::with_capacity(tris.len() + 2 * marked.len());
    for &t in tris.iter() {
        split(t, &midpoint, &mut refined);
    }
    *tris = refined;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{check_admissibility, compute_geometry};

    #[test]
    fn square_counts_n2() {
        let m = generate_uniform_square(2).unwrap();
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.num_edges(), 16);
        assert_eq!(m.num_boundary_edges(), 8);
        assert!(check_admissibility(&m).passed());
    }

    #[test]
    fn square_counts_n8() {
        let m = generate_uniform_square(8).unwrap();
        assert_eq!(m.num_vertices(), 81);
        assert_eq!(m.num_triangles(), 128);
        assert_eq!(m.num_edges(), 208);
        assert_eq!(m.num_boundary_edges(), 32);
        let g = compute_geometry(&m).unwrap();
        assert!((g.max_h - 2f64.sqrt() / 8.0).abs() < 1e-15);
        assert!(check_admissibility(&m).passed());
    }

    #[test]
    fn square_boundary_triangles_have_leg_on_boundary() {
        // legs 1/8 on the boundary: h_K = sqrt2/8, |K| = 1/128, H_K = 1/8
        let m = generate_uniform_square(8).unwrap();
        let g = compute_geometry(&m).unwrap();
        assert_eq!(g.num_boundary_triangles(), 32);
        for t in 0..m.num_triangles() {
            if let Some(hk) = g.boundary_height[t] {
                assert!((hk - 1.0 / 8.0).abs() < 1e-15);
                assert!((g.area[t] - 1.0 / 128.0).abs() < 1e-16);
                assert!((g.h[t] - 2f64.sqrt() / 8.0).abs() < 1e-15);
            }
        }
        let ratio = g.max_h_over_sqrt_height.unwrap();
        assert!((ratio - (2.0f64 / 8.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn square_n1_is_inadmissible() {
        let m = generate_uniform_square(1).unwrap();
        assert_eq!(m.num_triangles(), 2);
        let r = check_admissibility(&m);
        assert!(!r.passed());
        assert_eq!(r.multi_boundary_triangles, vec![0, 1]);
        assert_eq!(r.offending_triangles(&m), vec![0, 1]);
    }

    #[test]
    fn square_invariants_over_n() {
        for n in 2..=20 {
            let m = generate_uniform_square(n).unwrap();
            assert!(check_admissibility(&m).passed(), "n = {n}");
            assert_eq!(m.num_boundary_edges(), 4 * n);
            assert_eq!(m.num_edges(), 3 * n * n + 2 * n);
            assert!((m.total_area() - 1.0).abs() < 1e-12);
            let g = compute_geometry(&m).unwrap();
            let want = (2.0 / n as f64).sqrt();
            assert!((g.max_h_over_sqrt_height.unwrap() - want).abs() < 1e-13 * want.max(1.0));
        }
    }

    #[test]
    fn lshape_uniform_grading_one() {
        let m = generate_graded_lshape(2, 1.0, 10.0).unwrap();
        assert_eq!(m.num_triangles(), 24);
        assert!(check_admissibility(&m).passed());
        let g = compute_geometry(&m).unwrap();
        let min = g.h.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(g.max_h <= 2.0 * min);
        assert!((m.total_area() - 3.0).abs() < 1e-12);
        assert!((m.boundary_length() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn lshape_uniform_refinement_stays_uniform() {
        // scale below the initial hypotenuse forces uniform bisection
        let m = generate_graded_lshape(2, 1.0, 0.3).unwrap();
        assert!(check_admissibility(&m).passed());
        let g = compute_geometry(&m).unwrap();
        let min = g.h.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(g.max_h <= 2.0 * min);
        assert!(g.max_h <= 0.3);
    }

    #[test]
    fn lshape_graded_is_admissible_and_graded() {
        let m = generate_graded_lshape(2, 3.0, 0.15).unwrap();
        let r = check_admissibility(&m);
        assert!(r.passed(), "{}", r.summary());
        let g = compute_geometry(&m).unwrap();
        assert!(g.max_h_over_sqrt_height.unwrap().is_finite());
        // elements near the corner are much smaller than far away
        let mut near = f64::INFINITY;
        let mut far = 0.0f64;
        for t in 0..m.num_triangles() {
            let p = m.vertices_of(t);
            let c = Point::new((p[0].x + p[1].x + p[2].x) / 3.0, (p[0].y + p[1].y + p[2].y) / 3.0);
            let r = c.dist(&REENTRANT_CORNER);
            assert!(g.h[t] <= 0.15 * r.powf(1.0 / 3.0) + 1e-14);
            if r < 0.05 {
                near = near.min(g.h[t]);
            }
            far = far.max(g.h[t]);
        }
        // two halvings of the edge length between the corner and the far field
        assert!(near * 4.0 <= far * (1.0 + 1e-12), "near {near}, far {far}");
        for t in 0..m.num_triangles() {
            assert!(min_angle_deg(&m.vertices_of(t)) >= 45.0 - 1e-9);
        }
    }

    #[test]
    fn lshape_target_count() {
        let (m, params) = generate_graded_lshape_with_target(3.0, 5000).unwrap();
        assert!(check_admissibility(&m).passed());
        let n = m.num_triangles();
        assert!((4000..=6000).contains(&n), "{n} triangles, {params:?}");
    }

    #[test]
    fn lshape_rejects_bad_parameters() {
        assert!(generate_graded_lshape(1, 3.0, 0.1).is_err());
        assert!(generate_graded_lshape(2, 0.5, 0.1).is_err());
        assert!(generate_graded_lshape(2, 3.0, 0.0).is_err());
    }
}
