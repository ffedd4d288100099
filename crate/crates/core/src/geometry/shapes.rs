//! Watertight indenter shells: box, icosphere, and extruded profiles
//! (cylinder, triangle, crescent).
//!
//! Flat-bottomed shapes sit with their lowest point at local z = 0 so scene
//! setup can place them a fixed gap above the pad surface.

use std::collections::BTreeMap;

use crate::geometry::surface::SurfaceMesh;
use crate::math::{Vec2, Vec3};

/// Axis-aligned box with each face split into a 4-triangle fan around the
/// face center, so the triangulation is mirror-symmetric in x and y.
/// Centered in x/y, spanning z in [0, extent.z].
pub fn box_shell(extent: Vec3) -> SurfaceMesh {
    let hx = 0.5 * extent.x;
    let hy = 0.5 * extent.y;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let corners = [
        Vec3::new(-hx, -hy, 0.0),
        Vec3::new(hx, -hy, 0.0),
        Vec3::new(hx, hy, 0.0),
        Vec3::new(-hx, hy, 0.0),
        Vec3::new(-hx, -hy, extent.z),
        Vec3::new(hx, -hy, extent.z),
        Vec3::new(hx, hy, extent.z),
        Vec3::new(-hx, hy, extent.z),
    ];
    vertices.extend_from_slice(&corners);
    // Faces listed with outward winding (CCW seen from outside).
    let faces = [
        [0, 3, 2, 1], // bottom (z = 0, normal -z)
        [4, 5, 6, 7], // top
        [0, 1, 5, 4], // -y
        [2, 3, 7, 6], // +y
        [1, 2, 6, 5], // +x
        [3, 0, 4, 7], // -x
    ];
    for f in faces {
        let center = (corners[f[0]] + corners[f[1]] + corners[f[2]] + corners[f[3]]) / 4.0;
        let c = vertices.len();
        vertices.push(center);
        for e in 0..4 {
            triangles.push([f[e], f[(e + 1) % 4], c]);
        }
    }
    SurfaceMesh::new(vertices, triangles).expect("box shell construction")
}

/// Icosphere of the given radius centered at the origin.
pub fn icosphere(radius: f64, subdivisions: u32) -> SurfaceMesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        Vec3::new(-1.0, phi, 0.0),
        Vec3::new(1.0, phi, 0.0),
        Vec3::new(-1.0, -phi, 0.0),
        Vec3::new(1.0, -phi, 0.0),
        Vec3::new(0.0, -1.0, phi),
        Vec3::new(0.0, 1.0, phi),
        Vec3::new(0.0, -1.0, -phi),
        Vec3::new(0.0, 1.0, -phi),
        Vec3::new(phi, 0.0, -1.0),
        Vec3::new(phi, 0.0, 1.0),
        Vec3::new(-phi, 0.0, -1.0),
        Vec3::new(-phi, 0.0, 1.0),
    ];
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for v in vertices.iter_mut() {
        *v = v.normalize();
    }
    for _ in 0..subdivisions {
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for tri in &triangles {
            let mut mid = [0usize; 3];
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                mid[e] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[a] + vertices[b]).normalize();
                    vertices.push(m);
                    vertices.len() - 1
                });
            }
            next.push([tri[0], mid[0], mid[2]]);
            next.push([tri[1], mid[1], mid[0]]);
            next.push([tri[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        triangles = next;
    }
    for v in vertices.iter_mut() {
        *v *= radius;
    }
    SurfaceMesh::new(vertices, triangles).expect("icosphere construction")
}

/// Right cylinder of radius `r` and height `h`, approximated by a regular
/// `sides`-gon profile (even `sides` keeps it mirror-symmetric).
pub fn cylinder_shell(r: f64, h: f64, sides: usize) -> SurfaceMesh {
    let profile: Vec<Vec2> = (0..sides)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / sides as f64;
            Vec2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    extrude_profile(&profile, h)
}

/// Equilateral triangular prism with side length `side` and height `h`,
/// centered on its centroid.
pub fn triangle_prism(side: f64, h: f64) -> SurfaceMesh {
    let r = side / 3.0_f64.sqrt();
    let profile: Vec<Vec2> = (0..3)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / 3.0 + std::f64::consts::FRAC_PI_2;
            Vec2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    extrude_profile(&profile, h)
}

/// Crescent ("moon") prism: outer arc of radius `r_outer` minus an inner arc
/// of radius `r_inner` whose center is shifted by `offset` along +x.
pub fn crescent_prism(r_outer: f64, r_inner: f64, offset: f64, h: f64, arc_steps: usize) -> SurfaceMesh {
    // The two circles intersect where |p| = r_outer and |p - offset·x| = r_inner.
    let xi = (r_outer * r_outer + offset * offset - r_inner * r_inner) / (2.0 * offset);
    let yi2 = r_outer * r_outer - xi * xi;
    assert!(yi2 > 0.0, "crescent circles must intersect");
    let yi = yi2.sqrt();
    let a_out = yi.atan2(xi);
    let a_in = yi.atan2(xi - offset);
    let mut profile: Vec<Vec2> = Vec::new();
    // Outer arc, CCW from the lower to the upper intersection.
    for i in 0..=arc_steps {
        let t = -a_out + 2.0 * a_out * i as f64 / arc_steps as f64;
        profile.push(Vec2::new(r_outer * t.cos(), r_outer * t.sin()));
    }
    // Inner arc back down, CW around the shifted center.
    for i in 1..arc_steps {
        let t = a_in - 2.0 * a_in * i as f64 / arc_steps as f64;
        profile.push(Vec2::new(offset + r_inner * t.cos(), r_inner * t.sin()));
    }
    extrude_profile(&profile, h)
}

/// Extrude a simple CCW polygon along +z into a watertight prism with
/// ear-clipped caps. Bottom cap at z = 0, top at z = h.
pub fn extrude_profile(profile: &[Vec2], h: f64) -> SurfaceMesh {
    let n = profile.len();
    assert!(n >= 3, "profile needs at least 3 vertices");
    let mut vertices = Vec::with_capacity(2 * n);
    for p in profile {
        vertices.push(Vec3::new(p.x, p.y, 0.0));
    }
    for p in profile {
        vertices.push(Vec3::new(p.x, p.y, h));
    }
    let mut triangles = Vec::new();
    // Side walls, outward for a CCW profile.
    for i in 0..n {
        let j = (i + 1) % n;
        triangles.push([i, j, n + j]);
        triangles.push([i, n + j, n + i]);
    }
    let cap = triangulate_polygon(profile);
    for [a, b, c] in &cap {
        // Bottom cap faces -z: reverse the CCW cap winding.
        triangles.push([*a, *c, *b]);
        // Top cap faces +z.
        triangles.push([n + a, n + b, n + c]);
    }
    SurfaceMesh::new(vertices, triangles).expect("prism construction")
}

/// Ear clipping for a simple CCW polygon.
fn triangulate_polygon(profile: &[Vec2]) -> Vec<[usize; 3]> {
    let mut ids: Vec<usize> = (0..profile.len()).collect();
    let mut out = Vec::with_capacity(profile.len().saturating_sub(2));
    let cross = |o: Vec2, a: Vec2, b: Vec2| (a - o).perp(&(b - o));
    let mut guard = 0usize;
    while ids.len() > 3 {
        let m = ids.len();
        let mut clipped = false;
        for k in 0..m {
            let ia = ids[(k + m - 1) % m];
            let ib = ids[k];
            let ic = ids[(k + 1) % m];
            let (a, b, c) = (profile[ia], profile[ib], profile[ic]);
            if cross(a, b, c) <= 0.0 {
                continue; // reflex corner
            }
            let mut is_ear = true;
            for &other in &ids {
                if other == ia || other == ib || other == ic {
                    continue;
                }
                let p = profile[other];
                if cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0 {
                    is_ear = false;
                    break;
                }
            }
            if is_ear {
                out.push([ia, ib, ic]);
                ids.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            guard += 1;
            assert!(guard < 4, "ear clipping failed; profile is not simple/CCW");
        }
    }
    out.push([ids[0], ids[1], ids[2]]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_shapes_watertight() {
        box_shell(Vec3::new(0.008, 0.008, 0.008))
            .check_watertight()
            .unwrap();
        icosphere(0.01, 2).check_watertight().unwrap();
        cylinder_shell(0.004, 0.008, 24).check_watertight().unwrap();
        triangle_prism(0.01, 0.008).check_watertight().unwrap();
        crescent_prism(0.005, 0.0035, 0.003, 0.008, 12)
            .check_watertight()
            .unwrap();
    }

    #[test]
    fn flat_bottom_at_zero() {
        for shell in [
            box_shell(Vec3::new(0.008, 0.008, 0.008)),
            cylinder_shell(0.004, 0.008, 24),
            triangle_prism(0.01, 0.008),
            crescent_prism(0.005, 0.0035, 0.003, 0.008, 12),
        ] {
            let zmin = shell
                .vertices
                .iter()
                .map(|v| v.z)
                .fold(f64::INFINITY, f64::min);
            assert!(zmin.abs() < 1e-15);
        }
    }

    #[test]
    fn icosphere_radius() {
        let s = icosphere(0.25, 3);
        for v in &s.vertices {
            assert!((v.norm() - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn crescent_is_nonconvex_but_simple() {
        let moon = crescent_prism(0.005, 0.0035, 0.003, 0.008, 16);
        moon.check_watertight().unwrap();
        // Crescent area is less than the outer half disk it is carved from.
        let n = moon.vertices.len() / 2;
        let mut area = 0.0;
        for i in 0..n {
            let a = moon.vertices[i];
            let b = moon.vertices[(i + 1) % n];
            area += 0.5 * (a.x * b.y - b.x * a.y);
        }
        assert!(area > 0.0);
        assert!(area < 0.5 * std::f64::consts::PI * 0.005 * 0.005);
    }
}
