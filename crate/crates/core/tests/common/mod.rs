//! Mesh corpora shared by the integration tests.
#![allow(dead_code)]

use qebc::mesh::generate;
use qebc::preprocess::{patch_holes, remove_valence_two};
use qebc::{PolyMesh, QtMesh};

pub fn subdivide(m: &QtMesh, levels: usize) -> QtMesh {
    let mut m = m.clone();
    for _ in 0..levels {
        m = generate::catmull_clark_topology(m.as_poly()).unwrap();
    }
    m
}

/// Triquads of the hull of `points` random points on the sphere.
pub fn type2(points: usize, seed: u64) -> QtMesh {
    generate::triquads_from_triangles(&generate::sphere_hull(points, seed)).unwrap()
}

/// Closed quad mesh from a patched grid, with valence-two vertices removed.
/// `None` when the reduction hits an irreducible configuration.
pub fn closed_grid(rows: usize, cols: usize) -> Option<QtMesh> {
    let (p, _) = patch_holes(&generate::grid(rows, cols)).unwrap();
    remove_valence_two(&p).ok().map(|r| r.mesh)
}

/// Closed valence-two-free quad meshes from 10 to about 10^5 faces.
pub fn closed_v2_free() -> Vec<(String, QtMesh)> {
    let mut out = Vec::new();
    for (name, base) in [
        ("cube", generate::cube()),
        ("tetrahedron", generate::tetrahedron()),
        ("icosahedron", generate::icosahedron()),
    ] {
        for level in 1..=6 {
            let m = subdivide(&base, level);
            if m.face_count() <= 100_000 {
                out.push((format!("{name}-cc{level}"), m));
            }
        }
    }
    out.push(("cube-cc7".into(), subdivide(&generate::cube(), 7)));
    for seed in 0..265u64 {
        let n = 4 + (seed as usize * 37) % 700;
        out.push((format!("type2-{n}-{seed}"), type2(n, seed)));
    }
    for seed in 0..100u64 {
        let n = 4 + (seed as usize * 53) % 400;
        let tri = generate::sphere_hull(n, 1000 + seed);
        out.push((format!("hull-cc-{n}-{seed}"), generate::catmull_clark_topology(tri.as_poly()).unwrap()));
    }
    out.push(("type2-16000".into(), type2(16_000, 7)));
    for rows in 1..=16 {
        for cols in rows..=16 {
            if let Some(m) = closed_grid(rows, cols) {
                out.push((format!("grid-{rows}x{cols}"), m));
            }
        }
    }
    out
}

/// Open grid with one extra triangle on its boundary, so the hole is odd.
pub fn grid_with_odd_hole(rows: usize, cols: usize) -> PolyMesh {
    let g = generate::grid(rows, cols);
    let lp = &g.boundary_loops()[0];
    let mut faces: Vec<Vec<usize>> = g.faces().map(<[usize]>::to_vec).collect();
    faces.push(vec![lp[1], lp[0], g.vertex_count()]);
    PolyMesh::new(g.vertex_count() + 1, &faces).unwrap()
}

/// Quad mesh with two holes: a grid with an interior quad removed.
pub fn grid_with_two_holes(n: usize) -> PolyMesh {
    let g = generate::grid(n, n);
    let mid = (n / 2) * n + n / 2;
    let faces: Vec<Vec<usize>> = g
        .faces()
        .enumerate()
        .filter(|&(i, _)| i != mid)
        .map(|(_, f)| f.to_vec())
        .collect();
    PolyMesh::new(g.vertex_count(), &faces).unwrap()
}

/// Quad mesh with some quads split into triangle pairs.
pub fn qt_mesh(base: &QtMesh, every: usize) -> QtMesh {
    let mut faces = Vec::new();
    for (i, f) in base.faces().enumerate() {
        if f.len() == 4 && i % every == 0 {
            faces.push(vec![f[0], f[1], f[2]]);
            faces.push(vec![f[2], f[3], f[0]]);
        } else {
            faces.push(f.to_vec());
        }
    }
    QtMesh::new(base.vertex_count(), &faces).unwrap()
}

/// Round-trip corpus: closed, open (even and odd holes), QT, triangle, and
/// valence-two meshes.
pub fn roundtrip_corpus() -> Vec<(String, PolyMesh)> {
    let mut out: Vec<(String, PolyMesh)> = Vec::new();
    for (name, m) in closed_v2_free().into_iter().filter(|(_, m)| m.face_count() < 20_000).step_by(3) {
        out.push((name, m.into_poly()));
    }
    for rows in 1..=8 {
        for cols in rows..=9 {
            out.push((format!("open-grid-{rows}x{cols}"), generate::grid(rows, cols).into_poly()));
            out.push((format!("odd-hole-{rows}x{cols}"), grid_with_odd_hole(rows, cols)));
        }
    }
    for n in [3, 5, 8, 13] {
        out.push((format!("two-holes-{n}"), grid_with_two_holes(n)));
    }
    for seed in 0..12u64 {
        let base = type2(20 + 10 * seed as usize, seed);
        out.push((format!("qt-{seed}"), qt_mesh(&base, 3 + seed as usize % 5).into_poly()));
        out.push((format!("tri-{seed}"), generate::sphere_hull(10 + 15 * seed as usize, seed).into_poly()));
        let v2 = generate::insert_valence_two_random(&base, 1 + seed as usize * 3, seed).unwrap();
        out.push((format!("v2-{seed}"), v2.into_poly()));
        let g = generate::insert_valence_two_random(&generate::grid(5, 6), 1 + seed as usize % 6, seed).unwrap();
        out.push((format!("v2-open-{seed}"), g.into_poly()));
    }
    let cube = generate::cube();
    out.push(("v2-chain".into(), generate::insert_valence_two(&generate::insert_valence_two(&cube, &[(0, false)]).unwrap(), &[(6, true)]).unwrap().into_poly()));
    out.push(("tetrahedron".into(), generate::tetrahedron().into_poly()));
    out
}
