//! Mesh generators and connectivity-level refinements used to build test corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::mesh::{PolyMesh, QtMesh};

fn fmt_xyz(p: [f64; 3]) -> String {
    format!("{} {} {}", p[0], p[1], p[2])
}

fn parse_xyz(s: &str) -> Option<[f64; 3]> {
    let mut it = s.split_whitespace().map(|t| t.parse::<f64>().ok());
    Some([it.next()??, it.next()??, it.next()??])
}

fn with_points(mesh: QtMesh, points: Option<Vec<[f64; 3]>>) -> QtMesh {
    match points {
        Some(p) => {
            let coords = p.into_iter().map(fmt_xyz).collect();
            mesh.with_coords(coords).expect("one point per vertex")
        }
        None => mesh,
    }
}

/// Open rectangular grid of `rows x cols` quads.
pub fn grid(rows: usize, cols: usize) -> QtMesh {
    assert!(rows >= 1 && cols >= 1, "grid needs at least one quad");
    let idx = |i: usize, j: usize| i * (cols + 1) + j;
    let mut faces = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            faces.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1), idx(i + 1, j)]);
        }
    }
    let points = (0..=rows)
        .flat_map(|i| (0..=cols).map(move |j| [j as f64, i as f64, 0.0]))
        .collect();
    let mesh = QtMesh::new((rows + 1) * (cols + 1), &faces).expect("grid is manifold");
    with_points(mesh, Some(points))
}

pub fn cube() -> QtMesh {
    let faces = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let points = (0..8)
        .map(|v| [(v & 1) as f64, ((v >> 1) & 1) as f64, ((v >> 2) & 1) as f64])
        .collect();
    with_points(QtMesh::new(8, faces).expect("cube"), Some(points))
}

pub fn tetrahedron() -> QtMesh {
    let faces = [[0, 1, 2], [0, 3, 1], [1, 3, 2], [0, 2, 3]];
    let points = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    with_points(QtMesh::new(4, faces).expect("tetrahedron"), Some(points))
}

pub fn icosahedron() -> QtMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let points = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let faces = [
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
    with_points(QtMesh::new(12, faces).expect("icosahedron"), Some(points))
}

/// Triangulated convex hull of `n` seeded random points on the unit sphere.
pub fn sphere_hull(n: usize, seed: u64) -> QtMesh {
    assert!(n >= 4, "hull needs at least four points");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 3]> = (0..n)
        .map(|_| loop {
            let p = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0f64..1.0),
            ];
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if r > 1e-3 && r <= 1.0 {
                break [p[0] / r, p[1] / r, p[2] / r];
            }
        })
        .collect();
    convex_hull(&points)
}

fn orient(a: [f64; 3], b: [f64; 3], c: [f64; 3], p: [f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let w = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
    let n = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    n[0] * w[0] + n[1] * w[1] + n[2] * w[2]
}

struct HullFace {
    v: [usize; 3],
    alive: bool,
    conflicts: Vec<usize>,
}

/// Incremental hull with conflict lists. Points strictly inside are dropped.
fn convex_hull(points: &[[f64; 3]]) -> QtMesh {
    let n = points.len();
    let (mut i0, mut i1, mut i2, i3) = (0, 1, 2, 3);
    if orient(points[i0], points[i1], points[i2], points[i3]) > 0.0 {
        std::mem::swap(&mut i1, &mut i2);
    }
    let _ = &mut i0;
    let mut faces: Vec<HullFace> = [[i0, i1, i2], [i0, i3, i1], [i1, i3, i2], [i0, i2, i3]]
        .into_iter()
        .map(|v| HullFace {
            v,
            alive: true,
            conflicts: Vec::new(),
        })
        .collect();
    let mut edges: FxHashMap<(usize, usize), usize> = FxHashMap::default();
    for (f, face) in faces.iter().enumerate() {
        for k in 0..3 {
            edges.insert((face.v[k], face.v[(k + 1) % 3]), f);
        }
    }
    let visible = |face: &HullFace, p: usize| {
        orient(points[face.v[0]], points[face.v[1]], points[face.v[2]], points[p]) > 0.0
    };
    let mut point_face = vec![usize::MAX; n];
    for p in 4..n {
        if let Some(f) = (0..4).find(|&f| visible(&faces[f], p)) {
            faces[f].conflicts.push(p);
            point_face[p] = f;
        }
    }

    for p in 4..n {
        let start = point_face[p];
        if start == usize::MAX {
            continue;
        }
        // flood the visible region
        let mut vis = vec![start];
        let mut in_vis: rustc_hash::FxHashSet<usize> = [start].into_iter().collect();
        let mut k = 0;
        while k < vis.len() {
            let f = vis[k];
            k += 1;
            for e in 0..3 {
                let (a, b) = (faces[f].v[e], faces[f].v[(e + 1) % 3]);
                let g = edges[&(b, a)];
                if !in_vis.contains(&g) && visible(&faces[g], p) {
                    in_vis.insert(g);
                    vis.push(g);
                }
            }
        }
        let mut horizon = Vec::new();
        for &f in &vis {
            for e in 0..3 {
                let (a, b) = (faces[f].v[e], faces[f].v[(e + 1) % 3]);
                if !in_vis.contains(&edges[&(b, a)]) {
                    horizon.push((a, b));
                }
            }
        }
        let mut orphans = Vec::new();
        for &f in &vis {
            faces[f].alive = false;
            orphans.append(&mut faces[f].conflicts);
            for e in 0..3 {
                edges.remove(&(faces[f].v[e], faces[f].v[(e + 1) % 3]));
            }
        }
        let first_new = faces.len();
        for (a, b) in horizon {
            let f = faces.len();
            faces.push(HullFace {
                v: [a, b, p],
                alive: true,
                conflicts: Vec::new(),
            });
            edges.insert((a, b), f);
            edges.insert((b, p), f);
            edges.insert((p, a), f);
        }
        for q in orphans {
            point_face[q] = usize::MAX;
            if q == p {
                continue;
            }
            if let Some(f) = (first_new..faces.len()).find(|&f| visible(&faces[f], q)) {
                faces[f].conflicts.push(q);
                point_face[q] = f;
            }
        }
    }

    let mut remap = vec![usize::MAX; n];
    let mut kept = Vec::new();
    let mut out_faces = Vec::new();
    for face in faces.iter().filter(|f| f.alive) {
        let mut tri = [0; 3];
        for (k, &v) in face.v.iter().enumerate() {
            if remap[v] == usize::MAX {
                remap[v] = kept.len();
                kept.push(points[v]);
            }
            tri[k] = remap[v];
        }
        out_faces.push(tri);
    }
    let mesh = QtMesh::new(kept.len(), &out_faces).expect("hull is a closed manifold");
    with_points(mesh, Some(kept))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg.to_string()))
    }
}

/// Shared refinement: every n-gon becomes n quads around a face point, with a
/// new vertex per edge. Vertices: originals, then edge points, then face points.
fn refine_into_quads(mesh: &PolyMesh) -> Result<QtMesh> {
    let v0 = mesh.vertex_count();
    let mut edge_point: FxHashMap<(usize, usize), usize> = FxHashMap::default();
    let mut edge_ends = Vec::new();
    for face in mesh.faces() {
        for k in 0..face.len() {
            let (a, b) = (face[k], face[(k + 1) % face.len()]);
            let key = (a.min(b), a.max(b));
            if let std::collections::hash_map::Entry::Vacant(e) = edge_point.entry(key) {
                e.insert(v0 + edge_ends.len());
                edge_ends.push(key);
            }
        }
    }
    let face_base = v0 + edge_ends.len();
    let ep = |a: usize, b: usize| edge_point[&(a.min(b), a.max(b))];
    let mut quads = Vec::new();
    for (f, face) in mesh.faces().enumerate() {
        let n = face.len();
        for k in 0..n {
            let prev = face[(k + n - 1) % n];
            let (cur, next) = (face[k], face[(k + 1) % n]);
            quads.push([cur, ep(cur, next), face_base + f, ep(prev, cur)]);
        }
    }
    let total = face_base + mesh.face_count();
    let out = QtMesh::new(total, &quads)?;

    let points = mesh
        .coords()
        .and_then(|c| c.iter().map(|s| parse_xyz(s)).collect::<Option<Vec<_>>>())
        .map(|p| {
            let mut all = p.clone();
            for &(a, b) in &edge_ends {
                all.push(mid(&[p[a], p[b]]));
            }
            for face in mesh.faces() {
                let pts: Vec<_> = face.iter().map(|&v| p[v]).collect();
                all.push(mid(&pts));
            }
            all
        });
    Ok(with_points(out, points))
}

fn mid(pts: &[[f64; 3]]) -> [f64; 3] {
    let n = pts.len() as f64;
    let mut s = [0.0; 3];
    for p in pts {
        for k in 0..3 {
            s[k] += p[k] / n;
        }
    }
    s
}

/// Splits every triangle into three quads by joining its center to its edge
/// midpoints. Output has `V + E + F` vertices and `3F` quads.
pub fn triquads_from_triangles(tri: &QtMesh) -> Result<QtMesh> {
    require(tri.is_pure_triangle(), "input must be a pure triangle mesh")?;
    refine_into_quads(tri.as_poly())
}

/// One level of Catmull-Clark subdivision, connectivity only.
pub fn catmull_clark_topology(mesh: &PolyMesh) -> Result<QtMesh> {
    if !mesh.is_closed() {
        return Err(Error::HasBoundary);
    }
    refine_into_quads(mesh)
}

/// Splits quad `face` with a new valence-two vertex (appended last). With
/// `other_diagonal == false` the new vertex joins the face's 1st and 3rd
/// corners, otherwise its 2nd and 4th.
pub fn insert_valence_two(mesh: &QtMesh, splits: &[(usize, bool)]) -> Result<QtMesh> {
    let mut faces: Vec<Vec<usize>> = mesh.faces().map(<[usize]>::to_vec).collect();
    let mut next = mesh.vertex_count();
    let mut seen = rustc_hash::FxHashSet::default();
    for &(f, other) in splits {
        require(f < faces.len() && mesh.face_size(f) == 4, "split target must be a quad")?;
        require(seen.insert(f), "each face may be split once")?;
        let q = &faces[f];
        let r = if other { 1 } else { 0 };
        let (a, b, c, d) = (q[r], q[(r + 1) % 4], q[(r + 2) % 4], q[(r + 3) % 4]);
        faces[f] = vec![next, a, b, c];
        faces.push(vec![next, c, d, a]);
        next += 1;
    }
    let out = QtMesh::new(next, &faces)?;
    let points = mesh
        .coords()
        .and_then(|c| c.iter().map(|s| parse_xyz(s)).collect::<Option<Vec<_>>>())
        .map(|mut p| {
            for &(f, _) in splits {
                let pts: Vec<_> = mesh.face(f).iter().map(|&v| p[v]).collect();
                p.push(mid(&pts));
            }
            p
        });
    Ok(with_points(out, points))
}

/// Picks `count` distinct quads with seeded random diagonals and splits them.
pub fn insert_valence_two_random(mesh: &QtMesh, count: usize, seed: u64) -> Result<QtMesh> {
    let quads: Vec<usize> = (0..mesh.face_count()).filter(|&f| mesh.face_size(f) == 4).collect();
    require(count <= quads.len(), "not enough quads")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = quads;
    let mut splits = Vec::with_capacity(count);
    for i in 0..count {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
        splits.push((pool[i], rng.random_bool(0.5)));
    }
    insert_valence_two(mesh, &splits)
}
