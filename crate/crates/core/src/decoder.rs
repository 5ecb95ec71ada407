//! Wrap&Zip reconstruction of a closed mesh from its face codes.

use crate::error::{Error, Result};
use crate::mesh::QtMesh;
use crate::traversal::{ClersSequence, FaceCode, Label};

/// One free edge of the wrapped polygon, listed in boundary-cycle order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeEdge {
    pub from: usize,
    pub to: usize,
    /// Arrow follows the cycle direction (C triangles and the root gate);
    /// otherwise it points backwards (L, R, E triangles).
    pub forward: bool,
}

/// Triangle tree produced by [`wrap`]. Vertices are slots: every triangle tip
/// gets a fresh slot, and only the gate endpoints and C tips carry labels.
#[derive(Clone, Debug)]
pub struct WrapSurface {
    /// `(a, b, tip)` per label, in sequence order.
    pub triangles: Vec<[usize; 3]>,
    /// Closed boundary cycle of the polygon.
    pub boundary: Vec<FreeEdge>,
    /// Final vertex label of each slot, if known before zipping.
    pub slot_labels: Vec<Option<usize>>,
    /// Face code each triangle belongs to.
    pub triangle_code: Vec<usize>,
    pub vertex_count: usize,
    /// Branches the sequence never closed; a complete sequence has none.
    pub open_branches: usize,
}

enum Task {
    Tri(usize, usize),
    Emit(FreeEdge),
}

/// Builds the triangle tree and its oriented boundary.
pub fn wrap(seq: &ClersSequence) -> Result<WrapSurface> {
    for c in &seq.codes {
        if !c.is_legal() {
            return Err(Error::IllegalFaceCode(c.to_string()));
        }
    }
    let labels: Vec<(Label, usize)> = seq
        .codes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.labels().map(move |l| (l, i)))
        .collect();
    if labels.is_empty() {
        return Err(Error::CorruptSequence("empty sequence".into()));
    }

    let mut slot_labels = vec![Some(0), Some(1)];
    let mut next_label = 2;
    let mut triangles = Vec::with_capacity(labels.len());
    let mut triangle_code = Vec::with_capacity(labels.len());
    let mut boundary = Vec::with_capacity(labels.len() + 2);
    let mut stack = vec![Task::Tri(0, 1)];
    let mut it = labels.iter();
    let mut open_branches = 0;

    while let Some(task) = stack.pop() {
        let (a, b) = match task {
            Task::Emit(e) => {
                boundary.push(e);
                continue;
            }
            Task::Tri(a, b) => (a, b),
        };
        let Some(&(label, code)) = it.next() else {
            // labels ran out: the branch stays open across its gate
            boundary.push(FreeEdge {
                from: b,
                to: a,
                forward: true,
            });
            open_branches += 1;
            continue;
        };
        let t = slot_labels.len();
        if label == Label::C {
            slot_labels.push(Some(next_label));
            next_label += 1;
        } else {
            slot_labels.push(None);
        }
        triangles.push([a, b, t]);
        triangle_code.push(code);

        let left = |forward| FreeEdge { from: t, to: a, forward };
        let right = FreeEdge {
            from: b,
            to: t,
            forward: false,
        };
        // the right branch is walked first, so it is pushed last
        match label {
            Label::C => {
                stack.push(Task::Emit(left(true)));
                stack.push(Task::Tri(t, b));
            }
            Label::L => {
                stack.push(Task::Emit(left(false)));
                stack.push(Task::Tri(t, b));
            }
            Label::R => {
                stack.push(Task::Tri(a, t));
                stack.push(Task::Emit(right));
            }
            Label::S => {
                stack.push(Task::Tri(a, t));
                stack.push(Task::Tri(t, b));
            }
            Label::E => {
                stack.push(Task::Emit(left(false)));
                stack.push(Task::Emit(right));
            }
        }
    }
    if it.next().is_some() {
        return Err(Error::CorruptSequence(
            "labels remain after the last branch closed".into(),
        ));
    }
    boundary.push(FreeEdge {
        from: 0,
        to: 1,
        forward: true,
    });
    Ok(WrapSurface {
        triangles,
        boundary,
        slot_labels,
        triangle_code,
        vertex_count: next_label,
        open_branches,
    })
}

struct Dsu {
    parent: Vec<usize>,
    label: Vec<Option<usize>>,
}

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> Result<()> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        let merged = match (self.label[ra], self.label[rb]) {
            (Some(x), Some(y)) if x != y => {
                return Err(Error::Unzippable(format!(
                    "zipping identifies distinct vertices {x} and {y}"
                )))
            }
            (x, y) => x.or(y),
        };
        self.parent[ra] = rb;
        self.label[rb] = merged;
        Ok(())
    }
}

/// Glues boundary edges whose arrows leave a common vertex until none are left.
/// Returns the labelled triangles `(a, b, tip)`.
pub fn zip(surface: &WrapSurface) -> Result<Vec<[usize; 3]>> {
    if surface.open_branches > 0 {
        return Err(Error::Unzippable(format!(
            "sequence ends with {} open branches",
            surface.open_branches
        )));
    }
    let n = surface.boundary.len();
    let forward = surface.boundary.iter().filter(|e| e.forward).count();
    if 2 * forward != n {
        return Err(Error::Unzippable(format!(
            "{forward} counter-clockwise and {} clockwise free edges",
            n - forward
        )));
    }
    let mut dsu = Dsu {
        parent: (0..surface.slot_labels.len()).collect(),
        label: surface.slot_labels.clone(),
    };
    let mut prev: Vec<usize> = (0..n).map(|i| (i + n - 1) % n).collect();
    let mut next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut alive = vec![true; n];
    let mut remaining = n;
    // each entry names the edge p whose junction with next[p] should be tested
    let mut work: Vec<usize> = (0..n).rev().collect();
    let e = &surface.boundary;

    while let Some(p) = work.pop() {
        if !alive[p] || remaining == 0 {
            continue;
        }
        let q = next[p];
        if q == p || !alive[q] || e[p].forward || !e[q].forward {
            continue;
        }
        dsu.union(e[p].from, e[q].to)?;
        alive[p] = false;
        alive[q] = false;
        remaining -= 2;
        if remaining == 0 {
            break;
        }
        let (a, b) = (prev[p], next[q]);
        next[a] = b;
        prev[b] = a;
        work.push(a);
    }
    if remaining != 0 {
        return Err(Error::Unzippable(format!("{remaining} free edges remain")));
    }

    let mut out = Vec::with_capacity(surface.triangles.len());
    for t in &surface.triangles {
        let mut tri = [0; 3];
        for k in 0..3 {
            let r = dsu.find(t[k]);
            tri[k] = dsu.label[r]
                .ok_or_else(|| Error::Unzippable("a vertex slot was never identified".into()))?;
        }
        out.push(tri);
    }
    Ok(out)
}

/// Rebuilds faces: consecutive triangles of a quad code are merged.
pub fn merge_quads(triangles: &[[usize; 3]], seq: &ClersSequence, vertex_count: usize) -> Result<QtMesh> {
    let mut faces: Vec<Vec<usize>> = Vec::with_capacity(seq.len());
    let mut k = 0;
    for (i, code) in seq.codes.iter().enumerate() {
        match code {
            FaceCode::Tri(_) => {
                let t = triangles.get(k).ok_or_else(|| Error::Internal("triangle count".into()))?;
                faces.push(t.to_vec());
                k += 1;
            }
            FaceCode::Quad(..) => {
                let (f, s) = match (triangles.get(k), triangles.get(k + 1)) {
                    (Some(f), Some(s)) => (f, s),
                    _ => return Err(Error::Internal("triangle count".into())),
                };
                // (A, B, Y) then (Y, B, X)
                if s[0] != f[2] || s[1] != f[1] {
                    return Err(Error::Internal(format!(
                        "halves of quad {i} are not adjacent across their split edge"
                    )));
                }
                faces.push(vec![f[0], f[1], s[2], f[2]]);
                k += 2;
            }
        }
    }
    if k != triangles.len() {
        return Err(Error::Internal("triangle count".into()));
    }
    QtMesh::new(vertex_count, &faces).map_err(|e| Error::CorruptSequence(format!("decoded faces: {e}")))
}

/// Full connectivity reconstruction. Vertex labels follow first-visit order.
pub fn decode_connectivity(seq: &ClersSequence) -> Result<QtMesh> {
    let surface = wrap(seq)?;
    let tris = zip(&surface)?;
    merge_quads(&tris, seq, surface.vertex_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;
    use crate::traversal::{encode_clers, Gate};

    fn relabeled_canon(m: &QtMesh, order: &[usize]) -> Vec<Vec<usize>> {
        let mut lab = vec![0; order.len()];
        for (i, &v) in order.iter().enumerate() {
            lab[v] = i;
        }
        m.relabeled(&lab).unwrap().canonical_faces()
    }

    #[test]
    fn cube_round_trip() {
        let cube = generate::cube();
        let tr = encode_clers(&cube, Gate::Default).unwrap();
        let surface = wrap(&tr.sequence).unwrap();
        assert_eq!(surface.triangles.len(), 12);
        assert_eq!(surface.boundary.len(), 14);
        let tris = zip(&surface).unwrap();
        assert_eq!(tris.len(), 12);
        let out = merge_quads(&tris, &tr.sequence, surface.vertex_count).unwrap();
        assert_eq!(out.face_count(), 6);
        assert_eq!(out.canonical_faces(), relabeled_canon(&cube, &tr.vertex_order));
    }

    #[test]
    fn triangle_meshes_round_trip() {
        for m in [generate::tetrahedron(), generate::icosahedron(), generate::sphere_hull(300, 3)] {
            let tr = encode_clers(&m, Gate::Default).unwrap();
            let surface = wrap(&tr.sequence).unwrap();
            assert_eq!(surface.triangles.len(), m.face_count());
            let out = decode_connectivity(&tr.sequence).unwrap();
            let t = out.topo_counts();
            assert_eq!(2 * t.e, 3 * t.f);
            assert_eq!(out.canonical_faces(), relabeled_canon(&m, &tr.vertex_order));
        }
    }

    #[test]
    fn every_gate_of_subdivided_cube() {
        let m = generate::catmull_clark_topology(generate::cube().as_poly()).unwrap();
        for h in 0..m.half_edge_count() {
            let tr = encode_clers(&m, Gate::Edge(m.origin(h), m.target(h))).unwrap();
            let out = decode_connectivity(&tr.sequence).unwrap();
            assert_eq!(out.canonical_faces(), relabeled_canon(&m, &tr.vertex_order));
        }
    }

    #[test]
    fn single_cc_fails_in_zip() {
        let seq = ClersSequence::new(vec![FaceCode::Quad(Label::C, Label::C)], (0, 1));
        let s = wrap(&seq).unwrap();
        assert_eq!(s.triangles.len(), 2);
        assert!(matches!(zip(&s), Err(Error::Unzippable(_))));
        // a closable-looking prefix is still rejected somewhere before output
        let cube = generate::cube();
        let tr = encode_clers(&cube, Gate::Default).unwrap();
        let mut codes = tr.sequence.codes.clone();
        codes.pop();
        assert!(decode_connectivity(&ClersSequence::new(codes, (0, 1))).is_err());
    }

    #[test]
    fn unbalanced_boundary_is_unzippable() {
        // wraps fine, but arrow counts cannot pair up
        let seq = ClersSequence::new(vec![FaceCode::Tri(Label::E)], (0, 1));
        let s = wrap(&seq).unwrap();
        assert!(matches!(zip(&s), Err(Error::Unzippable(_))));
    }
}
