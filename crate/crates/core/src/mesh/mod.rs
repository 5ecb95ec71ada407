//! Indexed manifold polygon meshes with derived half-edge adjacency.
//!
//! [`PolyMesh`] accepts faces of any size (at least three sides) and is the
//! ingestion type for files that may carry larger polygons. [`QtMesh`] wraps a
//! `PolyMesh` whose faces are all triangles or quads and is the type the codec
//! operates on.
//!
//! Half-edges are identified with face corners: half-edge `h` starts at
//! `corners[h]` and ends at the next corner of the same face.

pub mod generate;
pub mod io;

use std::ops::Deref;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct PolyMesh {
    vertex_count: usize,
    corners: Vec<usize>,
    offsets: Vec<usize>,
    face_of: Vec<usize>,
    twin: Vec<usize>,
    boundary_loops: Vec<Vec<usize>>,
    coords: Option<Vec<String>>,
}

/// Topological counts of a mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TopoCounts {
    pub v: usize,
    pub e: usize,
    pub f: usize,
    pub q: usize,
    pub t: usize,
    pub holes: usize,
    pub euler_characteristic: i64,
    /// `None` for meshes with boundary.
    pub genus: Option<i64>,
}

impl TopoCounts {
    /// Closed and topologically a sphere.
    pub fn is_simple(&self) -> bool {
        self.holes == 0 && self.euler_characteristic == 2
    }
}

impl PolyMesh {
    /// Builds and validates a mesh from vertex-index lists.
    pub fn new<F, I>(vertex_count: usize, faces: I) -> Result<Self>
    where
        I: IntoIterator<Item = F>,
        F: AsRef<[usize]>,
    {
        let mut corners = Vec::new();
        let mut offsets = vec![0];
        for face in faces {
            corners.extend_from_slice(face.as_ref());
            offsets.push(corners.len());
        }
        Self::from_flat(vertex_count, corners, offsets)
    }

    pub(crate) fn from_flat(
        vertex_count: usize,
        corners: Vec<usize>,
        offsets: Vec<usize>,
    ) -> Result<Self> {
        let face_count = offsets.len() - 1;
        let mut face_of = vec![0; corners.len()];
        for f in 0..face_count {
            let (lo, hi) = (offsets[f], offsets[f + 1]);
            if hi - lo < 3 {
                return Err(Error::FaceTooSmall {
                    face: f,
                    size: hi - lo,
                });
            }
            for k in lo..hi {
                let v = corners[k];
                if v >= vertex_count {
                    return Err(Error::IndexOutOfRange {
                        face: f,
                        index: v as i64,
                        vertex_count,
                    });
                }
                if corners[lo..k].contains(&v) {
                    return Err(Error::DegenerateFace { face: f, vertex: v });
                }
                face_of[k] = f;
            }
        }

        let mut mesh = PolyMesh {
            vertex_count,
            corners,
            offsets,
            face_of,
            twin: Vec::new(),
            boundary_loops: Vec::new(),
            coords: None,
        };
        mesh.link_twins()?;
        mesh.check_vertices()?;
        mesh.boundary_loops = mesh.trace_boundary_loops();
        Ok(mesh)
    }

    fn link_twins(&mut self) -> Result<()> {
        let n = self.corners.len();
        let mut uses: FxHashMap<(usize, usize), (usize, usize)> = FxHashMap::default();
        uses.reserve(n);
        for h in 0..n {
            let (a, b) = (self.origin(h), self.target(h));
            let key = (a.min(b), a.max(b));
            match uses.get_mut(&key) {
                None => {
                    uses.insert(key, (h, NONE));
                }
                Some(slot) if slot.1 == NONE => slot.1 = h,
                Some(_) => return Err(Error::NonManifoldEdge(key.0, key.1)),
            }
        }
        let mut twin = vec![NONE; n];
        for (&(a, b), &(h0, h1)) in &uses {
            if h1 == NONE {
                continue;
            }
            if self.origin(h0) == self.origin(h1) {
                return Err(Error::InconsistentOrientation(a, b));
            }
            twin[h0] = h1;
            twin[h1] = h0;
        }
        self.twin = twin;
        Ok(())
    }

    /// Rejects isolated vertices and vertices whose faces form more than one fan.
    fn check_vertices(&self) -> Result<()> {
        let mut incident = vec![0usize; self.vertex_count];
        let mut some_out = vec![NONE; self.vertex_count];
        for h in 0..self.corners.len() {
            let v = self.corners[h];
            incident[v] += 1;
            // prefer a half-edge with no clockwise neighbour so the fan walk covers everything
            if some_out[v] == NONE || self.twin[self.prev(h)] == NONE {
                some_out[v] = h;
            }
        }
        for v in 0..self.vertex_count {
            if incident[v] == 0 {
                return Err(Error::IsolatedVertex(v));
            }
            let start = some_out[v];
            let mut seen = 1;
            let mut h = start;
            loop {
                // counter-clockwise: next outgoing half-edge around v
                let t = self.twin[h];
                if t == NONE {
                    break;
                }
                h = self.next(t);
                if h == start {
                    break;
                }
                seen += 1;
                if seen > incident[v] {
                    break;
                }
            }
            if seen != incident[v] {
                return Err(Error::NonManifoldVertex(v));
            }
        }
        Ok(())
    }

    fn trace_boundary_loops(&self) -> Vec<Vec<usize>> {
        let n = self.corners.len();
        let mut boundary_out = vec![NONE; self.vertex_count];
        for h in 0..n {
            if self.twin[h] == NONE {
                boundary_out[self.origin(h)] = h;
            }
        }
        let mut used = vec![false; n];
        let mut loops = Vec::new();
        for h0 in 0..n {
            if self.twin[h0] != NONE || used[h0] {
                continue;
            }
            let mut lp = Vec::new();
            let mut h = h0;
            while !used[h] {
                used[h] = true;
                lp.push(self.origin(h));
                h = boundary_out[self.target(h)];
            }
            loops.push(lp);
        }
        loops
    }

    /// Attaches an opaque per-vertex coordinate payload.
    pub fn with_coords(mut self, coords: Vec<String>) -> Result<Self> {
        if coords.len() != self.vertex_count {
            return Err(Error::CoordinateCount {
                expected: self.vertex_count,
                got: coords.len(),
            });
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn without_coords(mut self) -> Self {
        self.coords = None;
        self
    }

    pub fn coords(&self) -> Option<&[String]> {
        self.coords.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn face_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn face(&self, f: usize) -> &[usize] {
        &self.corners[self.offsets[f]..self.offsets[f + 1]]
    }

    pub fn faces(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        (0..self.face_count()).map(move |f| self.face(f))
    }

    pub fn face_size(&self, f: usize) -> usize {
        self.offsets[f + 1] - self.offsets[f]
    }

    /// First half-edge of face `f`.
    pub fn face_half_edge(&self, f: usize) -> usize {
        self.offsets[f]
    }

    pub fn half_edge_count(&self) -> usize {
        self.corners.len()
    }

    pub fn origin(&self, h: usize) -> usize {
        self.corners[h]
    }

    pub fn target(&self, h: usize) -> usize {
        self.corners[self.next(h)]
    }

    pub fn next(&self, h: usize) -> usize {
        let f = self.face_of[h];
        if h + 1 == self.offsets[f + 1] {
            self.offsets[f]
        } else {
            h + 1
        }
    }

    pub fn prev(&self, h: usize) -> usize {
        let f = self.face_of[h];
        if h == self.offsets[f] {
            self.offsets[f + 1] - 1
        } else {
            h - 1
        }
    }

    pub fn twin(&self, h: usize) -> Option<usize> {
        let t = self.twin[h];
        (t != NONE).then_some(t)
    }

    pub fn half_edge_face(&self, h: usize) -> usize {
        self.face_of[h]
    }

    /// Half-edge `u -> v`, if some face uses it.
    pub fn find_half_edge(&self, u: usize, v: usize) -> Option<usize> {
        (0..self.corners.len()).find(|&h| self.corners[h] == u && self.target(h) == v)
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_loops.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        let boundary = self.twin.iter().filter(|&&t| t == NONE).count();
        (self.corners.len() + boundary) / 2
    }

    /// Number of incident edges per vertex.
    pub fn valences(&self) -> Vec<usize> {
        let mut val = vec![0; self.vertex_count];
        for h in 0..self.corners.len() {
            val[self.corners[h]] += 1;
            if self.twin[h] == NONE {
                // boundary edge counted from its only side
                val[self.target(h)] += 1;
            }
        }
        val
    }

    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.face_count()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for h in 0..self.corners.len() {
            if let Some(t) = self.twin(h) {
                let (a, b) = (find(&mut parent, self.face_of[h]), find(&mut parent, self.face_of[t]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        (0..self.face_count()).filter(|&f| find(&mut parent, f) == f).count()
    }

    pub fn topo_counts(&self) -> TopoCounts {
        let (v, e, f) = (self.vertex_count, self.edge_count(), self.face_count());
        let q = (0..f).filter(|&i| self.face_size(i) == 4).count();
        let t = (0..f).filter(|&i| self.face_size(i) == 3).count();
        let chi = v as i64 - e as i64 + f as i64;
        let holes = self.boundary_loops.len();
        TopoCounts {
            v,
            e,
            f,
            q,
            t,
            holes,
            euler_characteristic: chi,
            genus: (holes == 0).then(|| (2 - chi) / 2),
        }
    }

    pub fn max_face_size(&self) -> usize {
        (0..self.face_count()).map(|f| self.face_size(f)).max().unwrap_or(0)
    }

    /// Faces rotated so their smallest vertex comes first, then sorted.
    ///
    /// Two meshes over the same vertex labels have identical connectivity
    /// (including orientation) iff their canonical face lists are equal.
    pub fn canonical_faces(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.faces().map(normalize_face).collect();
        out.sort_unstable();
        out
    }

    /// Same connectivity after mapping this mesh's vertex `i` to `map[i]`.
    pub fn relabeled(&self, map: &[usize]) -> Result<PolyMesh> {
        let corners = self.corners.iter().map(|&v| map[v]).collect();
        let mut out = PolyMesh::from_flat(self.vertex_count, corners, self.offsets.clone())?;
        if let Some(c) = &self.coords {
            let mut moved = vec![String::new(); c.len()];
            for (i, s) in c.iter().enumerate() {
                moved[map[i]] = s.clone();
            }
            out.coords = Some(moved);
        }
        Ok(out)
    }

    pub fn is_qt(&self) -> bool {
        (0..self.face_count()).all(|f| matches!(self.face_size(f), 3 | 4))
    }
}

impl PartialEq for PolyMesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count
            && self.offsets == other.offsets
            && self.corners == other.corners
    }
}

impl Eq for PolyMesh {}

pub(crate) fn normalize_face(face: &[usize]) -> Vec<usize> {
    let k = (0..face.len()).min_by_key(|&i| face[i]).unwrap_or(0);
    face[k..].iter().chain(&face[..k]).copied().collect()
}

/// A manifold mesh whose faces are all triangles or quads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QtMesh(PolyMesh);

impl QtMesh {
    pub fn new<F, I>(vertex_count: usize, faces: I) -> Result<Self>
    where
        I: IntoIterator<Item = F>,
        F: AsRef<[usize]>,
    {
        Self::try_from(PolyMesh::new(vertex_count, faces)?)
    }

    pub fn with_coords(self, coords: Vec<String>) -> Result<Self> {
        Ok(QtMesh(self.0.with_coords(coords)?))
    }

    pub fn without_coords(self) -> Self {
        QtMesh(self.0.without_coords())
    }

    pub fn relabeled(&self, map: &[usize]) -> Result<QtMesh> {
        Ok(QtMesh(self.0.relabeled(map)?))
    }

    pub fn as_poly(&self) -> &PolyMesh {
        &self.0
    }

    pub fn into_poly(self) -> PolyMesh {
        self.0
    }

    pub fn is_pure_quad(&self) -> bool {
        (0..self.face_count()).all(|f| self.face_size(f) == 4)
    }

    pub fn is_pure_triangle(&self) -> bool {
        (0..self.face_count()).all(|f| self.face_size(f) == 3)
    }
}

impl TryFrom<PolyMesh> for QtMesh {
    type Error = Error;

    fn try_from(mesh: PolyMesh) -> Result<Self> {
        if let Some(f) = (0..mesh.face_count()).find(|&f| mesh.face_size(f) > 4) {
            return Err(Error::FaceTooLarge {
                face: f,
                size: mesh.face_size(f),
            });
        }
        Ok(QtMesh(mesh))
    }
}

impl Deref for QtMesh {
    type Target = PolyMesh;

    fn deref(&self) -> &PolyMesh {
        &self.0
    }
}

/// Counts for a QT mesh.
pub fn topo_counts(mesh: &QtMesh) -> TopoCounts {
    mesh.as_poly().topo_counts()
}
