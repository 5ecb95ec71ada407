//! Transformations into and out of the codec's domain: hole patching,
//! valence-two removal, and splitting of large polygons.

use crate::error::{Error, Result};
use crate::mesh::{normalize_face, PolyMesh, QtMesh};

/// One patched hole: the dummy vertex and the number of boundary edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DummyEntry {
    pub vertex: usize,
    pub hole_size: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DummyVertexTable {
    pub entries: Vec<DummyEntry>,
}

impl DummyVertexTable {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Same table after relabeling vertex `i` as `map[i]`.
    pub fn relabeled(&self, map: &[usize]) -> DummyVertexTable {
        DummyVertexTable {
            entries: self
                .entries
                .iter()
                .map(|e| DummyEntry {
                    vertex: map[e.vertex],
                    hole_size: e.hole_size,
                })
                .collect(),
        }
    }
}

/// Closes every boundary loop with a dummy vertex. Dummies are appended after
/// the original vertices, one per loop, in loop order. Pairs of consecutive
/// fan triangles become quads, starting from the loop edge with the smallest
/// vertex pair; an odd loop keeps one triangle.
pub fn patch_holes(mesh: &QtMesh) -> Result<(QtMesh, DummyVertexTable)> {
    if mesh.is_closed() {
        return Ok((mesh.clone(), DummyVertexTable::default()));
    }
    let v0 = mesh.vertex_count();
    let mut faces: Vec<Vec<usize>> = mesh.faces().map(<[usize]>::to_vec).collect();
    let mut table = DummyVertexTable::default();
    for (i, lp) in mesh.boundary_loops().iter().enumerate() {
        let d = v0 + i;
        let k = lp.len();
        let key = |j: usize| {
            let (a, b) = (lp[j], lp[(j + 1) % k]);
            (a.min(b), a.max(b))
        };
        let s = (0..k).min_by_key(|&j| key(j)).expect("loops are non-empty");
        let b = |j: usize| lp[(s + j) % k];
        let mut j = 0;
        while j + 1 < k {
            faces.push(vec![b(j + 2), b(j + 1), b(j), d]);
            j += 2;
        }
        if j < k {
            faces.push(vec![b(j + 1), b(j), d]);
        }
        table.entries.push(DummyEntry {
            vertex: d,
            hole_size: k,
        });
    }
    let out = QtMesh::new(v0 + table.len(), &faces)?;
    Ok((with_coords_extended(out, mesh.coords(), table.len())?, table))
}

fn with_coords_extended(mesh: QtMesh, coords: Option<&[String]>, extra: usize) -> Result<QtMesh> {
    match coords {
        Some(c) => {
            let mut c = c.to_vec();
            c.extend(std::iter::repeat_n(String::from("0 0 0"), extra));
            mesh.with_coords(c)
        }
        None => Ok(mesh),
    }
}

/// Deletes the dummy vertices and their fans. Surviving vertices keep their
/// relative order.
pub fn unpatch_holes(mesh: &QtMesh, table: &DummyVertexTable) -> Result<QtMesh> {
    if table.is_empty() {
        return Ok(mesh.clone());
    }
    let n = mesh.vertex_count();
    let mut is_dummy = vec![false; n];
    let mut fan = vec![0usize; n];
    for e in &table.entries {
        if e.vertex >= n || is_dummy[e.vertex] {
            return Err(Error::DummyTable(format!("bad dummy vertex {}", e.vertex)));
        }
        if e.hole_size < 3 {
            return Err(Error::DummyTable(format!("hole size {} is too small", e.hole_size)));
        }
        is_dummy[e.vertex] = true;
    }
    let mut faces = Vec::new();
    for face in mesh.faces() {
        let dummies: Vec<usize> = face.iter().copied().filter(|&v| is_dummy[v]).collect();
        match dummies.as_slice() {
            [] => faces.push(face.to_vec()),
            [d] => fan[*d] += 1,
            _ => return Err(Error::DummyTable("face joins two dummy vertices".into())),
        }
    }
    for e in &table.entries {
        if fan[e.vertex] != e.hole_size.div_ceil(2) {
            return Err(Error::DummyTable(format!(
                "dummy vertex {} has {} faces, expected {} for a hole of {}",
                e.vertex,
                fan[e.vertex],
                e.hole_size.div_ceil(2),
                e.hole_size
            )));
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if !is_dummy[v] {
            map[v] = next;
            next += 1;
        }
    }
    let faces: Vec<Vec<usize>> = faces
        .into_iter()
        .map(|f| f.into_iter().map(|v| map[v]).collect())
        .collect();
    let out = QtMesh::new(next, &faces).map_err(|e| Error::DummyTable(format!("unpatched mesh: {e}")))?;
    let mut sizes: Vec<usize> = out.boundary_loops().iter().map(Vec::len).collect();
    let mut want: Vec<usize> = table.entries.iter().map(|e| e.hole_size).collect();
    sizes.sort_unstable();
    want.sort_unstable();
    if sizes != want {
        return Err(Error::DummyTable("restored holes do not match the table".into()));
    }
    match mesh.coords() {
        Some(c) => out.with_coords((0..n).filter(|&v| !is_dummy[v]).map(|v| c[v].clone()).collect()),
        None => Ok(out),
    }
}

/// Split flags and diagonal selectors for one removal round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValenceTwoRound {
    /// One flag per face of the mesh this round is applied to, in canonical
    /// face order (see [`PolyMesh::canonical_faces`]).
    pub split: Vec<bool>,
    /// One bit per set flag: false when the reinserted vertex joins the
    /// face's smallest vertex and the vertex opposite it.
    pub selector: Vec<bool>,
}

/// Everything needed to undo [`remove_valence_two`]. Rounds are listed in
/// reinsertion order (the last removal round first).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValenceTwoTable {
    pub rounds: Vec<ValenceTwoRound>,
}

impl ValenceTwoTable {
    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn removed_count(&self) -> usize {
        self.rounds.iter().map(|r| r.selector.len()).sum()
    }

    /// Raw size: one bit per flag and per selector.
    pub fn raw_bits(&self) -> usize {
        self.rounds.iter().map(|r| r.split.len() + r.selector.len()).sum()
    }
}

#[derive(Clone, Debug)]
struct Removal {
    vertex: usize,
    /// Union face `[a, b, c, d]`; the removed vertex was joined to `a` and `c`.
    union: [usize; 4],
}

/// Output of [`remove_valence_two`].
#[derive(Clone, Debug)]
pub struct ValenceTwoReduction {
    pub mesh: QtMesh,
    /// Table in the labels of `mesh`.
    pub table: ValenceTwoTable,
    /// `survivors[i]` is the input vertex that became vertex `i` of `mesh`.
    pub survivors: Vec<usize>,
    input_vertex_count: usize,
    rounds: Vec<Vec<Removal>>,
}

impl ValenceTwoReduction {
    pub fn removed_count(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    /// Table for a relabeled reduced mesh, where reduced vertex `i` is called
    /// `map[i]`. Also returns, per input vertex, its label after
    /// [`reinsert_valence_two`] runs on the relabeled mesh.
    pub fn table_relabeled(&self, map: &[usize]) -> Result<(ValenceTwoTable, Vec<usize>)> {
        let mut label = vec![usize::MAX; self.input_vertex_count];
        for (i, &orig) in self.survivors.iter().enumerate() {
            label[orig] = map[i];
        }
        let mut faces: Vec<Vec<usize>> = self
            .mesh
            .faces()
            .map(|f| normalize_face(&f.iter().map(|&v| map[v]).collect::<Vec<_>>()))
            .collect();
        let mut next = self.mesh.vertex_count();
        let mut table = ValenceTwoTable::default();
        for round in self.rounds.iter().rev() {
            faces.sort_unstable();
            let mut hits: Vec<(usize, bool, usize)> = Vec::with_capacity(round.len());
            for r in round {
                let u: Vec<usize> = r.union.iter().map(|&v| label[v]).collect();
                if u.contains(&usize::MAX) {
                    return Err(Error::Internal("union face references an unlabeled vertex".into()));
                }
                let norm = normalize_face(&u);
                let idx = faces
                    .binary_search(&norm)
                    .map_err(|_| Error::Internal("union face missing during replay".into()))?;
                // rotation offset of `a` inside the normalized face
                let pos = norm.iter().position(|&v| v == u[0]).expect("a is in its face");
                hits.push((idx, pos % 2 == 1, r.vertex));
            }
            hits.sort_unstable();
            let mut split = vec![false; faces.len()];
            let mut selector = Vec::with_capacity(hits.len());
            let mut splits = Vec::with_capacity(hits.len());
            for &(idx, sel, vertex) in &hits {
                split[idx] = true;
                selector.push(sel);
                splits.push((idx, sel));
                label[vertex] = next;
                next += 1;
            }
            apply_round(&mut faces, &splits, next - hits.len());
            table.rounds.push(ValenceTwoRound { split, selector });
        }
        Ok((table, label))
    }
}

/// Splits `faces[idx]` for every `(idx, selector)` (indices ascending),
/// giving the new vertices labels `first_label, first_label + 1, ...`.
fn apply_round(faces: &mut Vec<Vec<usize>>, splits: &[(usize, bool)], first_label: usize) {
    let mut extra = Vec::with_capacity(splits.len());
    for (k, &(idx, sel)) in splits.iter().enumerate() {
        let w = faces[idx].clone();
        let x = first_label + k;
        let r = usize::from(sel);
        let (a, b, c, d) = (w[r], w[(r + 1) % 4], w[(r + 2) % 4], w[(r + 3) % 4]);
        faces[idx] = normalize_face(&[x, a, b, c]);
        extra.push(normalize_face(&[x, c, d, a]));
    }
    faces.extend(extra);
}

/// Removes internal valence-two vertices round by round until none remain.
///
/// Within a round, candidates are taken in ascending vertex order; a vertex
/// whose faces were already merged in this round waits for the next one.
pub fn remove_valence_two(mesh: &QtMesh) -> Result<ValenceTwoReduction> {
    if !mesh.is_closed() {
        return Err(Error::HasBoundary);
    }
    if let Some(f) = (0..mesh.face_count()).find(|&f| mesh.face_size(f) != 4) {
        return Err(Error::Precondition(format!(
            "valence-two removal needs a pure-quad mesh (face {f} is a triangle)"
        )));
    }
    let n = mesh.vertex_count();
    let mut faces: Vec<Option<[usize; 4]>> = mesh
        .faces()
        .map(|f| Some([f[0], f[1], f[2], f[3]]))
        .collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, f) in faces.iter().enumerate() {
        for &v in f.as_ref().expect("fresh") {
            incident[v].push(i);
        }
    }
    let mut removed = vec![false; n];
    let mut rounds: Vec<Vec<Removal>> = Vec::new();

    loop {
        let candidates: Vec<usize> = (0..n).filter(|&v| !removed[v] && incident[v].len() == 2).collect();
        if candidates.is_empty() {
            break;
        }
        let mut merged = vec![false; faces.len()];
        let mut round = Vec::new();
        for v in candidates {
            if incident[v].len() != 2 {
                continue;
            }
            let (f1, f2) = (incident[v][0], incident[v][1]);
            if merged[f1] || merged[f2] {
                continue;
            }
            let q1 = rotated_to(faces[f1].expect("live"), v);
            let q2 = rotated_to(faces[f2].expect("live"), v);
            // q1 = [v, a, b, c] and q2 = [v, c, d, a]
            let (a, b, c) = (q1[1], q1[2], q1[3]);
            let d = q2[2];
            if q2[1] != c || q2[3] != a {
                return Err(Error::Internal(format!("faces around vertex {v} are not a fan")));
            }
            if b == d {
                return Err(Error::IrreducibleConfiguration(v));
            }
            let union = [a, b, c, d];
            faces[f1] = Some(union);
            faces[f2] = None;
            merged[f1] = true;
            for w in [a, c] {
                incident[w].retain(|&f| f != f2);
            }
            let inc_d = &mut incident[d];
            for f in inc_d.iter_mut() {
                if *f == f2 {
                    *f = f1;
                }
            }
            incident[v].clear();
            removed[v] = true;
            round.push(Removal { vertex: v, union });
        }
        rounds.push(round);
        // the round's result must still be a valid closed mesh
        if let Err(e) = compact(n, &faces, &removed) {
            let first = rounds.last().and_then(|r| r.first()).map(|r| r.vertex).unwrap_or(0);
            return Err(match e {
                Error::IrreducibleConfiguration(_) => e,
                _ => Error::IrreducibleConfiguration(first),
            });
        }
    }

    let (reduced, survivors) = compact(n, &faces, &removed)?;
    let reduced = match mesh.coords() {
        Some(c) => reduced.with_coords(survivors.iter().map(|&v| c[v].clone()).collect())?,
        None => reduced,
    };
    let mut red = ValenceTwoReduction {
        mesh: reduced,
        table: ValenceTwoTable::default(),
        survivors,
        input_vertex_count: n,
        rounds,
    };
    let identity: Vec<usize> = (0..red.mesh.vertex_count()).collect();
    red.table = red.table_relabeled(&identity)?.0;
    Ok(red)
}

fn rotated_to(f: [usize; 4], v: usize) -> [usize; 4] {
    let k = f.iter().position(|&w| w == v).expect("vertex in face");
    [f[k], f[(k + 1) % 4], f[(k + 2) % 4], f[(k + 3) % 4]]
}

fn compact(n: usize, faces: &[Option<[usize; 4]>], removed: &[bool]) -> Result<(QtMesh, Vec<usize>)> {
    let mut map = vec![usize::MAX; n];
    let mut survivors = Vec::new();
    for v in 0..n {
        if !removed[v] {
            map[v] = survivors.len();
            survivors.push(v);
        }
    }
    let out: Vec<[usize; 4]> = faces
        .iter()
        .flatten()
        .map(|f| [map[f[0]], map[f[1]], map[f[2]], map[f[3]]])
        .collect();
    Ok((QtMesh::new(survivors.len(), &out)?, survivors))
}

/// Reverses [`remove_valence_two`]. New vertices are appended in reinsertion
/// order; within a round, in canonical face order.
pub fn reinsert_valence_two(mesh: &QtMesh, table: &ValenceTwoTable) -> Result<QtMesh> {
    if table.is_empty() {
        return Ok(mesh.clone());
    }
    let mut faces = mesh.canonical_faces();
    let mut next = mesh.vertex_count();
    for (r, round) in table.rounds.iter().enumerate() {
        faces.sort_unstable();
        if round.split.len() != faces.len() {
            return Err(Error::ValenceTwoTable(format!(
                "round {r} has {} flags for {} faces",
                round.split.len(),
                faces.len()
            )));
        }
        let ones = round.split.iter().filter(|&&b| b).count();
        if ones != round.selector.len() {
            return Err(Error::ValenceTwoTable(format!(
                "round {r} has {ones} splits but {} selectors",
                round.selector.len()
            )));
        }
        let splits: Vec<(usize, bool)> = round
            .split
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| i)
            .zip(round.selector.iter().copied())
            .collect();
        if let Some(&(i, _)) = splits.iter().find(|&&(i, _)| faces[i].len() != 4) {
            return Err(Error::ValenceTwoTable(format!("round {r} splits triangle {i}")));
        }
        apply_round(&mut faces, &splits, next);
        next += splits.len();
    }
    let out = QtMesh::new(next, &faces).map_err(|e| Error::ValenceTwoTable(format!("reinserted mesh: {e}")))?;
    match mesh.coords() {
        Some(c) => {
            let mut c = c.to_vec();
            c.extend(std::iter::repeat_n(String::from("0 0 0"), next - mesh.vertex_count()));
            out.with_coords(c)
        }
        None => Ok(out),
    }
}

/// Estimated cost for a mesh with `v_prime` removed valence-two vertices:
/// the reduced mesh at 2.67 bits per vertex plus entropy-coded split flags
/// over `q` quads.
pub fn valence_two_cost_bound(v: usize, v_prime: usize, q: usize) -> Result<f64> {
    if v_prime >= q {
        return Err(Error::Precondition(format!("V' = {v_prime} must be below Q = {q}")));
    }
    let (v, vp, q) = (v as f64, v_prime as f64, q as f64);
    if vp == 0.0 {
        return Ok(2.67 * v);
    }
    let p = vp / q;
    Ok(2.67 * v - 1.75 * vp - vp * p.log2() + (vp - q) * (1.0 - p).log2())
}

/// Fans every face with more than four sides into quads and at most one
/// triangle, anchored at the face's smallest vertex.
pub fn split_large_polygons(mesh: &PolyMesh) -> Result<QtMesh> {
    if mesh.is_qt() {
        return QtMesh::try_from(mesh.clone());
    }
    let mut faces = Vec::with_capacity(mesh.face_count());
    for face in mesh.faces() {
        let w = normalize_face(face);
        let n = w.len();
        if n <= 4 {
            faces.push(face.to_vec());
            continue;
        }
        let mut k = 1;
        while k + 2 < n {
            faces.push(vec![w[0], w[k], w[k + 1], w[k + 2]]);
            k += 2;
        }
        if k + 1 < n {
            faces.push(vec![w[0], w[k], w[k + 1]]);
        }
    }
    let out = QtMesh::new(mesh.vertex_count(), &faces)?;
    match mesh.coords() {
        Some(c) => out.with_coords(c.to_vec()),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;

    fn edge_count(mesh: &PolyMesh) -> usize {
        let mut e: Vec<(usize, usize)> = (0..mesh.half_edge_count())
            .map(|h| {
                let (a, b) = (mesh.origin(h), mesh.target(h));
                (a.min(b), a.max(b))
            })
            .collect();
        e.sort_unstable();
        e.dedup();
        e.len()
    }

    fn strip(m: &QtMesh) -> Vec<Vec<usize>> {
        m.canonical_faces()
    }

    #[test]
    fn patch_grid() {
        let g = generate::grid(2, 2);
        let (p, table) = patch_holes(&g).unwrap();
        let t = p.topo_counts();
        assert_eq!((t.v, t.q, t.t, t.holes), (10, 8, 0, 0));
        assert_eq!(t.euler_characteristic, 2);
        assert_eq!(table.entries, vec![DummyEntry { vertex: 9, hole_size: 8 }]);
        let back = unpatch_holes(&p, &table).unwrap();
        assert_eq!(strip(&back), strip(&g));
        assert_eq!(back.coords(), g.coords());
    }

    #[test]
    fn closed_mesh_is_untouched() {
        let c = generate::cube();
        let (p, table) = patch_holes(&c).unwrap();
        assert!(table.is_empty());
        assert_eq!(p, c);
        assert_eq!(unpatch_holes(&c, &table).unwrap(), c);
    }

    #[test]
    fn odd_hole_leaves_one_triangle() {
        // quad plus triangle: a disk bounded by five edges
        let m = QtMesh::new(5, [vec![0, 1, 2, 3], vec![0, 3, 4]]).unwrap();
        assert_eq!(m.boundary_loops()[0].len(), 5);
        let (p, table) = patch_holes(&m).unwrap();
        let t = p.topo_counts();
        assert_eq!((t.v, t.q, t.t, t.holes), (6, 3, 2, 0));
        assert_eq!(table.entries[0].hole_size, 5);
        let back = unpatch_holes(&p, &table).unwrap();
        assert_eq!(strip(&back), strip(&m));
        assert_eq!(back.boundary_loops()[0].len(), 5);
    }

    #[test]
    fn patch_starts_at_smallest_edge() {
        let g = generate::grid(1, 2);
        let (p, _) = patch_holes(&g).unwrap();
        // loop edge (0, 1) begins the pairing
        let first_patch = p.face(g.face_count());
        assert!(first_patch.contains(&0) && first_patch.contains(&1) && first_patch.contains(&6));
    }

    #[test]
    fn corrupt_dummy_table() {
        let (p, mut table) = patch_holes(&generate::grid(2, 2)).unwrap();
        table.entries[0].hole_size = 6;
        assert!(matches!(unpatch_holes(&p, &table), Err(Error::DummyTable(_))));
        table.entries[0] = DummyEntry { vertex: 0, hole_size: 8 };
        assert!(unpatch_holes(&p, &table).is_err());
    }

    #[test]
    fn valence_two_cube_is_unchanged() {
        let r = remove_valence_two(&generate::cube()).unwrap();
        assert!(r.table.is_empty());
        assert_eq!(r.removed_count(), 0);
        assert_eq!(strip(&r.mesh), strip(&generate::cube()));
    }

    #[test]
    fn pillow_is_irreducible() {
        let pillow = QtMesh::new(4, [[0usize, 1, 2, 3], [0, 3, 2, 1]]).unwrap();
        assert!(pillow.topo_counts().is_simple());
        let err = remove_valence_two(&pillow).unwrap_err();
        assert!(matches!(err, Error::IrreducibleConfiguration(_)), "{err}");
        assert!(err.to_string().contains("irreducible configuration"));
    }

    #[test]
    fn single_insertion_round_trip() {
        let base = generate::catmull_clark_topology(generate::cube().as_poly()).unwrap();
        let with = generate::insert_valence_two(&base, &[(5, false)]).unwrap();
        assert_eq!(with.vertex_count(), 27);
        let r = remove_valence_two(&with).unwrap();
        assert_eq!(r.removed_count(), 1);
        assert_eq!(r.table.rounds.len(), 1);
        assert_eq!(r.table.removed_count(), 1);
        assert_eq!(strip(&r.mesh), strip(&base));
        assert!(r.mesh.valences().iter().all(|&k| k != 2));

        let back = reinsert_valence_two(&r.mesh, &r.table).unwrap();
        assert_eq!(strip(&back), strip(&with));
    }

    #[test]
    fn relabeled_table_replays() {
        let base = generate::catmull_clark_topology(generate::cube().as_poly()).unwrap();
        let with = generate::insert_valence_two_random(&base, 7, 11).unwrap();
        let r = remove_valence_two(&with).unwrap();
        let n = r.mesh.vertex_count();
        let map: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        let relabeled = r.mesh.relabeled(&map).unwrap();
        let (table, labels) = r.table_relabeled(&map).unwrap();
        let back = reinsert_valence_two(&relabeled, &table).unwrap();
        assert_eq!(strip(&back), strip(&with.relabeled(&labels).unwrap()));
    }

    #[test]
    fn chained_insertions_need_several_rounds() {
        let base = generate::catmull_clark_topology(generate::cube().as_poly()).unwrap();
        let once = generate::insert_valence_two(&base, &[(0, false)]).unwrap();
        let f = once.face_count() - 1;
        let twice = generate::insert_valence_two(&once, &[(f, true)]).unwrap();
        let r = remove_valence_two(&twice).unwrap();
        assert_eq!(r.removed_count(), 2);
        // removal order decides the reinserted labels
        let identity: Vec<usize> = (0..r.mesh.vertex_count()).collect();
        let (_, labels) = r.table_relabeled(&identity).unwrap();
        assert_eq!(labels[26], 27);
        let back = reinsert_valence_two(&r.mesh, &r.table).unwrap();
        assert_eq!(strip(&back), strip(&twice.relabeled(&labels).unwrap()));
    }

    #[test]
    fn wrong_flag_count() {
        let base = generate::catmull_clark_topology(generate::cube().as_poly()).unwrap();
        let with = generate::insert_valence_two(&base, &[(3, true)]).unwrap();
        let r = remove_valence_two(&with).unwrap();
        let mut bad = r.table.clone();
        bad.rounds[0].split.push(false);
        assert!(matches!(reinsert_valence_two(&r.mesh, &bad), Err(Error::ValenceTwoTable(_))));
        assert_eq!(reinsert_valence_two(&r.mesh, &ValenceTwoTable::default()).unwrap(), r.mesh);
    }

    #[test]
    fn cost_bound_values() {
        assert_eq!(valence_two_cost_bound(100, 0, 98).unwrap(), 267.0);
        // direct evaluation of the closed form
        let p: f64 = 10.0 / 98.0;
        let want = 267.0 - 17.5 - 10.0 * p.log2() + (10.0 - 98.0) * (1.0 - p).log2();
        assert!((valence_two_cost_bound(100, 10, 98).unwrap() - want).abs() < 1e-9);
        assert!(valence_two_cost_bound(10, 8, 8).is_err());
    }

    #[test]
    fn cost_bound_peak() {
        // the scan holds V fixed at Q
        let q = 100_000usize;
        let (mut best, mut at) = (0.0, 0.0);
        for i in 1..1000 {
            let vp = q * i / 1000;
            let v = q;
            let r = valence_two_cost_bound(v, vp, q).unwrap() / v as f64;
            if r > best {
                (best, at) = (r, vp as f64 / q as f64);
            }
        }
        assert!(best < 3.07, "{best}");
        assert!(best > 3.0, "{best}");
        assert!((0.2..0.26).contains(&at), "{at}");
    }

    #[test]
    fn split_polygons() {
        let hex = PolyMesh::new(6, [[0usize, 1, 2, 3, 4, 5]]).unwrap();
        let s = split_large_polygons(&hex).unwrap();
        assert_eq!((s.topo_counts().q, s.topo_counts().t), (2, 0));
        let pent = PolyMesh::new(5, [[2usize, 3, 4, 0, 1]]).unwrap();
        let s = split_large_polygons(&pent).unwrap();
        assert_eq!((s.topo_counts().q, s.topo_counts().t), (1, 1));
        assert_eq!(s.face(0), &[0, 1, 2, 3]);
        assert_eq!(s.boundary_loops()[0].len(), 5);
        let cube = generate::cube();
        assert_eq!(split_large_polygons(cube.as_poly()).unwrap(), cube);
        for n in 5..12 {
            let poly = PolyMesh::new(n, [(0..n).collect::<Vec<_>>()]).unwrap();
            let s = split_large_polygons(&poly).unwrap();
            let t = s.topo_counts();
            assert_eq!((t.q, t.t), (n / 2 - 1, n % 2));
            assert_eq!(edge_count(&s), n + t.f - 1);
        }
    }
}
