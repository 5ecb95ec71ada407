//! CLERS traversal of closed genus-0 triangle/quad meshes.
//!
//! Quads are traversed as two triangles: entering quad `[A, B, X, Y]` through
//! gate `A -> B`, the first triangle is `(A, B, Y)` and the second `(Y, B, X)`,
//! which lies across the first triangle's right edge. The first label of a
//! quad is therefore always C, L or S.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{QtMesh, TopoCounts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    C,
    L,
    E,
    R,
    S,
}

impl Label {
    pub const ALL: [Label; 5] = [Label::C, Label::L, Label::E, Label::R, Label::S];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            Label::C => 'C',
            Label::L => 'L',
            Label::E => 'E',
            Label::R => 'R',
            Label::S => 'S',
        }
    }

    pub fn from_char(c: char) -> Option<Label> {
        Some(match c {
            'C' => Label::C,
            'L' => Label::L,
            'E' => Label::E,
            'R' => Label::R,
            'S' => Label::S,
            _ => return None,
        })
    }
}

/// Label of one triangle given what its tip and neighbours look like.
fn classify(tip_visited: bool, left_visited: bool, right_visited: bool) -> Label {
    match (tip_visited, left_visited, right_visited) {
        (false, _, _) => Label::C,
        (true, true, true) => Label::E,
        (true, false, true) => Label::R,
        (true, true, false) => Label::L,
        (true, false, false) => Label::S,
    }
}

/// Symbol for one face: a legal pair of labels for a quad, or a T-prefixed
/// label for a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceCode {
    Quad(Label, Label),
    Tri(Label),
}

use Label::{C, E, L, R, S};

/// The legal quad pairs, in symbol-index order.
pub const QUAD_CODES: [FaceCode; 13] = [
    FaceCode::Quad(C, R),
    FaceCode::Quad(C, C),
    FaceCode::Quad(L, E),
    FaceCode::Quad(C, S),
    FaceCode::Quad(S, C),
    FaceCode::Quad(L, C),
    FaceCode::Quad(S, E),
    FaceCode::Quad(L, L),
    FaceCode::Quad(L, R),
    FaceCode::Quad(L, S),
    FaceCode::Quad(S, L),
    FaceCode::Quad(S, R),
    FaceCode::Quad(S, S),
];

pub const TRI_CODES: [FaceCode; 5] = [
    FaceCode::Tri(C),
    FaceCode::Tri(L),
    FaceCode::Tri(E),
    FaceCode::Tri(R),
    FaceCode::Tri(S),
];

/// Number of distinct face codes.
pub const CODE_COUNT: usize = 18;

impl FaceCode {
    /// Checked quad constructor.
    pub fn quad(first: Label, second: Label) -> Result<FaceCode> {
        let code = FaceCode::Quad(first, second);
        if QUAD_CODES.contains(&code) {
            Ok(code)
        } else {
            Err(Error::IllegalFaceCode(code.to_string()))
        }
    }

    pub fn is_legal(self) -> bool {
        match self {
            FaceCode::Quad(..) => QUAD_CODES.contains(&self),
            FaceCode::Tri(_) => true,
        }
    }

    /// 0..13 for quads, 13..18 for triangles.
    pub fn index(self) -> usize {
        match self {
            FaceCode::Quad(..) => QUAD_CODES
                .iter()
                .position(|&c| c == self)
                .expect("illegal quad pair has no index"),
            FaceCode::Tri(l) => 13 + l.index(),
        }
    }

    pub fn from_index(i: usize) -> Option<FaceCode> {
        QUAD_CODES.get(i).or_else(|| TRI_CODES.get(i.wrapping_sub(13))).copied()
    }

    pub fn is_quad(self) -> bool {
        matches!(self, FaceCode::Quad(..))
    }

    /// CLERS labels of the triangles this face contributes.
    pub fn labels(self) -> impl Iterator<Item = Label> {
        let (a, b) = match self {
            FaceCode::Quad(a, b) => (a, Some(b)),
            FaceCode::Tri(a) => (a, None),
        };
        std::iter::once(a).chain(b)
    }

    pub fn first_label(self) -> Label {
        match self {
            FaceCode::Quad(a, _) | FaceCode::Tri(a) => a,
        }
    }

    pub fn last_label(self) -> Label {
        match self {
            FaceCode::Quad(_, b) | FaceCode::Tri(b) => b,
        }
    }

    /// Quad whose first label is L.
    pub fn begins_with_l(self) -> bool {
        matches!(self, FaceCode::Quad(L, _))
    }
}

impl fmt::Display for FaceCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FaceCode::Quad(a, b) => write!(f, "{}{}", a.as_char(), b.as_char()),
            FaceCode::Tri(a) => write!(f, "T{}", a.as_char()),
        }
    }
}

impl FromStr for FaceCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<FaceCode> {
        let bad = || Error::IllegalFaceCode(s.to_string());
        let mut it = s.chars();
        let (a, b) = (it.next().ok_or_else(bad)?, it.next().ok_or_else(bad)?);
        if it.next().is_some() {
            return Err(bad());
        }
        let second = Label::from_char(b).ok_or_else(bad)?;
        if a == 'T' {
            return Ok(FaceCode::Tri(second));
        }
        FaceCode::quad(Label::from_char(a).ok_or_else(bad)?, second)
    }
}

/// Face codes in traversal order plus the gate they were produced from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClersSequence {
    pub codes: Vec<FaceCode>,
    /// Initial gate `(u, v)` in the labels of the mesh that was traversed.
    pub gate: (usize, usize),
}

impl ClersSequence {
    pub fn new(codes: Vec<FaceCode>, gate: (usize, usize)) -> Self {
        ClersSequence { codes, gate }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Flattened CLERS labels; T markers are dropped.
    pub fn labels(&self) -> Vec<Label> {
        self.codes.iter().flat_map(|c| c.labels()).collect()
    }

    pub fn label_string(&self) -> String {
        self.labels().into_iter().map(Label::as_char).collect()
    }

    pub fn quad_count(&self) -> usize {
        self.codes.iter().filter(|c| c.is_quad()).count()
    }

    pub fn triangle_count(&self) -> usize {
        self.codes.len() - self.quad_count()
    }

    /// Vertex count implied by the sequence on a closed genus-0 mesh.
    pub fn vertex_count(&self) -> usize {
        self.labels().iter().filter(|&&l| l == C).count() + 2
    }

    /// Text dump: a header line, then one face code per line.
    pub fn dump(&self) -> String {
        let mut s = format!(
            "gate {} {} V={} Q={} T={}\n",
            self.gate.0,
            self.gate.1,
            self.vertex_count(),
            self.quad_count(),
            self.triangle_count()
        );
        for c in &self.codes {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse_dump(text: &str) -> Result<ClersSequence> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "empty dump".into(),
        })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let parse_usize = |t: &str| {
            t.parse::<usize>().map_err(|_| Error::Parse {
                line: 1,
                msg: format!("bad header field '{t}'"),
            })
        };
        if toks.len() < 3 || toks[0] != "gate" {
            return Err(Error::Parse {
                line: 1,
                msg: "header must start with 'gate u v'".into(),
            });
        }
        let gate = (parse_usize(toks[1])?, parse_usize(toks[2])?);
        let codes = lines.map(|l| l.trim().parse()).collect::<Result<Vec<_>>>()?;
        let seq = ClersSequence { codes, gate };
        for t in &toks[3..] {
            let (k, v) = t.split_once('=').unwrap_or((t, ""));
            let want = match k {
                "V" => seq.vertex_count(),
                "Q" => seq.quad_count(),
                "T" => seq.triangle_count(),
                _ => continue,
            };
            if parse_usize(v)? != want {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("header {k}={v} disagrees with body ({want})"),
                });
            }
        }
        Ok(seq)
    }
}

/// Which directed edge starts the traversal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Gate {
    /// Lexicographically smallest directed half-edge `(u, v)`.
    #[default]
    Default,
    Edge(usize, usize),
}

/// Result of [`encode_clers`].
#[derive(Clone, Debug)]
pub struct Traversal {
    pub sequence: ClersSequence,
    /// `vertex_order[i]` is the mesh vertex that receives label `i`: the two
    /// gate vertices, then every C tip in order.
    pub vertex_order: Vec<usize>,
    /// Mesh face visited at each position of the sequence.
    pub face_order: Vec<usize>,
}

impl Traversal {
    /// Inverse of `vertex_order`: mesh vertex to label.
    pub fn labels(&self) -> Vec<usize> {
        let mut lab = vec![usize::MAX; self.vertex_order.len()];
        for (i, &v) in self.vertex_order.iter().enumerate() {
            lab[v] = i;
        }
        lab
    }
}

pub fn default_gate(mesh: &QtMesh) -> Option<(usize, usize)> {
    (0..mesh.half_edge_count())
        .map(|h| (mesh.origin(h), mesh.target(h)))
        .min()
}

/// Checks the encoder's topological preconditions.
pub fn check_simple(mesh: &QtMesh) -> Result<()> {
    if !mesh.is_closed() {
        return Err(Error::HasBoundary);
    }
    let parts = mesh.component_count();
    if parts != 1 {
        return Err(Error::Disconnected(parts));
    }
    let chi = mesh.topo_counts().euler_characteristic;
    if chi != 2 {
        return Err(Error::HandlesUnsupported(chi));
    }
    Ok(())
}

/// Runs the traversal from `gate` over a closed, connected genus-0 mesh.
pub fn encode_clers(mesh: &QtMesh, gate: Gate) -> Result<Traversal> {
    check_simple(mesh)?;
    let (u, v) = match gate {
        Gate::Default => default_gate(mesh).ok_or_else(|| Error::Precondition("empty mesh".into()))?,
        Gate::Edge(u, v) => (u, v),
    };
    let start = mesh
        .find_half_edge(u, v)
        .ok_or_else(|| Error::Precondition(format!("gate ({u}, {v}) is not a half-edge")))?;
    let chi = || Error::HandlesUnsupported(mesh.topo_counts().euler_characteristic);

    let nv = mesh.vertex_count();
    let nf = mesh.face_count();
    let mut seen_v = vec![false; nv];
    let mut seen_f = vec![false; nf];
    let mut vertex_order = Vec::with_capacity(nv);
    for w in [u, v] {
        seen_v[w] = true;
        vertex_order.push(w);
    }
    let mut codes = Vec::with_capacity(nf);
    let mut face_order = Vec::with_capacity(nf);
    let mut stack: Vec<usize> = Vec::new();
    let twin = |h: usize| mesh.twin(h).expect("closed mesh");

    let mut h = start;
    loop {
        let f = mesh.half_edge_face(h);
        if seen_f[f] {
            return Err(chi());
        }
        seen_f[f] = true;
        face_order.push(f);
        let across = |e: usize, seen_f: &[bool]| seen_f[mesh.half_edge_face(twin(e))];

        let h1 = mesh.next(h);
        let h2 = mesh.next(h1);
        let mut visit = |w: usize, seen_v: &mut [bool]| {
            let fresh = !seen_v[w];
            if fresh {
                seen_v[w] = true;
                vertex_order.push(w);
            }
            fresh
        };

        let code;
        if mesh.face_size(f) == 4 {
            let h3 = mesh.next(h2);
            let y = mesh.origin(h3);
            // first triangle (A, B, Y): right side is the unvisited second half
            let first = if visit(y, &mut seen_v) {
                C
            } else if across(h3, &seen_f) {
                L
            } else {
                S
            };
            if first == S {
                stack.push(twin(h3));
            }
            let x = mesh.origin(h2);
            let tip_seen = seen_v[x];
            let second = classify(tip_seen, across(h2, &seen_f), across(h1, &seen_f));
            if second == C {
                visit(x, &mut seen_v);
            }
            code = FaceCode::Quad(first, second);
        } else {
            let t = mesh.origin(h2);
            let tip_seen = seen_v[t];
            let l = classify(tip_seen, across(h2, &seen_f), across(h1, &seen_f));
            if l == C {
                visit(t, &mut seen_v);
            }
            code = FaceCode::Tri(l);
        }
        codes.push(code);

        match code.last_label() {
            C | L => h = twin(h1),
            R => h = twin(h2),
            S => {
                stack.push(twin(h2));
                h = twin(h1);
            }
            E => match stack.pop() {
                Some(g) => h = g,
                None => break,
            },
        }
    }

    if face_order.len() != nf || vertex_order.len() != nv {
        return Err(chi());
    }
    Ok(Traversal {
        sequence: ClersSequence { codes, gate: (u, v) },
        vertex_order,
        face_order,
    })
}

/// Label and pair counts of a sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelHistogram {
    /// Indexed by [`Label::index`]; T markers are not counted.
    pub letters: [usize; 5],
    /// Indexed by [`FaceCode::index`].
    pub pairs: [usize; CODE_COUNT],
    /// Per position: whether the following face is a quad beginning with L.
    /// The last entry is always false.
    pub next_begins_with_l: Vec<bool>,
    /// Number of CS quads whose successor does not begin with L.
    pub cs_followed_by_cs: usize,
}

impl LabelHistogram {
    pub fn from_sequence(seq: &ClersSequence) -> Self {
        let mut h = LabelHistogram::default();
        let n = seq.codes.len();
        for (i, &c) in seq.codes.iter().enumerate() {
            for l in c.labels() {
                h.letters[l.index()] += 1;
            }
            h.pairs[c.index()] += 1;
            let next_l = i + 1 < n && seq.codes[i + 1].begins_with_l();
            h.next_begins_with_l.push(next_l);
            if c == FaceCode::Quad(C, S) && !next_l {
                h.cs_followed_by_cs += 1;
            }
        }
        h
    }

    pub fn letter(&self, l: Label) -> usize {
        self.letters[l.index()]
    }

    /// Count of one face code, e.g. `pair("CR")`. Panics on an unknown name.
    pub fn pair(&self, name: &str) -> usize {
        let code: FaceCode = name.parse().expect("legal face code name");
        self.pairs[code.index()]
    }

    pub fn is_empty(&self) -> bool {
        self.next_begins_with_l.is_empty()
    }
}

/// Histogram of `seq`, checking `|C| = V - 2` (simple meshes) and
/// `|S| = |E| - 1` (non-empty sequences).
pub fn label_histogram(seq: &ClersSequence, counts: &TopoCounts) -> Result<LabelHistogram> {
    let h = LabelHistogram::from_sequence(seq);
    if h.is_empty() {
        return Ok(h);
    }
    if counts.is_simple() && h.letter(C) + 2 != counts.v {
        return Err(Error::Internal(format!(
            "|C| = {} but V - 2 = {}",
            h.letter(C),
            counts.v as i64 - 2
        )));
    }
    if h.letter(S) + 1 != h.letter(E) {
        return Err(Error::Internal(format!(
            "|S| = {} but |E| - 1 = {}",
            h.letter(S),
            h.letter(E) as i64 - 1
        )));
    }
    Ok(h)
}

/// Enumerates visited/unvisited marks on the non-gate edges and vertices of an
/// `n`-gon's boundary. The gate edge and its two endpoints are visited; an
/// unvisited vertex may not touch a visited edge.
pub fn count_boundary_states(n: usize) -> u64 {
    assert!(n >= 3, "polygon needs at least 3 edges");
    // path: e_0 v_0 e_1 v_1 ... v_{n-3} e_{n-2}
    let items = 2 * n - 3;
    assert!(items < 64, "polygon too large to enumerate");
    let mut count = 0;
    for mask in 0u64..(1 << items) {
        let visited = |i: usize| mask >> i & 1 == 1;
        let ok = (0..n - 2).all(|k| {
            let vi = 2 * k + 1;
            visited(vi) || (!visited(vi - 1) && !visited(vi + 1))
        });
        if ok {
            count += 1;
        }
    }
    count
}

/// An L-leading quad that follows a CR quad or a quad ending in C.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdjacencyViolation {
    /// Position of the L-leading quad.
    pub position: usize,
    /// Both quads share an internal valence-two vertex.
    pub explained_by_valence_two: bool,
}

/// Replays the traversal of `seq` on `mesh` and lists adjacency-rule
/// violations.
pub fn check_adjacency_rule(seq: &ClersSequence, mesh: &QtMesh) -> Result<Vec<AdjacencyViolation>> {
    let tr = encode_clers(mesh, Gate::Edge(seq.gate.0, seq.gate.1))?;
    if tr.sequence.codes != seq.codes {
        return Err(Error::Precondition("sequence was not produced from this mesh".into()));
    }
    let val = mesh.valences();
    let boundary: Vec<bool> = {
        let mut b = vec![false; mesh.vertex_count()];
        for lp in mesh.boundary_loops() {
            for &v in lp {
                b[v] = true;
            }
        }
        b
    };
    let mut out = Vec::new();
    for i in 1..seq.codes.len() {
        let (prev, cur) = (seq.codes[i - 1], seq.codes[i]);
        let blocked = prev.is_quad() && (prev.last_label() == C || prev == FaceCode::Quad(C, R));
        if !(cur.begins_with_l() && blocked) {
            continue;
        }
        let (fa, fb) = (tr.face_order[i - 1], tr.face_order[i]);
        let explained = mesh
            .face(fa)
            .iter()
            .any(|&w| mesh.face(fb).contains(&w) && val[w] == 2 && !boundary[w]);
        out.push(AdjacencyViolation {
            position: i,
            explained_by_valence_two: explained,
        });
    }
    Ok(out)
}
