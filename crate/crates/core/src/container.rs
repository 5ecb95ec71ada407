//! Compressed file format and the end-to-end pipeline around it.
//!
//! Layout, in order: magic `QEBC`, version, mode, flags, a mode byte (fixed
//! code id and first-table flag, or the entropy memory depth), LEB128 counts
//! of the coded mesh (V, F, Q, T, holes), the dummy-vertex table, the
//! valence-two table, the payload, optional geometry, optional vertex
//! permutation, and a CRC-32 of everything before it (little endian).

use crate::bits::BitString;
use crate::decoder::decode_connectivity;
use crate::entropy::{self, Alphabet, ArithDecoder, MAX_MEMORY};
use crate::error::{Error, Result, StageExt};
use crate::fixed::{decode_fixed, encode_fixed, select_best_encoding, EncodingId};
use crate::mesh::{PolyMesh, QtMesh};
use crate::preprocess::{
    patch_holes, reinsert_valence_two, remove_valence_two, split_large_polygons, unpatch_holes, DummyEntry,
    DummyVertexTable, ValenceTwoRound, ValenceTwoTable,
};
use crate::traversal::{check_simple, encode_clers, ClersSequence, Gate};

pub const MAGIC: [u8; 4] = *b"QEBC";
pub const VERSION: u8 = 1;

const FLAG_GEOMETRY: u8 = 1;
const FLAG_PERMUTATION: u8 = 2;
const FLAG_FLAGS_CODED: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Fixed,
    Entropy,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(Mode::Fixed),
            "entropy" => Ok(Mode::Entropy),
            _ => Err(Error::Precondition(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompressOptions {
    pub mode: Mode,
    /// Fixed code to use; `None` picks the shortest.
    pub encoding: Option<EncodingId>,
    /// Context depth in entropy mode.
    pub memory: usize,
    pub geometry: bool,
    pub keep_order: bool,
    /// Range-code the valence-two split flags instead of storing them raw.
    pub code_split_flags: bool,
}

impl Default for CompressOptions {
    fn default() -> Self {
        CompressOptions {
            mode: Mode::Fixed,
            encoding: None,
            memory: 3,
            geometry: false,
            keep_order: false,
            code_split_flags: true,
        }
    }
}

/// How the payload is coded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PayloadCoding {
    Fixed { id: EncodingId, first_begins_with_l: bool },
    Entropy { memory: usize },
}

/// Sizes of the coded mesh, before valence-two reinsertion and unpatching.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CodedCounts {
    pub v: usize,
    pub f: usize,
    pub q: usize,
    pub t: usize,
}

/// Parsed container contents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Container {
    pub coding: PayloadCoding,
    pub counts: CodedCounts,
    pub dummies: DummyVertexTable,
    pub valence_two: ValenceTwoTable,
    pub code_split_flags: bool,
    pub payload: BitString,
    pub geometry: Option<Vec<String>>,
    /// Output vertex `i` was input vertex `permutation[i]`.
    pub permutation: Option<Vec<usize>>,
}

impl Container {
    /// Vertices of the decompressed mesh.
    pub fn output_vertex_count(&self) -> usize {
        (self.counts.v + self.valence_two.removed_count()).saturating_sub(self.dummies.len())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Vec::new();
        w.extend_from_slice(&MAGIC);
        w.push(VERSION);
        let mut flags = 0;
        if self.geometry.is_some() {
            flags |= FLAG_GEOMETRY;
        }
        if self.permutation.is_some() {
            flags |= FLAG_PERMUTATION;
        }
        if self.code_split_flags {
            flags |= FLAG_FLAGS_CODED;
        }
        match self.coding {
            PayloadCoding::Fixed { id, first_begins_with_l } => {
                w.extend([0, flags, (id.index() as u8) << 1 | u8::from(first_begins_with_l)]);
            }
            PayloadCoding::Entropy { memory } => w.extend([1, flags, memory as u8]),
        }
        let c = self.counts;
        for n in [c.v, c.f, c.q, c.t, self.dummies.len()] {
            put_varint(&mut w, n);
        }
        for e in &self.dummies.entries {
            put_varint(&mut w, e.vertex);
            put_varint(&mut w, e.hole_size);
        }
        put_varint(&mut w, self.valence_two.rounds.len());
        if !self.valence_two.is_empty() {
            let split: Vec<bool> = self.valence_two.rounds.iter().flat_map(|r| r.split.iter().copied()).collect();
            let sel: Vec<bool> = self.valence_two.rounds.iter().flat_map(|r| r.selector.iter().copied()).collect();
            let split = if self.code_split_flags { entropy::encode_flags(&split) } else { bools(&split) };
            put_block(&mut w, split.as_bytes());
            put_block(&mut w, bools(&sel).as_bytes());
        }
        put_varint(&mut w, self.payload.len());
        w.extend_from_slice(self.payload.as_bytes());
        if let Some(g) = &self.geometry {
            for s in g {
                put_block(&mut w, s.as_bytes());
            }
        }
        if let Some(p) = &self.permutation {
            let width = index_width(p.len());
            let mut b = BitString::new();
            for &v in p {
                b.push_bits(v as u64, width);
            }
            w.extend_from_slice(b.as_bytes());
        }
        let crc = crc32fast::hash(&w);
        w.extend_from_slice(&crc.to_le_bytes());
        w
    }

    /// Parses and validates a container. The checksum is checked first.
    pub fn from_bytes(data: &[u8]) -> Result<Container> {
        if data.len() < MAGIC.len() + 4 || data[..4] != MAGIC {
            return Err(Error::Container("not a QEBC container".into()));
        }
        let (body, tail) = data.split_at(data.len() - 4);
        if crc32fast::hash(body).to_le_bytes() != tail {
            return Err(Error::ChecksumMismatch);
        }
        let mut r = Cursor { data: body, pos: 4 };
        let version = r.byte()?;
        if version != VERSION {
            return Err(Error::Container(format!("unsupported version {version}")));
        }
        let mode = r.byte()?;
        let flags = r.byte()?;
        if flags & !(FLAG_GEOMETRY | FLAG_PERMUTATION | FLAG_FLAGS_CODED) != 0 {
            return Err(Error::Container(format!("unknown flags {flags:#04x}")));
        }
        let field = r.byte()?;
        let coding = match mode {
            0 => {
                if field >> 3 != 0 {
                    return Err(Error::Container(format!("bad fixed code byte {field:#04x}")));
                }
                PayloadCoding::Fixed {
                    id: EncodingId::from_index(usize::from(field >> 1)).expect("two-bit id"),
                    first_begins_with_l: field & 1 == 1,
                }
            }
            1 if usize::from(field) <= MAX_MEMORY => PayloadCoding::Entropy {
                memory: usize::from(field),
            },
            1 => return Err(Error::Container(format!("memory depth {field} is not supported"))),
            m => return Err(Error::Container(format!("unknown mode {m}"))),
        };
        let counts = CodedCounts {
            v: r.varint()?,
            f: r.varint()?,
            q: r.varint()?,
            t: r.varint()?,
        };
        if counts.q + counts.t != counts.f {
            return Err(Error::Container("face counts do not add up".into()));
        }
        if matches!(coding, PayloadCoding::Fixed { .. }) && counts.t > 0 {
            return Err(Error::Container("fixed mode with triangles".into()));
        }
        let holes = r.varint()?;
        let mut dummies = DummyVertexTable::default();
        for _ in 0..holes.min(body.len()) {
            dummies.entries.push(DummyEntry {
                vertex: r.varint()?,
                hole_size: r.varint()?,
            });
        }
        if dummies.len() != holes {
            return Err(Error::Container("truncated dummy table".into()));
        }
        let code_split_flags = flags & FLAG_FLAGS_CODED != 0;
        let valence_two = read_valence_two(&mut r, counts.f, code_split_flags)?;
        let payload_bits = r.varint()?;
        let payload = BitString::from_bytes(r.take(payload_bits.div_ceil(8))?.to_vec(), payload_bits)?;
        let mut out = Container {
            coding,
            counts,
            dummies,
            valence_two,
            code_split_flags,
            payload,
            geometry: None,
            permutation: None,
        };
        let n = out.output_vertex_count();
        if flags & FLAG_GEOMETRY != 0 {
            let mut g = Vec::with_capacity(n.min(body.len()));
            for _ in 0..n {
                let s = r.block()?;
                g.push(String::from_utf8(s.to_vec()).map_err(|_| Error::Container("geometry is not UTF-8".into()))?);
            }
            out.geometry = Some(g);
        }
        if flags & FLAG_PERMUTATION != 0 {
            let width = index_width(n);
            let nbits = n.checked_mul(width as usize).ok_or_else(|| Error::Container("permutation size".into()))?;
            let bits = BitString::from_bytes(r.take(nbits.div_ceil(8))?.to_vec(), nbits)?;
            let mut rd = bits.reader();
            let mut seen = vec![false; n];
            let mut p = Vec::with_capacity(n);
            for _ in 0..n {
                let v = rd.read_bits(width)? as usize;
                if v >= n || std::mem::replace(&mut seen[v], true) {
                    return Err(Error::Container("vertex permutation is not a permutation".into()));
                }
                p.push(v);
            }
            out.permutation = Some(p);
        }
        if r.pos != body.len() {
            return Err(Error::Container(format!("{} unexpected trailing bytes", body.len() - r.pos)));
        }
        Ok(out)
    }
}

fn index_width(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

fn bools(flags: &[bool]) -> BitString {
    let mut b = BitString::new();
    for &f in flags {
        b.push(f);
    }
    b
}

fn put_varint(w: &mut Vec<u8>, n: usize) {
    leb128::write::unsigned(w, n as u64).expect("writing to a vec");
}

fn put_block(w: &mut Vec<u8>, bytes: &[u8]) {
    put_varint(w, bytes.len());
    w.extend_from_slice(bytes);
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn byte(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.data.len() - self.pos {
            return Err(Error::Container("truncated container".into()));
        }
        self.pos += n;
        Ok(&self.data[self.pos - n..self.pos])
    }

    fn varint(&mut self) -> Result<usize> {
        let mut rest = &self.data[self.pos..];
        let before = rest.len();
        let v = leb128::read::unsigned(&mut rest).map_err(|e| Error::Container(format!("bad count: {e}")))?;
        self.pos += before - rest.len();
        usize::try_from(v).map_err(|_| Error::Container("count overflows".into()))
    }

    fn block(&mut self) -> Result<&'a [u8]> {
        let n = self.varint()?;
        self.take(n)
    }
}

/// Reads the rounds; each round has one flag per face of the mesh it applies to.
fn read_valence_two(r: &mut Cursor<'_>, faces: usize, coded: bool) -> Result<ValenceTwoTable> {
    let rounds = r.varint()?;
    let mut table = ValenceTwoTable::default();
    if rounds == 0 {
        return Ok(table);
    }
    let split_bytes = r.block()?.to_vec();
    let sel_bytes = r.block()?.to_vec();
    let split_bits = BitString::from_bytes(split_bytes.clone(), split_bytes.len() * 8)?;
    let sel_bits = BitString::from_bytes(sel_bytes.clone(), sel_bytes.len() * 8)?;
    let mut coded_reader = coded.then(|| ArithDecoder::new(&split_bits, 0, 2, entropy::DEFAULT_INCREMENT)).transpose()?;
    let mut raw_reader = split_bits.reader();
    let mut sel_reader = sel_bits.reader();
    let mut face_count = faces;
    for _ in 0..rounds.min(faces.max(1)) {
        let mut round = ValenceTwoRound::default();
        for _ in 0..face_count {
            let f = match coded_reader.as_mut() {
                Some(d) => d.decode()? == 1,
                None => raw_reader.read()?,
            };
            round.split.push(f);
        }
        let ones = round.split.iter().filter(|&&b| b).count();
        for _ in 0..ones {
            round.selector.push(sel_reader.read()?);
        }
        face_count += ones;
        table.rounds.push(round);
    }
    if table.rounds.len() != rounds {
        return Err(Error::ValenceTwoTable("more rounds than faces".into()));
    }
    match coded_reader {
        Some(d) => d.finish()?,
        None => check_padding(raw_reader)?,
    }
    check_padding(sel_reader)?;
    Ok(table)
}

/// Only the zero padding of the last byte may remain.
fn check_padding(mut r: crate::bits::BitReader<'_>) -> Result<()> {
    let left = r.remaining();
    if left >= 8 || r.read_bits(left as u32)? != 0 {
        return Err(Error::TrailingBits(left));
    }
    Ok(())
}

/// Output of [`compress`].
#[derive(Clone, Debug)]
pub struct Compressed {
    pub bytes: Vec<u8>,
    pub container: Container,
    /// Vertex `i` of the decompressed mesh is input vertex `canonical_order[i]`.
    pub canonical_order: Vec<usize>,
    /// The sequence carried by the payload.
    pub sequence: ClersSequence,
}

impl Compressed {
    pub fn total_bits(&self) -> usize {
        self.bytes.len() * 8
    }

    pub fn payload_bits(&self) -> usize {
        self.container.payload.len()
    }

    pub fn mode(&self) -> Mode {
        match self.container.coding {
            PayloadCoding::Fixed { .. } => Mode::Fixed,
            PayloadCoding::Entropy { .. } => Mode::Entropy,
        }
    }
}

/// Runs the full encoder on a manifold polygon mesh of genus zero.
pub fn compress(mesh: &PolyMesh, opts: &CompressOptions) -> Result<Compressed> {
    if opts.memory > MAX_MEMORY {
        return Err(Error::Precondition(format!("memory depth {} exceeds {MAX_MEMORY}", opts.memory)));
    }
    let input_v = mesh.vertex_count();
    let qt = split_large_polygons(mesh).stage("split")?;
    let (patched, dummies) = patch_holes(&qt).stage("patch")?;
    check_simple(&patched).stage("topology")?;

    // fixed mode needs a pure-quad mesh that reduces to one without valence-two vertices
    let reduction = if opts.mode == Mode::Fixed && patched.is_pure_quad() {
        match remove_valence_two(&patched) {
            Ok(r) => Some(r),
            Err(Error::IrreducibleConfiguration(_)) => None,
            Err(e) => return Err(e.at("valence-two")),
        }
    } else {
        None
    };
    let fixed = reduction.is_some();
    let coded: &QtMesh = reduction.as_ref().map_or(&patched, |r| &r.mesh);

    let trav = encode_clers(coded, Gate::Default).stage("traversal")?;
    let labels = trav.labels();
    let (valence_two, final_label) = match &reduction {
        Some(r) => r.table_relabeled(&labels).stage("valence-two")?,
        None => (ValenceTwoTable::default(), labels),
    };
    let seq = trav.sequence;

    let (coding, payload) = if fixed {
        let sel = match opts.encoding {
            Some(id) => (id, encode_fixed(&seq, id).stage("fixed code")?),
            None => {
                let s = select_best_encoding(&seq).stage("fixed code")?;
                (s.id, s.payload)
            }
        };
        let first = seq.codes.first().is_some_and(|c| c.begins_with_l());
        (PayloadCoding::Fixed { id: sel.0, first_begins_with_l: first }, sel.1)
    } else {
        let bits = entropy::encode_arith(&seq, opts.memory, Alphabet::for_sequence(&seq)).stage("entropy code")?;
        (PayloadCoding::Entropy { memory: opts.memory }, bits)
    };

    // the decoder's output keeps non-dummy vertices in final-label order
    let mut canonical_order: Vec<usize> = (0..input_v).collect();
    canonical_order.sort_by_key(|&v| final_label[v]);

    let geometry = match (opts.geometry, mesh.coords()) {
        (true, Some(c)) => Some(canonical_order.iter().map(|&v| c[v].clone()).collect()),
        (true, None) => return Err(Error::Precondition("the mesh has no coordinates".into()).at("geometry")),
        (false, _) => None,
    };
    let container = Container {
        coding,
        counts: CodedCounts {
            v: coded.vertex_count(),
            f: seq.len(),
            q: seq.quad_count(),
            t: seq.triangle_count(),
        },
        dummies: dummies.relabeled(&final_label),
        valence_two,
        code_split_flags: opts.code_split_flags,
        payload,
        geometry,
        permutation: opts.keep_order.then(|| canonical_order.clone()),
    };
    Ok(Compressed {
        bytes: container.to_bytes(),
        container,
        canonical_order,
        sequence: seq,
    })
}

/// Decoder output with its intermediate products.
#[derive(Clone, Debug)]
pub struct Decompressed {
    pub mesh: QtMesh,
    pub container: Container,
    pub sequence: ClersSequence,
    /// Mesh decoded from the payload, before valence-two reinsertion and unpatching.
    pub coded_mesh: QtMesh,
}

pub fn decompress(data: &[u8]) -> Result<QtMesh> {
    decompress_with_trace(data).map(|d| d.mesh)
}

pub fn decompress_with_trace(data: &[u8]) -> Result<Decompressed> {
    let container = Container::from_bytes(data).stage("container")?;
    let c = container.counts;
    let sequence = match container.coding {
        PayloadCoding::Fixed { id, first_begins_with_l } => {
            decode_fixed(&container.payload, id, c.f, first_begins_with_l).stage("fixed code")?
        }
        PayloadCoding::Entropy { memory } => {
            entropy::decode_arith(&container.payload, memory, c.f, Alphabet::for_counts(c.q, c.t)).stage("entropy code")?
        }
    };
    if sequence.quad_count() != c.q || sequence.vertex_count() != c.v {
        return Err(Error::CorruptSequence("decoded sequence disagrees with the header counts".into()).at("decode"));
    }
    let coded_mesh = decode_connectivity(&sequence).stage("decode")?;
    let full = reinsert_valence_two(&coded_mesh, &container.valence_two).stage("valence-two")?;
    let mut mesh = unpatch_holes(&full, &container.dummies).stage("unpatch")?;
    if let Some(g) = &container.geometry {
        mesh = mesh.without_coords().with_coords(g.clone()).stage("geometry")?;
    }
    if let Some(p) = &container.permutation {
        mesh = mesh.relabeled(p).stage("permutation")?;
    }
    Ok(Decompressed {
        mesh,
        container,
        sequence,
        coded_mesh,
    })
}

/// Result of a successful [`verify`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyReport {
    pub faces: usize,
    pub vertices: usize,
    pub bits: usize,
    pub payload_bits: usize,
    pub mode: Mode,
}

impl VerifyReport {
    pub fn bits_per_vertex(&self) -> f64 {
        self.bits as f64 / self.vertices.max(1) as f64
    }
}

/// Compresses, decompresses, re-encodes the coded mesh, and compares the
/// result face by face with the input after large-polygon splitting.
pub fn verify(mesh: &PolyMesh, opts: &CompressOptions) -> Result<VerifyReport> {
    let c = compress(mesh, opts)?;
    let d = decompress_with_trace(&c.bytes)?;
    let again = encode_clers(&d.coded_mesh, Gate::Default).stage("re-encode")?;
    if again.sequence.codes != d.sequence.codes {
        return Err(Error::Internal("re-encoding the decoded mesh gives a different sequence".into()).at("verify"));
    }
    let expected = split_large_polygons(mesh).stage("split")?;
    let expected = if opts.keep_order {
        expected.into_poly()
    } else {
        let mut label = vec![0; mesh.vertex_count()];
        for (i, &v) in c.canonical_order.iter().enumerate() {
            label[v] = i;
        }
        expected.as_poly().relabeled(&label).stage("verify")?
    };
    if d.mesh.vertex_count() != expected.vertex_count() || d.mesh.canonical_faces() != expected.canonical_faces() {
        return Err(Error::Internal("decoded connectivity differs from the input".into()).at("verify"));
    }
    Ok(VerifyReport {
        faces: d.mesh.face_count(),
        vertices: mesh.vertex_count(),
        bits: c.total_bits(),
        payload_bits: c.payload_bits(),
        mode: c.mode(),
    })
}
