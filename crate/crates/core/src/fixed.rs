//! The four fixed two-table prefix codes for pure-quad sequences.
//!
//! A pattern encodes the current quad's pair together with whether the next
//! quad begins with L. Quads beginning with L are read from the L table, all
//! others from the C/S table. Pairs that end in C (and CR) are never followed
//! by an L quad on valence-two-free meshes, so they have a single pattern.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::traversal::{ClersSequence, FaceCode, LabelHistogram};

/// Header bits that name the selected encoding.
pub const ID_BITS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EncodingId {
    A,
    B,
    C,
    D,
}

impl EncodingId {
    pub const ALL: [EncodingId; 4] = [EncodingId::A, EncodingId::B, EncodingId::C, EncodingId::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<EncodingId> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for EncodingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["A", "B", "C", "D"][self.index()])
    }
}

impl FromStr for EncodingId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(EncodingId::A),
            "B" => Ok(EncodingId::B),
            "C" => Ok(EncodingId::C),
            "D" => Ok(EncodingId::D),
            _ => Err(format!("unknown encoding '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Entry {
    pub code: FaceCode,
    /// The next quad begins with L.
    pub next_l: bool,
    pub bits: u32,
    pub len: u8,
}

impl Entry {
    pub fn pattern(&self) -> String {
        (0..self.len)
            .rev()
            .map(|i| if self.bits >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

const MAX_LEN: usize = 6;

#[derive(Debug)]
pub struct CodeTable {
    pub id: EncodingId,
    entries: Vec<Entry>,
    /// Decoding lookup per sub-table, keyed by `1 << len | bits`.
    decode: [Vec<Option<Entry>>; 2],
}

// (pair, pattern for next C or S, pattern for next L)
type Row = (&'static str, &'static str, Option<&'static str>);

const ROWS_A: [Row; 13] = [
    ("CC", "0", None),
    ("CR", "100", None),
    ("SE", "1010", Some("1011")),
    ("CS", "1100", Some("1101")),
    ("SC", "11100", None),
    ("SS", "111010", Some("111011")),
    ("SL", "111100", Some("111101")),
    ("SR", "111110", Some("111111")),
    ("LE", "00", Some("01")),
    ("LR", "1000", Some("1001")),
    ("LS", "1010", Some("1011")),
    ("LL", "1100", Some("1101")),
    ("LC", "111", None),
];

fn rows(id: EncodingId) -> Vec<Row> {
    let overrides: &[Row] = match id {
        EncodingId::A => &[],
        EncodingId::B => &[("CC", "100", None), ("CR", "0", None)],
        EncodingId::C => &[("CS", "1100", Some("11100")), ("SC", "1101", None)],
        EncodingId::D => &[
            ("CC", "00", None),
            ("CR", "01", None),
            ("SC", "1000", None),
            ("SS", "111110", Some("111111")),
            ("SL", "10010", Some("10011")),
            ("SR", "11100", Some("11101")),
            ("LE", "000", Some("111")),
            ("LS", "001", Some("101")),
            ("LC", "01", None),
        ],
    };
    ROWS_A
        .iter()
        .map(|row| *overrides.iter().find(|o| o.0 == row.0).unwrap_or(row))
        .collect()
}

fn parse_pattern(p: &str) -> (u32, u8) {
    (u32::from_str_radix(p, 2).expect("binary pattern"), p.len() as u8)
}

impl CodeTable {
    fn build(id: EncodingId) -> Result<CodeTable> {
        let mut entries = Vec::with_capacity(22);
        for (name, cs, l) in rows(id) {
            let code: FaceCode = name.parse()?;
            for (next_l, p) in [(false, Some(cs)), (true, l)] {
                if let Some(p) = p {
                    let (bits, len) = parse_pattern(p);
                    entries.push(Entry {
                        code,
                        next_l,
                        bits,
                        len,
                    });
                }
            }
        }
        let mut decode = [vec![None; 2 << MAX_LEN], vec![None; 2 << MAX_LEN]];
        for e in &entries {
            decode[usize::from(e.code.begins_with_l())][(1 << e.len) | e.bits as usize] = Some(*e);
        }
        let t = CodeTable { id, entries, decode };
        t.verify()?;
        Ok(t)
    }

    /// Pattern count, single entries for C-ending pairs and CR, and
    /// prefix-freeness of each sub-table.
    pub fn verify(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Internal(format!("encoding {}: {m}", self.id)));
        if self.entries.len() != 22 {
            return fail(format!("{} patterns instead of 22", self.entries.len()));
        }
        for e in &self.entries {
            let single = e.code.last_label() == crate::traversal::Label::C || e.code.to_string() == "CR";
            if single && e.next_l {
                return fail(format!("{} has an L-successor pattern", e.code));
            }
        }
        for l_table in [false, true] {
            let sub: Vec<&Entry> = self.sub_table(l_table).collect();
            if sub.len() != if l_table { 9 } else { 13 } {
                return fail(format!("sub-table size {}", sub.len()));
            }
            for (i, x) in sub.iter().enumerate() {
                for y in &sub[i + 1..] {
                    let (s, t) = if x.len <= y.len { (x, y) } else { (y, x) };
                    if t.bits >> (t.len - s.len) == s.bits {
                        return fail(format!("{} is a prefix of {}", s.pattern(), t.pattern()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn get(id: EncodingId) -> &'static CodeTable {
        static TABLES: OnceLock<Vec<CodeTable>> = OnceLock::new();
        &TABLES.get_or_init(|| {
            EncodingId::ALL
                .iter()
                .map(|&id| CodeTable::build(id).expect("code tables pass their self-check"))
                .collect()
        })[id.index()]
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Entries for quads beginning with L (`true`) or with C or S.
    pub fn sub_table(&self, l_table: bool) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(move |e| e.code.begins_with_l() == l_table)
    }

    pub fn lookup(&self, code: FaceCode, next_l: bool) -> Option<&Entry> {
        self.entries.iter().find(|e| e.code == code && e.next_l == next_l)
    }
}

/// Encodes a pure-quad sequence. The last quad uses its "next is C or S" pattern.
pub fn encode_fixed(seq: &ClersSequence, id: EncodingId) -> Result<BitString> {
    let table = CodeTable::get(id);
    let mut out = BitString::new();
    let n = seq.codes.len();
    for (i, &code) in seq.codes.iter().enumerate() {
        if !code.is_quad() {
            return Err(Error::FixedRequiresQuads(i));
        }
        let next_l = i + 1 < n && seq.codes[i + 1].begins_with_l();
        let e = table.lookup(code, next_l).ok_or(Error::AdjacencyViolation(i + 1))?;
        out.push_bits(u64::from(e.bits), u32::from(e.len));
    }
    Ok(out)
}

/// Emitted length without building the bit string.
pub fn encoded_len(seq: &ClersSequence, id: EncodingId) -> Result<usize> {
    let table = CodeTable::get(id);
    let n = seq.codes.len();
    let mut total = 0;
    for (i, &code) in seq.codes.iter().enumerate() {
        if !code.is_quad() {
            return Err(Error::FixedRequiresQuads(i));
        }
        let next_l = i + 1 < n && seq.codes[i + 1].begins_with_l();
        total += usize::from(table.lookup(code, next_l).ok_or(Error::AdjacencyViolation(i + 1))?.len);
    }
    Ok(total)
}

/// Inverse of [`encode_fixed`]; `bits` must be consumed exactly.
pub fn decode_fixed(
    bits: &BitString,
    id: EncodingId,
    face_count: usize,
    first_begins_with_l: bool,
) -> Result<ClersSequence> {
    let table = CodeTable::get(id);
    let mut r = bits.reader();
    let mut codes = Vec::with_capacity(face_count);
    let mut l_table = first_begins_with_l;
    for i in 0..face_count {
        let start = r.position();
        let mut key = 1usize;
        let entry = loop {
            key = key << 1 | usize::from(r.read()?);
            if let Some(e) = table.decode[usize::from(l_table)][key] {
                break e;
            }
            if r.position() - start >= MAX_LEN {
                return Err(Error::InvalidPattern(start));
            }
        };
        if i + 1 == face_count && entry.next_l {
            return Err(Error::CorruptSequence("last quad announces a successor beginning with L".into()));
        }
        codes.push(entry.code);
        l_table = entry.next_l;
    }
    if r.remaining() > 0 {
        return Err(Error::TrailingBits(r.remaining()));
    }
    Ok(ClersSequence::new(codes, (0, 1)))
}

#[derive(Clone, Debug)]
pub struct FixedSelection {
    pub id: EncodingId,
    pub payload: BitString,
    /// Emitted payload length under each encoding, indexed by [`EncodingId::index`].
    pub lengths: [usize; 4],
}

impl FixedSelection {
    /// Payload plus the encoding-id header.
    pub fn total_bits(&self) -> usize {
        self.payload.len() + ID_BITS
    }
}

/// Shortest of the four encodings; ties go to the earlier letter.
pub fn select_best_encoding(seq: &ClersSequence) -> Result<FixedSelection> {
    let mut lengths = [0; 4];
    for id in EncodingId::ALL {
        lengths[id.index()] = encoded_len(seq, id)?;
    }
    let best = (0..4).min_by_key(|&i| (lengths[i], i)).expect("four encodings");
    let id = EncodingId::ALL[best];
    Ok(FixedSelection {
        id,
        payload: encode_fixed(seq, id)?,
        lengths,
    })
}

/// Closed-form cost estimate for an encoding, from label-pair counts.
pub fn cost_formula(hist: &LabelHistogram, id: EncodingId) -> i64 {
    let p = |name: &str| hist.pair(name) as i64;
    let q: i64 = crate::traversal::QUAD_CODES.iter().map(|c| hist.pairs[c.index()] as i64).sum();
    match id {
        EncodingId::A => 3 * q - p("CC") - p("CS") - 2 * p("SS") - 2,
        EncodingId::B => 3 * q - p("CR") + p("CC") - p("CS") - 2 * p("SS"),
        EncodingId::C => 3 * q - p("CC") - p("SC") - hist.cs_followed_by_cs as i64 - 2 * p("SS"),
        EncodingId::D => 3 * q - p("CR") - p("LC"),
    }
}
