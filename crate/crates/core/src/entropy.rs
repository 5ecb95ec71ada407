//! Context-model entropy analysis and an adaptive range coder over face codes.
//!
//! The coded symbol is a whole face code; its context is the previous `n`
//! face codes, with a sentinel standing in before the start of the stream.

use rustc_hash::FxHashMap;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::traversal::{ClersSequence, FaceCode, Label, QUAD_CODES, TRI_CODES};

/// Largest supported memory depth.
pub const MAX_MEMORY: usize = 4;

/// Count added to a symbol after it is coded. Every count starts at 1.
pub const DEFAULT_INCREMENT: u32 = 24;

const MAX_TOTAL: u32 = 1 << 16;

/// Symbols the coder can emit, chosen from the face counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alphabet {
    Quads,
    Triangles,
    Mixed,
}

impl Alphabet {
    pub fn for_counts(quads: usize, triangles: usize) -> Alphabet {
        match (quads, triangles) {
            (_, 0) => Alphabet::Quads,
            (0, _) => Alphabet::Triangles,
            _ => Alphabet::Mixed,
        }
    }

    pub fn for_sequence(seq: &ClersSequence) -> Alphabet {
        Self::for_counts(seq.quad_count(), seq.triangle_count())
    }

    pub fn size(self) -> usize {
        match self {
            Alphabet::Quads => 13,
            Alphabet::Triangles => 5,
            Alphabet::Mixed => 18,
        }
    }

    pub fn symbol(self, code: FaceCode) -> Option<usize> {
        let i = code.index();
        match self {
            Alphabet::Quads => (i < 13).then_some(i),
            Alphabet::Triangles => i.checked_sub(13),
            Alphabet::Mixed => Some(i),
        }
    }

    pub fn code(self, sym: usize) -> Option<FaceCode> {
        match self {
            Alphabet::Quads => QUAD_CODES.get(sym).copied(),
            Alphabet::Triangles => TRI_CODES.get(sym).copied(),
            Alphabet::Mixed => FaceCode::from_index(sym),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Freqs {
    counts: Vec<u32>,
    total: u32,
}

impl Freqs {
    fn new(k: usize) -> Self {
        Freqs {
            counts: vec![1; k],
            total: k as u32,
        }
    }

    fn start(&self, sym: usize) -> u32 {
        self.counts[..sym].iter().sum()
    }

    fn bump(&mut self, sym: usize, inc: u32) {
        self.counts[sym] += inc;
        self.total += inc;
        if self.total > MAX_TOTAL {
            self.total = 0;
            for c in &mut self.counts {
                *c = (*c).div_ceil(2);
                self.total += *c;
            }
        }
    }
}

/// Adaptive frequencies per context of the last `memory` symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextModel {
    memory: usize,
    alphabet: usize,
    increment: u32,
    history: Vec<usize>,
    contexts: FxHashMap<u64, Freqs>,
}

impl ContextModel {
    pub fn new(memory: usize, alphabet: usize, increment: u32) -> Result<Self> {
        if memory > MAX_MEMORY {
            return Err(Error::Precondition(format!("memory depth {memory} exceeds {MAX_MEMORY}")));
        }
        if alphabet < 1 || increment < 1 {
            return Err(Error::Precondition("empty alphabet or zero increment".into()));
        }
        Ok(ContextModel {
            memory,
            alphabet,
            increment,
            history: vec![alphabet; memory],
            contexts: FxHashMap::default(),
        })
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn context_count(&self) -> usize {
        self.contexts.len()
    }

    fn key(&self) -> u64 {
        let base = self.alphabet as u64 + 1;
        self.history.iter().fold(0, |k, &s| k * base + s as u64)
    }

    fn current(&mut self) -> &mut Freqs {
        let key = self.key();
        let k = self.alphabet;
        self.contexts.entry(key).or_insert_with(|| Freqs::new(k))
    }

    /// Probability interval `(start, size, total)` of `sym` in the current context.
    fn interval(&mut self, sym: usize) -> (u32, u32, u32) {
        let f = self.current();
        (f.start(sym), f.counts[sym], f.total)
    }

    /// Cost in bits of coding `sym` next, without updating.
    pub fn cost(&mut self, sym: usize) -> f64 {
        let (_, size, total) = self.interval(sym);
        (f64::from(total) / f64::from(size)).log2()
    }

    fn update(&mut self, sym: usize) {
        let inc = self.increment;
        self.current().bump(sym, inc);
        if self.memory > 0 {
            self.history.remove(0);
            self.history.push(sym);
        }
    }
}

const TOP: u32 = 1 << 24;

/// Carry-propagating range coder with a 32-bit range.
struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    pending: u64,
    out: Vec<u8>,
}

impl RangeEncoder {
    fn new() -> Self {
        RangeEncoder {
            low: 0,
            range: u32::MAX,
            cache: 0,
            pending: 1,
            out: Vec::new(),
        }
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xFF00_0000 || self.low >> 32 != 0 {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                self.out.push(byte.wrapping_add(carry));
                byte = 0xFF;
                self.pending -= 1;
                if self.pending == 0 {
                    break;
                }
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.pending += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    fn encode(&mut self, start: u32, size: u32, total: u32) {
        let r = self.range / total;
        self.low += u64::from(start) * u64::from(r);
        self.range = size * r;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn finish(mut self) -> Vec<u8> {
        // any value in [low, low + range) decodes; pick the one with most trailing zeros
        let hi = self.low + u64::from(self.range) - 1;
        for k in (0..=32).rev() {
            let mask = (1u64 << k) - 1;
            let v = (self.low + mask) & !mask;
            if v <= hi {
                self.low = v;
                break;
            }
        }
        let before = self.out.len();
        for _ in 0..5 {
            self.shift_low();
        }
        let mut out = self.out;
        // the first byte is always the zero initial cache
        out.remove(0);
        let floor = before.saturating_sub(1).max(out.len().saturating_sub(4));
        while out.len() > floor && out.last() == Some(&0) {
            out.pop();
        }
        out
    }
}

/// Missing trailing bytes read as zero; at most this many.
const MAX_PAD: usize = 4;

struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    code: u32,
    range: u32,
}

impl<'a> RangeDecoder<'a> {
    fn new(data: &'a [u8]) -> Result<Self> {
        let mut d = RangeDecoder {
            data,
            pos: 0,
            code: 0,
            range: u32::MAX,
        };
        for _ in 0..4 {
            d.code = d.code << 8 | u32::from(d.byte()?);
        }
        Ok(d)
    }

    fn byte(&mut self) -> Result<u8> {
        let b = match self.data.get(self.pos) {
            Some(&b) => b,
            None if self.pos < self.data.len() + MAX_PAD => 0,
            None => return Err(Error::Underrun),
        };
        self.pos += 1;
        Ok(b)
    }

    /// Scaled target within `[0, total)`.
    fn target(&mut self, total: u32) -> Result<(u32, u32)> {
        let r = self.range / total;
        let t = self.code / r;
        if t >= total {
            return Err(Error::CorruptSequence("range decoder left the coding interval".into()));
        }
        Ok((t, r))
    }

    fn consume(&mut self, start: u32, size: u32, r: u32) -> Result<()> {
        self.code -= start * r;
        self.range = size * r;
        while self.range < TOP {
            self.range <<= 8;
            self.code = self.code << 8 | u32::from(self.byte()?);
        }
        Ok(())
    }
}

/// Symbol-at-a-time adaptive encoder.
pub struct ArithEncoder {
    model: ContextModel,
    rc: RangeEncoder,
    symbols: usize,
}

impl ArithEncoder {
    pub fn new(memory: usize, alphabet: usize, increment: u32) -> Result<Self> {
        Ok(ArithEncoder {
            model: ContextModel::new(memory, alphabet, increment)?,
            rc: RangeEncoder::new(),
            symbols: 0,
        })
    }

    pub fn encode(&mut self, sym: usize) -> Result<()> {
        if sym >= self.model.alphabet {
            return Err(Error::Precondition(format!("symbol {sym} outside the alphabet")));
        }
        let (start, size, total) = self.model.interval(sym);
        self.rc.encode(start, size, total);
        self.model.update(sym);
        self.symbols += 1;
        Ok(())
    }

    pub fn model(&self) -> &ContextModel {
        &self.model
    }

    pub fn finish(self) -> BitString {
        let bytes = if self.symbols == 0 { Vec::new() } else { self.rc.finish() };
        let n = bytes.len() * 8;
        BitString::from_bytes(bytes, n).expect("whole bytes")
    }
}

/// Symbol-at-a-time adaptive decoder, mirroring [`ArithEncoder`].
pub struct ArithDecoder<'a> {
    model: ContextModel,
    rc: Option<RangeDecoder<'a>>,
    data: &'a [u8],
}

impl<'a> ArithDecoder<'a> {
    pub fn new(bits: &'a BitString, memory: usize, alphabet: usize, increment: u32) -> Result<Self> {
        Ok(ArithDecoder {
            model: ContextModel::new(memory, alphabet, increment)?,
            rc: None,
            data: bits.as_bytes(),
        })
    }

    pub fn decode(&mut self) -> Result<usize> {
        if self.rc.is_none() {
            self.rc = Some(RangeDecoder::new(self.data)?);
        }
        let rc = self.rc.as_mut().expect("initialized");
        let f = self.model.current();
        let (t, r) = rc.target(f.total)?;
        let mut start = 0;
        let mut sym = 0;
        while start + f.counts[sym] <= t {
            start += f.counts[sym];
            sym += 1;
        }
        let size = f.counts[sym];
        rc.consume(start, size, r)?;
        self.model.update(sym);
        Ok(sym)
    }

    pub fn model(&self) -> &ContextModel {
        &self.model
    }

    /// Bytes read past the end of the input, as zero padding.
    pub fn finish(self) -> Result<()> {
        match self.rc {
            None if !self.data.is_empty() => Err(Error::TrailingBits(self.data.len() * 8)),
            Some(rc) if rc.pos < rc.data.len() => Err(Error::TrailingBits((rc.data.len() - rc.pos) * 8)),
            _ => Ok(()),
        }
    }
}

/// Codes `seq` with an adaptive model of memory `memory`.
pub fn encode_arith(seq: &ClersSequence, memory: usize, alphabet: Alphabet) -> Result<BitString> {
    encode_arith_with(seq, memory, alphabet, DEFAULT_INCREMENT)
}

pub fn encode_arith_with(seq: &ClersSequence, memory: usize, alphabet: Alphabet, increment: u32) -> Result<BitString> {
    let mut enc = ArithEncoder::new(memory, alphabet.size(), increment)?;
    for (i, &c) in seq.codes.iter().enumerate() {
        let sym = alphabet
            .symbol(c)
            .ok_or_else(|| Error::Precondition(format!("face code {c} at {i} is outside the alphabet")))?;
        enc.encode(sym)?;
    }
    Ok(enc.finish())
}

pub fn decode_arith(bits: &BitString, memory: usize, symbol_count: usize, alphabet: Alphabet) -> Result<ClersSequence> {
    let mut dec = ArithDecoder::new(bits, memory, alphabet.size(), DEFAULT_INCREMENT)?;
    let mut codes = Vec::with_capacity(symbol_count);
    for _ in 0..symbol_count {
        let sym = dec.decode()?;
        codes.push(alphabet.code(sym).expect("decoded symbol is in the alphabet"));
    }
    dec.finish()?;
    Ok(ClersSequence::new(codes, (0, 1)))
}

/// Codes a flag string with an adaptive binary model.
pub fn encode_flags(flags: &[bool]) -> BitString {
    let mut enc = ArithEncoder::new(0, 2, DEFAULT_INCREMENT).expect("valid model");
    for &f in flags {
        enc.encode(usize::from(f)).expect("binary symbol");
    }
    enc.finish()
}

/// Decodes `count` flags from exactly `bits`.
pub fn decode_flags(bits: &BitString, count: usize) -> Result<Vec<bool>> {
    let mut dec = ArithDecoder::new(bits, 0, 2, DEFAULT_INCREMENT)?;
    let out = (0..count).map(|_| dec.decode().map(|s| s == 1)).collect::<Result<Vec<_>>>()?;
    dec.finish()?;
    Ok(out)
}

/// Plug-in conditional entropy, in total bits, of `symbols` (each `< alphabet`)
/// given the previous `memory` symbols.
pub fn conditional_entropy(symbols: &[usize], alphabet: usize, memory: usize) -> f64 {
    let base = alphabet as u64 + 1;
    let mut joint: FxHashMap<(u64, usize), u64> = FxHashMap::default();
    let mut ctx_total: FxHashMap<u64, u64> = FxHashMap::default();
    let mut history = vec![alphabet; memory];
    for &s in symbols {
        let key = history.iter().fold(0, |k, &h| k * base + h as u64);
        *joint.entry((key, s)).or_insert(0) += 1;
        *ctx_total.entry(key).or_insert(0) += 1;
        if memory > 0 {
            history.remove(0);
            history.push(s);
        }
    }
    joint
        .iter()
        .map(|(&(key, _), &c)| {
            let c = c as f64;
            c * (ctx_total[&key] as f64 / c).log2()
        })
        .sum()
}

/// Entropy of a face-code stream, per symbol unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyReport {
    pub memory: usize,
    /// Face codes as symbols.
    pub pair_bits: f64,
    /// CLERS letters as symbols, with T as a sixth letter when triangles occur.
    pub letter_bits: f64,
    pub pair_bpv: f64,
    pub letter_bpv: f64,
}

/// Letter stream of a sequence: C, L, E, R, S are 0..5 and T is 5.
pub fn letter_symbols(seq: &ClersSequence) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * seq.len());
    for c in &seq.codes {
        if let FaceCode::Tri(_) = c {
            out.push(5);
        }
        out.extend(c.labels().map(Label::index));
    }
    out
}

/// Empirical entropy of `seq` from its own frequencies; per-vertex values
/// divide by `vertex_count`.
pub fn static_entropy(seq: &ClersSequence, memory: usize, vertex_count: usize) -> EntropyReport {
    let pairs: Vec<usize> = seq.codes.iter().map(|c| c.index()).collect();
    let letters = letter_symbols(seq);
    let letter_alphabet = if seq.triangle_count() > 0 { 6 } else { 5 };
    let pair_bits = conditional_entropy(&pairs, crate::traversal::CODE_COUNT, memory);
    let letter_bits = conditional_entropy(&letters, letter_alphabet, memory);
    let v = vertex_count.max(1) as f64;
    EntropyReport {
        memory,
        pair_bits,
        letter_bits,
        pair_bpv: pair_bits / v,
        letter_bpv: letter_bits / v,
    }
}
