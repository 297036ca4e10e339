//! Binary model file.
//!
//! ```text
//! magic    8 bytes  "GAPFILL1"
//! version  u32
//! section* { tag: u32, len: u64, payload: len bytes }
//! ```
//!
//! Integers are little-endian and fixed width, floats are stored as their
//! IEEE-754 bit pattern, strings are a `u32` byte length followed by UTF-8.
//! Table entries are written in key order so the same model always
//! serializes to the same bytes. Readers skip sections with unknown tags.

use std::fs::File;
use std::io::{BufWriter, Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use rustc_hash::FxHashMap;

use crate::candidates::StaticLexicon;
use crate::error::{Error, Result};
use crate::gaps::GapTables;
use crate::model::{BuildConfig, Model};
use crate::ngram::{pack2, pack3, NGramCounts, TokenId, Vocabulary};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 8] = b"GAPFILL1";
pub const FORMAT_VERSION: u32 = 1;

const TAG_CONFIG: u32 = 1;
const TAG_VOCAB: u32 = 2;
const TAG_BIGRAMS: u32 = 3;
const TAG_TRIGRAMS: u32 = 4;
const TAG_GAPS: u32 = 5;
const TAG_LEXICON: u32 = 6;

type Writer = Vec<u8>;

fn section(out: &mut Writer, tag: u32, payload: Writer) -> Result<()> {
    out.write_u32::<LE>(tag)?;
    out.write_u64::<LE>(payload.len() as u64)?;
    out.extend_from_slice(&payload);
    Ok(())
}

fn write_str(w: &mut Writer, s: &str) -> Result<()> {
    w.write_u32::<LE>(s.len() as u32)?;
    w.extend_from_slice(s.as_bytes());
    Ok(())
}

fn write_pairs(w: &mut Writer, entries: impl Iterator<Item = ((TokenId, TokenId), u64)>) -> Result<()> {
    let mut v: Vec<_> = entries.collect();
    v.sort_unstable();
    w.write_u64::<LE>(v.len() as u64)?;
    for ((a, b), c) in v {
        w.write_u32::<LE>(a.0)?;
        w.write_u32::<LE>(b.0)?;
        w.write_u64::<LE>(c)?;
    }
    Ok(())
}

fn config_payload(cfg: &BuildConfig) -> Result<Writer> {
    let mut w = Writer::new();
    w.write_u64::<LE>(cfg.min_count)?;
    w.write_u32::<LE>(cfg.discount_threshold)?;
    w.write_u64::<LE>(cfg.static_k as u64)?;
    w.write_u64::<LE>(cfg.gap_min_count)?;
    w.write_u64::<LE>(cfg.hyper_v.to_bits())?;
    w.write_u8(u8::from(cfg.lowercase))?;
    Ok(w)
}

fn vocab_payload(vocab: &Vocabulary) -> Result<Writer> {
    let mut w = Writer::new();
    w.write_u32::<LE>(vocab.len() as u32)?;
    for (s, &c) in vocab.surfaces().iter().zip(vocab.raw_counts()) {
        write_str(&mut w, s)?;
        w.write_u64::<LE>(c)?;
    }
    Ok(w)
}

fn trigram_payload(counts: &NGramCounts) -> Result<Writer> {
    let mut v: Vec<_> = counts.trigram_entries().collect();
    v.sort_unstable();
    let mut w = Writer::new();
    w.write_u64::<LE>(v.len() as u64)?;
    for ((a, b, c), n) in v {
        w.write_u32::<LE>(a.0)?;
        w.write_u32::<LE>(b.0)?;
        w.write_u32::<LE>(c.0)?;
        w.write_u64::<LE>(n)?;
    }
    Ok(w)
}

fn gaps_payload(gaps: &GapTables) -> Result<Writer> {
    let mut w = Writer::new();
    w.write_u8(u8::from(gaps.is_filtered()))?;
    write_pairs(&mut w, gaps.together_entries())?;
    write_pairs(&mut w, gaps.separate_entries())?;
    let mut mids: Vec<_> = gaps.middle_entries().collect();
    mids.sort_unstable_by_key(|&(pair, _)| pair);
    w.write_u64::<LE>(mids.len() as u64)?;
    for ((a, b), list) in mids {
        w.write_u32::<LE>(a.0)?;
        w.write_u32::<LE>(b.0)?;
        w.write_u32::<LE>(list.len() as u32)?;
        for &(x, c) in list {
            w.write_u32::<LE>(x.0)?;
            w.write_u64::<LE>(c)?;
        }
    }
    Ok(w)
}

fn lexicon_payload(lex: &StaticLexicon) -> Result<Writer> {
    let mut w = Writer::new();
    w.write_u64::<LE>(lex.k() as u64)?;
    w.write_u32::<LE>(lex.len() as u32)?;
    for &t in lex.entries() {
        w.write_u32::<LE>(t.0)?;
    }
    Ok(w)
}

/// Serializes the parts of a model that are stored (the probability model
/// itself is rebuilt from counts on load).
pub fn to_bytes<F: Scalar>(model: &Model<F>) -> Result<Vec<u8>> {
    let mut out = Writer::new();
    out.extend_from_slice(MAGIC);
    out.write_u32::<LE>(FORMAT_VERSION)?;
    section(&mut out, TAG_CONFIG, config_payload(&model.config)?)?;
    section(&mut out, TAG_VOCAB, vocab_payload(&model.vocab)?)?;
    let mut bigrams = Writer::new();
    write_pairs(&mut bigrams, model.counts().bigram_entries())?;
    section(&mut out, TAG_BIGRAMS, bigrams)?;
    section(&mut out, TAG_TRIGRAMS, trigram_payload(model.counts())?)?;
    section(&mut out, TAG_GAPS, gaps_payload(&model.gaps)?)?;
    section(&mut out, TAG_LEXICON, lexicon_payload(&model.lexicon)?)?;
    Ok(out)
}

pub fn save<F: Scalar>(model: &Model<F>, path: &Path) -> Result<()> {
    let bytes = to_bytes(model)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn load<F: Scalar>(path: &Path) -> Result<Model<F>> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

fn truncated<T>(_: std::io::Error) -> Result<T> {
    Err(Error::Format("truncated data".into()))
}

struct Reader<'a> {
    cur: Cursor<&'a [u8]>,
    vocab_len: u32,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader {
            cur: Cursor::new(buf),
            vocab_len: u32::MAX,
        }
    }

    fn done(&self) -> bool {
        self.cur.position() as usize >= self.cur.get_ref().len()
    }

    fn u8(&mut self) -> Result<u8> {
        self.cur.read_u8().or_else(truncated)
    }

    fn u32(&mut self) -> Result<u32> {
        self.cur.read_u32::<LE>().or_else(truncated)
    }

    fn u64(&mut self) -> Result<u64> {
        self.cur.read_u64::<LE>().or_else(truncated)
    }

    fn len(&mut self, width: usize) -> Result<usize> {
        let n = self.u64()? as usize;
        let left = self.cur.get_ref().len() - self.cur.position() as usize;
        if n.saturating_mul(width) > left {
            return Err(Error::Format("table length exceeds section".into()));
        }
        Ok(n)
    }

    fn token(&mut self) -> Result<TokenId> {
        let t = self.u32()?;
        if t >= self.vocab_len {
            return Err(Error::Format(format!("token id {t} outside vocabulary")));
        }
        Ok(TokenId(t))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let start = self.cur.position() as usize;
        let bytes = self
            .cur
            .get_ref()
            .get(start..start + n)
            .ok_or_else(|| Error::Format("truncated string".into()))?;
        self.cur.set_position((start + n) as u64);
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::Format("token surface is not UTF-8".into()))
    }

    fn pairs(&mut self) -> Result<FxHashMap<u64, u64>> {
        let n = self.len(16)?;
        let mut m = FxHashMap::default();
        m.reserve(n);
        for _ in 0..n {
            let (a, b) = (self.token()?, self.token()?);
            let c = self.u64()?;
            if c == 0 {
                return Err(Error::Format("zero count stored".into()));
            }
            m.insert(pack2(a, b), c);
        }
        Ok(m)
    }
}

fn read_config(r: &mut Reader) -> Result<BuildConfig> {
    Ok(BuildConfig {
        min_count: r.u64()?,
        discount_threshold: r.u32()?,
        static_k: r.u64()? as usize,
        gap_min_count: r.u64()?,
        hyper_v: f64::from_bits(r.u64()?),
        lowercase: r.u8()? != 0,
    })
}

fn read_vocab(r: &mut Reader, lowercase: bool) -> Result<Vocabulary> {
    let n = r.u32()? as usize;
    let mut surfaces = Vec::with_capacity(n.min(1 << 24));
    let mut counts = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        surfaces.push(r.string()?);
        counts.push(r.u64()?);
    }
    Vocabulary::from_full(surfaces, counts, lowercase)
}

fn read_trigrams(r: &mut Reader) -> Result<FxHashMap<u128, u64>> {
    let n = r.len(20)?;
    let mut m = FxHashMap::default();
    m.reserve(n);
    for _ in 0..n {
        let (a, b, c) = (r.token()?, r.token()?, r.token()?);
        let count = r.u64()?;
        if count == 0 {
            return Err(Error::Format("zero count stored".into()));
        }
        m.insert(pack3(a, b, c), count);
    }
    Ok(m)
}

fn read_gaps(r: &mut Reader) -> Result<GapTables> {
    let filtered = r.u8()? != 0;
    let together = r.pairs()?;
    let separate = r.pairs()?;
    let n = r.len(12)?;
    let mut middles = FxHashMap::default();
    middles.reserve(n);
    for _ in 0..n {
        let (a, b) = (r.token()?, r.token()?);
        let len = r.u32()? as usize;
        let mut list = Vec::with_capacity(len.min(1 << 20));
        for _ in 0..len {
            list.push((r.token()?, r.u64()?));
        }
        if !list.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::Format("middle words out of order".into()));
        }
        middles.insert(pack2(a, b), list);
    }
    Ok(GapTables {
        together,
        separate,
        middles,
        filtered,
    })
}

fn read_lexicon(r: &mut Reader) -> Result<StaticLexicon> {
    let k = r.u64()? as usize;
    let n = r.u32()? as usize;
    let mut entries = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let t = r.token()?;
        if t.is_reserved() {
            return Err(Error::Format("reserved id in static lexicon".into()));
        }
        entries.push(t);
    }
    Ok(StaticLexicon::from_entries(k, entries))
}

/// Checks magic and version, then parses every known section.
pub fn from_bytes<F: Scalar>(bytes: &[u8]) -> Result<Model<F>> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut head = Reader::new(&bytes[8..]);
    let version = head.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let mut sections: FxHashMap<u32, &[u8]> = FxHashMap::default();
    let body = &bytes[12..];
    let mut pos = 0usize;
    while pos < body.len() {
        let mut r = Reader::new(&body[pos..]);
        let tag = r.u32()?;
        let len = r.u64()? as usize;
        let start = pos + 12;
        let payload = body
            .get(start..start.saturating_add(len))
            .ok_or_else(|| Error::Format(format!("section {tag} truncated")))?;
        sections.entry(tag).or_insert(payload);
        pos = start + len;
    }
    let get = |tag: u32, name: &str| {
        sections
            .get(&tag)
            .map(|p| Reader::new(p))
            .ok_or_else(|| Error::Format(format!("missing {name} section")))
    };

    let config = read_config(&mut get(TAG_CONFIG, "config")?)?;
    let vocab = read_vocab(&mut get(TAG_VOCAB, "vocabulary")?, config.lowercase)?;
    let vocab_len = vocab.len() as u32;
    let tables = |tag: u32, name: &str| {
        get(tag, name).map(|mut r| {
            r.vocab_len = vocab_len;
            r
        })
    };
    let bigrams = tables(TAG_BIGRAMS, "bigram")?.pairs()?;
    let trigrams = read_trigrams(&mut tables(TAG_TRIGRAMS, "trigram")?)?;
    let gaps = read_gaps(&mut tables(TAG_GAPS, "gap table")?)?;
    let mut r = tables(TAG_LEXICON, "lexicon")?;
    let lexicon = read_lexicon(&mut r)?;
    debug_assert!(r.done());

    let counts = NGramCounts::from_tables(vocab.raw_counts().to_vec(), bigrams, trigrams);
    config
        .validate()
        .map_err(|e| Error::Format(format!("stored build config: {e}")))?;
    Model::with_lexicon(vocab, counts, gaps, lexicon, config)
}
