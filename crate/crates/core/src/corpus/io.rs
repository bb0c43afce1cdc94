//! Corpus files.
//!
//! Text variant, whitespace separated, one record per line:
//!
//! ```text
//! senmap-corpus 1
//! dim <feature dim>
//! languages <L>
//! language <id> <name> senones <S> phones <P>
//! g <id> <phone of senone 0> ... <phone of senone S-1>
//! splits <U>                 (optional section)
//! <utterance> <train|dev|test>
//! frames <N>
//! <language> <utterance> <senone> <feature 0> ... <feature dim-1>
//! ```
//!
//! Floats are written in shortest round-trip form, so a text round trip is
//! exact. Lines starting with `#` are ignored.
//!
//! Binary variant, little endian: magic `SNMCORP\0`, `u32` version, `u32`
//! dim, `u32` L, then per language `u32` name length, name bytes, `u32` S,
//! `u32` P, S × `u32` phone ids; `u32` split count (`u32::MAX` when absent)
//! followed by (`u32` utterance, `u8` split) pairs; `u64` frame count and per
//! frame `u32` language, `u32` utterance, `u32` senone, dim × `f64`.

use std::collections::BTreeMap;
use std::path::Path;

use super::{LanguageInfo, MultiCorpus, Split};
use crate::error::{Error, Result};
use crate::frames::FrameSet;
use crate::mapping::SenoneToPhoneTable;

const TEXT_MAGIC: &str = "senmap-corpus";
const BINARY_MAGIC: &[u8; 8] = b"SNMCORP\0";
const VERSION: u32 = 1;
const NO_SPLITS: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Text,
    Binary,
}

impl MultiCorpus {
    pub fn to_text(&self) -> String {
        let mut out = format!("{TEXT_MAGIC} {VERSION}\ndim {}\nlanguages {}\n", self.dim(), self.num_languages());
        for (id, lang) in self.languages.iter().enumerate() {
            out.push_str(&format!(
                "language {id} {} senones {} phones {}\n",
                lang.name,
                lang.senone_count(),
                lang.phone_count()
            ));
            out.push_str(&format!("g {id}"));
            for p in lang.g.table() {
                out.push_str(&format!(" {p}"));
            }
            out.push('\n');
        }
        if let Some(splits) = &self.splits {
            out.push_str(&format!("splits {}\n", splits.len()));
            for (u, s) in splits {
                out.push_str(&format!("{u} {}\n", s.name()));
            }
        }
        out.push_str(&format!("frames {}\n", self.frames.len()));
        for f in self.frames.iter() {
            out.push_str(&format!("{} {} {}", f.language, f.utterance, f.label));
            for v in f.features {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<MultiCorpus> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(origin, 0, format!("unexpected end of file, expected {what}")))
        };

        let (n, header) = next("header")?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.first() != Some(&TEXT_MAGIC) {
            return Err(Error::parse(origin, n, "missing senmap-corpus header"));
        }
        if fields.get(1).and_then(|v| v.parse::<u32>().ok()) != Some(VERSION) {
            return Err(Error::parse(origin, n, "unsupported corpus version"));
        }
        let dim = keyed(next("dim")?, "dim", origin)?;
        let n_lang = keyed(next("languages")?, "languages", origin)?;

        let mut languages = Vec::with_capacity(n_lang);
        for id in 0..n_lang {
            let (n, line) = next("language")?;
            let f: Vec<&str> = line.split_whitespace().collect();
            let ["language", lid, name, "senones", s, "phones", p] = f[..] else {
                return Err(Error::parse(origin, n, "expected `language <id> <name> senones <S> phones <P>`"));
            };
            if num::<usize>(lid, origin, n)? != id {
                return Err(Error::parse(origin, n, format!("expected language {id}")));
            }
            let (senones, phones) = (num::<usize>(s, origin, n)?, num::<usize>(p, origin, n)?);
            let (n, line) = next("g table")?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != senones + 2 || f[0] != "g" || num::<usize>(f[1], origin, n)? != id {
                return Err(Error::parse(origin, n, format!("expected `g {id}` with {senones} phone ids")));
            }
            let table = f[2..]
                .iter()
                .map(|v| num::<usize>(v, origin, n))
                .collect::<Result<Vec<_>>>()?;
            languages.push(LanguageInfo {
                name: name.to_string(),
                g: SenoneToPhoneTable::new(id, phones, table)?,
            });
        }

        let (mut n, mut line) = next("splits or frames")?;
        let mut splits = None;
        if line.starts_with("splits") {
            let count = keyed((n, line), "splits", origin)?;
            let mut map = BTreeMap::new();
            for _ in 0..count {
                let (n, line) = next("split entry")?;
                let f: Vec<&str> = line.split_whitespace().collect();
                let [u, s] = f[..] else {
                    return Err(Error::parse(origin, n, "expected `<utterance> <split>`"));
                };
                let split = Split::from_name(s).ok_or_else(|| Error::parse(origin, n, format!("unknown split {s:?}")))?;
                map.insert(num::<u32>(u, origin, n)?, split);
            }
            splits = Some(map);
            (n, line) = next("frames")?;
        }
        let count = keyed((n, line), "frames", origin)?;
        let mut frames = FrameSet::with_capacity(dim, count);
        let mut features = Vec::with_capacity(dim);
        for _ in 0..count {
            let (n, line) = next("frame")?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != dim + 3 {
                return Err(Error::parse(origin, n, format!("expected {} fields, got {}", dim + 3, f.len())));
            }
            features.clear();
            for v in &f[3..] {
                features.push(num::<f64>(v, origin, n)?);
            }
            frames.push(&features, num(f[0], origin, n)?, num(f[2], origin, n)?, num(f[1], origin, n)?)?;
        }

        let mut corpus = MultiCorpus::new(languages, frames)?;
        if let Some(splits) = splits {
            corpus.set_splits(splits)?;
        }
        Ok(corpus)
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.frames.len() * (12 + 8 * self.dim()));
        out.extend_from_slice(BINARY_MAGIC);
        put_u32(&mut out, VERSION);
        put_u32(&mut out, self.dim() as u32);
        put_u32(&mut out, self.num_languages() as u32);
        for lang in &self.languages {
            put_u32(&mut out, lang.name.len() as u32);
            out.extend_from_slice(lang.name.as_bytes());
            put_u32(&mut out, lang.senone_count() as u32);
            put_u32(&mut out, lang.phone_count() as u32);
            for &p in lang.g.table() {
                put_u32(&mut out, p as u32);
            }
        }
        match &self.splits {
            None => put_u32(&mut out, NO_SPLITS),
            Some(splits) => {
                put_u32(&mut out, splits.len() as u32);
                for (&u, &s) in splits {
                    put_u32(&mut out, u);
                    out.push(s as u8);
                }
            }
        }
        out.extend_from_slice(&(self.frames.len() as u64).to_le_bytes());
        for f in self.frames.iter() {
            put_u32(&mut out, f.language as u32);
            put_u32(&mut out, f.utterance);
            put_u32(&mut out, f.label as u32);
            for v in f.features {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<MultiCorpus> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != BINARY_MAGIC {
            return Err(Error::format("binary corpus", "bad magic"));
        }
        if r.u32()? != VERSION {
            return Err(Error::format("binary corpus", "unsupported version"));
        }
        let dim = r.u32()? as usize;
        let n_lang = r.u32()? as usize;
        let mut languages = Vec::with_capacity(n_lang.min(1024));
        for id in 0..n_lang {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::format("binary corpus", "language name is not utf-8"))?
                .to_string();
            let senones = r.u32()? as usize;
            let phones = r.u32()? as usize;
            let table = (0..senones).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
            languages.push(LanguageInfo {
                name,
                g: SenoneToPhoneTable::new(id, phones, table)?,
            });
        }
        let n_splits = r.u32()?;
        let splits = if n_splits == NO_SPLITS {
            None
        } else {
            let mut map = BTreeMap::new();
            for _ in 0..n_splits {
                let u = r.u32()?;
                let s = match r.take(1)?[0] {
                    0 => Split::Train,
                    1 => Split::Dev,
                    2 => Split::Test,
                    other => return Err(Error::format("binary corpus", format!("bad split tag {other}"))),
                };
                map.insert(u, s);
            }
            Some(map)
        };
        let count = u64::from_le_bytes(r.take(8)?.try_into().unwrap()) as usize;
        let mut frames = FrameSet::with_capacity(dim, count.min(1 << 24));
        let mut features = vec![0.0; dim];
        for _ in 0..count {
            let lang = r.u32()? as usize;
            let utt = r.u32()?;
            let label = r.u32()? as usize;
            for v in features.iter_mut() {
                *v = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
            }
            frames.push(&features, lang, label, utt)?;
        }
        if r.pos != bytes.len() {
            return Err(Error::format("binary corpus", "trailing bytes"));
        }
        let mut corpus = MultiCorpus::new(languages, frames)?;
        if let Some(splits) = splits {
            corpus.set_splits(splits)?;
        }
        Ok(corpus)
    }

    pub fn save(&self, path: &Path, format: CorpusFormat) -> Result<()> {
        let bytes = match format {
            CorpusFormat::Text => self.to_text().into_bytes(),
            CorpusFormat::Binary => self.to_binary(),
        };
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Loads either variant, detected from the leading bytes.
    pub fn load(path: &Path) -> Result<MultiCorpus> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.starts_with(BINARY_MAGIC) {
            return Self::from_binary(&bytes);
        }
        let text = String::from_utf8(bytes).map_err(|_| Error::format("corpus", "neither binary nor utf-8 text"))?;
        Self::from_text(&text, path)
    }
}

fn keyed(line: (usize, &str), key: &str, origin: &Path) -> Result<usize> {
    let (n, text) = line;
    let f: Vec<&str> = text.split_whitespace().collect();
    match f[..] {
        [k, v] if k == key => num(v, origin, n),
        _ => Err(Error::parse(origin, n, format!("expected `{key} <count>`"))),
    }
}

fn num<T: std::str::FromStr>(v: &str, origin: &Path, line: usize) -> Result<T> {
    v.parse()
        .map_err(|_| Error::parse(origin, line, format!("bad number {v:?}")))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::format("binary corpus", "truncated"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}
