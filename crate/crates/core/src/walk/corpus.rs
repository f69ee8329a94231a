use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::binfmt::{read_vocab_section, write_vocab_section, HashingReader, HashingWriter, Payload};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"WGWALKS\0";
const VERSION: u32 = 1;

/// Sampled sequences of node ids, stored flat.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WalkCorpus {
    ids: Vec<u32>,
    offsets: Vec<usize>,
}

impl WalkCorpus {
    pub fn new() -> Self {
        WalkCorpus {
            ids: Vec::new(),
            offsets: vec![0],
        }
    }

    pub fn from_sequences<I, S>(seqs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u32]>,
    {
        let mut c = Self::new();
        for s in seqs {
            c.push(s.as_ref());
        }
        c
    }

    pub fn push(&mut self, seq: &[u32]) {
        self.ids.extend_from_slice(seq);
        self.offsets.push(self.ids.len());
    }

    pub fn extend(&mut self, other: &WalkCorpus) {
        let base = self.ids.len();
        self.ids.extend_from_slice(&other.ids);
        self.offsets.extend(other.offsets[1..].iter().map(|o| o + base));
    }

    /// Number of sequences.
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn token_count(&self) -> usize {
        self.ids.len()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.ids[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.offsets.windows(2).map(|w| &self.ids[w[0]..w[1]])
    }

    pub fn tokens(&self) -> &[u32] {
        &self.ids
    }

    /// Occurrences of each id in `0..vocab_size`.
    pub fn token_counts(&self, vocab_size: usize) -> Vec<u64> {
        let mut c = vec![0u64; vocab_size];
        for &i in &self.ids {
            c[i as usize] += 1;
        }
        c
    }

    pub fn max_id(&self) -> Option<u32> {
        self.ids.iter().copied().max()
    }

    /// One walk per line, space-separated words.
    pub fn write_text<W: Write>(&self, vocab: &Vocabulary, mut w: W) -> Result<()> {
        let mut line = String::new();
        for seq in self.iter() {
            line.clear();
            for (k, &id) in seq.iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                line.push_str(vocab.word(id));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read whitespace-separated sequences, one per line, building a fresh
    /// vocabulary (canonical count order) from the words that occur.
    pub fn read_text<R: BufRead>(r: R) -> Result<(Vocabulary, WalkCorpus)> {
        let mut first_seen: FxHashMap<String, u32> = FxHashMap::default();
        let mut words: Vec<String> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        let mut raw = WalkCorpus::new();
        let mut seq = Vec::new();
        for line in r.lines() {
            let line = line?;
            seq.clear();
            for w in line.split_ascii_whitespace() {
                let id = match first_seen.get(w) {
                    Some(&id) => id,
                    None => {
                        let id = words.len() as u32;
                        first_seen.insert(w.to_owned(), id);
                        words.push(w.to_owned());
                        counts.push(0);
                        id
                    }
                };
                counts[id as usize] += 1;
                seq.push(id);
            }
            if !seq.is_empty() {
                raw.push(&seq);
            }
        }
        let vocab = Vocabulary::from_counts(words.iter().cloned().zip(counts));
        let remap: Vec<u32> = words.iter().map(|w| vocab.id(w).unwrap()).collect();
        raw.ids.iter_mut().for_each(|i| *i = remap[*i as usize]);
        Ok((vocab, raw))
    }

    pub fn save_text(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::at_path(path, e))?;
        self.write_text(vocab, BufWriter::with_capacity(1 << 20, f))
    }

    pub fn load_text(path: &Path) -> Result<(Vocabulary, WalkCorpus)> {
        let f = File::open(path).map_err(|e| Error::at_path(path, e))?;
        Self::read_text(BufReader::with_capacity(1 << 20, f))
    }

    /// Binary id-sequence format: header, `VOCB`, then `SEQS` holding
    /// sequence count u64 | token count u64 | offsets | ids, then checksum.
    pub fn write_binary<W: Write>(&self, vocab: &Vocabulary, out: W) -> Result<()> {
        let mut w = HashingWriter::new(out, MAGIC, VERSION)?;
        write_vocab_section(&mut w, vocab)?;
        let s = self.len() as u64;
        let t = self.token_count() as u64;
        w.section(b"SEQS", 16 + (s + 1) * 8 + t * 4)?;
        w.write_all(&s.to_le_bytes())?;
        w.write_all(&t.to_le_bytes())?;
        for &o in &self.offsets {
            w.write_all(&(o as u64).to_le_bytes())?;
        }
        for &i in &self.ids {
            w.write_all(&i.to_le_bytes())?;
        }
        w.finish()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(input: R) -> Result<(Vocabulary, WalkCorpus)> {
        let mut r = HashingReader::open(input, MAGIC, VERSION)?;
        let vocab = read_vocab_section(&mut r)?;
        let raw = r.section(b"SEQS", "sequences")?;
        let mut p = Payload::new(&raw, "sequences");
        let s = p.len_u64()?;
        let t = p.len_u64()?;
        if p.remaining() as u64 != (s as u64 + 1) * 8 + t as u64 * 4 {
            return Err(p.malformed("payload length disagrees with counts".into()));
        }
        let offsets: Vec<usize> = (0..=s).map(|_| p.len_u64()).collect::<Result<_>>()?;
        let ids: Vec<u32> = (0..t).map(|_| p.u32()).collect::<Result<_>>()?;
        p.finish()?;
        r.finish()?;
        if offsets[0] != 0 || offsets[s] != t || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Malformed {
                section: "sequences",
                message: "offsets are not a monotone cover of the ids".into(),
            });
        }
        if ids.iter().any(|&i| i as usize >= vocab.len()) {
            return Err(Error::Malformed {
                section: "sequences",
                message: "id outside vocabulary".into(),
            });
        }
        Ok((vocab, WalkCorpus { ids, offsets }))
    }

    pub fn save_binary(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::at_path(path, e))?;
        self.write_binary(vocab, BufWriter::with_capacity(1 << 20, f))
    }

    pub fn load_binary(path: &Path) -> Result<(Vocabulary, WalkCorpus)> {
        let f = File::open(path).map_err(|e| Error::at_path(path, e))?;
        Self::read_binary(BufReader::with_capacity(1 << 20, f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vocab(n: usize) -> Vocabulary {
        Vocabulary::from_ordered((0..n).map(|i| (format!("w{i}"), (n - i) as u64)).collect()).unwrap()
    }

    #[test]
    fn text_layout() {
        let v = vocab(3);
        let c = WalkCorpus::from_sequences([vec![0, 1, 2], vec![2, 2]]);
        let mut buf = Vec::new();
        c.write_text(&v, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "w0 w1 w2\nw2 w2\n");
        let (v2, c2) = WalkCorpus::read_text(&buf[..]).unwrap();
        // re-indexed by frequency: w2 occurs three times
        assert_eq!(v2.words(), ["w2", "w0", "w1"]);
        assert_eq!(c2, WalkCorpus::from_sequences([vec![1, 2, 0], vec![0, 0]]));
    }

    #[test]
    fn binary_rejects_corruption() {
        let v = vocab(3);
        let c = WalkCorpus::from_sequences([vec![0, 1], vec![2, 2, 1]]);
        let mut buf = Vec::new();
        c.write_binary(&v, &mut buf).unwrap();
        assert!(matches!(
            WalkCorpus::read_binary(&buf[..buf.len() - 2]),
            Err(Error::Truncated { .. })
        ));
        let mut bad = buf.clone();
        let n = bad.len();
        bad[n - 9] ^= 1;
        assert!(WalkCorpus::read_binary(&bad[..]).is_err());
    }

    proptest! {
        #[test]
        fn binary_roundtrip(seqs in proptest::collection::vec(proptest::collection::vec(0u32..20, 0..15), 0..40)) {
            let v = vocab(20);
            let c = WalkCorpus::from_sequences(&seqs);
            let mut buf = Vec::new();
            c.write_binary(&v, &mut buf).unwrap();
            let (v2, c2) = WalkCorpus::read_binary(&buf[..]).unwrap();
            prop_assert_eq!(v2, v);
            prop_assert_eq!(c2, c);
        }
    }
}
