//! Text normalization and vocabulary construction.
//!
//! Tokens are maximal runs of ASCII letters, lowercased. Everything else
//! (digits, punctuation, whitespace, any non-ASCII byte) separates tokens,
//! which is the Text8 convention. Working on bytes means invalid UTF-8
//! needs no special handling: every byte ≥ 0x80 is simply a separator.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A normalized word: non-empty, characters restricted to `a-z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    /// Returns `None` unless `s` is non-empty and entirely `[a-z]`.
    pub fn new(s: impl Into<String>) -> Option<Self> {
        let s = s.into();
        if !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase()) {
            Some(Token(s))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    /// Fold `A-Z` to `a-z`. When off, uppercase letters are handled like
    /// any other non-letter.
    pub lowercase: bool,
    /// Treat every non-letter as a token separator. When off, only
    /// whitespace separates and other non-letters are deleted in place
    /// (`don't` becomes `dont`).
    pub strip_non_alpha: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            strip_non_alpha: true,
        }
    }
}

enum ByteClass {
    Letter(u8),
    Separator,
    Dropped,
}

impl TokenizerConfig {
    #[inline]
    fn classify(&self, b: u8) -> ByteClass {
        match b {
            b'a'..=b'z' => ByteClass::Letter(b),
            b'A'..=b'Z' if self.lowercase => ByteClass::Letter(b.to_ascii_lowercase()),
            _ if b.is_ascii_whitespace() || self.strip_non_alpha => ByteClass::Separator,
            _ => ByteClass::Dropped,
        }
    }
}

/// Streaming tokenizer over any buffered reader.
///
/// `next_token` lends out an internal buffer, so scanning a large corpus
/// does not allocate per token. The [`Iterator`] impl allocates.
pub struct TokenScanner<R> {
    reader: R,
    config: TokenizerConfig,
    offset: u64,
    current: Vec<u8>,
    done: bool,
}

impl<R: BufRead> TokenScanner<R> {
    pub fn new(reader: R, config: TokenizerConfig) -> Self {
        TokenScanner {
            reader,
            config,
            offset: 0,
            current: Vec::with_capacity(32),
            done: false,
        }
    }

    /// Bytes consumed from the underlying reader so far.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn next_token(&mut self) -> Result<Option<&str>> {
        self.current.clear();
        if self.done {
            return Ok(None);
        }
        loop {
            let buf = match self.reader.fill_buf() {
                Ok(buf) => buf,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
                Err(source) => {
                    return Err(Error::ReadAt {
                        offset: self.offset,
                        source,
                    })
                }
            };
            if buf.is_empty() {
                self.done = true;
                break;
            }
            let mut used = 0;
            let mut complete = false;
            for &b in buf {
                used += 1;
                match self.config.classify(b) {
                    ByteClass::Letter(c) => self.current.push(c),
                    ByteClass::Dropped => {}
                    ByteClass::Separator => {
                        if !self.current.is_empty() {
                            complete = true;
                            break;
                        }
                    }
                }
            }
            self.reader.consume(used);
            self.offset += used as u64;
            if complete {
                break;
            }
        }
        if self.current.is_empty() {
            return Ok(None);
        }
        // Only ASCII lowercase bytes are ever pushed.
        Ok(Some(std::str::from_utf8(&self.current).expect("ascii token")))
    }
}

impl<R: BufRead> Iterator for TokenScanner<R> {
    type Item = Result<Token>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.next_token() {
            Ok(Some(s)) => Some(Ok(Token(s.to_owned()))),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

/// Tokenize a byte stream into a vector of tokens.
pub fn tokenize<R: Read>(raw: R, config: TokenizerConfig) -> Result<Vec<Token>> {
    TokenScanner::new(BufReader::new(raw), config).collect()
}

/// Tokenize an in-memory string.
pub fn tokenize_str(text: &str, config: TokenizerConfig) -> Vec<Token> {
    TokenScanner::new(text.as_bytes(), config)
        .collect::<Result<Vec<_>>>()
        .expect("in-memory reads cannot fail")
}

/// Open `path` and scan it with `config`.
pub fn scan_file(path: &Path, config: TokenizerConfig) -> Result<TokenScanner<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::at_path(path, e))?;
    Ok(TokenScanner::new(BufReader::with_capacity(1 << 20, file), config))
}

/// Read several files as one stream, with a line break between files so
/// no token spans a file boundary.
pub fn open_corpus(paths: &[PathBuf]) -> Result<Box<dyn BufRead + Send>> {
    if paths.is_empty() {
        return Err(Error::config("no corpus input files given"));
    }
    let mut stream: Box<dyn BufRead + Send> = Box::new(std::io::empty());
    for (i, path) in paths.iter().enumerate() {
        let file = File::open(path).map_err(|e| Error::at_path(path, e))?;
        let sep: &'static [u8] = if i == 0 { b"" } else { b"\n" };
        stream = Box::new(stream.chain(sep).chain(BufReader::with_capacity(1 << 20, file)));
    }
    Ok(stream)
}

/// Partial word counts. Counters built over separate shards merge by
/// summation, and the merge order does not affect the resulting vocabulary.
#[derive(Debug, Default, Clone)]
pub struct VocabCounter {
    counts: FxHashMap<String, u64>,
    total: u64,
}

impl VocabCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, word: &str) {
        self.total += 1;
        if let Some(c) = self.counts.get_mut(word) {
            *c += 1;
        } else {
            self.counts.insert(word.to_owned(), 1);
        }
    }

    pub fn add_tokens<'a, I, S>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = &'a S>,
        S: AsRef<str> + 'a + ?Sized,
    {
        for t in tokens {
            self.add(t.as_ref());
        }
    }

    /// Count every token of a stream.
    pub fn add_stream<R: BufRead>(&mut self, scanner: &mut TokenScanner<R>) -> Result<()> {
        while let Some(tok) = scanner.next_token()? {
            self.total += 1;
            if let Some(c) = self.counts.get_mut(tok) {
                *c += 1;
            } else {
                self.counts.insert(tok.to_owned(), 1);
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: VocabCounter) {
        self.total += other.total;
        for (w, c) in other.counts {
            *self.counts.entry(w).or_insert(0) += c;
        }
    }

    /// Number of tokens seen, including ones later filtered out.
    pub fn tokens_seen(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn build(&self, min_count: u64, wordlist: Option<&HashSet<String>>) -> Result<Vocabulary> {
        if min_count < 1 {
            return Err(Error::config("min_count must be at least 1"));
        }
        let entries: Vec<(String, u64)> = self
            .counts
            .iter()
            .filter(|(w, &c)| c >= min_count && wordlist.is_none_or(|wl| wl.contains(w.as_str())))
            .map(|(w, &c)| (w.clone(), c))
            .collect();
        if entries.is_empty() {
            return Err(Error::config(format!(
                "vocabulary is empty after filtering (min_count={min_count}, {} distinct words seen)",
                self.counts.len()
            )));
        }
        Ok(Vocabulary::from_counts(entries))
    }
}

/// Bidirectional word/id map with corpus counts.
///
/// Ids are dense and assigned by descending count, ties broken by byte-wise
/// word order, so the mapping depends only on the token multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: FxHashMap<String, u32>,
    total: u64,
}

impl Vocabulary {
    /// Build from arbitrary (word, count) pairs, sorting into canonical id
    /// order. Duplicate words are summed.
    pub fn from_counts<I: IntoIterator<Item = (String, u64)>>(entries: I) -> Self {
        let mut merged: FxHashMap<String, u64> = FxHashMap::default();
        for (w, c) in entries {
            *merged.entry(w).or_insert(0) += c;
        }
        let mut entries: Vec<(String, u64)> = merged.into_iter().collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_ordered(entries).expect("words are unique after merging")
    }

    /// Build keeping the given order as the id order (used when loading).
    pub fn from_ordered(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut index = FxHashMap::default();
        index.reserve(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let mut total = 0u64;
        if entries.len() > u32::MAX as usize {
            return Err(Error::config("vocabulary exceeds u32 id space"));
        }
        for (i, (w, c)) in entries.into_iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::parse(i + 1, format!("duplicate word `{w}`")));
            }
            total += c;
            words.push(w);
            counts.push(c);
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sum of retained-word counts.
    pub fn total_count(&self) -> u64 {
        self.total
    }

    /// Map tokens to ids, dropping words not in the vocabulary. Survivors on
    /// either side of a dropped word become adjacent.
    pub fn encode<'a, I, S>(&self, tokens: I) -> Vec<u32>
    where
        I: IntoIterator<Item = &'a S>,
        S: AsRef<str> + 'a + ?Sized,
    {
        tokens.into_iter().filter_map(|t| self.id(t.as_ref())).collect()
    }

    /// Stream-encode, appending retained ids to `out`.
    pub fn encode_stream<R: BufRead>(&self, scanner: &mut TokenScanner<R>, out: &mut Vec<u32>) -> Result<()> {
        while let Some(tok) = scanner.next_token()? {
            if let Some(id) = self.id(tok) {
                out.push(id);
            }
        }
        Ok(())
    }

    /// `word<TAB>count` per line, line number = id.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(w, "{word}\t{count}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno, "expected `word<TAB>count`"))?;
            if Token::new(word).is_none() {
                return Err(Error::parse(lineno, format!("invalid word `{word}`")));
            }
            let count = count
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::parse(lineno, format!("bad count: {e}")))?;
            entries.push((word.to_owned(), count));
        }
        Self::from_ordered(entries)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::at_path(path, e))?;
        self.write_tsv(BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::at_path(path, e))?;
        Self::read_tsv(BufReader::new(f))
    }
}

/// Build a vocabulary directly from a token slice.
pub fn build_vocabulary(tokens: &[Token], min_count: u64, wordlist: Option<&HashSet<String>>) -> Result<Vocabulary> {
    let mut counter = VocabCounter::new();
    counter.add_tokens(tokens);
    counter.build(min_count, wordlist)
}

/// Read a wordlist: one word per line, lowercased, blank lines ignored.
pub fn load_wordlist(path: &Path) -> Result<HashSet<String>> {
    let f = File::open(path).map_err(|e| Error::at_path(path, e))?;
    let mut set = HashSet::new();
    for line in BufReader::new(f).lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() {
            set.insert(w.to_ascii_lowercase());
        }
    }
    Ok(set)
}
