//! Benchmark dataset files. Blank lines and lines starting with `#` are
//! skipped; words are lowercased.
//!
//! * similarity: `w1<TAB>w2<TAB>score`
//! * analogy: `a b c d` (a:b :: c:d); `:`-prefixed section headers are skipped
//! * categorization: `word<TAB>category`

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub pairs: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyDataset {
    pub quads: Vec<[String; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategorizationDataset {
    pub items: Vec<(String, String)>,
}

impl CategorizationDataset {
    pub fn new(items: Vec<(String, String)>) -> Result<Self> {
        let d = CategorizationDataset { items };
        if d.category_count() < 2 {
            return Err(Error::config("categorization needs at least two categories"));
        }
        Ok(d)
    }

    /// Distinct categories in order of first appearance.
    pub fn categories(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.items
            .iter()
            .map(|(_, c)| c.as_str())
            .filter(|c| seen.insert(*c))
            .collect()
    }

    pub fn category_count(&self) -> usize {
        self.categories().len()
    }
}

/// Yields `(line number, lowercased fields)` for content lines.
fn content_lines<R: BufRead>(r: R, skip: impl Fn(&str) -> bool) -> impl Iterator<Item = Result<(usize, Vec<String>)>> {
    r.lines().enumerate().filter_map(move |(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(e.into())),
        };
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || skip(t) {
            return None;
        }
        Some(Ok((i + 1, t.split_whitespace().map(str::to_lowercase).collect())))
    })
}

fn expect_fields(lineno: usize, f: &[String], n: usize, what: &str) -> Result<()> {
    if f.len() != n {
        return Err(Error::parse(
            lineno,
            format!("expected {what}, found {} fields", f.len()),
        ));
    }
    Ok(())
}

pub fn read_similarity<R: BufRead>(r: R) -> Result<SimilarityDataset> {
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for item in content_lines(r, |_| false) {
        let (lineno, mut f) = item?;
        expect_fields(lineno, &f, 3, "`w1 w2 score`")?;
        let score: f64 = f[2]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(lineno, format!("bad score `{}`", f[2])))?;
        let key = if f[0] <= f[1] {
            (f[0].clone(), f[1].clone())
        } else {
            (f[1].clone(), f[0].clone())
        };
        if !seen.insert(key) {
            return Err(Error::parse(lineno, format!("duplicate pair {} {}", f[0], f[1])));
        }
        f.truncate(2);
        let w2 = f.pop().unwrap();
        let w1 = f.pop().unwrap();
        pairs.push((w1, w2, score));
    }
    Ok(SimilarityDataset { pairs })
}

pub fn read_analogy<R: BufRead>(r: R) -> Result<AnalogyDataset> {
    let mut quads = Vec::new();
    for item in content_lines(r, |t| t.starts_with(':')) {
        let (lineno, f) = item?;
        expect_fields(lineno, &f, 4, "`a b c d`")?;
        if f[0] == f[1] {
            return Err(Error::parse(lineno, format!("a and b are both `{}`", f[0])));
        }
        let q: [String; 4] = f.try_into().expect("four fields");
        quads.push(q);
    }
    Ok(AnalogyDataset { quads })
}

pub fn read_categorization<R: BufRead>(r: R) -> Result<CategorizationDataset> {
    let mut items = Vec::new();
    for item in content_lines(r, |_| false) {
        let (lineno, mut f) = item?;
        expect_fields(lineno, &f, 2, "`word category`")?;
        let c = f.pop().unwrap();
        let w = f.pop().unwrap();
        items.push((w, c));
    }
    CategorizationDataset::new(items)
}

pub fn write_similarity<W: Write>(d: &SimilarityDataset, mut w: W) -> Result<()> {
    for (a, b, s) in &d.pairs {
        writeln!(w, "{a}\t{b}\t{s}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_analogy<W: Write>(d: &AnalogyDataset, mut w: W) -> Result<()> {
    for q in &d.quads {
        writeln!(w, "{}", q.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_categorization<W: Write>(d: &CategorizationDataset, mut w: W) -> Result<()> {
    for (word, c) in &d.items {
        writeln!(w, "{word}\t{c}")?;
    }
    w.flush()?;
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::at_path(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::at_path(path, e))
}

pub fn load_similarity(path: &Path) -> Result<SimilarityDataset> {
    read_similarity(open(path)?)
}

pub fn load_analogy(path: &Path) -> Result<AnalogyDataset> {
    read_analogy(open(path)?)
}

pub fn load_categorization(path: &Path) -> Result<CategorizationDataset> {
    read_categorization(open(path)?)
}

pub fn save_similarity(d: &SimilarityDataset, path: &Path) -> Result<()> {
    write_similarity(d, create(path)?)
}

pub fn save_analogy(d: &AnalogyDataset, path: &Path) -> Result<()> {
    write_analogy(d, create(path)?)
}

pub fn save_categorization(d: &CategorizationDataset, path: &Path) -> Result<()> {
    write_categorization(d, create(path)?)
}
