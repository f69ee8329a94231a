//! word2vec text format: a `<count> <dim>` header line, then one
//! `<word> <v1> ... <vd>` line per word with six decimal places.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::EmbeddingMatrix;
use crate::error::{Error, Result};

pub fn write_embeddings<W: Write>(m: &EmbeddingMatrix, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", m.len(), m.dim())?;
    let mut line = String::new();
    for (i, word) in m.words().iter().enumerate() {
        use std::fmt::Write as _;
        line.clear();
        line.push_str(word);
        for x in m.vector(i as u32) {
            let _ = write!(line, " {x:.6}");
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_embeddings<R: BufRead>(r: R) -> Result<EmbeddingMatrix> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::parse(1, "missing header"))?;
    let mut h = header.split_ascii_whitespace();
    let mut field = |name: &str| -> Result<usize> {
        h.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(1, format!("header needs `<count> <dim>`, bad {name}")))
    };
    let (n, dim) = (field("count")?, field("dimension")?);
    if dim == 0 {
        return Err(Error::parse(1, "dimension must be at least 1"));
    }
    let mut words = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * dim);
    let mut seen = rustc_hash::FxHashSet::default();
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if words.len() == n {
            return Err(Error::parse(lineno, format!("more than the {n} vectors in the header")));
        }
        let mut parts = line.split_ascii_whitespace();
        let word = parts.next().unwrap_or_default();
        let before = values.len();
        for t in parts {
            let x: f32 = t
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad value `{t}`")))?;
            values.push(x);
        }
        if values.len() - before != dim {
            return Err(Error::parse(
                lineno,
                format!("expected {dim} values, found {}", values.len() - before),
            ));
        }
        if !seen.insert(word.to_owned()) {
            return Err(Error::parse(lineno, format!("duplicate word `{word}`")));
        }
        words.push(word.to_owned());
    }
    if words.len() != n {
        return Err(Error::parse(
            words.len() + 2,
            format!("header promises {n} vectors, found {}", words.len()),
        ));
    }
    EmbeddingMatrix::from_parts(words, dim, values)
}

pub fn save_embeddings(m: &EmbeddingMatrix, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::at_path(path, e))?;
    write_embeddings(m, BufWriter::with_capacity(1 << 20, f))
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let f = File::open(path).map_err(|e| Error::at_path(path, e))?;
    read_embeddings(BufReader::with_capacity(1 << 20, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> EmbeddingMatrix {
        EmbeddingMatrix::from_parts(
            vec!["a".into(), "bb".into()],
            3,
            vec![0.5, -0.25, 1.0, 0.1234567, 0.0, -3.0],
        )
        .unwrap()
    }

    #[test]
    fn layout() {
        let mut buf = Vec::new();
        write_embeddings(&small(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "2 3\na 0.500000 -0.250000 1.000000\nbb 0.123457 0.000000 -3.000000\n"
        );
    }

    #[test]
    fn roundtrip_within_print_precision() {
        let m = small();
        let mut buf = Vec::new();
        write_embeddings(&m, &mut buf).unwrap();
        let back = read_embeddings(&buf[..]).unwrap();
        assert_eq!(back.words(), m.words());
        for (x, y) in back.input_vectors().iter().zip(m.input_vectors()) {
            assert!((x - y).abs() <= 5e-7);
        }
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("2\n", 1),
            ("1 2\na 1.0\n", 2),
            ("2 1\na 1\na 2\n", 3),
            ("2 1\na 1\n", 3),
            ("1 1\na 1\nb 2\n", 3),
            ("1 1\na x\n", 2),
        ];
        for (text, want) in cases {
            match read_embeddings(text.as_bytes()) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
