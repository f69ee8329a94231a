//! Binary graph file.
//!
//! Little-endian, sectioned:
//!
//! ```text
//! header   magic "WGGRAPH\0" | version u32
//! section  tag [u8; 4] | payload length u64 | payload
//!   VOCB   word count u64, then per word: byte length u32 | bytes | count u64
//!   CSR_   node count u64 | edge count u64 | offsets (n+1) x u64
//!          | targets e x u32 | weights e x u64
//!   NODW   present u8 | n x f64 (only when present = 1)
//! trailer  "CRC_" | crc32 of every preceding byte, u32
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::binfmt::{read_vocab_section, write_vocab_section, HashingReader, HashingWriter, Payload};
use crate::error::{Error, Result};

use super::CooccurrenceGraph;

const MAGIC: &[u8; 8] = b"WGGRAPH\0";
const VERSION: u32 = 1;

pub fn write_graph<W: Write>(graph: &CooccurrenceGraph, out: W) -> Result<()> {
    let mut w = HashingWriter::new(out, MAGIC, VERSION)?;
    write_vocab_section(&mut w, graph.vocab())?;

    let n = graph.node_count() as u64;
    let e = graph.edge_count() as u64;
    w.section(b"CSR_", 16 + (n + 1) * 8 + e * 12)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&e.to_le_bytes())?;
    for &o in graph.offsets() {
        w.write_all(&o.to_le_bytes())?;
    }
    for &t in graph.targets() {
        w.write_all(&t.to_le_bytes())?;
    }
    for &x in graph.weights() {
        w.write_all(&x.to_le_bytes())?;
    }

    match graph.node_weights() {
        Some(pw) => {
            w.section(b"NODW", 1 + n * 8)?;
            w.write_all(&[1])?;
            for &p in pw {
                w.write_all(&p.to_bits().to_le_bytes())?;
            }
        }
        None => {
            w.section(b"NODW", 1)?;
            w.write_all(&[0])?;
        }
    }
    w.finish()?;
    Ok(())
}

pub fn save_graph(graph: &CooccurrenceGraph, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::at_path(path, e))?;
    write_graph(graph, BufWriter::with_capacity(1 << 20, f))
}

pub fn read_graph<R: Read>(input: R) -> Result<CooccurrenceGraph> {
    let mut r = HashingReader::open(input, MAGIC, VERSION)?;
    let vocab = read_vocab_section(&mut r)?;

    let raw = r.section(b"CSR_", "csr")?;
    let mut p = Payload::new(&raw, "csr");
    let nodes = p.len_u64()?;
    let edges = p.len_u64()?;
    if nodes != vocab.len() {
        return Err(p.malformed(format!("{nodes} nodes but {} vocabulary words", vocab.len())));
    }
    if p.remaining() as u64 != (nodes as u64 + 1) * 8 + edges as u64 * 12 {
        return Err(p.malformed("payload length disagrees with node/edge counts".into()));
    }
    let offsets: Vec<u64> = (0..=nodes).map(|_| p.u64()).collect::<Result<_>>()?;
    let targets: Vec<u32> = (0..edges).map(|_| p.u32()).collect::<Result<_>>()?;
    let weights: Vec<u64> = (0..edges).map(|_| p.u64()).collect::<Result<_>>()?;
    p.finish()?;

    let raw = r.section(b"NODW", "node_weights")?;
    let mut p = Payload::new(&raw, "node_weights");
    let node_weights = match p.u8()? {
        0 => None,
        1 => Some(
            (0..nodes)
                .map(|_| p.u64().map(f64::from_bits))
                .collect::<Result<Vec<f64>>>()?,
        ),
        flag => return Err(p.malformed(format!("bad presence flag {flag}"))),
    };
    p.finish()?;
    r.finish()?;

    let mut graph = CooccurrenceGraph::from_csr(vocab, offsets, targets, weights)?;
    if let Some(pw) = node_weights {
        // Stored weights are already normalized; keep their exact bits.
        if pw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Malformed {
                section: "node_weights",
                message: "negative or non-finite weight".into(),
            });
        }
        graph.node_weights = Some(pw);
    }
    Ok(graph)
}

pub fn load_graph(path: &Path) -> Result<CooccurrenceGraph> {
    let f = File::open(path).map_err(|e| Error::at_path(path, e))?;
    read_graph(BufReader::with_capacity(1 << 20, f))
}

/// `src<TAB>dst<TAB>count` per edge, sorted by (source id, target id).
pub fn write_edge_list<W: Write>(graph: &CooccurrenceGraph, mut w: W) -> Result<()> {
    let vocab = graph.vocab();
    for (u, x, c) in graph.edges() {
        writeln!(w, "{}\t{}\t{}", vocab.word(u), vocab.word(x), c)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::four_node;
    use super::super::*;
    use super::*;

    fn bytes(g: &CooccurrenceGraph) -> Vec<u8> {
        let mut buf = Vec::new();
        write_graph(g, &mut buf).unwrap();
        buf
    }

    #[test]
    fn roundtrip_four_node() {
        let mut g = four_node();
        let pw = compute_tf_node_weights(g.vocab()).unwrap();
        g.set_node_weights(pw).unwrap();
        let back = read_graph(&bytes(&g)[..]).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.node_weights(), g.node_weights());

        g.clear_node_weights();
        let back = read_graph(&bytes(&g)[..]).unwrap();
        assert_eq!(back.node_weights(), None);
    }

    #[test]
    fn truncation_names_section() {
        let mut g = four_node();
        g.set_node_weights(vec![0.25; 4]).unwrap();
        let full = bytes(&g);
        let expect = |cut: usize, section: &str| match read_graph(&full[..cut]) {
            Err(Error::Truncated { section: s }) => assert_eq!(s, section, "cut at {cut}"),
            other => panic!("cut at {cut}: {other:?}"),
        };
        expect(5, "header");
        expect(14, "vocabulary");
        let csr_at = full.windows(4).position(|w| w == b"CSR_").unwrap();
        expect(csr_at + 2, "csr");
        expect(csr_at + 40, "csr");
        let nodw_at = full.windows(4).position(|w| w == b"NODW").unwrap();
        expect(nodw_at + 13, "node_weights");
        expect(full.len() - 3, "checksum");
    }

    #[test]
    fn corruption_detected() {
        let full = bytes(&four_node());
        let mut bad = full.clone();
        bad[0] = b'X';
        assert!(matches!(read_graph(&bad[..]), Err(Error::BadMagic)));

        let mut bad = full.clone();
        bad[8] = 9;
        assert!(matches!(
            read_graph(&bad[..]),
            Err(Error::VersionMismatch { found: 9, expected: 1 })
        ));

        // flip a weight byte; still structurally valid, so only the CRC catches it
        let mut bad = full.clone();
        let nodw_at = full.windows(4).position(|w| w == b"NODW").unwrap();
        bad[nodw_at - 3] ^= 0x40;
        assert!(matches!(read_graph(&bad[..]), Err(Error::Checksum { .. })));
    }

    #[test]
    fn random_graph_bit_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let n = 10_000u32;
        let vocab =
            Vocabulary::from_ordered((0..n).map(|i| (format!("w{i}"), rng.random_range(1..1000))).collect()).unwrap();
        let edges: Vec<(u32, u32, u64)> = (0..60_000)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(1..50)))
            .collect();
        let mut g = CooccurrenceGraph::from_edges(vocab, edges).unwrap();
        let pw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        g.set_node_weights(pw).unwrap();
        let first = bytes(&g);
        let back = read_graph(&first[..]).unwrap();
        assert_eq!(back.targets(), g.targets());
        assert_eq!(back.weights(), g.weights());
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.node_weights().unwrap()), bits(g.node_weights().unwrap()));
        assert_eq!(bytes(&back), first);
    }

    #[test]
    fn edge_list_sorted() {
        let mut out = Vec::new();
        write_edge_list(&four_node(), &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "a\tb\t3\na\td\t1\nb\tb\t5\nc\tb\t2\nc\td\t7\nd\ta\t3\nd\tb\t1\n"
        );
    }
}
