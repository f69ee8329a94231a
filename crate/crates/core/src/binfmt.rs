//! Shared pieces of the sectioned little-endian binary formats.
//!
//! Every file starts with an 8-byte magic and a `u32` version, continues with
//! `tag [u8; 4] | length u64 | payload` sections in a fixed order, and ends
//! with `"CRC_" | crc32` over all preceding bytes.

use std::io::{self, Read, Write};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub(crate) struct HashingWriter<W> {
    inner: W,
    hasher: crc32fast::Hasher,
}

impl<W: Write> HashingWriter<W> {
    pub fn new(inner: W, magic: &[u8; 8], version: u32) -> io::Result<Self> {
        let mut w = HashingWriter {
            inner,
            hasher: crc32fast::Hasher::new(),
        };
        w.write_all(magic)?;
        w.write_all(&version.to_le_bytes())?;
        Ok(w)
    }

    pub fn section(&mut self, tag: &[u8; 4], len: u64) -> io::Result<()> {
        self.write_all(tag)?;
        self.write_all(&len.to_le_bytes())
    }

    /// Write the checksum trailer and flush.
    pub fn finish(self) -> io::Result<()> {
        let crc = self.hasher.finalize();
        let mut out = self.inner;
        out.write_all(b"CRC_")?;
        out.write_all(&crc.to_le_bytes())?;
        out.flush()
    }
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

pub(crate) struct HashingReader<R> {
    inner: R,
    hasher: crc32fast::Hasher,
}

impl<R: Read> HashingReader<R> {
    /// Read and check the header. `bad_magic` is returned on a magic mismatch.
    pub fn open(inner: R, magic: &[u8; 8], version: u32) -> Result<Self> {
        let mut r = HashingReader {
            inner,
            hasher: crc32fast::Hasher::new(),
        };
        let mut header = [0u8; 12];
        read_exact_in(&mut r, &mut header, "header")?;
        if &header[..8] != magic {
            return Err(Error::BadMagic);
        }
        let found = u32::from_le_bytes(header[8..].try_into().unwrap());
        if found != version {
            return Err(Error::VersionMismatch {
                found,
                expected: version,
            });
        }
        Ok(r)
    }

    pub fn section(&mut self, tag: &[u8; 4], name: &'static str) -> Result<Vec<u8>> {
        let mut head = [0u8; 12];
        read_exact_in(self, &mut head, name)?;
        if &head[..4] != tag {
            return Err(Error::Malformed {
                section: name,
                message: format!(
                    "expected tag {:?}, found {:?}",
                    String::from_utf8_lossy(tag),
                    String::from_utf8_lossy(&head[..4])
                ),
            });
        }
        let len = u64::from_le_bytes(head[4..].try_into().unwrap());
        // Read incrementally so a corrupt length cannot force a huge allocation.
        let mut payload = Vec::new();
        let got = self.by_ref().take(len).read_to_end(&mut payload)?;
        if (got as u64) < len {
            return Err(Error::Truncated { section: name });
        }
        Ok(payload)
    }

    /// Read the trailer and compare checksums.
    pub fn finish(self) -> Result<()> {
        let computed = self.hasher.finalize();
        let mut inner = self.inner;
        let mut trailer = [0u8; 8];
        read_exact_in(&mut inner, &mut trailer, "checksum")?;
        if &trailer[..4] != b"CRC_" {
            return Err(Error::Malformed {
                section: "checksum",
                message: "missing trailer tag".into(),
            });
        }
        let stored = u32::from_le_bytes(trailer[4..].try_into().unwrap());
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        Ok(())
    }
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

fn read_exact_in<R: Read>(r: &mut R, buf: &mut [u8], section: &'static str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Truncated { section },
        _ => Error::Io(e),
    })
}

/// Cursor over a section payload.
pub(crate) struct Payload<'a> {
    buf: &'a [u8],
    section: &'static str,
}

impl<'a> Payload<'a> {
    pub fn new(buf: &'a [u8], section: &'static str) -> Self {
        Payload { buf, section }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(self.malformed("payload shorter than its contents".into()));
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn len_u64(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| self.malformed(format!("length {v} too large")))
    }

    pub fn remaining(&self) -> usize {
        self.buf.len()
    }

    pub fn malformed(&self, message: String) -> Error {
        Error::Malformed {
            section: self.section,
            message,
        }
    }

    pub fn finish(self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(self.malformed(format!("{} trailing bytes", self.buf.len())))
        }
    }
}

pub(crate) fn write_vocab_section<W: Write>(w: &mut HashingWriter<W>, vocab: &Vocabulary) -> io::Result<()> {
    let len: u64 = 8 + vocab.words().iter().map(|s| 4 + s.len() as u64 + 8).sum::<u64>();
    w.section(b"VOCB", len)?;
    w.write_all(&(vocab.len() as u64).to_le_bytes())?;
    for (word, &count) in vocab.words().iter().zip(vocab.counts()) {
        w.write_all(&(word.len() as u32).to_le_bytes())?;
        w.write_all(word.as_bytes())?;
        w.write_all(&count.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_vocab_section<R: Read>(r: &mut HashingReader<R>) -> Result<Vocabulary> {
    let raw = r.section(b"VOCB", "vocabulary")?;
    let mut p = Payload::new(&raw, "vocabulary");
    let n = p.len_u64()?;
    let mut entries = Vec::with_capacity(n.min(raw.len() / 12));
    for _ in 0..n {
        let len = p.u32()? as usize;
        let word = std::str::from_utf8(p.take(len)?)
            .map_err(|_| p.malformed("word is not UTF-8".into()))?
            .to_owned();
        let count = p.u64()?;
        entries.push((word, count));
    }
    p.finish()?;
    Vocabulary::from_ordered(entries).map_err(|e| Error::Malformed {
        section: "vocabulary",
        message: e.to_string(),
    })
}
