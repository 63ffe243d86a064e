//! Streaming reader and writer for DCF1 embedding files.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use decafbench_core::embedding::{
    encode_header, record_len, DecodeError, EmbeddingFile, EmbeddingRecord, EncodeError, FixedHeader, HeaderInfo,
    FIXED_HEADER_LEN,
};
use thiserror::Error;

use crate::error::Error;

#[derive(Debug, Error)]
pub enum DcfError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("writer finished after {written} of {declared} records")]
    Incomplete { declared: u64, written: u64 },
}

fn read_full(reader: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Record-at-a-time reader. When the total length is known up front the
/// record section is validated before the first record is returned.
pub struct EmbeddingReader<R> {
    reader: R,
    fixed: FixedHeader,
    info: HeaderInfo,
    next: u64,
    buf: Vec<u8>,
}

impl EmbeddingReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self, DcfError> {
        let file = File::open(path)?;
        let len = file.metadata()?.len();
        Self::new(BufReader::new(file), Some(len))
    }
}

impl<R: Read> EmbeddingReader<R> {
    pub fn new(mut reader: R, total_len: Option<u64>) -> Result<Self, DcfError> {
        let mut fixed_bytes = [0u8; FIXED_HEADER_LEN];
        let got = read_full(&mut reader, &mut fixed_bytes)?;
        let fixed = FixedHeader::decode(&fixed_bytes[..got])?;
        let mut json = vec![0u8; fixed.header_json_len as usize];
        if read_full(&mut reader, &mut json)? < json.len() {
            return Err(DecodeError::TruncatedHeader.into());
        }
        let info = HeaderInfo::decode(&json)?;
        if let Some(total) = total_len {
            let body_start = (FIXED_HEADER_LEN + json.len()) as u64;
            fixed.check_body_len(total.saturating_sub(body_start))?;
        }
        Ok(Self { reader, fixed, info, next: 0, buf: vec![0u8; record_len(fixed.dimension)] })
    }

    pub fn header(&self) -> &HeaderInfo {
        &self.info
    }

    pub fn dimension(&self) -> u32 {
        self.fixed.dimension
    }

    pub fn record_count(&self) -> u64 {
        self.fixed.record_count
    }

    pub fn next_record(&mut self) -> Result<Option<EmbeddingRecord>, DcfError> {
        if self.next == self.fixed.record_count {
            let mut probe = [0u8; 1];
            if read_full(&mut self.reader, &mut probe)? != 0 {
                return Err(DecodeError::CountMismatch { declared: self.fixed.record_count, found: self.next + 1 }.into());
            }
            return Ok(None);
        }
        let got = read_full(&mut self.reader, &mut self.buf)?;
        if got < self.buf.len() {
            return Err(if got == 0 {
                DecodeError::CountMismatch { declared: self.fixed.record_count, found: self.next }
            } else {
                DecodeError::Truncated { record: self.next }
            }
            .into());
        }
        let record = EmbeddingRecord::decode(&self.buf, self.next, self.fixed.dimension, self.info.sequences.len())?;
        self.next += 1;
        Ok(Some(record))
    }
}

impl<R: Read> Iterator for EmbeddingReader<R> {
    type Item = Result<EmbeddingRecord, DcfError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_record().transpose()
    }
}

/// Writer for a file whose record count is known in advance.
pub struct EmbeddingWriter<W: Write> {
    writer: W,
    dimension: u32,
    sequences: usize,
    declared: u64,
    written: u64,
    buf: Vec<u8>,
}

impl EmbeddingWriter<BufWriter<File>> {
    pub fn create(path: &Path, info: &HeaderInfo, dimension: u32, record_count: u64) -> Result<Self, DcfError> {
        Self::new(BufWriter::new(File::create(path)?), info, dimension, record_count)
    }
}

impl<W: Write> EmbeddingWriter<W> {
    pub fn new(mut writer: W, info: &HeaderInfo, dimension: u32, record_count: u64) -> Result<Self, DcfError> {
        writer.write_all(&encode_header(info, dimension, record_count)?)?;
        Ok(Self {
            writer,
            dimension,
            sequences: info.sequences.len(),
            declared: record_count,
            written: 0,
            buf: Vec::with_capacity(record_len(dimension)),
        })
    }

    pub fn push(&mut self, record: &EmbeddingRecord) -> Result<(), DcfError> {
        if self.written == self.declared {
            return Err(DcfError::Incomplete { declared: self.declared, written: self.written + 1 });
        }
        self.buf.clear();
        record.encode_into(self.written, self.dimension, self.sequences, &mut self.buf)?;
        self.writer.write_all(&self.buf)?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, DcfError> {
        if self.written != self.declared {
            return Err(DcfError::Incomplete { declared: self.declared, written: self.written });
        }
        self.writer.flush()?;
        Ok(self.writer)
    }
}

pub fn write_embeddings(file: &EmbeddingFile, path: &Path) -> Result<(), Error> {
    let wrap = |source: DcfError| Error::Dcf { path: path.to_path_buf(), source };
    let mut writer = EmbeddingWriter::create(path, &file.header_info(), file.dimension, file.records.len() as u64).map_err(wrap)?;
    for record in &file.records {
        if let Err(e) = writer.push(record) {
            drop(writer);
            let _ = std::fs::remove_file(path);
            return Err(wrap(e));
        }
    }
    writer.finish().map_err(wrap)?;
    Ok(())
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingFile, Error> {
    let wrap = |source: DcfError| Error::Dcf { path: path.to_path_buf(), source };
    let mut reader = EmbeddingReader::open(path).map_err(wrap)?;
    let mut records = Vec::with_capacity(reader.record_count().min(1 << 20) as usize);
    while let Some(record) = reader.next_record().map_err(wrap)? {
        records.push(record);
    }
    let info = reader.header().clone();
    Ok(EmbeddingFile {
        network: info.network,
        dataset: info.dataset,
        dimension: reader.dimension(),
        sequences: info.sequences,
        records,
    })
}
