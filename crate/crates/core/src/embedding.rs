//! Embedding records and the DCF1 binary interchange format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "DCF1" | version u16 = 1 | reserved u16 = 0 | dimension u32 | record_count u64
//!        | header_json_len u32 | header JSON {network, dataset, sequences}
//!        | records
//! record: sequence_index u32 | frame_index u32 | metaclass u8 | patch_index u8
//!        | reserved u16 = 0 | dimension × f32
//! ```

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"DCF1";
pub const VERSION: u16 = 1;
/// Bytes before the header JSON.
pub const FIXED_HEADER_LEN: usize = 24;
/// Bytes before the vector in each record.
pub const RECORD_PREFIX_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metaclass {
    #[serde(rename = "TG")]
    Target = 0,
    #[serde(rename = "BG")]
    Background = 1,
}

impl Metaclass {
    pub fn label(self) -> &'static str {
        match self {
            Metaclass::Target => "TG",
            Metaclass::Background => "BG",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Metaclass::Target),
            1 => Some(Metaclass::Background),
            _ => None,
        }
    }
}

impl fmt::Display for Metaclass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub sequence_index: u32,
    pub frame_index: u32,
    pub metaclass: Metaclass,
    pub patch_index: u8,
    pub vector: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub network: String,
    pub dataset: String,
    pub dimension: u32,
    pub sequences: Vec<String>,
    pub records: Vec<EmbeddingRecord>,
}

/// JSON part of the header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderInfo {
    pub network: String,
    pub dataset: String,
    pub sequences: Vec<String>,
}

/// Fixed-size part of the header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedHeader {
    pub dimension: u32,
    pub record_count: u64,
    pub header_json_len: u32,
}

impl FixedHeader {
    pub fn record_len(&self) -> usize {
        record_len(self.dimension)
    }
}

pub fn record_len(dimension: u32) -> usize {
    RECORD_PREFIX_LEN + 4 * dimension as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("record {record}: vector has {found} components, file dimension is {expected}")]
    DimensionMismatch { record: u64, expected: u32, found: usize },
    #[error("record {record}: component {component} is not finite")]
    NonFinite { record: u64, component: usize },
    #[error("record {record}: sequence index {index} is outside the sequence table")]
    SequenceIndex { record: u64, index: u32 },
    #[error("header JSON exceeds 4 GiB")]
    HeaderTooLarge,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("not an embedding interchange file")]
    BadMagic,
    #[error("unsupported interchange version {0}")]
    UnsupportedVersion(u16),
    #[error("dimension 0 is invalid")]
    ZeroDimension,
    #[error("truncated header")]
    TruncatedHeader,
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("truncated at record {record}")]
    Truncated { record: u64 },
    #[error("record count mismatch: header declares {declared}, file holds {found}")]
    CountMismatch { declared: u64, found: u64 },
    #[error("record {record}: {reason}")]
    InvalidRecord { record: u64, reason: &'static str },
    #[error("record {record}: component {component} is not finite")]
    NonFinite { record: u64, component: usize },
}

impl FixedHeader {
    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            return Err(DecodeError::BadMagic);
        }
        if bytes.len() < FIXED_HEADER_LEN {
            return Err(DecodeError::TruncatedHeader);
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let version = u16_at(4);
        if version != VERSION {
            return Err(DecodeError::UnsupportedVersion(version));
        }
        if u16_at(6) != 0 {
            return Err(DecodeError::InvalidHeader("reserved header field is nonzero".into()));
        }
        let dimension = u32_at(8);
        if dimension == 0 {
            return Err(DecodeError::ZeroDimension);
        }
        let record_count = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
        Ok(Self { dimension, record_count, header_json_len: u32_at(20) })
    }

    /// Check that a record section of `body_len` bytes holds exactly the
    /// declared number of records.
    pub fn check_body_len(&self, body_len: u64) -> Result<(), DecodeError> {
        let rec_len = self.record_len() as u64;
        let full = body_len / rec_len;
        let partial = body_len % rec_len != 0;
        if full < self.record_count {
            return Err(if partial {
                DecodeError::Truncated { record: full }
            } else {
                DecodeError::CountMismatch { declared: self.record_count, found: full }
            });
        }
        if full > self.record_count || partial {
            return Err(DecodeError::CountMismatch { declared: self.record_count, found: full + u64::from(partial) });
        }
        Ok(())
    }

    pub fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&self.dimension.to_le_bytes());
        out.extend_from_slice(&self.record_count.to_le_bytes());
        out.extend_from_slice(&self.header_json_len.to_le_bytes());
    }
}

impl HeaderInfo {
    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        serde_json::from_slice(bytes).map_err(|e| DecodeError::InvalidHeader(alloc::format!("{e}")))
    }
}

/// Serialize the header (fixed part plus JSON) for `record_count` records.
pub fn encode_header(info: &HeaderInfo, dimension: u32, record_count: u64) -> Result<Vec<u8>, EncodeError> {
    if dimension == 0 {
        return Err(EncodeError::ZeroDimension);
    }
    let json = serde_json::to_vec(info).expect("header serializes");
    let header_json_len = u32::try_from(json.len()).map_err(|_| EncodeError::HeaderTooLarge)?;
    let mut out = Vec::with_capacity(FIXED_HEADER_LEN + json.len());
    FixedHeader { dimension, record_count, header_json_len }.encode(&mut out);
    out.extend_from_slice(&json);
    Ok(out)
}

impl EmbeddingRecord {
    /// Append the record's bytes, checking dimension, table bounds and finiteness.
    pub fn encode_into(
        &self,
        ordinal: u64,
        dimension: u32,
        sequence_count: usize,
        out: &mut Vec<u8>,
    ) -> Result<(), EncodeError> {
        if self.vector.len() != dimension as usize {
            return Err(EncodeError::DimensionMismatch {
                record: ordinal,
                expected: dimension,
                found: self.vector.len(),
            });
        }
        if self.sequence_index as usize >= sequence_count {
            return Err(EncodeError::SequenceIndex { record: ordinal, index: self.sequence_index });
        }
        if let Some(component) = self.vector.iter().position(|v| !v.is_finite()) {
            return Err(EncodeError::NonFinite { record: ordinal, component });
        }
        out.extend_from_slice(&self.sequence_index.to_le_bytes());
        out.extend_from_slice(&self.frame_index.to_le_bytes());
        out.push(self.metaclass.code());
        out.push(self.patch_index);
        out.extend_from_slice(&0u16.to_le_bytes());
        for v in &self.vector {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(())
    }

    /// Decode exactly one record of `record_len(dimension)` bytes.
    pub fn decode(bytes: &[u8], ordinal: u64, dimension: u32, sequence_count: usize) -> Result<Self, DecodeError> {
        debug_assert_eq!(bytes.len(), record_len(dimension));
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let sequence_index = u32_at(0);
        if sequence_index as usize >= sequence_count {
            return Err(DecodeError::InvalidRecord { record: ordinal, reason: "sequence index out of range" });
        }
        let metaclass = Metaclass::from_code(bytes[8])
            .ok_or(DecodeError::InvalidRecord { record: ordinal, reason: "unknown metaclass code" })?;
        if bytes[10] != 0 || bytes[11] != 0 {
            return Err(DecodeError::InvalidRecord { record: ordinal, reason: "reserved field is nonzero" });
        }
        let vector: Vec<f32> = bytes[RECORD_PREFIX_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if let Some(component) = vector.iter().position(|v| !v.is_finite()) {
            return Err(DecodeError::NonFinite { record: ordinal, component });
        }
        Ok(Self { sequence_index, frame_index: u32_at(4), metaclass, patch_index: bytes[9], vector })
    }
}

impl EmbeddingFile {
    pub fn header_info(&self) -> HeaderInfo {
        HeaderInfo {
            network: self.network.clone(),
            dataset: self.dataset.clone(),
            sequences: self.sequences.clone(),
        }
    }

    pub fn encoded_len(&self) -> usize {
        let json = serde_json::to_vec(&self.header_info()).expect("header serializes");
        FIXED_HEADER_LEN + json.len() + self.records.len() * record_len(self.dimension)
    }

    pub fn encode(&self) -> Result<Vec<u8>, EncodeError> {
        let mut out = encode_header(&self.header_info(), self.dimension, self.records.len() as u64)?;
        out.reserve(self.records.len() * record_len(self.dimension));
        for (i, record) in self.records.iter().enumerate() {
            record.encode_into(i as u64, self.dimension, self.sequences.len(), &mut out)?;
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let fixed = FixedHeader::decode(bytes)?;
        let body_start = FIXED_HEADER_LEN + fixed.header_json_len as usize;
        if bytes.len() < body_start {
            return Err(DecodeError::TruncatedHeader);
        }
        let info = HeaderInfo::decode(&bytes[FIXED_HEADER_LEN..body_start])?;
        let body = &bytes[body_start..];
        fixed.check_body_len(body.len() as u64)?;
        let rec_len = fixed.record_len();
        let records = body
            .chunks_exact(rec_len)
            .enumerate()
            .map(|(i, chunk)| EmbeddingRecord::decode(chunk, i as u64, fixed.dimension, info.sequences.len()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            network: info.network,
            dataset: info.dataset,
            dimension: fixed.dimension,
            sequences: info.sequences,
            records,
        })
    }
}
