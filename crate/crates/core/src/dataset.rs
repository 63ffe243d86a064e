//! Uniform sequence model for tracking benchmarks.
//!
//! VOT2015 stores one 8-value polygon per line; UAV123 stores one
//! `x,y,w,h` rectangle per line with `NaN` fields when the target is absent.
//! Both reduce to [`AnnotatedSequence`]. Frames whose annotation is absent or
//! has zero area stay in the sequence (so frame indices are preserved) but
//! carry no box.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BoundingBox, FrameSize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceFormat {
    #[serde(rename = "VOT2015")]
    Vot2015,
    #[serde(rename = "UAV123")]
    Uav123,
}

impl SourceFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceFormat::Vot2015 => "VOT2015",
            SourceFormat::Uav123 => "UAV123",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    #[serde(rename = "i")]
    pub index: u32,
    pub image: String,
    pub bbox: Option<BoundingBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSequence {
    pub name: String,
    pub frame_count: usize,
    pub frame_size: FrameSize,
    pub frames: Vec<Frame>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSequence {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetCatalog {
    pub dataset_name: String,
    pub source_format: SourceFormat,
    pub sequences: Vec<AnnotatedSequence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkippedSequence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("expected {expected} comma-separated fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("invalid number {0:?}")]
    InvalidNumber(String),
    #[error("non-finite coordinate {0:?}")]
    NonFinite(String),
    #[error("sequence {0:?} has no annotated frames")]
    NoAnnotatedFrames(String),
    #[error("sequence {name:?}: frame index {index} is not strictly increasing")]
    FrameOrder { name: String, index: u32 },
    #[error("sequence {name:?}: frame_count {declared} but {found} frames listed")]
    FrameCount { name: String, declared: usize, found: usize },
    #[error("duplicate sequence name {0:?}")]
    DuplicateSequence(String),
    #[error("no sequences found")]
    Empty,
}

/// Result of parsing one ground-truth line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Annotation {
    Present(BoundingBox),
    /// Target absent (NaN sentinel) or degenerate (zero area).
    Absent(AbsentReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsentReason {
    NotANumber,
    ZeroArea,
}

impl Annotation {
    pub fn into_box(self) -> Option<BoundingBox> {
        match self {
            Annotation::Present(b) => Some(b),
            Annotation::Absent(_) => None,
        }
    }
}

fn parse_fields<const N: usize>(line: &str) -> Result<[f64; N], DatasetError> {
    let line = line.trim();
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != N {
        return Err(DatasetError::FieldCount { expected: N, found: fields.len() });
    }
    let mut out = [0.0; N];
    for (slot, field) in out.iter_mut().zip(&fields) {
        *slot = field
            .parse::<f64>()
            .map_err(|_| DatasetError::InvalidNumber(field.to_string()))?;
    }
    Ok(out)
}

fn checked(b: BoundingBox) -> Annotation {
    if b.has_area() {
        Annotation::Present(b)
    } else {
        Annotation::Absent(AbsentReason::ZeroArea)
    }
}

/// One VOT2015 ground-truth line: 8 finite polygon coordinates.
pub fn parse_vot_line(line: &str) -> Result<Annotation, DatasetError> {
    let coords = parse_fields::<8>(line)?;
    if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
        return Err(DatasetError::NonFinite(bad.to_string()));
    }
    Ok(checked(BoundingBox::from_polygon(&coords)))
}

/// One UAV123 ground-truth line: `x,y,w,h`, any `NaN` marks the target absent.
pub fn parse_uav_line(line: &str) -> Result<Annotation, DatasetError> {
    let [x, y, w, h] = parse_fields::<4>(line)?;
    if [x, y, w, h].iter().any(|v| v.is_nan()) {
        return Ok(Annotation::Absent(AbsentReason::NotANumber));
    }
    if let Some(bad) = [x, y, w, h].iter().find(|c| !c.is_finite()) {
        return Err(DatasetError::NonFinite(bad.to_string()));
    }
    Ok(checked(BoundingBox::new(x, y, w, h)))
}

impl AnnotatedSequence {
    /// Build a sequence, enforcing ordering and the at-least-one-annotation rule.
    pub fn new(name: String, frame_size: FrameSize, frames: Vec<Frame>) -> Result<Self, DatasetError> {
        let seq = Self { name, frame_count: frames.len(), frame_size, frames };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.frame_count != self.frames.len() {
            return Err(DatasetError::FrameCount {
                name: self.name.clone(),
                declared: self.frame_count,
                found: self.frames.len(),
            });
        }
        for pair in self.frames.windows(2) {
            if pair[1].index <= pair[0].index {
                return Err(DatasetError::FrameOrder { name: self.name.clone(), index: pair[1].index });
            }
        }
        if !self.frames.iter().any(|f| f.bbox.is_some_and(|b| b.has_area())) {
            return Err(DatasetError::NoAnnotatedFrames(self.name.clone()));
        }
        Ok(())
    }

    pub fn annotated_frames(&self) -> impl Iterator<Item = (&Frame, BoundingBox)> + '_ {
        self.frames
            .iter()
            .filter_map(|f| f.bbox.filter(BoundingBox::has_area).map(|b| (f, b)))
    }

    pub fn frame(&self, index: u32) -> Option<&Frame> {
        self.frames
            .binary_search_by_key(&index, |f| f.index)
            .ok()
            .map(|i| &self.frames[i])
    }
}

impl DatasetCatalog {
    /// Sort sequences by name and check name uniqueness.
    pub fn new(
        dataset_name: String,
        source_format: SourceFormat,
        mut sequences: Vec<AnnotatedSequence>,
        mut skipped: Vec<SkippedSequence>,
    ) -> Result<Self, DatasetError> {
        sequences.sort_by(|a, b| a.name.cmp(&b.name));
        skipped.sort_by(|a, b| a.name.cmp(&b.name));
        let catalog = Self { dataset_name, source_format, sequences, skipped };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.sequences.is_empty() {
            return Err(DatasetError::Empty);
        }
        let mut names: Vec<&str> = self.sequences.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if let Some(pair) = names.windows(2).find(|p| p[0] == p[1]) {
            return Err(DatasetError::DuplicateSequence(pair[0].to_string()));
        }
        self.sequences.iter().try_for_each(AnnotatedSequence::validate)
    }

    /// Each sequence contributes a target class and a background class.
    pub fn class_count(&self) -> usize {
        2 * self.sequences.len()
    }

    pub fn sequence(&self, name: &str) -> Option<&AnnotatedSequence> {
        self.sequences.iter().find(|s| s.name == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.sequences.iter().position(|s| s.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn frame(index: u32, bbox: Option<BoundingBox>) -> Frame {
        Frame { index, image: alloc::format!("{index:08}.jpg"), bbox }
    }

    #[test]
    fn vot_square() {
        let a = parse_vot_line("100.0,100.0,150.0,100.0,150.0,150.0,100.0,150.0").unwrap();
        assert_eq!(a, Annotation::Present(BoundingBox::new(100.0, 100.0, 50.0, 50.0)));
    }

    #[test]
    fn vot_degenerate_is_absent() {
        let a = parse_vot_line("10,10,10,10,10,10,10,10").unwrap();
        assert_eq!(a, Annotation::Absent(AbsentReason::ZeroArea));
    }

    #[test]
    fn vot_malformed() {
        assert_eq!(
            parse_vot_line("1,2,3,4").unwrap_err(),
            DatasetError::FieldCount { expected: 8, found: 4 }
        );
        assert!(matches!(parse_vot_line("1,2,3,4,5,6,7,x"), Err(DatasetError::InvalidNumber(_))));
        assert!(matches!(parse_vot_line("1,2,3,4,5,6,7,inf"), Err(DatasetError::NonFinite(_))));
        assert!(matches!(parse_vot_line("1,2,3,4,5,6,7,NaN"), Err(DatasetError::NonFinite(_))));
    }

    #[test]
    fn uav_lines() {
        assert_eq!(
            parse_uav_line("581,274,33,26").unwrap(),
            Annotation::Present(BoundingBox::new(581.0, 274.0, 33.0, 26.0))
        );
        assert_eq!(
            parse_uav_line("NaN,NaN,NaN,NaN").unwrap(),
            Annotation::Absent(AbsentReason::NotANumber)
        );
        assert_eq!(parse_uav_line("1,2,0,5").unwrap(), Annotation::Absent(AbsentReason::ZeroArea));
        assert_eq!(
            parse_uav_line("1,2,3").unwrap_err(),
            DatasetError::FieldCount { expected: 4, found: 3 }
        );
    }

    #[test]
    fn sequence_rules() {
        let size = FrameSize::new(64, 48);
        let b = Some(BoundingBox::new(1.0, 1.0, 8.0, 8.0));
        assert!(AnnotatedSequence::new("a".into(), size, vec![frame(0, b), frame(1, None)]).is_ok());
        assert_eq!(
            AnnotatedSequence::new("a".into(), size, vec![frame(0, None)]).unwrap_err(),
            DatasetError::NoAnnotatedFrames("a".into())
        );
        assert_eq!(
            AnnotatedSequence::new("a".into(), size, vec![frame(1, b), frame(1, b)]).unwrap_err(),
            DatasetError::FrameOrder { name: "a".into(), index: 1 }
        );
    }

    #[test]
    fn catalog_sorted_and_unique() {
        let size = FrameSize::new(64, 48);
        let b = Some(BoundingBox::new(1.0, 1.0, 8.0, 8.0));
        let seq = |n: &str| AnnotatedSequence::new(n.into(), size, vec![frame(0, b)]).unwrap();
        let cat = DatasetCatalog::new("d".into(), SourceFormat::Vot2015, vec![seq("b"), seq("a")], vec![]).unwrap();
        assert_eq!(cat.sequences[0].name, "a");
        assert_eq!(cat.class_count(), 4);
        assert_eq!(
            DatasetCatalog::new("d".into(), SourceFormat::Vot2015, vec![seq("a"), seq("a")], vec![]).unwrap_err(),
            DatasetError::DuplicateSequence("a".into())
        );
        assert_eq!(
            DatasetCatalog::new("d".into(), SourceFormat::Vot2015, vec![], vec![]).unwrap_err(),
            DatasetError::Empty
        );
    }

    #[test]
    fn catalog_json_shape() {
        let size = FrameSize::new(64, 48);
        let seq = AnnotatedSequence::new(
            "s".into(),
            size,
            vec![frame(0, Some(BoundingBox::new(1.0, 2.0, 3.0, 4.0))), frame(1, None)],
        )
        .unwrap();
        let cat = DatasetCatalog::new("d".into(), SourceFormat::Uav123, vec![seq], vec![]).unwrap();
        let json = serde_json::to_string(&cat).unwrap();
        assert_eq!(
            json,
            r#"{"dataset_name":"d","source_format":"UAV123","sequences":[{"name":"s","frame_count":2,"frame_size":[64,48],"frames":[{"i":0,"image":"00000000.jpg","bbox":[1.0,2.0,3.0,4.0]},{"i":1,"image":"00000001.jpg","bbox":null}]}]}"#
        );
        let back: DatasetCatalog = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cat);
    }
}
