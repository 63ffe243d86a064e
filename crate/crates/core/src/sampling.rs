//! Sampling plans: full sequence, first-N window, random-N with box noise.
//!
//! A frame is eligible for sampling when it is annotated and its box, clipped
//! to the frame, is at least [`MIN_SIDE_PX`] on each side. Every emitted box
//! lies inside the frame.
//!
//! Random draws are keyed by `seed ^ fnv1a64(sequence_name)`:
//!
//! * the frame for draw `d` is output `d` of the SplitMix64 stream seeded
//!   with `combine(key, FRAME_STREAM_SALT)`, mapped onto the eligible frames
//!   by widening multiply;
//! * the noise for draw `d` is outputs `4d..4d+4` of the stream seeded with
//!   `key`, each mapped onto `[-noise_px, noise_px]` the same way, in
//!   `(dx, dy, dw, dh)` order.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::AnnotatedSequence;
use crate::geometry::{BoundingBox, FrameSize};
use crate::rng::{combine, fnv1a64, SplitMix64};

/// Smallest side length a perturbed box may shrink to.
pub const MIN_SIDE_PX: f64 = 4.0;

/// Salt separating the frame-selection stream from the noise stream.
pub const FRAME_STREAM_SALT: u64 = 0x6672_616d_6573_656c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PlanRepr", into = "PlanRepr")]
pub enum SamplePlan {
    Full,
    /// `n` consecutive eligible frames, skipping the first `start` of them.
    SequentialWindow { n: u32, start: u32 },
    /// `n` draws with replacement, each box perturbed by up to `noise_px`.
    RandomWithNoise { n: u32, noise_px: u32, seed: u64 },
}

#[derive(Serialize, Deserialize)]
struct PlanRepr {
    kind: String,
    n: Option<u32>,
    noise_px: Option<u32>,
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<u32>,
}

impl From<SamplePlan> for PlanRepr {
    fn from(plan: SamplePlan) -> Self {
        match plan {
            SamplePlan::Full => PlanRepr { kind: "full".into(), n: None, noise_px: None, seed: None, start: None },
            SamplePlan::SequentialWindow { n, start } => PlanRepr {
                kind: "first".into(),
                n: Some(n),
                noise_px: None,
                seed: None,
                start: (start != 0).then_some(start),
            },
            SamplePlan::RandomWithNoise { n, noise_px, seed } => PlanRepr {
                kind: "random".into(),
                n: Some(n),
                noise_px: Some(noise_px),
                seed: Some(seed),
                start: None,
            },
        }
    }
}

impl TryFrom<PlanRepr> for SamplePlan {
    type Error = String;

    fn try_from(r: PlanRepr) -> Result<Self, String> {
        let need_n = || r.n.ok_or_else(|| format!("plan kind {:?} requires n", r.kind));
        match r.kind.as_str() {
            "full" => Ok(SamplePlan::Full),
            "first" => Ok(SamplePlan::SequentialWindow { n: need_n()?, start: r.start.unwrap_or(0) }),
            "random" => Ok(SamplePlan::RandomWithNoise {
                n: need_n()?,
                noise_px: r.noise_px.unwrap_or(0),
                seed: r.seed.unwrap_or(0),
            }),
            other => Err(format!("unknown plan kind {other:?}")),
        }
    }
}

impl SamplePlan {
    /// Parse `full`, `first:N` or `random:N`. `noise_px` and `seed` only
    /// apply to random plans, `window_start` only to `first:N`.
    pub fn parse(spec: &str, noise_px: u32, seed: u64, window_start: u32) -> Result<Self, SamplingError> {
        let bad = || SamplingError::BadPlan(String::from(spec));
        let (kind, n) = match spec.split_once(':') {
            Some((kind, n)) => (kind, Some(n.trim().parse::<u32>().map_err(|_| bad())?)),
            None => (spec, None),
        };
        let plan = match (kind.trim(), n) {
            ("full", None) => SamplePlan::Full,
            ("first", Some(n)) => SamplePlan::SequentialWindow { n, start: window_start },
            ("random", Some(n)) => SamplePlan::RandomWithNoise { n, noise_px, seed },
            _ => return Err(bad()),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        match *self {
            SamplePlan::SequentialWindow { n: 0, .. } | SamplePlan::RandomWithNoise { n: 0, .. } => {
                Err(SamplingError::ZeroSamples)
            }
            _ => Ok(()),
        }
    }

    /// Number of samples the plan asks for, if bounded.
    pub fn requested(&self) -> Option<u32> {
        match *self {
            SamplePlan::Full => None,
            SamplePlan::SequentialWindow { n, .. } | SamplePlan::RandomWithNoise { n, .. } => Some(n),
        }
    }

    /// Filename-safe case label, e.g. `first10` or `random1000_noise3`.
    pub fn label(&self) -> String {
        match *self {
            SamplePlan::Full => "full".into(),
            SamplePlan::SequentialWindow { n, start: 0 } => format!("first{n}"),
            SamplePlan::SequentialWindow { n, start } => format!("first{n}_from{start}"),
            SamplePlan::RandomWithNoise { n, noise_px, .. } => format!("random{n}_noise{noise_px}"),
        }
    }

    /// Human-readable description echoed into reports.
    pub fn describe(&self) -> String {
        match *self {
            SamplePlan::Full => "full".into(),
            SamplePlan::SequentialWindow { n, start: 0 } => format!("first:{n}"),
            SamplePlan::SequentialWindow { n, start } => format!("first:{n} start:{start}"),
            SamplePlan::RandomWithNoise { n, noise_px, seed } => {
                format!("random:{n} noise_px:{noise_px} seed:{seed}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: u32,
    pub frame: u32,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub sequence: String,
    pub plan: SamplePlan,
    pub samples: Vec<Sample>,
}

impl SampleSet {
    /// True when a bounded plan produced fewer samples than requested.
    pub fn is_truncated(&self) -> bool {
        self.plan.requested().is_some_and(|n| (self.samples.len() as u64) < u64::from(n))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("sequence {0:?} has no sampleable annotated frames")]
    NoEligibleFrames(String),
    #[error("sequence {name:?}: window start {start} is past the {available} sampleable frames")]
    WindowPastEnd { name: String, start: u32, available: usize },
    #[error("unrecognised plan {0:?}; expected full, first:N or random:N")]
    BadPlan(String),
}

/// Annotated frames that can be sampled, with their boxes clipped to the frame.
pub fn eligible_frames(sequence: &AnnotatedSequence) -> Vec<(u32, BoundingBox)> {
    sequence
        .annotated_frames()
        .map(|(f, b)| (f.index, b.clip_to(sequence.frame_size)))
        .filter(|(_, b)| b.w >= MIN_SIDE_PX && b.h >= MIN_SIDE_PX)
        .collect()
}

fn draw_key(seed: u64, sequence_name: &str) -> u64 {
    seed ^ fnv1a64(sequence_name.as_bytes())
}

/// Position in `0..eligible` of the frame chosen by random draw `draw_index`.
pub fn draw_frame(seed: u64, sequence_name: &str, draw_index: u64, eligible: usize) -> usize {
    let key = combine(draw_key(seed, sequence_name), FRAME_STREAM_SALT);
    SplitMix64::at(key, draw_index).below(eligible as u64) as usize
}

/// Integer noise `(dx, dy, dw, dh)`, each uniform on `[-noise_px, noise_px]`.
pub fn derive_noise(seed: u64, sequence_name: &str, draw_index: u64, noise_px: u32) -> [i64; 4] {
    let mut rng = SplitMix64::at(draw_key(seed, sequence_name), draw_index.wrapping_mul(4));
    let k = i64::from(noise_px);
    [(); 4].map(|_| rng.range_inclusive(-k, k))
}

/// Apply integer noise to a box, keep each side at least
/// `min(MIN_SIDE_PX, original side)`, then translate into the frame.
pub fn perturb_bbox(bbox: BoundingBox, noise: [i64; 4], frame: FrameSize) -> BoundingBox {
    let [dx, dy, dw, dh] = noise.map(|d| d as f64);
    let w = (bbox.w + dw).max(MIN_SIDE_PX.min(bbox.w));
    let h = (bbox.h + dh).max(MIN_SIDE_PX.min(bbox.h));
    BoundingBox::new(bbox.x + dx, bbox.y + dy, w, h).shift_into(frame)
}

pub fn plan_samples(sequence: &AnnotatedSequence, plan: SamplePlan) -> Result<SampleSet, SamplingError> {
    plan.validate()?;
    let eligible = eligible_frames(sequence);
    if eligible.is_empty() {
        return Err(SamplingError::NoEligibleFrames(sequence.name.clone()));
    }
    let picks: Vec<(u32, BoundingBox)> = match plan {
        SamplePlan::Full => eligible,
        SamplePlan::SequentialWindow { n, start } => {
            if start as usize >= eligible.len() {
                return Err(SamplingError::WindowPastEnd {
                    name: sequence.name.clone(),
                    start,
                    available: eligible.len(),
                });
            }
            eligible.into_iter().skip(start as usize).take(n as usize).collect()
        }
        SamplePlan::RandomWithNoise { n, noise_px, seed } => (0..u64::from(n))
            .map(|d| {
                let (frame, base) = eligible[draw_frame(seed, &sequence.name, d, eligible.len())];
                let noise = derive_noise(seed, &sequence.name, d, noise_px);
                (frame, perturb_bbox(base, noise, sequence.frame_size))
            })
            .collect(),
    };
    let samples = picks
        .into_iter()
        .zip(0u32..)
        .map(|((frame, bbox), id)| Sample { id, frame, bbox })
        .collect();
    Ok(SampleSet { sequence: sequence.name.clone(), plan, samples })
}
