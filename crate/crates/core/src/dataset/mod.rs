//! Subjects, samples and the split protocol.
//!
//! A dataset is a list of [`FaceSample`]s with exactly one ID-document photo
//! and one selfie per subject. Verification pairs are generated inside each
//! subject-disjoint partition of a [`SplitPlan`].

mod manifest;
mod split;
mod synth;

pub use manifest::{ingest_manifest, write_manifest, MANIFEST_HEADER};
pub(crate) use split::hex_digest;
pub use split::{plan_many_splits, plan_split, split_list_fingerprint, Pair, Partition, SplitPlan, SplitRecord};
pub use synth::{synthesize_dataset, DomainShiftParams};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest row {row}: {message}")]
    MalformedRow { row: usize, message: String },
    #[error("manifest row {row}: unknown domain {token:?} (expected `id` or `selfie`)")]
    UnknownDomain { row: usize, token: String },
    #[error("manifest row {row}: cannot read image {path}: {message}")]
    Image {
        row: usize,
        path: PathBuf,
        message: String,
    },
    #[error("manifest row {row}: {source}")]
    InvalidSample {
        row: usize,
        #[source]
        source: SampleError,
    },
    #[error("duplicate sample for subject {subject:?} in domain {domain}")]
    DuplicateSample { subject: String, domain: Domain },
    #[error("subject {0:?} lacks either its ID-document or its selfie sample")]
    IncompleteSubject(String),
    #[error("need at least {needed} subjects, got {got}")]
    TooFewSubjects { needed: usize, got: usize },
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("empty image")]
    EmptyImage,
    #[error("region of interest has zero area after clamping to the image")]
    DegenerateRoi,
    #[error("eye at ({x}, {y}) lies outside the region of interest")]
    EyeOutsideRoi { x: f64, y: f64 },
    #[error("left eye x ({left}) must be smaller than right eye x ({right})")]
    EyeOrder { left: f64, right: f64 },
    #[error("non-finite annotation coordinate")]
    NonFinite,
}

/// Acquisition domain of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "id")]
    IdDocument,
    #[serde(rename = "selfie")]
    Selfie,
}

impl Domain {
    pub fn token(self) -> &'static str {
        match self {
            Domain::IdDocument => "id",
            Domain::Selfie => "selfie",
        }
    }

    pub fn from_token(token: &str) -> Option<Domain> {
        match token {
            "id" => Some(Domain::IdDocument),
            "selfie" => Some(Domain::Selfie),
            _ => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Ground truth of a verification pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Genuine,
    Impostor,
}

impl Label {
    pub fn is_genuine(self) -> bool {
        self == Label::Genuine
    }

    /// `+1` for genuine, `-1` for impostor.
    pub fn sign(self) -> f64 {
        match self {
            Label::Genuine => 1.0,
            Label::Impostor => -1.0,
        }
    }
}

/// Identifies a sample: one subject has one sample per domain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SampleKey {
    pub subject: String,
    pub domain: Domain,
}

impl SampleKey {
    pub fn new(subject: impl Into<String>, domain: Domain) -> Self {
        SampleKey {
            subject: subject.into(),
            domain,
        }
    }
}

impl fmt::Display for SampleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.subject, self.domain)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Roi {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Roi {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Roi { x, y, w, h }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x <= self.x + self.w && p.y >= self.y && p.y <= self.y + self.h
    }

    /// Intersection with `[0, width] × [0, height]`.
    pub fn clamp_to(&self, width: f64, height: f64) -> Roi {
        let x0 = self.x.clamp(0.0, width);
        let y0 = self.y.clamp(0.0, height);
        let x1 = (self.x + self.w).clamp(0.0, width);
        let y1 = (self.y + self.h).clamp(0.0, height);
        Roi::new(x0, y0, (x1 - x0).max(0.0), (y1 - y0).max(0.0))
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// One photograph of one subject in one acquisition domain, with the face
/// region and eye centers already annotated.
#[derive(Clone, Debug)]
pub struct FaceSample {
    subject_id: String,
    domain: Domain,
    image: RgbImage,
    roi: Roi,
    left_eye: Point,
    right_eye: Point,
}

impl FaceSample {
    /// Validates annotations. The ROI is clamped to the image; both eyes must
    /// fall inside the clamped ROI and the left eye must be left of the right.
    pub fn new(
        subject_id: impl Into<String>,
        domain: Domain,
        image: RgbImage,
        roi: Roi,
        left_eye: Point,
        right_eye: Point,
    ) -> Result<Self, SampleError> {
        if image.width() == 0 || image.height() == 0 {
            return Err(SampleError::EmptyImage);
        }
        let coords = [roi.x, roi.y, roi.w, roi.h, left_eye.x, left_eye.y, right_eye.x, right_eye.y];
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(SampleError::NonFinite);
        }
        let roi = roi.clamp_to(image.width() as f64, image.height() as f64);
        if roi.area() <= 0.0 {
            return Err(SampleError::DegenerateRoi);
        }
        for eye in [left_eye, right_eye] {
            if !roi.contains(eye) {
                return Err(SampleError::EyeOutsideRoi { x: eye.x, y: eye.y });
            }
        }
        if left_eye.x >= right_eye.x {
            return Err(SampleError::EyeOrder {
                left: left_eye.x,
                right: right_eye.x,
            });
        }
        Ok(FaceSample {
            subject_id: subject_id.into(),
            domain,
            image,
            roi,
            left_eye,
            right_eye,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn key(&self) -> SampleKey {
        SampleKey::new(self.subject_id.clone(), self.domain)
    }

    pub fn image(&self) -> &RgbImage {
        &self.image
    }

    pub fn roi(&self) -> Roi {
        self.roi
    }

    pub fn left_eye(&self) -> Point {
        self.left_eye
    }

    pub fn right_eye(&self) -> Point {
        self.right_eye
    }
}

/// Sorted, de-duplicated subject ids of a sample list.
pub fn subject_ids(samples: &[FaceSample]) -> Vec<String> {
    samples
        .iter()
        .map(|s| s.subject_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Indexes samples by key, checking that every subject has exactly one
/// sample in each domain.
pub fn index_samples(samples: &[FaceSample]) -> Result<BTreeMap<SampleKey, usize>, DatasetError> {
    let mut index = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        if index.insert(s.key(), i).is_some() {
            return Err(DatasetError::DuplicateSample {
                subject: s.subject_id.clone(),
                domain: s.domain,
            });
        }
    }
    for subject in subject_ids(samples) {
        for domain in [Domain::IdDocument, Domain::Selfie] {
            if !index.contains_key(&SampleKey::new(subject.clone(), domain)) {
                return Err(DatasetError::IncompleteSubject(subject));
            }
        }
    }
    Ok(index)
}
