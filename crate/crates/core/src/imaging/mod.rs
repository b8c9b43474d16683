//! Geometric face normalization and photometric enhancement.

mod ace;
mod clahe;
mod geometry;
mod retinex;

pub use ace::{ace, AceParams};
pub use clahe::{clahe, rgb_to_ycbcr, ycbcr_to_rgb, ClaheParams};
pub use geometry::{normalize_geometry, AlignmentTransform, ALIGNED_SIZE, ROI_EXPANSION};
pub use retinex::{retinex, RetinexParams};

use std::fmt;
use std::str::FromStr;

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::SampleKey;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImagingError {
    #[error("{0}: region of interest has zero area")]
    DegenerateRoi(SampleKey),
    #[error("{0}: eye centers coincide")]
    CoincidentEyes(SampleKey),
    #[error("unknown enhancement {0:?}; valid tags: none, retinex, ace, clahe")]
    UnknownEnhancement(String),
    #[error("invalid {method} parameter: {message}")]
    InvalidParameter { method: &'static str, message: String },
}

/// A geometrically normalized face: exactly 224×224 RGB.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedFace {
    pixels: RgbImage,
    source: SampleKey,
    enhancement: EnhancementKind,
}

impl AlignedFace {
    /// Wraps a 224×224 raster. Panics on any other size.
    pub fn new(pixels: RgbImage, source: SampleKey) -> Self {
        assert_eq!(
            (pixels.width(), pixels.height()),
            (ALIGNED_SIZE, ALIGNED_SIZE),
            "aligned faces are {ALIGNED_SIZE}×{ALIGNED_SIZE}"
        );
        AlignedFace {
            pixels,
            source,
            enhancement: EnhancementKind::None,
        }
    }

    pub fn pixels(&self) -> &RgbImage {
        &self.pixels
    }

    pub fn source(&self) -> &SampleKey {
        &self.source
    }

    pub fn enhancement(&self) -> EnhancementKind {
        self.enhancement
    }

    fn with_pixels(&self, pixels: RgbImage, enhancement: EnhancementKind) -> AlignedFace {
        debug_assert_eq!(pixels.dimensions(), (ALIGNED_SIZE, ALIGNED_SIZE));
        AlignedFace {
            pixels,
            source: self.source.clone(),
            enhancement,
        }
    }
}

/// Tag of an enhancement method, without parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnhancementKind {
    None,
    Retinex,
    Ace,
    Clahe,
}

impl EnhancementKind {
    pub const ALL: [EnhancementKind; 4] = [
        EnhancementKind::None,
        EnhancementKind::Retinex,
        EnhancementKind::Ace,
        EnhancementKind::Clahe,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            EnhancementKind::None => "none",
            EnhancementKind::Retinex => "retinex",
            EnhancementKind::Ace => "ace",
            EnhancementKind::Clahe => "clahe",
        }
    }

    /// Display name used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            EnhancementKind::None => "None",
            EnhancementKind::Retinex => "Retinex",
            EnhancementKind::Ace => "ACE",
            EnhancementKind::Clahe => "CLAHE",
        }
    }
}

impl fmt::Display for EnhancementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EnhancementKind {
    type Err = ImagingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(enhancement_of(s)?.kind())
    }
}

/// An enhancement method with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum EnhancementMethod {
    None,
    Retinex(RetinexParams),
    Ace(AceParams),
    Clahe(ClaheParams),
}

impl EnhancementMethod {
    pub fn kind(&self) -> EnhancementKind {
        match self {
            EnhancementMethod::None => EnhancementKind::None,
            EnhancementMethod::Retinex(_) => EnhancementKind::Retinex,
            EnhancementMethod::Ace(_) => EnhancementKind::Ace,
            EnhancementMethod::Clahe(_) => EnhancementKind::Clahe,
        }
    }

    pub fn with_defaults(kind: EnhancementKind) -> Self {
        match kind {
            EnhancementKind::None => EnhancementMethod::None,
            EnhancementKind::Retinex => EnhancementMethod::Retinex(RetinexParams::default()),
            EnhancementKind::Ace => EnhancementMethod::Ace(AceParams::default()),
            EnhancementKind::Clahe => EnhancementMethod::Clahe(ClaheParams::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ImagingError> {
        match self {
            EnhancementMethod::None => Ok(()),
            EnhancementMethod::Retinex(p) => p.validate(),
            EnhancementMethod::Ace(p) => p.validate(),
            EnhancementMethod::Clahe(p) => p.validate(),
        }
    }
}

/// Parses a case-insensitive tag into the method with default parameters.
pub fn enhancement_of(tag: &str) -> Result<EnhancementMethod, ImagingError> {
    let kind = match tag.trim().to_ascii_lowercase().as_str() {
        "none" => EnhancementKind::None,
        "retinex" => EnhancementKind::Retinex,
        "ace" => EnhancementKind::Ace,
        "clahe" => EnhancementKind::Clahe,
        _ => return Err(ImagingError::UnknownEnhancement(tag.to_string())),
    };
    Ok(EnhancementMethod::with_defaults(kind))
}

/// Applies `method` to the face. `None` returns the input unchanged.
pub fn enhance(face: &AlignedFace, method: &EnhancementMethod) -> AlignedFace {
    let pixels = match method {
        EnhancementMethod::None => return face.clone(),
        EnhancementMethod::Retinex(p) => retinex(face.pixels(), p),
        EnhancementMethod::Ace(p) => ace(face.pixels(), p),
        EnhancementMethod::Clahe(p) => clahe(face.pixels(), p),
    };
    face.with_pixels(pixels, method.kind())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Domain;
    use image::Rgb;

    fn gray_face(level: u8) -> AlignedFace {
        AlignedFace::new(
            RgbImage::from_pixel(ALIGNED_SIZE, ALIGNED_SIZE, Rgb([level; 3])),
            SampleKey::new("s", Domain::Selfie),
        )
    }

    #[test]
    fn tags_parse_case_insensitively() {
        assert_eq!(enhancement_of("ACE").unwrap(), EnhancementMethod::Ace(AceParams::default()));
        assert_eq!(
            enhancement_of("clahe").unwrap(),
            EnhancementMethod::Clahe(ClaheParams::default())
        );
        assert_eq!(enhancement_of("None").unwrap(), EnhancementMethod::None);
        let err = enhancement_of("gamma").unwrap_err();
        assert!(err.to_string().contains("none, retinex, ace, clahe"));
    }

    #[test]
    fn none_is_identity() {
        let face = gray_face(90);
        assert_eq!(enhance(&face, &EnhancementMethod::None), face);
    }

    #[test]
    fn constant_images_stay_constant() {
        let face = gray_face(77);
        for kind in [EnhancementKind::Retinex, EnhancementKind::Ace, EnhancementKind::Clahe] {
            let out = enhance(&face, &EnhancementMethod::with_defaults(kind));
            assert_eq!(out.enhancement(), kind);
            let first = *out.pixels().get_pixel(0, 0);
            assert!(out.pixels().pixels().all(|p| *p == first), "{kind} output not constant");
        }
    }

    #[test]
    fn method_json_is_tagged() {
        let m = EnhancementMethod::Clahe(ClaheParams::default());
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"method\":\"clahe\""));
        let back: EnhancementMethod = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
