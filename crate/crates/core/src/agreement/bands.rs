use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Landis & Koch kappa scale. Bands are lower-inclusive:
/// `< 0` poor, `[0, .2)` slight, `[.2, .4)` fair, `[.4, .6)` moderate,
/// `[.6, .8)` substantial, `[.8, 1]` almost perfect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandisKoch {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

/// Greve & Wentura kappa scale: below .4 is not to be taken seriously,
/// `[.4, .6)` acceptable, `[.6, .75)` acceptable to good, `.75` and up good
/// to excellent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreveWentura {
    NotSerious,
    Acceptable,
    AcceptableToGood,
    GoodToExcellent,
}

/// Krippendorff's reliability threshold (`α ≥ 0.8`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaBand {
    BelowThreshold,
    #[serde(rename = "perfect-agreement-threshold-met")]
    ThresholdMet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaBands {
    pub landis_koch: LandisKoch,
    pub greve_wentura: GreveWentura,
}

pub const ALPHA_RELIABLE: f64 = 0.8;

pub fn interpret_kappa(score: f64) -> Result<KappaBands> {
    if !(-1.0..=1.0).contains(&score) {
        return Err(Error::ScoreOutOfRange(score));
    }
    let landis_koch = match score {
        s if s < 0.0 => LandisKoch::Poor,
        s if s < 0.2 => LandisKoch::Slight,
        s if s < 0.4 => LandisKoch::Fair,
        s if s < 0.6 => LandisKoch::Moderate,
        s if s < 0.8 => LandisKoch::Substantial,
        _ => LandisKoch::AlmostPerfect,
    };
    let greve_wentura = match score {
        s if s < 0.4 => GreveWentura::NotSerious,
        s if s < 0.6 => GreveWentura::Acceptable,
        s if s < 0.75 => GreveWentura::AcceptableToGood,
        _ => GreveWentura::GoodToExcellent,
    };
    Ok(KappaBands {
        landis_koch,
        greve_wentura,
    })
}

pub fn interpret_alpha(score: f64) -> AlphaBand {
    if score >= ALPHA_RELIABLE {
        AlphaBand::ThresholdMet
    } else {
        AlphaBand::BelowThreshold
    }
}

impl fmt::Display for LandisKoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LandisKoch::Poor => "poor",
            LandisKoch::Slight => "slight",
            LandisKoch::Fair => "fair",
            LandisKoch::Moderate => "moderate",
            LandisKoch::Substantial => "substantial",
            LandisKoch::AlmostPerfect => "almost-perfect",
        })
    }
}

impl fmt::Display for GreveWentura {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GreveWentura::NotSerious => "not-serious",
            GreveWentura::Acceptable => "acceptable",
            GreveWentura::AcceptableToGood => "acceptable-to-good",
            GreveWentura::GoodToExcellent => "good-to-excellent",
        })
    }
}

impl fmt::Display for AlphaBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlphaBand::BelowThreshold => "below-threshold",
            AlphaBand::ThresholdMet => "perfect-agreement-threshold-met",
        })
    }
}
