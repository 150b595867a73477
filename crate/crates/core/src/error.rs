use thiserror::Error;

/// Errors raised by the analysis pipeline and its primitives.
#[derive(Debug, Error)]
pub enum MeiboError {
    #[error("invalid dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("image is {width}x{height}, at least {min_width}x{min_height} required")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min_width: usize,
        min_height: usize,
    },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("histogram is degenerate (constant image), no Otsu threshold exists")]
    DegenerateHistogram,

    #[error("invalid kernel size {0}: must be odd and at least 3")]
    InvalidKernelSize(usize),

    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("need at least {need} points for the fit, got {got}")]
    TooFewPoints { got: usize, need: usize },

    #[error("no eyelid detected: {0}")]
    NoEyelidDetected(&'static str),

    #[error("region of interest is empty")]
    EmptyRoi,

    #[error("fragmentation eroded the mask away before it split")]
    FragmentationDiverged,

    #[error("gland skeleton is degenerate")]
    DegenerateGland,

    #[error("no valid width samples along the centerline")]
    NoValidSamples,

    #[error("centerline endpoints coincide, chord length is zero")]
    DegenerateChord,

    #[error("mean background intensity is zero")]
    ZeroBackground,

    #[error("no labeled glands to measure")]
    NoGlands,

    #[error("reference mask is empty")]
    EmptyReference,

    #[error("phantom spec is infeasible: {0}")]
    SpecInfeasible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error("failed to parse spec: {0}")]
    SpecParse(#[from] toml::de::Error),
}

impl MeiboError {
    /// Stable identifier used in reports and per-gland flags.
    pub fn code(&self) -> &'static str {
        match self {
            MeiboError::InvalidDimensions { .. } => "InvalidDimensions",
            MeiboError::ImageTooSmall { .. } => "ImageTooSmall",
            MeiboError::DimensionMismatch { .. } => "DimensionMismatch",
            MeiboError::DegenerateHistogram => "DegenerateHistogram",
            MeiboError::InvalidKernelSize(_) => "InvalidKernelSize",
            MeiboError::EmptyMask => "EmptyMask",
            MeiboError::TooFewPoints { .. } => "TooFewPoints",
            MeiboError::NoEyelidDetected(_) => "NoEyelidDetected",
            MeiboError::EmptyRoi => "EmptyRoi",
            MeiboError::FragmentationDiverged => "FragmentationDiverged",
            MeiboError::DegenerateGland => "DegenerateGland",
            MeiboError::NoValidSamples => "NoValidSamples",
            MeiboError::DegenerateChord => "DegenerateChord",
            MeiboError::ZeroBackground => "ZeroBackground",
            MeiboError::NoGlands => "NoGlands",
            MeiboError::EmptyReference => "EmptyReference",
            MeiboError::SpecInfeasible(_) => "SpecInfeasible",
            MeiboError::InvalidParameter(_) => "InvalidParameter",
            MeiboError::Io(_) => "Io",
            MeiboError::Image(_) => "ImageFormat",
            MeiboError::SpecParse(_) => "SpecParse",
        }
    }
}

pub type Result<T> = std::result::Result<T, MeiboError>;
