//! Extrema detection, envelopes, sifting and plain EMD.

pub mod emd;
pub mod envelope;
pub mod extrema;
pub mod series;
pub mod spline;

pub use emd::{
    emd, is_imf, sift_once, Decomposition, DecompositionDiagnostics, DecompositionMethod, ImfCheck,
    ImfDiagnostics, SiftConfig,
};
pub use envelope::{build_envelopes, envelope_knots, EnvelopePair, Knots};
pub use extrema::{count_zero_crossings, find_extrema, ExtremaSet};
pub use series::TimeSeries;
pub use spline::{Spline, SplineKind};
