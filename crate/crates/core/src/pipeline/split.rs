use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// Chronological train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train: 0.7, validation: 0.1, test: 0.2 }
    }
}

/// Absorbs representation error so that e.g. `0.7 * 10` floors to 7.
const FLOOR_SLACK: f64 = 1e-9;

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidConfig("split fractions must be positive".into()));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig("split fractions must sum to 1".into()));
        }
        Ok(())
    }

    /// End indices of the train and validation segments for `n` samples.
    pub fn boundaries(&self, n: usize) -> (usize, usize) {
        let nf = n as f64;
        let a = ((self.train * nf) + FLOOR_SLACK).floor() as usize;
        let b = (((self.train + self.validation) * nf) + FLOOR_SLACK).floor() as usize;
        (a.min(n), b.min(n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: TimeSeries,
    pub validation: TimeSeries,
    pub test: TimeSeries,
}

/// Contiguous train, validation and test segments, earliest first.
pub fn chronological_split(series: &TimeSeries, spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let n = series.len();
    let (a, b) = spec.boundaries(n);
    if a == 0 || b == a || b == n {
        return Err(Error::SeriesTooShort { required: 3, actual: n });
    }
    Ok(Splits {
        train: series.slice(0, a)?,
        validation: series.slice(a, b)?,
        test: series.slice(b, n)?,
    })
}
