use crate::error::{Error, Result};

/// Confidence parameter of the Hoeffding bound, in `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoeffdingConfig {
    delta: f64,
}

impl HoeffdingConfig {
    pub const DEFAULT_DELTA: f64 = 1e-4;

    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta < 1.0 {
            Ok(HoeffdingConfig { delta })
        } else {
            Err(Error::Config(format!(
                "delta must lie in (0, 1), got {delta}"
            )))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self, n: u64) -> f64 {
        hoeffding_epsilon(n, self.delta)
    }
}

impl Default for HoeffdingConfig {
    fn default() -> Self {
        HoeffdingConfig {
            delta: Self::DEFAULT_DELTA,
        }
    }
}

/// `sqrt(ln(2/delta) / 2n)`: with probability `1 - delta` the true mean lies
/// within this margin of the mean of `n` observations in `[0, 1]`.
pub fn hoeffding_epsilon(n: u64, delta: f64) -> f64 {
    debug_assert!(n >= 1);
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}
