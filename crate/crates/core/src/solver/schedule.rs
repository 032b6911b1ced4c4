use serde::{Deserialize, Serialize};

use crate::error::{Result, ShamError};

/// Stepsize sequence `k -> alpha_k`.
///
/// The two logarithmic choices are capped at `alpha0`: their raw formulas
/// exceed `alpha0` for the first one or two indices (and the shifted variant
/// is undefined at `k = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepsizeSchedule {
    /// `alpha0 / (sqrt(k + 2) ln(k + 2))`.
    ConvexChoice1 { alpha0: f64 },
    /// `alpha0 / (sqrt(k + 1) ln(k + 1))`, the variant used for benchmarks.
    ConvexChoice1Shifted { alpha0: f64 },
    /// `alpha0 / sqrt(k)` for `k >= 1` and `alpha0` at `k = 0`.
    ConvexChoice2 { alpha0: f64 },
    /// `min(1 / L_f, 2 / (mu (k + 1)))`.
    StronglyConvexSwitching { l_f: f64, mu: f64 },
}

fn check_alpha0(alpha0: f64, l_f: f64) -> Result<()> {
    if !(l_f > 0.0 && l_f.is_finite()) {
        return Err(ShamError::InvalidConfig(format!("L_f must be positive, got {l_f}")));
    }
    if !(alpha0 > 0.0 && alpha0 <= 1.0 / l_f) {
        return Err(ShamError::InvalidConfig(format!(
            "alpha0 = {alpha0} outside (0, 1/L_f] = (0, {}]",
            1.0 / l_f
        )));
    }
    Ok(())
}

impl StepsizeSchedule {
    pub fn convex_choice1(alpha0: f64, l_f: f64) -> Result<Self> {
        check_alpha0(alpha0, l_f)?;
        Ok(Self::ConvexChoice1 { alpha0 })
    }

    pub fn convex_choice1_shifted(alpha0: f64, l_f: f64) -> Result<Self> {
        check_alpha0(alpha0, l_f)?;
        Ok(Self::ConvexChoice1Shifted { alpha0 })
    }

    pub fn convex_choice2(alpha0: f64, l_f: f64) -> Result<Self> {
        check_alpha0(alpha0, l_f)?;
        Ok(Self::ConvexChoice2 { alpha0 })
    }

    pub fn switching(l_f: f64, mu: f64) -> Result<Self> {
        if !(l_f > 0.0 && l_f.is_finite()) {
            return Err(ShamError::InvalidConfig(format!("L_f must be positive, got {l_f}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(ShamError::InvalidConfig(format!(
                "switching schedule needs mu > 0, got {mu}"
            )));
        }
        Ok(Self::StronglyConvexSwitching { l_f, mu })
    }

    /// Re-checks the construction constraints, e.g. after deserialization.
    pub fn validate(&self, l_f: f64) -> Result<()> {
        match *self {
            Self::ConvexChoice1 { alpha0 }
            | Self::ConvexChoice1Shifted { alpha0 }
            | Self::ConvexChoice2 { alpha0 } => check_alpha0(alpha0, l_f),
            Self::StronglyConvexSwitching { l_f, mu } => Self::switching(l_f, mu).map(|_| ()),
        }
    }

    pub fn stepsize(&self, k: usize) -> f64 {
        let kf = k as f64;
        match *self {
            Self::ConvexChoice1 { alpha0 } => {
                alpha0.min(alpha0 / ((kf + 2.0).sqrt() * (kf + 2.0).ln()))
            }
            Self::ConvexChoice1Shifted { alpha0 } => {
                alpha0.min(alpha0 / ((kf + 1.0).sqrt() * (kf + 1.0).ln()))
            }
            Self::ConvexChoice2 { alpha0 } => {
                if k == 0 {
                    alpha0
                } else {
                    alpha0 / kf.sqrt()
                }
            }
            Self::StronglyConvexSwitching { l_f, mu } => (1.0 / l_f).min(2.0 / (mu * (kf + 1.0))),
        }
    }

    /// `k0` for the switching schedule, `None` otherwise.
    pub fn switching_index(&self) -> Option<i64> {
        match *self {
            Self::StronglyConvexSwitching { l_f, mu } => switching_index(l_f, mu).ok(),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ConvexChoice1 { .. } => "choice1-k2",
            Self::ConvexChoice1Shifted { .. } => "choice1-k1",
            Self::ConvexChoice2 { .. } => "choice2",
            Self::StronglyConvexSwitching { .. } => "switching",
        }
    }
}

/// `k0 = floor(2 L_f / mu - 1)`: last index of the constant phase of the
/// switching schedule. Negative when the constant phase is empty.
pub fn switching_index(l_f: f64, mu: f64) -> Result<i64> {
    if !(mu > 0.0) {
        return Err(ShamError::InvalidInput(format!("mu must be positive, got {mu}")));
    }
    Ok((2.0 * l_f / mu - 1.0).floor() as i64)
}
