use crate::error::{QflowError, Result};

/// Strictly increasing, non-negative sample times.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    step: Option<f64>,
}

impl TimeGrid {
    /// `t_i = i·step` for `t_i ≤ tmax` (with a small tolerance on the last point).
    pub fn uniform(tmax: f64, step: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(QflowError::InvalidInput(format!(
                "step must be positive, got {step}"
            )));
        }
        if !tmax.is_finite() || tmax < 0.0 {
            return Err(QflowError::InvalidInput(format!(
                "tmax must be non-negative, got {tmax}"
            )));
        }
        let n = (tmax / step + 1e-9).floor() as usize;
        let times = (0..=n).map(|i| i as f64 * step).collect();
        Ok(Self {
            times,
            step: Some(step),
        })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(QflowError::InvalidInput("empty time grid".into()));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(QflowError::InvalidInput(
                "grid times must be finite and non-negative".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(QflowError::InvalidInput(
                "grid times must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, step: None })
    }

    /// Every time (and the step) multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor <= 0.0 {
            return Err(QflowError::InvalidInput(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(Self {
            times: self.times.iter().map(|t| t * factor).collect(),
            step: self.step.map(|h| h * factor),
        })
    }

    /// `0.01 / max(rate_scale, 1)`.
    pub fn default_step(rate_scale: f64) -> f64 {
        0.01 / rate_scale.max(1.0)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Uniform step, `None` for an explicit grid.
    pub fn step(&self) -> Option<f64> {
        self.step
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest gap between consecutive points.
    pub fn max_gap(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_includes_endpoint() {
        let g = TimeGrid::uniform(6.0, 0.01).unwrap();
        assert_eq!(g.len(), 601);
        assert!((g.times()[600] - 6.0).abs() < 1e-12);
        assert_eq!(g.times()[37], 37.0 * 0.01);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::uniform(1.0, 0.0).is_err());
        assert!(TimeGrid::from_times(vec![0.0, 0.0]).is_err());
        assert!(TimeGrid::from_times(vec![-1.0]).is_err());
    }
}
