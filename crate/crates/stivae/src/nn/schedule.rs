//! Polynomial learning-rate decay.

use crate::error::{Error, Result};

/// Learning rate decaying polynomially from `initial` to `final_rate` over
/// `horizon` steps, constant afterwards:
///
/// `lr(step) = final + (initial - final) * (1 - min(step, horizon)/horizon)^power`
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    pub initial: f64,
    pub final_rate: f64,
    pub horizon: u64,
    pub power: u32,
}

impl Default for LrSchedule {
    /// 0.001 decaying to 0.0001 over 10000 steps with second-order decay.
    fn default() -> LrSchedule {
        LrSchedule {
            initial: 1e-3,
            final_rate: 1e-4,
            horizon: 10_000,
            power: 2,
        }
    }
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.final_rate > 0.0 && self.initial >= self.final_rate) {
            return Err(Error::Config(format!(
                "learning-rate schedule requires initial >= final > 0, got {} / {}",
                self.initial, self.final_rate
            )));
        }
        if self.horizon == 0 {
            return Err(Error::Config("schedule horizon must be positive".into()));
        }
        Ok(())
    }

    pub fn lr_at(&self, step: u64) -> f64 {
        let s = step.min(self.horizon) as f64;
        let frac = 1.0 - s / self.horizon as f64;
        self.final_rate + (self.initial - self.final_rate) * frac.powi(self.power as i32)
    }
}
