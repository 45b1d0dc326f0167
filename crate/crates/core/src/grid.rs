use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform time grid t_k = k * dt for k = 0..=n_panels, in units of 1/omega_0.
///
/// Points are always derived as `k as f64 * dt` rather than by accumulation,
/// so a given (t_end, dt) pair produces bit-identical grids everywhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    dt: f64,
    n_panels: usize,
}

impl TimeGrid {
    /// Build the grid covering [0, t_end] with step dt. The number of panels
    /// is rounded to the nearest integer, so t_end should be (close to) a
    /// multiple of dt.
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        let n_panels = (t_end / dt).round() as usize;
        if n_panels < 1 {
            return Err(Error::InvalidGrid(format!(
                "grid needs at least one step (t_end = {t_end}, dt = {dt})"
            )));
        }
        Ok(Self { dt, n_panels })
    }

    /// Grid with an explicit panel count. Zero panels gives the degenerate
    /// single-point grid [0].
    pub fn with_panels(dt: f64, n_panels: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { dt, n_panels })
    }

    pub fn step(&self) -> f64 {
        self.dt
    }

    /// Number of grid points (panels + 1).
    pub fn len(&self) -> usize {
        self.n_panels + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.value(self.n_panels)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.value(k))
    }

    /// Index of a time that is expected to sit on the grid. Errors if it is
    /// off-grid by more than a relative sliver of dt.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let raw = t / self.dt;
        let k = raw.round();
        if k < 0.0 || (raw - k).abs() > 1e-6 {
            return Err(Error::GridMismatch(format!(
                "t = {t} does not land on the grid (dt = {})",
                self.dt
            )));
        }
        let k = k as usize;
        if k >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.len(),
            });
        }
        Ok(k)
    }
}
