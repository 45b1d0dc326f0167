//! Spectral densities and the bath integrals behind the dephasing kernels.
//!
//! Everything is dimensionless: hbar = k_B = 1, frequencies and energies in
//! units of omega_0, times as t~ = omega_0 t, and beta~ = hbar omega_0 / k_B T.
//!
//! The two integrals every kernel needs are the dephasing exponent
//!
//! ```text
//! xi(t) = int_0^inf dw h(w)/w^2 (1 + 2 n(w)) (1 - cos(w t))
//! ```
//!
//! and the sine kernel
//!
//! ```text
//! S(t) = int_0^inf dw h(w)/w^2 sin(w t)
//! ```
//!
//! which for the Ohmic density h(w) = s w e^{-w/w_c} reduces to
//! s * arctan(w_c t).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quadrature::{integrate_semi_infinite, integrate_semi_infinite_with_breakpoints, QuadSpec};

/// Relative position of the small-omega floor below which integrands are
/// replaced by their analytic limit.
const OMEGA_FLOOR_FRACTION: f64 = 1e-6;

/// Coupling-weighted density of bath modes h(omega).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SpectralDensity {
    /// h(w) = s w e^{-w/w_c}.
    Ohmic { s: f64, omega_c: f64 },
    /// Piecewise-linear samples. The density is extended linearly through the
    /// origin below the first sample and is zero beyond the last one.
    Tabulated { omega: Vec<f64>, h: Vec<f64> },
}

impl SpectralDensity {
    pub fn ohmic(s: f64, omega_c: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!("s must be >= 0, got {s}")));
        }
        if !(omega_c > 0.0) || !omega_c.is_finite() {
            return Err(Error::InvalidInput(format!(
                "omega_c must be > 0, got {omega_c}"
            )));
        }
        Ok(Self::Ohmic { s, omega_c })
    }

    pub fn tabulated(omega: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if omega.len() != h.len() {
            return Err(Error::InvalidInput(
                "tabulated density needs matching omega/h lengths".into(),
            ));
        }
        if omega.len() < 2 {
            return Err(Error::InvalidInput(
                "tabulated density needs at least two samples".into(),
            ));
        }
        if !omega.windows(2).all(|w| w[1] > w[0]) || omega[0] < 0.0 {
            return Err(Error::InvalidInput(
                "tabulated omega grid must be nonnegative and strictly increasing".into(),
            ));
        }
        if h.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(
                "tabulated h(omega) must be nonnegative and finite".into(),
            ));
        }
        // h(w)/w must stay bounded as w -> 0 for the shift and xi to exist.
        if omega[0] == 0.0 && h[0] != 0.0 {
            return Err(Error::InvalidInput(
                "tabulated density must vanish at omega = 0".into(),
            ));
        }
        Ok(Self::Tabulated { omega, h })
    }

    /// h(omega).
    pub fn eval(&self, w: f64) -> f64 {
        match self {
            Self::Ohmic { s, omega_c } => s * w * (-w / omega_c).exp(),
            Self::Tabulated { omega, h } => {
                if w <= 0.0 || w > *omega.last().unwrap() {
                    return 0.0;
                }
                match omega.binary_search_by(|x| x.total_cmp(&w)) {
                    Ok(i) => h[i],
                    Err(i) => {
                        let (w0, h0) = if i == 0 {
                            (0.0, 0.0)
                        } else {
                            (omega[i - 1], h[i - 1])
                        };
                        let (w1, h1) = (omega[i], h[i]);
                        h0 + (h1 - h0) * (w - w0) / (w1 - w0)
                    }
                }
            }
        }
    }

    /// lim_{w->0} h(w)/w.
    fn slope_at_origin(&self) -> f64 {
        match self {
            Self::Ohmic { s, .. } => *s,
            Self::Tabulated { omega, h } => {
                let first = omega.iter().position(|&w| w > 0.0).unwrap_or(0);
                h[first] / omega[first]
            }
        }
    }

    /// Frequency scale that bounds the support: the exponential cutoff for
    /// Ohmic, the last sample for tables.
    pub fn cutoff(&self) -> f64 {
        match self {
            Self::Ohmic { omega_c, .. } => *omega_c,
            Self::Tabulated { omega, .. } => *omega.last().unwrap(),
        }
    }

    /// Decay scale handed to the truncated semi-infinite integrator so that
    /// the upper limit lands where the density actually dies.
    fn truncation_decay_scale(&self, quad: &QuadSpec) -> f64 {
        match self {
            Self::Ohmic { omega_c, .. } => *omega_c,
            Self::Tabulated { omega, .. } => omega.last().unwrap() / quad.cutoff_multiplier,
        }
    }

    /// Interior points where the integrand is allowed to be non-smooth:
    /// table nodes for tabulated densities, nothing for Ohmic.
    fn breakpoints(&self) -> &[f64] {
        match self {
            Self::Ohmic { .. } => &[],
            Self::Tabulated { omega, .. } => omega,
        }
    }
}

/// A spectral density together with the bath inverse temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathSpec {
    pub density: SpectralDensity,
    /// beta~ = hbar omega_0 / k_B T.
    pub beta: f64,
}

impl BathSpec {
    pub fn new(density: SpectralDensity, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidInput(format!("beta must be > 0, got {beta}")));
        }
        Ok(Self { density, beta })
    }

    pub fn ohmic(s: f64, omega_c: f64, beta: f64) -> Result<Self> {
        Self::new(SpectralDensity::ohmic(s, omega_c)?, beta)
    }
}

fn bose_raw(x: f64) -> f64 {
    if x < 1e-6 {
        1.0 / x - 0.5 + x / 12.0
    } else {
        1.0 / x.exp_m1()
    }
}

/// Bose-Einstein occupation n(omega) = 1/(e^{beta omega} - 1).
///
/// Below beta*omega = 1e-6 the series 1/x - 1/2 + x/12 is used to dodge the
/// cancellation in e^x - 1.
pub fn bose_occupation(omega: f64, beta: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!(
            "bose_occupation needs omega > 0, got {omega}"
        )));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "bose_occupation needs beta > 0, got {beta}"
        )));
    }
    Ok(bose_raw(beta * omega))
}

/// 1 + 2 n(omega) = coth(beta omega / 2), through the same series-protected
/// occupation.
fn coth_factor(omega: f64, beta: f64) -> f64 {
    1.0 + 2.0 * bose_raw(beta * omega)
}

/// Sine kernel S(t). Ohmic densities take the closed form s * arctan(w_c t);
/// tabulated densities go through quadrature.
pub fn sine_kernel(bath: &BathSpec, t: f64, quad: &QuadSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "sine_kernel needs t >= 0, got {t}"
        )));
    }
    match &bath.density {
        SpectralDensity::Ohmic { s, omega_c } => Ok(s * (omega_c * t).atan()),
        density => sine_kernel_quadrature(density, t, quad),
    }
}

/// Quadrature route for S(t), usable with any density. For Ohmic input this
/// must agree with the arctan form; the cross-check lives in the tests and
/// the self test.
pub fn sine_kernel_quadrature(
    density: &SpectralDensity,
    t: f64,
    quad: &QuadSpec,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "sine_kernel needs t >= 0, got {t}"
        )));
    }
    let decay = density.truncation_decay_scale(quad);
    let floor = OMEGA_FLOOR_FRACTION * density.cutoff();
    let slope = density.slope_at_origin();
    let r = integrate_semi_infinite_with_breakpoints(
        |w| {
            if w < floor {
                slope * t
            } else {
                density.eval(w) * (w * t).sin() / (w * w)
            }
        },
        quad,
        decay,
        density.breakpoints(),
    )?;
    finish("sine_kernel", t, r)
}

/// Dephasing exponent xi(t) >= 0.
///
/// The integrand is evaluated as h(w)/w^2 coth(beta w / 2) 2 sin^2(w t / 2);
/// below the small-omega floor it is replaced by its w -> 0 limit
/// slope * t^2 / beta. Ohmic densities factor the coupling strength s out of
/// the integral, so xi is exactly linear in s.
pub fn xi(bath: &BathSpec, t: f64, quad: &QuadSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("xi needs t >= 0, got {t}")));
    }
    let beta = bath.beta;
    match &bath.density {
        SpectralDensity::Ohmic { s, omega_c } => {
            let (s, omega_c) = (*s, *omega_c);
            let floor = OMEGA_FLOOR_FRACTION * omega_c;
            let r = integrate_semi_infinite(
                |w| {
                    if w < floor {
                        t * t / beta
                    } else {
                        let half = (0.5 * w * t).sin();
                        (-w / omega_c).exp() / w * coth_factor(w, beta) * 2.0 * half * half
                    }
                },
                quad,
                omega_c,
            )?;
            finish("xi", t, r).map(|v| s * v)
        }
        density => {
            let decay = density.truncation_decay_scale(quad);
            let floor = OMEGA_FLOOR_FRACTION * density.cutoff();
            let slope = density.slope_at_origin();
            let r = integrate_semi_infinite_with_breakpoints(
                |w| {
                    if w < floor {
                        slope * t * t / beta
                    } else {
                        let half = (0.5 * w * t).sin();
                        density.eval(w) / (w * w) * coth_factor(w, beta) * 2.0 * half * half
                    }
                },
                quad,
                decay,
                density.breakpoints(),
            )?;
            finish("xi", t, r)
        }
    }
}

/// Closed form of xi(t) for an Ohmic bath in the high-temperature limit
/// n(w) -> 1/(beta w):
///
/// ```text
/// xi_HT(t) = s/(2 beta) * (4 t arctan(w_c t) - (2 - beta w_c) ln(1 + w_c^2 t^2) / w_c)
/// ```
///
/// Nonnegative for beta * w_c <= 2. Meaningful as an approximation only for
/// beta * w_c << 1; evaluated as written regardless.
pub fn xi_high_temperature(bath: &BathSpec, t: f64) -> Result<f64> {
    let SpectralDensity::Ohmic { s, omega_c } = bath.density else {
        return Err(Error::InvalidInput(
            "xi_high_temperature is defined for Ohmic densities only".into(),
        ));
    };
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "xi_high_temperature needs t >= 0, got {t}"
        )));
    }
    let beta = bath.beta;
    let wct = omega_c * t;
    Ok(s / (2.0 * beta)
        * (4.0 * t * wct.atan() - (2.0 - beta * omega_c) * wct.mul_add(wct, 1.0).ln() / omega_c))
}

/// Polaron energy shift int_0^inf dw h(w)/w; s * w_c for Ohmic.
pub fn energy_shift(bath: &BathSpec, quad: &QuadSpec) -> Result<f64> {
    match &bath.density {
        SpectralDensity::Ohmic { s, omega_c } => Ok(s * omega_c),
        density => {
            let decay = density.truncation_decay_scale(quad);
            let floor = OMEGA_FLOOR_FRACTION * density.cutoff();
            let slope = density.slope_at_origin();
            let r = integrate_semi_infinite_with_breakpoints(
                |w| {
                    if w < floor {
                        slope
                    } else {
                        density.eval(w) / w
                    }
                },
                quad,
                decay,
                density.breakpoints(),
            )?;
            finish("energy_shift", 0.0, r)
        }
    }
}

fn finish(name: &str, t: f64, r: crate::quadrature::QuadResult) -> Result<f64> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::NonConvergence {
            integral: format!("{name}(t = {t})"),
            value: r.value,
            error_estimate: r.error_estimate,
        })
    }
}

/// Precomputed xi, sine-kernel and Psi_1 samples on a uniform time grid.
///
/// Invariants established at construction: xi[0] = 0, S[0] = 0, psi1[0] = 1,
/// xi[k] >= 0 and |psi1[k]| = exp(-xi[k]) for every k.
#[derive(Debug, Clone)]
pub struct KernelCache {
    grid: TimeGrid,
    xi: Vec<f64>,
    sine_kernel: Vec<f64>,
    psi1: Vec<Complex64>,
}

impl KernelCache {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn sine_kernel(&self) -> &[f64] {
        &self.sine_kernel
    }

    pub fn psi1(&self) -> &[Complex64] {
        &self.psi1
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Sample xi(t), S(t) and Psi_1(t) = exp(-xi(t) - i S(t)) on every grid point.
/// Grid points are independent, so the sampling runs in parallel.
pub fn build_kernel_cache(bath: &BathSpec, grid: &TimeGrid, quad: &QuadSpec) -> Result<KernelCache> {
    let samples: Result<Vec<(f64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let t = grid.value(k);
            Ok((xi(bath, t, quad)?, sine_kernel(bath, t, quad)?))
        })
        .collect();
    let samples = samples?;

    let mut xi_v = Vec::with_capacity(samples.len());
    let mut s_v = Vec::with_capacity(samples.len());
    let mut psi1 = Vec::with_capacity(samples.len());
    for (x, s) in samples {
        xi_v.push(x);
        s_v.push(s);
        psi1.push(Complex64::from_polar((-x).exp(), -s));
    }
    Ok(KernelCache {
        grid: grid.clone(),
        xi: xi_v,
        sine_kernel: s_v,
        psi1,
    })
}
