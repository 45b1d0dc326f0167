//! One-dimensional quadrature tuned for the bath integrals: adaptive
//! Gauss-Kronrod for semi-infinite, exponentially damped integrands, and
//! fixed-order composite rules for time integrals on uniform grids.
//!
//! The Gauss-Kronrod nodes are interior to each panel, so integrands with a
//! removable singularity at the lower endpoint are never evaluated there.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerances and budgets for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    /// Relative tolerance on the integral value.
    pub rel_tol: f64,
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// Maximum number of interval bisections before giving up.
    pub max_subdivisions: usize,
    /// Semi-infinite integrals over omega are truncated at
    /// `cutoff_multiplier * decay_scale`.
    pub cutoff_multiplier: f64,
}

impl QuadSpec {
    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_subdivisions: usize,
        cutoff_multiplier: f64,
    ) -> Result<Self> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
            cutoff_multiplier,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "abs_tol must be > 0, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidInput(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        if !(self.cutoff_multiplier >= 10.0) {
            return Err(Error::InvalidInput(format!(
                "cutoff_multiplier must be >= 10, got {}",
                self.cutoff_multiplier
            )));
        }
        Ok(())
    }
}

impl Default for QuadSpec {
    /// Kernel values feed an O(N^2) outer loop, so quadrature error has to
    /// sit well below the composite-rule error of the response integrals.
    /// exp(-40) ~ 4e-18 puts the truncated tail below double precision.
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            cutoff_multiplier: 40.0,
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    /// True iff `error_estimate <= max(abs_tol, rel_tol * |value|)`.
    pub converged: bool,
}

// 15-point Kronrod extension of the 7-point Gauss rule (positive abscissae),
// at the published QUADPACK precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_440_0,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_96,
    0.063_092_092_629_978_553_29,
    0.104_790_010_322_250_183_84,
    0.140_653_259_715_525_918_75,
    0.169_004_726_639_267_902_83,
    0.190_350_578_064_785_409_91,
    0.204_432_940_075_298_892_41,
    0.209_482_141_084_727_828_01,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_3,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_944_9,
    0.417_959_183_673_469_387_8,
];

/// Apply the G7-K15 pair on [a, b]. Returns (kronrod value, error estimate).
fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut result_gauss = WG[3] * f_center;
    let mut result_kronrod = WGK[7] * f_center;
    let mut resabs = WGK[7] * f_center.abs();

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        fv1[j] = f(center - dx);
        fv2[j] = f(center + dx);
        let sum = fv1[j] + fv2[j];
        result_kronrod += WGK[j] * sum;
        resabs += WGK[j] * (fv1[j].abs() + fv2[j].abs());
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * sum;
        }
    }

    let mean = 0.5 * result_kronrod;
    let mut resasc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = result_kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();

    // QUADPACK-style error scaling.
    let mut err = ((result_kronrod - result_gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integration of `f` over (0, cutoff_multiplier * decay_scale].
///
/// `f` must be finite on the open interval with a finite limit at 0+; the
/// interior-node rule never evaluates the endpoint itself. When the
/// subdivision budget runs out the best estimate is still returned, with
/// `converged = false`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    spec: &QuadSpec,
    decay_scale: f64,
) -> Result<QuadResult> {
    integrate_semi_infinite_with_breakpoints(f, spec, decay_scale, &[])
}

/// Like [`integrate_semi_infinite`], but with the initial panels aligned to
/// the given interior breakpoints. Needed for integrands that are only
/// piecewise smooth, e.g. piecewise-linear tabulated densities.
pub fn integrate_semi_infinite_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    spec: &QuadSpec,
    decay_scale: f64,
    breakpoints: &[f64],
) -> Result<QuadResult> {
    spec.validate()?;
    if !(decay_scale > 0.0) || !decay_scale.is_finite() {
        return Err(Error::InvalidDomain(format!(
            "decay_scale must be positive, got {decay_scale}"
        )));
    }
    let upper = spec.cutoff_multiplier * decay_scale;
    let mut edges = vec![0.0];
    edges.extend(
        breakpoints
            .iter()
            .copied()
            .filter(|&x| x > 0.0 && x < upper),
    );
    edges.push(upper);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    adaptive(&f, &edges, spec)
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, edges: &[f64], spec: &QuadSpec) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let mut total_value = 0.0;
    let mut total_error = 0.0;
    for pair in edges.windows(2) {
        let (value, error) = gauss_kronrod_15(f, pair[0], pair[1]);
        total_value += value;
        total_error += error;
        heap.push(Panel {
            a: pair[0],
            b: pair[1],
            value,
            error,
        });
    }
    let mut subdivisions = 0_usize;

    let tolerance = |v: f64| spec.abs_tol.max(spec.rel_tol * v.abs());

    while total_error > tolerance(total_value) && subdivisions < spec.max_subdivisions {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at machine resolution; put it back untouched.
            heap.push(worst);
            break;
        }
        let (lv, le) = gauss_kronrod_15(f, worst.a, mid);
        let (rv, re) = gauss_kronrod_15(f, mid, worst.b);
        total_value += lv + rv - worst.value;
        total_error += le + re - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        subdivisions += 1;
    }

    // Re-sum from the panels to shed the cancellation noise of the running
    // updates.
    total_value = heap.iter().map(|p| p.value).sum();
    total_error = heap.iter().map(|p| p.error.max(0.0)).sum();

    Ok(QuadResult {
        value: total_value,
        error_estimate: total_error,
        subdivisions_used: subdivisions,
        converged: total_error <= tolerance(total_value),
    })
}

/// Scalar types the fixed-order rules can accumulate.
pub trait Integrand: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// Composite Simpson rule over `n_panels` uniform panels of [a, b], each
/// panel sampled at its endpoints and midpoint. Exact for cubics.
pub fn integrate_finite<T, F>(f: F, a: f64, b: f64, n_panels: usize) -> Result<T>
where
    T: Integrand,
    F: Fn(f64) -> T,
{
    if a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    if n_panels < 1 {
        return Err(Error::InvalidInput("n_panels must be at least 1".into()));
    }
    if a == b {
        return Ok(T::zero());
    }
    let h = (b - a) / n_panels as f64;
    let node = |k: usize| a + k as f64 * h;
    let mut acc = T::zero();
    let mut left = f(a);
    for k in 0..n_panels {
        let right = if k + 1 == n_panels { f(b) } else { f(node(k + 1)) };
        let mid = f(0.5 * (node(k) + node(k + 1)));
        acc = acc + (left + mid * 4.0 + right) * (h / 6.0);
        left = right;
    }
    Ok(acc)
}

// Gregory end-correction coefficients for the fourth-order sample rule.
const GREGORY_END: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

/// Weight (per unit step) of sample `j` in the fourth-order composite rule on
/// `n + 1` uniformly spaced samples spanning `n` panels.
///
/// The weight pattern is palindromic in j <-> n - j for every n, which the
/// response convolutions rely on. n = 0 integrates to zero; n = 1 falls back
/// to the trapezoid; all larger n are exact for cubics.
pub fn sample_weight(j: usize, n: usize) -> f64 {
    debug_assert!(j <= n);
    let edge = j.min(n - j);
    match n {
        0 => 0.0,
        1 => 0.5,
        2 => {
            if edge == 0 {
                1.0 / 3.0
            } else {
                4.0 / 3.0
            }
        }
        3 => {
            if edge == 0 {
                3.0 / 8.0
            } else {
                9.0 / 8.0
            }
        }
        4 => match edge {
            0 => 14.0 / 45.0,
            1 => 64.0 / 45.0,
            _ => 24.0 / 45.0,
        },
        _ => {
            if edge < 3 {
                GREGORY_END[edge]
            } else {
                1.0
            }
        }
    }
}

/// All prefix integrals of uniformly spaced samples: entry k approximates the
/// integral over [0, k * dt] with the `sample_weight` rule. Incremental, so a
/// full trace costs O(n).
pub fn cumulative_integral<T: Integrand>(samples: &[T], dt: f64) -> Vec<T> {
    let n = samples.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(T::zero());
    if n == 1 {
        return out;
    }
    let s = samples;

    if n >= 2 {
        out.push((s[0] + s[1]) * (0.5 * dt));
    }
    if n >= 3 {
        out.push((s[0] + s[1] * 4.0 + s[2]) * (dt / 3.0));
    }
    if n >= 4 {
        out.push((s[0] + s[1] * 3.0 + s[2] * 3.0 + s[3]) * (3.0 * dt / 8.0));
    }
    if n >= 5 {
        out.push(
            (s[0] * 14.0 + s[1] * 64.0 + s[2] * 24.0 + s[3] * 64.0 + s[4] * 14.0) * (dt / 45.0),
        );
    }

    // Interior running sum over samples 3..=k-3 keeps each step O(1).
    let mut interior = T::zero();
    for k in 5..n {
        interior = if k == 5 { T::zero() } else { interior + s[k - 3] };
        let ends = (s[0] + s[k]) * GREGORY_END[0]
            + (s[1] + s[k - 1]) * GREGORY_END[1]
            + (s[2] + s[k - 2]) * GREGORY_END[2];
        out.push((ends + interior) * dt);
    }
    out
}
