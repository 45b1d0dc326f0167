//! Assembly of the driven transient response for the two initial conditions.
//!
//! With tau = t - t' both response amplitudes reduce to composite-rule sums
//! over tabulated kernels on the cache grid:
//!
//! * total equilibrium (case 1): a running integral of
//!   K_1(tau) = e^{i dw tau} (w1 Psi_1(tau) - w0 conj(Psi_1(tau))) / Z',
//! * factorized (case 2): the t-dependent unit phase exp(+2i S(t)) is pulled
//!   out of the t' integral, leaving a discrete convolution of
//!   e^{i dw tau} Psi_1(tau) against the one-dimensional table exp(-2i S(t')).
//!
//! Both cases route through the same evaluator; when the phase table is
//! trivial (zero coupling) case 2 takes the identical summation path as
//! case 1, so the zero-coupling coincidence holds bit for bit. The direct
//! double-loop evaluation is kept in [`reference`] for cross-checking.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bath::{build_kernel_cache, energy_shift, BathSpec, KernelCache};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::lineshape::TwoTimePhase;
use crate::quadrature::{cumulative_integral, sample_weight, QuadSpec};

/// Which transition gap equals one unit of omega_0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapConvention {
    /// E1' - E0 = 1: driving at omega_p = 1 is exact resonance.
    RenormalizedGapIsOne,
    /// E1 - E0 = 1: the bare gap is the unit; the renormalized gap sits below.
    BareGapIsOne,
}

/// Two-level system and drive parameters, all in units of hbar omega_0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    /// Energy of the lower level.
    pub e0: f64,
    pub gap_convention: GapConvention,
    /// Drive frequency.
    pub omega_p: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            e0: 0.0,
            gap_convention: GapConvention::RenormalizedGapIsOne,
            omega_p: 1.0,
        }
    }
}

impl SystemParams {
    /// Fix the level energies given the bath's polaron shift.
    pub fn resolve(&self, polaron_shift: f64) -> Result<ResolvedSystem> {
        if !self.e0.is_finite() || !self.omega_p.is_finite() {
            return Err(Error::InvalidInput(
                "system parameters must be finite".into(),
            ));
        }
        if !(polaron_shift >= 0.0) || !polaron_shift.is_finite() {
            return Err(Error::InvalidInput(format!(
                "polaron shift must be >= 0, got {polaron_shift}"
            )));
        }
        let (e1_prime, e1) = match self.gap_convention {
            GapConvention::RenormalizedGapIsOne => {
                (self.e0 + 1.0, self.e0 + 1.0 + polaron_shift)
            }
            GapConvention::BareGapIsOne => (self.e0 + 1.0 - polaron_shift, self.e0 + 1.0),
        };
        Ok(ResolvedSystem {
            e0: self.e0,
            e1_prime,
            e1,
            omega_p: self.omega_p,
            detuning: (e1_prime - self.e0) - self.omega_p,
        })
    }
}

/// System energies with the polaron shift applied: E1 = E1' + shift and the
/// detuning dw = (E1' - E0) - omega_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedSystem {
    pub e0: f64,
    pub e1_prime: f64,
    pub e1: f64,
    pub omega_p: f64,
    pub detuning: f64,
}

/// Initial condition of the total system before the field switches on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    /// Case 1: joint thermal equilibrium; weights use the renormalized E1'.
    Correlated,
    /// Case 2: system x bath product state; weights use the bare E1.
    Factorized,
}

impl InitialCondition {
    pub fn case_id(&self) -> u8 {
        match self {
            Self::Correlated => 1,
            Self::Factorized => 2,
        }
    }
}

/// Scalar Boltzmann weights of the two levels and their partition sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoltzmannWeights {
    /// Upper-level weight.
    pub w1: f64,
    /// Lower-level weight.
    pub w0: f64,
    /// Partition sum w1 + w0.
    pub z: f64,
}

impl BoltzmannWeights {
    pub fn for_case(
        case: InitialCondition,
        sys: &ResolvedSystem,
        beta: f64,
    ) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidInput(format!("beta must be > 0, got {beta}")));
        }
        let upper = match case {
            InitialCondition::Correlated => sys.e1_prime,
            InitialCondition::Factorized => sys.e1,
        };
        let w1 = (-beta * upper).exp();
        let w0 = (-beta * sys.e0).exp();
        if !(w1 > 0.0) || !(w0 > 0.0) || !w1.is_finite() || !w0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Boltzmann weights degenerate at beta = {beta} (w1 = {w1}, w0 = {w0})"
            )));
        }
        Ok(Self { w1, w0, z: w1 + w0 })
    }
}

/// Kernel tables shared by both cases:
/// up[m] = e^{i dw tau_m} Psi_1[m] * w1/z, dn[m] = e^{i dw tau_m} conj(Psi_1[m]) * w0/z.
fn kernel_tables(
    weights: &BoltzmannWeights,
    detuning: f64,
    cache: &KernelCache,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let wu = weights.w1 / weights.z;
    let wd = weights.w0 / weights.z;
    let n = cache.len();
    let mut up = Vec::with_capacity(n);
    let mut dn = Vec::with_capacity(n);
    for m in 0..n {
        let tau = cache.grid().value(m);
        let rot = Complex64::from_polar(1.0, detuning * tau);
        let psi = cache.psi1()[m];
        up.push(rot * psi * wu);
        dn.push(rot * psi.conj() * wd);
    }
    (up, dn)
}

/// Phase tables of the factorized case: g[j] = exp(-2i S_j) and
/// pref[k] = exp(+2i S_k).
fn modulation_tables(cache: &KernelCache) -> (Vec<Complex64>, Vec<Complex64>) {
    let g = cache
        .sine_kernel()
        .iter()
        .map(|&s| Complex64::from_polar(1.0, -2.0 * s))
        .collect();
    let pref = cache
        .sine_kernel()
        .iter()
        .map(|&s| Complex64::from_polar(1.0, 2.0 * s))
        .collect();
    (g, pref)
}

fn is_unit_table(table: &[Complex64]) -> bool {
    table.iter().all(|&z| z == Complex64::new(1.0, 0.0))
}

/// A(t_k) for the correlated case on the whole grid; O(N) through the
/// incremental prefix rule.
pub fn amplitude_series_case1(
    weights: &BoltzmannWeights,
    detuning: f64,
    cache: &KernelCache,
) -> Vec<Complex64> {
    let (up, dn) = kernel_tables(weights, detuning, cache);
    cumulative_pair(&up, &dn, cache.grid().step())
}

/// A(t_k) for the factorized case on the whole grid. The convolution term
/// costs O(k) per point; points are evaluated in parallel. A trivial phase
/// table (zero coupling) collapses onto the case-1 path, summation order
/// included.
pub fn amplitude_series_case2(
    weights: &BoltzmannWeights,
    detuning: f64,
    cache: &KernelCache,
) -> Vec<Complex64> {
    let (up, dn) = kernel_tables(weights, detuning, cache);
    let (g, pref) = modulation_tables(cache);
    if is_unit_table(&g) {
        return cumulative_pair(&up, &dn, cache.grid().step());
    }
    let dt = cache.grid().step();
    let dn_cum = cumulative_integral(&dn, dt);
    (0..cache.len())
        .into_par_iter()
        .map(|k| pref[k] * convolution_at(&up, &g, dt, k) - dn_cum[k])
        .collect()
}

fn cumulative_pair(up: &[Complex64], dn: &[Complex64], dt: f64) -> Vec<Complex64> {
    let up_cum = cumulative_integral(up, dt);
    let dn_cum = cumulative_integral(dn, dt);
    up_cum
        .iter()
        .zip(&dn_cum)
        .map(|(u, d)| u - d)
        .collect()
}

fn convolution_at(up: &[Complex64], g: &[Complex64], dt: f64, k: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=k {
        acc += up[k - j] * g[j] * sample_weight(j, k);
    }
    acc * dt
}

/// Single-point evaluation of the correlated-case amplitude.
pub fn amplitude_case1(
    weights: &BoltzmannWeights,
    detuning: f64,
    cache: &KernelCache,
    k: usize,
) -> Result<Complex64> {
    check_index(cache, k)?;
    Ok(amplitude_series_case1(weights, detuning, cache)[k])
}

/// Single-point evaluation of the factorized-case amplitude.
pub fn amplitude_case2(
    weights: &BoltzmannWeights,
    detuning: f64,
    cache: &KernelCache,
    k: usize,
) -> Result<Complex64> {
    check_index(cache, k)?;
    let (up, dn) = kernel_tables(weights, detuning, cache);
    let (g, pref) = modulation_tables(cache);
    let dt = cache.grid().step();
    if is_unit_table(&g) {
        return Ok(cumulative_pair(&up, &dn, dt)[k]);
    }
    let dn_cum = cumulative_integral(&dn, dt);
    Ok(pref[k] * convolution_at(&up, &g, dt, k) - dn_cum[k])
}

fn check_index(cache: &KernelCache, k: usize) -> Result<()> {
    if k >= cache.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: cache.len(),
        });
    }
    Ok(())
}

/// Direct double-loop evaluation of the response integrals, with no kernel
/// factoring. O(N) per point; retained as the cross-check for the fast paths.
pub mod reference {
    use super::*;
    use crate::lineshape::psi2;

    pub fn amplitude_case1(
        weights: &BoltzmannWeights,
        detuning: f64,
        cache: &KernelCache,
        k: usize,
    ) -> Result<Complex64> {
        check_index(cache, k)?;
        let grid = cache.grid();
        let t = grid.value(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=k {
            let t_prime = grid.value(j);
            let rot = Complex64::from_polar(1.0, detuning * (t - t_prime));
            let psi = cache.psi1()[k - j];
            let braces = psi * weights.w1 - psi.conj() * weights.w0;
            acc += rot * braces * sample_weight(j, k);
        }
        Ok(acc * (grid.step() / weights.z))
    }

    pub fn amplitude_case2(
        weights: &BoltzmannWeights,
        detuning: f64,
        cache: &KernelCache,
        phase: &TwoTimePhase,
        k: usize,
    ) -> Result<Complex64> {
        check_index(cache, k)?;
        let grid = cache.grid();
        let t = grid.value(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=k {
            let t_prime = grid.value(j);
            let rot = Complex64::from_polar(1.0, detuning * (t - t_prime));
            let braces = psi2(cache, phase, t, t_prime)? * weights.w1
                - cache.psi1()[k - j].conj() * weights.w0;
            acc += rot * braces * sample_weight(j, k);
        }
        Ok(acc * (grid.step() / weights.z))
    }
}

/// Time series of one response case: complex amplitude, polar decomposition,
/// dipole moment and intensity.
#[derive(Debug, Clone)]
pub struct ResponseTrace {
    pub case_id: u8,
    grid: TimeGrid,
    pub a: Vec<Complex64>,
    pub amplitude: Vec<f64>,
    pub phase_principal: Vec<f64>,
    pub phase_unwrapped: Vec<f64>,
    pub mu: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl ResponseTrace {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Remove 2 pi jumps from a principal-value phase series.
pub fn unwrap_phase(principal: &[f64]) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(principal.len());
    let mut correction = 0.0;
    let mut prev = match principal.first() {
        Some(&p) => {
            out.push(p);
            p
        }
        None => return out,
    };
    for &p in &principal[1..] {
        let d = p - prev;
        if d > PI {
            correction -= 2.0 * PI;
        } else if d < -PI {
            correction += 2.0 * PI;
        }
        out.push(p + correction);
        prev = p;
    }
    out
}

/// mu(t_k) = |A_k| cos(omega_p t_k - phi_k) and friends from a complex
/// amplitude series.
pub fn assemble_trace(
    grid: &TimeGrid,
    a: Vec<Complex64>,
    omega_p: f64,
    case_id: u8,
) -> Result<ResponseTrace> {
    if a.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "amplitude series has {} samples for a grid of {} points",
            a.len(),
            grid.len()
        )));
    }
    let amplitude: Vec<f64> = a.iter().map(|z| z.norm()).collect();
    let phase_principal: Vec<f64> = a.iter().map(|z| z.arg()).collect();
    let phase_unwrapped = unwrap_phase(&phase_principal);
    let mu: Vec<f64> = amplitude
        .iter()
        .zip(&phase_principal)
        .enumerate()
        .map(|(k, (amp, phi))| amp * (omega_p * grid.value(k) - phi).cos())
        .collect();
    let intensity = mu.iter().map(|m| m * m).collect();
    Ok(ResponseTrace {
        case_id,
        grid: grid.clone(),
        a,
        amplitude,
        phase_principal,
        phase_unwrapped,
        mu,
        intensity,
    })
}

/// Paired summary of the two cases: asymptotics over the tail window, rise
/// times, and the case-2 over case-1 difference metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Earliest time after which |A| stays inside the tolerance band around
    /// its asymptote; None when the band is never reached on the grid.
    pub rise_time_1: Option<f64>,
    pub rise_time_2: Option<f64>,
    pub asymptotic_amplitude_1: f64,
    pub asymptotic_amplitude_2: f64,
    pub asymptotic_phase_1: f64,
    pub asymptotic_phase_2: f64,
    pub amplitude_ratio_21: f64,
    pub phase_offset_21: f64,
    /// Amplitude varies by less than the tolerance over the tail window.
    pub stationary_1: bool,
    pub stationary_2: bool,
    pub stationarity_tolerance: f64,
    pub tail_fraction: f64,
}

struct TailStats {
    amplitude: f64,
    phase: f64,
    stationary: bool,
    rise_time: Option<f64>,
}

fn tail_stats(trace: &ResponseTrace, tol: f64, tail_fraction: f64) -> TailStats {
    let n = trace.len();
    let tail_len = ((tail_fraction * n as f64).floor() as usize).clamp(1, n);
    let tail_start = n - tail_len;

    let amp_tail = &trace.amplitude[tail_start..];
    let mean_amp = amp_tail.iter().sum::<f64>() / tail_len as f64;
    let mean_phase =
        trace.phase_unwrapped[tail_start..].iter().sum::<f64>() / tail_len as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in amp_tail {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let stationary = (hi - lo) <= tol * mean_amp.abs();

    let band = tol * mean_amp.abs();
    let mut last_violation = None;
    for k in (0..n).rev() {
        if (trace.amplitude[k] - mean_amp).abs() > band {
            last_violation = Some(k);
            break;
        }
    }
    let rise_time = match last_violation {
        None => Some(0.0),
        Some(k) if k + 1 < n => Some(trace.grid.value(k + 1)),
        Some(_) => None,
    };

    TailStats {
        amplitude: mean_amp,
        phase: mean_phase,
        stationary,
        rise_time,
    }
}

/// Compare the two traces: asymptotic amplitude and unwrapped phase are tail
/// means, rise time is the entry point into the stationarity band. Traces
/// that never settle are flagged, not rejected.
pub fn compare(
    trace1: &ResponseTrace,
    trace2: &ResponseTrace,
    stationarity_tol: f64,
    tail_fraction: f64,
) -> Result<ComparisonReport> {
    if !(stationarity_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "stationarity_tol must be > 0, got {stationarity_tol}"
        )));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "tail_fraction must be in (0, 0.5], got {tail_fraction}"
        )));
    }
    if trace1.grid != trace2.grid {
        return Err(Error::GridMismatch(
            "compared traces live on different grids".into(),
        ));
    }
    let s1 = tail_stats(trace1, stationarity_tol, tail_fraction);
    let s2 = tail_stats(trace2, stationarity_tol, tail_fraction);
    Ok(ComparisonReport {
        rise_time_1: s1.rise_time,
        rise_time_2: s2.rise_time,
        asymptotic_amplitude_1: s1.amplitude,
        asymptotic_amplitude_2: s2.amplitude,
        asymptotic_phase_1: s1.phase,
        asymptotic_phase_2: s2.phase,
        amplitude_ratio_21: s2.amplitude / s1.amplitude,
        phase_offset_21: s2.phase - s1.phase,
        stationary_1: s1.stationary,
        stationary_2: s2.stationary,
        stationarity_tolerance: stationarity_tol,
        tail_fraction,
    })
}

/// Everything a single run needs.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub system: SystemParams,
    pub bath: BathSpec,
    pub grid: TimeGrid,
    pub quad: QuadSpec,
}

/// Both traces of one run, plus the resolved energies.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub resolved: ResolvedSystem,
    pub trace1: ResponseTrace,
    pub trace2: ResponseTrace,
}

impl Simulation {
    /// Build the kernel cache once and evaluate both initial conditions.
    pub fn run(&self) -> Result<SimulationResult> {
        let shift = energy_shift(&self.bath, &self.quad)?;
        let resolved = self.system.resolve(shift)?;
        let cache = build_kernel_cache(&self.bath, &self.grid, &self.quad)?;

        let w1 = BoltzmannWeights::for_case(InitialCondition::Correlated, &resolved, self.bath.beta)?;
        let w2 = BoltzmannWeights::for_case(InitialCondition::Factorized, &resolved, self.bath.beta)?;

        let a1 = amplitude_series_case1(&w1, resolved.detuning, &cache);
        let a2 = amplitude_series_case2(&w2, resolved.detuning, &cache);

        Ok(SimulationResult {
            resolved,
            trace1: assemble_trace(&self.grid, a1, self.system.omega_p, 1)?,
            trace2: assemble_trace(&self.grid, a2, self.system.omega_p, 2)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cache_for(bath: &BathSpec, t_end: f64, dt: f64) -> KernelCache {
        let grid = TimeGrid::new(t_end, dt).unwrap();
        build_kernel_cache(bath, &grid, &QuadSpec::default()).unwrap()
    }

    fn weights_pair(sys: &ResolvedSystem, beta: f64) -> (BoltzmannWeights, BoltzmannWeights) {
        (
            BoltzmannWeights::for_case(InitialCondition::Correlated, sys, beta).unwrap(),
            BoltzmannWeights::for_case(InitialCondition::Factorized, sys, beta).unwrap(),
        )
    }

    #[test]
    fn resolve_conventions() {
        let sys = SystemParams::default().resolve(0.2).unwrap();
        assert_eq!(sys.e1_prime, 1.0);
        assert_eq!(sys.e1, 1.2);
        assert_eq!(sys.detuning, 0.0);
        assert!(sys.e1 >= sys.e1_prime);

        let bare = SystemParams {
            gap_convention: GapConvention::BareGapIsOne,
            ..SystemParams::default()
        }
        .resolve(0.2)
        .unwrap();
        assert_eq!(bare.e1, 1.0);
        assert_eq!(bare.e1_prime, 0.8);
        assert!((bare.detuning - (-0.2)).abs() < 1e-15);
    }

    #[test]
    fn weights_use_the_right_levels() {
        let sys = SystemParams::default().resolve(0.2).unwrap();
        let (w1, w2) = weights_pair(&sys, 2.0);
        assert_eq!(w1.w1, (-2.0_f64).exp());
        assert_eq!(w2.w1, (-2.4_f64).exp());
        assert_eq!(w1.w0, 1.0);
        assert_eq!(w1.z, w1.w0 + w1.w1);
        assert!(BoltzmannWeights::for_case(InitialCondition::Correlated, &sys, 1e6).is_err());
    }

    #[test]
    fn amplitude_starts_at_zero() {
        let bath = BathSpec::ohmic(1.0, 0.2, 0.1).unwrap();
        let cache = cache_for(&bath, 5.0, 0.1);
        let sys = SystemParams::default()
            .resolve(energy_shift(&bath, &QuadSpec::default()).unwrap())
            .unwrap();
        let (w1, w2) = weights_pair(&sys, bath.beta);
        assert_eq!(
            amplitude_case1(&w1, sys.detuning, &cache, 0).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert_eq!(
            amplitude_case2(&w2, sys.detuning, &cache, 0).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn uncoupled_resonant_amplitude_grows_linearly() {
        // s = 0, dw = 0, beta = 1: A(t) = t (e^{-1} - 1)/(e^{-1} + 1), real.
        let bath = BathSpec::ohmic(0.0, 0.2, 1.0).unwrap();
        let cache = cache_for(&bath, 10.0, 0.25);
        let sys = SystemParams::default().resolve(0.0).unwrap();
        let (w1, _) = weights_pair(&sys, 1.0);
        let series = amplitude_series_case1(&w1, sys.detuning, &cache);
        let slope = ((-1.0_f64).exp() - 1.0) / ((-1.0_f64).exp() + 1.0);
        for (k, a) in series.iter().enumerate() {
            let t = cache.grid().value(k);
            assert_eq!(a.im, 0.0, "k = {k}");
            assert!((a.re - slope * t).abs() < 1e-12, "k = {k}: {} vs {}", a.re, slope * t);
        }
    }

    #[test]
    fn zero_coupling_collapses_the_cases_bitwise() {
        let bath = BathSpec::ohmic(0.0, 0.2, 1.0).unwrap();
        let cache = cache_for(&bath, 20.0, 0.05);
        let sys = SystemParams::default().resolve(0.0).unwrap();
        let (w1, w2) = weights_pair(&sys, bath.beta);
        assert_eq!(w1, w2);
        let a1 = amplitude_series_case1(&w1, sys.detuning, &cache);
        let a2 = amplitude_series_case2(&w2, sys.detuning, &cache);
        assert_eq!(a1, a2);
    }

    #[test]
    fn forced_convolution_path_matches_cumulative_on_trivial_phase() {
        // The degenerate shortcut must agree with the generic convolution.
        let bath = BathSpec::ohmic(0.0, 0.2, 1.0).unwrap();
        let cache = cache_for(&bath, 8.0, 0.1);
        let sys = SystemParams::default().resolve(0.0).unwrap();
        let (_, w2) = weights_pair(&sys, bath.beta);
        let (up, dn) = kernel_tables(&w2, sys.detuning, &cache);
        let (g, pref) = modulation_tables(&cache);
        assert!(is_unit_table(&g));
        let dt = cache.grid().step();
        let dn_cum = cumulative_integral(&dn, dt);
        let shortcut = cumulative_pair(&up, &dn, dt);
        for k in 0..cache.len() {
            let generic = pref[k] * convolution_at(&up, &g, dt, k) - dn_cum[k];
            assert!((generic - shortcut[k]).norm() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn fast_paths_match_reference_double_loop() {
        let bath = BathSpec::ohmic(1.0, 0.2, 0.1).unwrap();
        let cache = cache_for(&bath, 4.0, 0.02);
        let shift = energy_shift(&bath, &QuadSpec::default()).unwrap();
        let sys = SystemParams::default().resolve(shift).unwrap();
        let (w1, w2) = weights_pair(&sys, bath.beta);
        let phase = TwoTimePhase::for_bath(&bath, &QuadSpec::default());

        let a1 = amplitude_series_case1(&w1, sys.detuning, &cache);
        let a2 = amplitude_series_case2(&w2, sys.detuning, &cache);
        for k in (0..cache.len()).step_by(13) {
            let r1 = reference::amplitude_case1(&w1, sys.detuning, &cache, k).unwrap();
            let r2 =
                reference::amplitude_case2(&w2, sys.detuning, &cache, &phase, k).unwrap();
            let scale1 = r1.norm().max(1e-30);
            let scale2 = r2.norm().max(1e-30);
            assert!((a1[k] - r1).norm() / scale1 < 1e-10, "case 1, k = {k}");
            assert!((a2[k] - r2).norm() / scale2 < 1e-10, "case 2, k = {k}");
        }
    }

    #[test]
    fn trace_from_constant_imaginary_amplitude() {
        let grid = TimeGrid::new(PI, PI / 8.0).unwrap();
        let a = vec![Complex64::new(0.0, 1.0); grid.len()];
        let trace = assemble_trace(&grid, a, 1.0, 1).unwrap();
        for k in 0..trace.len() {
            let t = grid.value(k);
            assert!((trace.amplitude[k] - 1.0).abs() < 1e-15);
            assert!((trace.phase_principal[k] - PI / 2.0).abs() < 1e-15);
            assert!((trace.mu[k] - t.sin()).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn trace_of_zeros() {
        let grid = TimeGrid::new(1.0, 0.25).unwrap();
        let a = vec![Complex64::new(0.0, 0.0); grid.len()];
        let trace = assemble_trace(&grid, a, 1.0, 2).unwrap();
        assert!(trace.mu.iter().all(|&m| m == 0.0));
        assert!(trace.intensity.iter().all(|&i| i == 0.0));
        assert_eq!(trace.case_id, 2);
    }

    #[test]
    fn unwrap_restores_continuity() {
        let n = 200;
        let true_phase: Vec<f64> = (0..n).map(|k| 0.1 * k as f64).collect();
        let wrapped: Vec<f64> = true_phase
            .iter()
            .map(|&p| Complex64::from_polar(1.0, p).arg())
            .collect();
        let unwrapped = unwrap_phase(&wrapped);
        for k in 0..n {
            assert!((unwrapped[k] - true_phase[k]).abs() < 1e-12, "k = {k}");
        }
        // The principal series itself must exhibit jumps for this input.
        assert!(wrapped
            .windows(2)
            .any(|w| (w[1] - w[0]).abs() > PI));
    }

    #[test]
    fn compare_identical_traces() {
        let grid = TimeGrid::new(10.0, 0.1).unwrap();
        let a: Vec<Complex64> = (0..grid.len())
            .map(|k| Complex64::from_polar(1.0 - (-(grid.value(k))).exp(), 0.3))
            .collect();
        let t1 = assemble_trace(&grid, a.clone(), 1.0, 1).unwrap();
        let t2 = assemble_trace(&grid, a, 1.0, 2).unwrap();
        let report = compare(&t1, &t2, 1e-3, 0.2).unwrap();
        assert_eq!(report.amplitude_ratio_21, 1.0);
        assert_eq!(report.phase_offset_21, 0.0);
        assert_eq!(report.rise_time_1, report.rise_time_2);
        assert!(report.stationary_1 && report.stationary_2);
    }

    #[test]
    fn compare_flags_linear_growth_as_not_stationary() {
        let bath = BathSpec::ohmic(0.0, 0.2, 1.0).unwrap();
        let sim = Simulation {
            system: SystemParams::default(),
            bath,
            grid: TimeGrid::new(50.0, 0.1).unwrap(),
            quad: QuadSpec::default(),
        };
        let out = sim.run().unwrap();
        let report = compare(&out.trace1, &out.trace2, 1e-3, 0.2).unwrap();
        assert!(!report.stationary_1);
        assert!(!report.stationary_2);
        assert_eq!(report.rise_time_1, None);
    }

    #[test]
    fn compare_rise_time_on_synthetic_relaxation() {
        // |A| = 1 - e^{-t}: enters the 1e-3 band for good near t = ln(1e3).
        let grid = TimeGrid::new(40.0, 0.01).unwrap();
        let a: Vec<Complex64> = (0..grid.len())
            .map(|k| Complex64::new(1.0 - (-grid.value(k)).exp(), 0.0))
            .collect();
        let t1 = assemble_trace(&grid, a.clone(), 1.0, 1).unwrap();
        let t2 = assemble_trace(&grid, a, 1.0, 2).unwrap();
        let report = compare(&t1, &t2, 1e-3, 0.2).unwrap();
        let rise = report.rise_time_1.unwrap();
        assert!(
            (rise - (1e3_f64).ln()).abs() < 0.1,
            "rise = {rise}, expected ~6.9"
        );
    }

    #[test]
    fn compare_validates_inputs() {
        let grid = TimeGrid::new(1.0, 0.5).unwrap();
        let a = vec![Complex64::new(0.0, 0.0); grid.len()];
        let t1 = assemble_trace(&grid, a.clone(), 1.0, 1).unwrap();
        let t2 = assemble_trace(&grid, a.clone(), 1.0, 2).unwrap();
        assert!(compare(&t1, &t2, 0.0, 0.2).is_err());
        assert!(compare(&t1, &t2, 1e-3, 0.6).is_err());
        let other_grid = TimeGrid::new(1.0, 0.25).unwrap();
        let t3 = assemble_trace(
            &other_grid,
            vec![Complex64::new(0.0, 0.0); other_grid.len()],
            1.0,
            2,
        )
        .unwrap();
        assert!(matches!(
            compare(&t1, &t3, 1e-3, 0.2),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn low_temperature_cases_coincide() {
        // beta = 20: upper-level weights are ~2e-9; the surviving terms agree
        // up to partition-sum normalization.
        let bath = BathSpec::ohmic(1.0, 0.2, 20.0).unwrap();
        let sim = Simulation {
            system: SystemParams::default(),
            bath,
            grid: TimeGrid::new(60.0, 0.05).unwrap(),
            quad: QuadSpec::default(),
        };
        let out = sim.run().unwrap();
        let sup = out
            .trace1
            .a
            .iter()
            .zip(&out.trace2.a)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0_f64, f64::max);
        let report = compare(&out.trace1, &out.trace2, 1e-3, 0.2).unwrap();
        assert!(
            sup <= 1e-6 * report.asymptotic_amplitude_1,
            "sup diff = {sup:e}, asym = {}",
            report.asymptotic_amplitude_1
        );
    }
}
