//! Embedded analytic-identity checks, runnable from a fresh build with no
//! input files. Each check pins its own tolerance; `tolerance_scale` exists
//! so a deliberately broken run (scale 0) can prove the harness fails loudly.

use trs_core::bath::{
    sine_kernel_quadrature, xi_high_temperature, BathSpec, SpectralDensity,
};
use trs_core::quadrature::{integrate_semi_infinite, QuadSpec};
use trs_core::response::{
    amplitude_series_case1, amplitude_series_case2, reference, BoltzmannWeights,
    InitialCondition, Simulation, SystemParams,
};
use trs_core::TimeGrid;
use trs_core::lineshape::TwoTimePhase;
use trs_core::bath::{build_kernel_cache, energy_shift};

struct Check {
    name: &'static str,
    run: fn(f64) -> Result<String, String>,
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Quadrature of the Ohmic sine-kernel integrand against s * arctan(w_c t).
fn check_arctan_identity(scale: f64) -> Result<String, String> {
    let tol = 1e-8 * scale;
    let quad = QuadSpec::default();
    let density = SpectralDensity::ohmic(1.0, 0.2).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for t in log_spaced(0.01, 100.0, 12) {
        let numeric = sine_kernel_quadrature(&density, t, &quad).map_err(|e| e.to_string())?;
        worst = worst.max((numeric - (0.2 * t).atan()).abs());
    }
    if worst <= tol {
        Ok(format!("max error {worst:.2e} <= {tol:.2e}"))
    } else {
        Err(format!("max error {worst:.2e} > {tol:.2e}"))
    }
}

/// Closed-form high-temperature xi against quadrature of the xi integrand
/// with the occupation replaced by 1/(beta w).
fn check_high_temperature_xi(scale: f64) -> Result<String, String> {
    let tol = 1e-6 * scale;
    let quad = QuadSpec::default();
    let (s, omega_c, beta) = (1.0, 0.02, 1e-4);
    let bath = BathSpec::ohmic(s, omega_c, beta).map_err(|e| e.to_string())?;
    let floor = 1e-6 * omega_c;
    let mut worst = 0.0_f64;
    for t in log_spaced(0.01, 100.0, 12) {
        let oracle = integrate_semi_infinite(
            |w| {
                if w < floor {
                    s * t * t / beta
                } else {
                    let half = (0.5 * w * t).sin();
                    s * (-w / omega_c).exp() / w * (1.0 + 2.0 / (beta * w)) * 2.0 * half * half
                }
            },
            &quad,
            omega_c,
        )
        .map_err(|e| e.to_string())?
        .value;
        let closed = xi_high_temperature(&bath, t).map_err(|e| e.to_string())?;
        worst = worst.max((closed - oracle).abs() / oracle.abs());
    }
    if worst <= tol {
        Ok(format!("max rel error {worst:.2e} <= {tol:.2e}"))
    } else {
        Err(format!("max rel error {worst:.2e} > {tol:.2e}"))
    }
}

/// s = 0 collapses the two initial conditions exactly.
fn check_zero_coupling(scale: f64) -> Result<String, String> {
    let tol = 1e-14 * scale;
    let sim = Simulation {
        system: SystemParams::default(),
        bath: BathSpec::ohmic(0.0, 0.2, 1.0).map_err(|e| e.to_string())?,
        grid: TimeGrid::new(20.0, 0.01).map_err(|e| e.to_string())?,
        quad: QuadSpec::default(),
    };
    let out = sim.run().map_err(|e| e.to_string())?;
    let worst = out
        .trace1
        .a
        .iter()
        .zip(&out.trace2.a)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0_f64, f64::max);
    if worst <= tol {
        Ok(format!("max |A1 - A2| = {worst:.2e} <= {tol:.2e}"))
    } else {
        Err(format!("max |A1 - A2| = {worst:.2e} > {tol:.2e}"))
    }
}

/// Factored fast paths against the direct double-loop evaluation.
fn check_fast_vs_reference(scale: f64) -> Result<String, String> {
    let tol = 1e-10 * scale;
    let quad = QuadSpec::default();
    let bath = BathSpec::ohmic(1.0, 0.2, 0.1).map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(8.0, 0.02).map_err(|e| e.to_string())?;
    let cache = build_kernel_cache(&bath, &grid, &quad).map_err(|e| e.to_string())?;
    let shift = energy_shift(&bath, &quad).map_err(|e| e.to_string())?;
    let sys = SystemParams::default()
        .resolve(shift)
        .map_err(|e| e.to_string())?;
    let w1 = BoltzmannWeights::for_case(InitialCondition::Correlated, &sys, bath.beta)
        .map_err(|e| e.to_string())?;
    let w2 = BoltzmannWeights::for_case(InitialCondition::Factorized, &sys, bath.beta)
        .map_err(|e| e.to_string())?;
    let phase = TwoTimePhase::for_bath(&bath, &quad);

    let a1 = amplitude_series_case1(&w1, sys.detuning, &cache);
    let a2 = amplitude_series_case2(&w2, sys.detuning, &cache);
    let mut worst = 0.0_f64;
    for k in 0..cache.len() {
        let r1 = reference::amplitude_case1(&w1, sys.detuning, &cache, k)
            .map_err(|e| e.to_string())?;
        let r2 = reference::amplitude_case2(&w2, sys.detuning, &cache, &phase, k)
            .map_err(|e| e.to_string())?;
        worst = worst.max((a1[k] - r1).norm() / r1.norm().max(1e-30));
        worst = worst.max((a2[k] - r2).norm() / r2.norm().max(1e-30));
    }
    if worst <= tol {
        Ok(format!("max rel deviation {worst:.2e} <= {tol:.2e}"))
    } else {
        Err(format!("max rel deviation {worst:.2e} > {tol:.2e}"))
    }
}

const CHECKS: [Check; 4] = [
    Check {
        name: "sine-kernel arctan identity",
        run: check_arctan_identity,
    },
    Check {
        name: "high-temperature xi closed form",
        run: check_high_temperature_xi,
    },
    Check {
        name: "zero-coupling coincidence",
        run: check_zero_coupling,
    },
    Check {
        name: "fast path vs reference",
        run: check_fast_vs_reference,
    },
];

/// Run every check, print one line each, and return the process exit code
/// (0 on success, 5 when any check fails).
pub fn run_selftest(tolerance_scale: f64) -> i32 {
    let mut failed = 0;
    for check in &CHECKS {
        match (check.run)(tolerance_scale) {
            Ok(detail) => println!("PASS {} ({detail})", check.name),
            Err(detail) => {
                println!("FAIL {} ({detail})", check.name);
                failed += 1;
            }
        }
    }
    if failed == 0 {
        println!("selftest: all {} checks passed", CHECKS.len());
        0
    } else {
        println!("selftest: {failed}/{} checks failed", CHECKS.len());
        5
    }
}
