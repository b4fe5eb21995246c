#![allow(dead_code)]

use lhsl_core::{find_all_modes, HybridLineSpec, ScanOptions};

/// Sorted mode frequencies of the default line.
pub fn mode_list(epsilon: f64, supercells: usize) -> (HybridLineSpec, Vec<f64>) {
    let spec = HybridLineSpec::with_defaults(epsilon, supercells).unwrap();
    let scan = find_all_modes(&spec, &ScanOptions::default()).unwrap();
    let mut freqs: Vec<f64> = scan.modes.iter().map(|m| m.omega).collect();
    freqs.sort_by(f64::total_cmp);
    (spec, freqs)
}

/// Reference renormalization: the whole sum is rebuilt from scratch at every
/// step, visiting modes from the highest frequency down.
pub fn brute_force_trace(freqs: &[f64], delta0: f64, g: f64, tol: f64, max_iter: usize) -> Vec<f64> {
    let g2 = g * g;
    let mut trace = vec![delta0];
    let mut prev = delta0;
    for _ in 0..max_iter {
        let mut sum = 0.0;
        for &w in freqs.iter().rev() {
            if w > prev {
                sum += g2 / (w * w);
            }
        }
        let next = delta0 * (-2.0 * sum).exp();
        trace.push(next);
        let done = (next - prev).abs() <= tol * delta0;
        prev = next;
        if done {
            break;
        }
    }
    trace
}

/// ∫_{lower}^∞ α₂/(ω²√(ω − ω₂)) dω by tanh-sinh quadrature after ω = ω₂ + t²
/// and t = t₀ + √ω₂·x/(1 − x).
pub fn band2_moment_quadrature(alpha2: f64, omega_2: f64, lower: f64) -> f64 {
    let t0 = (lower.max(omega_2) - omega_2).sqrt();
    let f = |x: f64| {
        if x >= 1.0 {
            return 0.0;
        }
        let a = omega_2.sqrt();
        let t = t0 + a * x / (1.0 - x);
        let dt = a / ((1.0 - x) * (1.0 - x));
        let w = omega_2 + t * t;
        2.0 * alpha2 / (w * w) * dt
    };
    quadrature::double_exponential::integrate(f, 0.0, 1.0, 1e-15).integral
}

/// g from Δ_eff = Δ₀·exp(−2g²·I(Δ_eff)) with I from [`band2_moment_quadrature`].
pub fn band2_inversion_quadrature(delta_eff: f64, delta0: f64, alpha2: f64, omega_2: f64) -> f64 {
    let moment = band2_moment_quadrature(alpha2, omega_2, delta_eff);
    ((delta0 / delta_eff).ln() / (2.0 * moment)).sqrt()
}

/// Composite Simpson rule with `n` panels.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Normalized overlap Σ|a||b| / √(Σ|a|² Σ|b|²).
pub fn overlap(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    ab / (aa * bb).sqrt()
}
