//! Gamma-function machinery and the closed-form constants built from it.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// Stirling coefficients `B_{2j} / (2j (2j − 1))`.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

fn stirling(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let mut series = 0.0;
    for c in STIRLING.iter().rev() {
        series = series * r2 + c;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series * r
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("log_gamma", format!("argument must be positive and finite, got {x}")));
    }
    if x >= 12.0 {
        return Ok(stirling(x));
    }
    // Shift up to the asymptotic range: Γ(x) = Γ(x + n) / (x (x+1) ⋯ (x+n−1)).
    let mut prod = 1.0;
    let mut y = x;
    while y < 12.0 {
        prod *= y;
        y += 1.0;
    }
    Ok(stirling(y) - prod.ln())
}

pub fn gamma(x: f64) -> Result<f64> {
    if x > 171.6 {
        return Err(Error::domain("gamma", format!("Γ({x}) overflows")));
    }
    // Exact factorials keep small integer arguments bit-exact.
    if x.fract() == 0.0 && (1.0..=23.0).contains(&x) {
        return Ok((1..x as u64).map(|k| k as f64).product());
    }
    Ok(log_gamma(x)?.exp())
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok((log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?).exp())
}

fn admissible(m: usize, k: usize, s: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("constants", "horizontal dimension must be positive"));
    }
    if !s.is_finite() {
        return Err(Error::domain("constants", format!("s must be finite, got {s}")));
    }
    let _ = k;
    Ok(())
}

/// Constant of the fundamental solution of the conformal fractional
/// sub-Laplacian:
///
/// `C = 2^{m/2+2k−3s−1} Γ(½(m/2+1−s)) Γ(½(m/2+k−s)) / (π^{(m+k+1)/2} Γ(s))`.
pub fn fundamental_constant(m: usize, k: usize, s: f64) -> Result<f64> {
    admissible(m, k, s)?;
    let (mf, kf) = (m as f64, k as f64);
    let a1 = 0.5 * (mf / 2.0 + 1.0 - s);
    let a2 = 0.5 * (mf / 2.0 + kf - s);
    if !(s > 0.0) || a1 <= 0.0 || a2 <= 0.0 {
        return Err(Error::domain(
            "fundamental_constant",
            format!("Γ arguments must be positive (m={m}, k={k}, s={s})"),
        ));
    }
    let ln = (mf / 2.0 + 2.0 * kf - 3.0 * s - 1.0) * std::f64::consts::LN_2 + log_gamma(a1)?
        + log_gamma(a2)?
        - 0.5 * (mf + kf + 1.0) * PI.ln()
        - log_gamma(s)?;
    Ok(ln.exp())
}

/// Γ-ratio of the intertwining identity:
///
/// `Γ((m+2+2s)/4) Γ((m+2k+2s)/4) / [Γ((m+2−2s)/4) Γ((m+2k−2s)/4)]`.
pub fn intertwining_constant(m: usize, k: usize, s: f64) -> Result<f64> {
    admissible(m, k, s)?;
    if !(0.0..1.0).contains(&s) {
        return Err(Error::domain("intertwining_constant", format!("s must lie in [0, 1), got {s}")));
    }
    let (mf, kf) = (m as f64, k as f64);
    let args = [
        (mf + 2.0 + 2.0 * s) / 4.0,
        (mf + 2.0 * kf + 2.0 * s) / 4.0,
        (mf + 2.0 - 2.0 * s) / 4.0,
        (mf + 2.0 * kf - 2.0 * s) / 4.0,
    ];
    if args.iter().any(|&a| a <= 0.0) {
        return Err(Error::domain(
            "intertwining_constant",
            format!("Γ arguments must be positive (m={m}, k={k}, s={s})"),
        ));
    }
    let ln = log_gamma(args[0])? + log_gamma(args[1])? - log_gamma(args[2])? - log_gamma(args[3])?;
    Ok(ln.exp())
}

/// Riesz constant of the Euclidean fractional Laplacian,
/// `s 2^{2s+1} Γ((n+2s)/2) / (π^{n/2} Γ(1−s))`, with the normalization in
/// which `|x|^{−(n+2s)}` times it is the heat-semigroup kernel.
pub fn euclidean_riesz_constant(n: usize, s: f64) -> Result<f64> {
    if n == 0 || !(s > 0.0 && s < 1.0) {
        return Err(Error::domain("euclidean_riesz_constant", format!("need n ≥ 1, 0 < s < 1 (n={n}, s={s})")));
    }
    let nf = n as f64;
    let ln = s.ln() + (2.0 * s + 1.0) * std::f64::consts::LN_2 + log_gamma((nf + 2.0 * s) / 2.0)?
        - 0.5 * nf * PI.ln()
        - log_gamma(1.0 - s)?;
    Ok(ln.exp())
}

/// Surface area of the unit Euclidean sphere `S^{n−1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => return 0.0,
        1 => return 2.0,
        _ => {}
    }
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h).expect("positive argument")
}

/// Volume of the unit Euclidean ball in `ℝ^n`.
pub fn euclidean_ball_volume(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    sphere_area(n) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_basic_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
        let oracle = 4.5 * 3.5 * 2.5 * 1.5 * 0.5 * PI.sqrt();
        assert!(rel(gamma(5.5).unwrap(), oracle) < 1e-14);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn recurrence_across_the_shift_boundary() {
        for &x in &[0.01, 0.3, 1.7, 6.2, 11.5, 11.999, 12.0, 12.5, 40.25] {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + f64::ln(x);
            assert!((lhs - rhs).abs() < 2e-14 * (1.0 + lhs.abs()), "x={x}");
        }
    }

    #[test]
    fn constants_are_positive() {
        for &(m, k) in &[(2usize, 1usize), (4, 3)] {
            for i in 1..10 {
                let s = i as f64 / 10.0;
                assert!(fundamental_constant(m, k, s).unwrap() > 0.0);
                assert!(intertwining_constant(m, k, s).unwrap() > 0.0);
            }
        }
        assert!(fundamental_constant(2, 1, 1.0).unwrap().is_finite());
        assert!(fundamental_constant(2, 1, 0.0).is_err());
        assert!(intertwining_constant(2, 1, 1.0).is_err());
    }

    #[test]
    fn intertwining_limits_and_monotonicity() {
        // First-order behaviour: d/ds ln A at 0 is ψ((m+2)/4) + ψ((m+2k)/4) = 2ψ(1) for (2, 1).
        let euler_gamma = 0.577_215_664_901_532_9;
        let s = 1e-8;
        let a = intertwining_constant(2, 1, s).unwrap();
        assert!((a - 1.0).abs() < 1e-7);
        assert!(((a - 1.0) / s + 2.0 * euler_gamma).abs() < 1e-5, "{}", (a - 1.0) / s);
        assert_eq!(intertwining_constant(2, 1, 0.0).unwrap(), 1.0);
        // (2, 1): A = [Γ(1+s/2)/Γ(1−s/2)]², decreasing since ψ(1+s/2) + ψ(1−s/2) < 0 on (0, 1).
        let vals: Vec<f64> = (1..10).map(|i| intertwining_constant(2, 1, i as f64 / 10.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        let vals: Vec<f64> = (1..10).map(|i| intertwining_constant(4, 3, i as f64 / 10.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
    }

    /// Reference values from a 30-digit evaluation.
    #[test]
    fn high_precision_oracles() {
        assert!(rel(gamma(5.5).unwrap(), 52.342_777_784_553_520_181) < 1e-14);
        assert!(rel(fundamental_constant(2, 1, 0.5).unwrap(), 0.121_396_986_752_918_622_92) < 1e-13);
        assert!(rel(intertwining_constant(2, 1, 0.5).unwrap(), 0.547_109_903_806_619_159_71) < 1e-13);
        assert!(rel(intertwining_constant(4, 3, 0.5).unwrap(), 1.439_381_730_290_060_419_9) < 1e-13);
    }

    #[test]
    fn sphere_areas() {
        assert!(rel(sphere_area(2), 2.0 * PI) < 1e-15);
        assert!(rel(sphere_area(3), 4.0 * PI) < 4e-15);
        assert!(rel(euclidean_ball_volume(3), 4.0 * PI / 3.0) < 4e-15);
        assert_eq!(sphere_area(1), 2.0);
    }
}
