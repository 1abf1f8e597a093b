//! Closed-form entropies of round spheres and generalized cylinders.

use super::gauss_legendre;
use crate::error::{Error, Result};

/// Entropy of a hyperplane.
pub const FLAT_ENTROPY: f64 = 1.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos approximation, reflection below 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Area `ω_k = 2π^{(k+1)/2} / Γ((k+1)/2)` of the unit `k`-sphere.
pub fn unit_sphere_area(k: usize) -> f64 {
    let h = (k as f64 + 1.0) / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}

/// `λ(S^k) = ω_k (k / 2π)^{k/2} e^{−k/2}`, which is also the entropy of every
/// cylinder `S^k × R^m`.
pub fn stone_entropy(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::UnsupportedIndex("sphere index must be at least 1; use FLAT_ENTROPY for planes".into()));
    }
    let kf = k as f64;
    Ok(unit_sphere_area(k) * (kf / (2.0 * std::f64::consts::PI)).powf(kf / 2.0) * (-kf / 2.0).exp())
}

/// Gaussian functional at `(0, 1)` of the truncated shrinking cylinder
/// `S^k(√(2k)) × [−L, L]`, integrated by product Gauss–Legendre quadrature,
/// together with an upper bound on the discarded tail `|axis| > L`.
pub fn cylinder_product_check(k: usize, truncation_radius: f64) -> Result<(f64, f64)> {
    if !(k == 1 || k == 2) {
        return Err(Error::UnsupportedIndex(format!("cylinder check supports k = 1 or 2, got {k}")));
    }
    if !(truncation_radius > 0.0) {
        return Err(Error::InvalidArgument(format!("truncation radius must be positive, got {truncation_radius}")));
    }
    let pi = std::f64::consts::PI;
    let n = k + 1;
    let r = (2.0 * k as f64).sqrt();
    let (x, w) = gauss_legendre::<f64>(24);

    // sphere factor: ∫_{S^k(r)} e^{−|x|²/4}
    let sphere = if k == 1 {
        // arc-length parameter θ ∈ [0, 2π]
        let s: f64 = w.iter().map(|wi| wi * pi * r).sum();
        s * (-r * r / 4.0).exp()
    } else {
        // polar angle φ ∈ [0, π] with density sin φ, azimuth integrated exactly
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let phi = (xi + 1.0) * pi / 2.0;
            s += wi * (pi / 2.0) * phi.sin();
        }
        2.0 * pi * r * r * s * (-r * r / 4.0).exp()
    };

    // axial factor: composite rule on [−L, L]
    let l = truncation_radius;
    let panels = (4.0 * l).ceil().max(8.0) as usize;
    let h = 2.0 * l / panels as f64;
    let mut axial = 0.0;
    for p in 0..panels {
        let a = -l + h * p as f64;
        for (xi, wi) in x.iter().zip(&w) {
            let z = a + h * (xi + 1.0) / 2.0;
            axial += wi * h / 2.0 * (-z * z / 4.0).exp();
        }
    }

    let norm = (4.0 * pi).powf(-(n as f64) / 2.0);
    let value = norm * sphere * axial;
    // ∫_L^∞ e^{−z²/4} dz ≤ (2/L) e^{−L²/4}, on both ends
    let bound = norm * sphere * 2.0 * (2.0 / l) * (-l * l / 4.0).exp();
    Ok((value, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn gamma_known_values() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn circle_and_sphere() {
        assert!((stone_entropy(1).unwrap() - (2.0 * PI / E).sqrt()).abs() < 1e-12);
        assert!((stone_entropy(2).unwrap() - 4.0 / E).abs() < 1e-12);
        assert!(matches!(stone_entropy(0), Err(Error::UnsupportedIndex(_))));
    }

    #[test]
    fn three_sphere_by_angular_quadrature() {
        // S³(√6) ⊂ R⁴: area element r³ sin²ψ sin θ
        let r = 6f64.sqrt();
        let (x, w) = gauss_legendre::<f64>(30);
        let mut s = 0.0;
        for (xa, wa) in x.iter().zip(&w) {
            let psi = (xa + 1.0) * PI / 2.0;
            for (xb, wb) in x.iter().zip(&w) {
                let th = (xb + 1.0) * PI / 2.0;
                s += wa * wb * (PI / 2.0).powi(2) * psi.sin().powi(2) * th.sin();
            }
        }
        let area = 2.0 * PI * r.powi(3) * s;
        let f = (4.0 * PI).powf(-1.5) * area * (-r * r / 4.0).exp();
        assert!((f - stone_entropy(3).unwrap()).abs() < 1e-12);
        assert!((f - 1.453_115_374_318_719).abs() < 1e-12);
    }

    #[test]
    fn chain_decreasing() {
        let v: Vec<f64> = (1..=10).map(|k| stone_entropy(k).unwrap()).collect();
        assert!(v.windows(2).all(|p| p[0] > p[1]));
        assert!(v[9] > FLAT_ENTROPY);
    }

    #[test]
    fn cylinder_brackets() {
        for k in [1, 2] {
            let exact = stone_entropy(k).unwrap();
            let (v, b) = cylinder_product_check(k, 10.0).unwrap();
            assert!(v <= exact + 1e-13 && exact <= v + b + 1e-13);
            assert!((v - exact).abs() < 1e-6);
            let (_, b5) = cylinder_product_check(k, 5.0).unwrap();
            assert!(b < b5);
        }
        assert!(cylinder_product_check(3, 1.0).is_err());
    }
}
