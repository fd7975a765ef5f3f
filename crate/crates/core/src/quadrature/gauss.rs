//! Gauss rules from the Golub–Welsch eigenvalue problem.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule to `f` on `[a, b]` for a rule defined on `[lo, hi]`.
    pub fn map_sum(&self, lo: f64, hi: f64, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let scale = (b - a) / (hi - lo);
        let mut acc = super::NeumaierSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(a + (x - lo) * scale));
        }
        acc.total() * scale
    }
}

fn log_gamma(x: f64) -> f64 {
    crate::special::log_gamma(x).expect("positive argument")
}

/// Jacobi weight `(1 − t)^α (1 + t)^β` on `[−1, 1]`.
fn jacobi_rule(n: usize, alpha: f64, beta: f64) -> GaussRule {
    assert!(n >= 1);
    assert!(alpha > -1.0 && beta > -1.0, "Jacobi exponents must exceed -1");
    let ab = alpha + beta;
    let mut t = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let jf = j as f64;
        let a = if j == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * jf + ab) * (2.0 * jf + ab + 2.0))
        };
        t[(j, j)] = a;
        if j + 1 < n {
            let k = jf + 1.0;
            let b2 = if j == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * k * (k + alpha) * (k + beta) * (k + ab)
                    / ((2.0 * k + ab).powi(2) * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0))
            };
            t[(j, j + 1)] = b2.sqrt();
            t[(j + 1, j)] = b2.sqrt();
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + log_gamma(alpha + 1.0) + log_gamma(beta + 1.0)
        - log_gamma(ab + 2.0))
        .exp();
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

type Cache = Mutex<HashMap<(usize, u64), Arc<GaussRule>>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(n: usize, beta: f64, build: impl FnOnce() -> GaussRule) -> Arc<GaussRule> {
    let key = (n, beta.to_bits());
    if let Some(r) = cache().lock().expect("rule cache").get(&key) {
        return r.clone();
    }
    let rule = Arc::new(build());
    cache()
        .lock()
        .expect("rule cache")
        .entry(key)
        .or_insert(rule)
        .clone()
}

/// Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    cached(n, f64::NAN, || {
        let mut r = jacobi_rule(n, 0.0, 0.0);
        // Symmetrize to remove eigen-solver asymmetry.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (r.nodes[j] - r.nodes[i]);
            let w = 0.5 * (r.weights[i] + r.weights[j]);
            r.nodes[i] = -x;
            r.nodes[j] = x;
            r.weights[i] = w;
            r.weights[j] = w;
        }
        if n % 2 == 1 {
            r.nodes[n / 2] = 0.0;
        }
        r
    })
}

/// Gauss rule on `[0, 1]` for the weight `x^β`, `β > −1`.
pub fn gauss_jacobi01(n: usize, beta: f64) -> Arc<GaussRule> {
    cached(n, beta, || {
        let r = jacobi_rule(n, 0.0, beta);
        let scale = 2f64.powf(-beta - 1.0);
        GaussRule {
            nodes: r.nodes.iter().map(|t| 0.5 * (1.0 + t)).collect(),
            weights: r.weights.iter().map(|w| w * scale).collect(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(10);
        for p in 0..20 {
            let num: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((num - exact).abs() < 1e-14, "p={p}: {num} vs {exact}");
        }
    }

    #[test]
    fn jacobi_moments() {
        for &beta in &[-0.99, -0.5, 0.0, 0.4, 2.0, 7.5] {
            let r = gauss_jacobi01(12, beta);
            for p in 0..24 {
                let num: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p)).sum();
                let exact = 1.0 / (p as f64 + beta + 1.0);
                assert!((num / exact - 1.0).abs() < 1e-12, "β={beta} p={p}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn nodes_inside_interval() {
        let r = gauss_jacobi01(40, -0.9);
        assert!(r.nodes.iter().all(|&x| x > 0.0 && x < 1.0));
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }
}
