//! Quadrature rules: Gauss-Legendre on an interval and a product rule on the
//! unit sphere (Gauss-Legendre in cos(theta) x uniform trapezoid in phi).

use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Nodes are computed in f64 by Newton iteration on the Legendre recurrence
/// and then lifted into `T`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (
        nodes.into_iter().map(T::of).collect(),
        weights.into_iter().map(T::of).collect(),
    )
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature rule on the unit sphere with `order` x `2 * order` points.
/// Weights sum to 4*pi; exact for spherical polynomials of degree
/// up to `2 * order - 1`.
pub struct SphereRule<T> {
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

pub fn sphere_rule<T: Real>(order: usize) -> SphereRule<T> {
    let (u_nodes, u_weights) = gauss_legendre::<T>(order);
    let n_phi = 2 * order;
    let w_phi = T::of(2.0) * T::PI() / T::of_usize(n_phi);
    let mut points = Vec::with_capacity(order * n_phi);
    let mut weights = Vec::with_capacity(order * n_phi);
    for (u, wu) in u_nodes.iter().zip(u_weights.iter()) {
        let s = (T::one() - *u * *u).max(T::zero()).sqrt();
        for j in 0..n_phi {
            let phi = T::of(2.0) * T::PI() * T::of_usize(j) / T::of_usize(n_phi);
            points.push([s * phi.cos(), s * phi.sin(), *u]);
            weights.push(*wu * w_phi);
        }
    }
    SphereRule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // int_{-1}^{1} x^6 dx = 2/7 needs n >= 4.
        let (x, w) = gauss_legendre::<f64>(4);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_rule_weights_sum_to_area() {
        let rule = sphere_rule::<f64>(8);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn sphere_rule_integrates_z_squared() {
        // int z^2 dA = 4*pi/3.
        let rule = sphere_rule::<f64>(6);
        let s: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p[2] * p[2])
            .sum();
        assert!((s - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let (x, w) = gauss_legendre::<f32>(3);
        let s: f32 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((s - 2.0 / 3.0).abs() < 1e-6);
    }
}
