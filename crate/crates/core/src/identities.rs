//! Quadrature and closed-form verification of the integral identities the
//! analysis rests on: second and fourth sphere moments, the cancellation of
//! the quadratic-core surface integral for admissible coefficient tensors,
//! and the flux bookkeeping of the quotient field.

use crate::error::{Error, Result};
use crate::fields::{flux_phi, DividedByProfile, HedgehogField, TensorField};
use crate::material::ReducedParams;
use crate::profile::{interpolate_h, RadialProfile};
use crate::quad::sphere_rule;
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Rank-4 coefficient tensor B_{ij,ab} with the symmetries of a second
/// derivative of a Q-tensor field at a point: symmetric and traceless in
/// (i, j), symmetric and traceless in (a, b).
#[derive(Debug, Clone)]
pub struct BTensor<T> {
    pub b: [[[[T; 3]; 3]; 3]; 3],
}

impl<T: Real> BTensor<T> {
    pub fn zero() -> Self {
        Self {
            b: [[[[T::zero(); 3]; 3]; 3]; 3],
        }
    }

    /// Worst violation over the four constraint families.
    pub fn constraint_violation(&self) -> T {
        let b = &self.b;
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..3 {
                    for c in 0..3 {
                        worst = worst.max((b[i][j][a][c] - b[j][i][a][c]).abs());
                        worst = worst.max((b[i][j][a][c] - b[i][j][c][a]).abs());
                    }
                }
            }
        }
        for a in 0..3 {
            for c in 0..3 {
                let mut tr = T::zero();
                for i in 0..3 {
                    tr += b[i][i][a][c];
                }
                worst = worst.max(tr.abs());
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let mut tr = T::zero();
                for a in 0..3 {
                    tr += b[i][j][a][a];
                }
                worst = worst.max(tr.abs());
            }
        }
        worst
    }
}

/// Project an arbitrary rank-4 array onto the admissible symmetry class.
/// One symmetrization plus one trace removal per index pair suffices; the
/// sweep repeats (at most 3 times) and asserts the residual is at the
/// roundoff floor.
pub fn project_btensor<T: Real>(mut raw: [[[[T; 3]; 3]; 3]; 3]) -> BTensor<T> {
    for _ in 0..3 {
        raw = project_sweep(raw);
        let candidate = BTensor { b: raw };
        if candidate.constraint_violation() < T::of(1e-14) {
            return candidate;
        }
        raw = candidate.b;
    }
    let out = BTensor { b: raw };
    assert!(
        out.constraint_violation() < T::of(1e-14),
        "projection did not reach the constraint manifold"
    );
    out
}

fn project_sweep<T: Real>(b: [[[[T; 3]; 3]; 3]; 3]) -> [[[[T; 3]; 3]; 3]; 3] {
    let half = T::of(0.5);
    let third = T::one() / T::of(3.0);
    let mut s = [[[[T::zero(); 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for a in 0..3 {
                for c in 0..3 {
                    let sym_ij = (b[i][j][a][c] + b[j][i][a][c]) * half;
                    s[i][j][a][c] = sym_ij;
                }
            }
        }
    }
    let mut s2 = [[[[T::zero(); 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for a in 0..3 {
                for c in 0..3 {
                    s2[i][j][a][c] = (s[i][j][a][c] + s[i][j][c][a]) * half;
                }
            }
        }
    }
    // Remove the (i, j) trace, then the (a, b) trace; the second removal
    // cannot reintroduce the first because the double trace vanishes.
    let mut out = s2;
    for a in 0..3 {
        for c in 0..3 {
            let mut tr = T::zero();
            for i in 0..3 {
                tr += out[i][i][a][c];
            }
            for i in 0..3 {
                out[i][i][a][c] -= tr * third;
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let mut tr = T::zero();
            for a in 0..3 {
                tr += out[i][j][a][a];
            }
            for a in 0..3 {
                out[i][j][a][a] -= tr * third;
            }
        }
    }
    out
}

/// Random admissible tensor for a seed.
pub fn random_btensor<T: Real>(seed: u64) -> BTensor<T> {
    let mut rng = SplitMix64::new(seed);
    let mut raw = [[[[T::zero(); 3]; 3]; 3]; 3];
    for plane in &mut raw {
        for row in plane.iter_mut() {
            for pair in row.iter_mut() {
                for v in pair.iter_mut() {
                    *v = T::of(rng.next_symmetric());
                }
            }
        }
    }
    project_btensor(raw)
}

/// Quadrature of the second moments x_q x_s over the unit sphere.
pub fn sphere_moment2<T: Real>(order: usize) -> [[T; 3]; 3] {
    let rule = sphere_rule::<T>(order.max(1));
    let mut m = [[T::zero(); 3]; 3];
    for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
        for q in 0..3 {
            for s in 0..3 {
                m[q][s] += *w * p[q] * p[s];
            }
        }
    }
    m
}

/// Quadrature of the fourth moments x_p x_q x_r x_s over the unit sphere.
pub fn sphere_moment4<T: Real>(order: usize) -> [[[[T; 3]; 3]; 3]; 3] {
    let rule = sphere_rule::<T>(order.max(1));
    let mut m = [[[[T::zero(); 3]; 3]; 3]; 3];
    for (x, w) in rule.points.iter().zip(rule.weights.iter()) {
        for p in 0..3 {
            for q in 0..3 {
                for r in 0..3 {
                    for s in 0..3 {
                        m[p][q][r][s] += *w * x[p] * x[q] * x[r] * x[s];
                    }
                }
            }
        }
    }
    m
}

/// Both evaluations of the core surface integral
/// int_{|x|=1} |grad(B x x / |x|^2)|^2 / 2 - 3 |B x x|^2 dA:
/// spherical quadrature with the analytic gradient, and the closed form
/// (4 pi/3)(2 B:B - B_{ijpp} B_{ijss} - 2 B_{ijqr} B_{ijrq}), which vanishes
/// on the admissible class.
#[derive(Debug, Clone, Copy)]
pub struct CoreSurfaceIntegral<T> {
    pub quadrature: T,
    pub closed_form: T,
}

pub fn core_surface_integral<T: Real>(b: &BTensor<T>, order: usize) -> Result<CoreSurfaceIntegral<T>> {
    if b.constraint_violation() >= T::of(1e-12) {
        return Err(Error::InvalidParameter(
            "coefficient tensor violates its symmetry constraints".into(),
        ));
    }
    Ok(CoreSurfaceIntegral {
        quadrature: core_surface_quadrature_raw(&b.b, order),
        closed_form: core_surface_closed_form_raw(&b.b),
    })
}

/// Quadrature half of the identity without the admissibility check (used to
/// show the identity genuinely needs the trace constraints).
pub fn core_surface_quadrature_raw<T: Real>(b: &[[[[T; 3]; 3]; 3]; 3], order: usize) -> T {
    let rule = sphere_rule::<T>(order.max(6));
    let mut total = T::zero();
    for (x, w) in rule.points.iter().zip(rule.weights.iter()) {
        let mut m = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for a in 0..3 {
                    for c in 0..3 {
                        s += b[i][j][a][c] * x[a] * x[c];
                    }
                }
                m[i][j] = s;
            }
        }
        let mut grad_sq = T::zero();
        let mut m_sq = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                m_sq += m[i][j] * m[i][j];
                for g in 0..3 {
                    // d/dx_g of B x x / |x|^2 restricted to |x| = 1.
                    let mut d = -T::of(2.0) * m[i][j] * x[g];
                    for a in 0..3 {
                        d += (b[i][j][g][a] + b[i][j][a][g]) * x[a];
                    }
                    grad_sq += d * d;
                }
            }
        }
        total += *w * (grad_sq / T::of(2.0) - T::of(3.0) * m_sq);
    }
    total
}

pub fn core_surface_closed_form_raw<T: Real>(b: &[[[[T; 3]; 3]; 3]; 3]) -> T {
    let mut b_dot_b = T::zero();
    let mut trace_sq = T::zero();
    let mut swap = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let mut tr = T::zero();
            for a in 0..3 {
                tr += b[i][j][a][a];
            }
            trace_sq += tr * tr;
            for a in 0..3 {
                for c in 0..3 {
                    b_dot_b += b[i][j][a][c] * b[i][j][a][c];
                    swap += b[i][j][a][c] * b[i][j][c][a];
                }
            }
        }
    }
    T::of(4.0) * T::PI() / T::of(3.0)
        * (T::of(2.0) * b_dot_b - trace_sq - T::of(2.0) * swap)
}

/// Integrate both sides of the radial balance over the annulus
/// delta <= |x| <= outer for the hedgehog quotient field: the left side is
/// the flux difference through the two spheres, the right side the volume
/// integral of the balance density. For the hedgehog every density term
/// vanishes pointwise (|S| = 1, dS/dr = 0), so both sides are zero.
pub fn pohozaev_balance<T: Real>(
    p: &RadialProfile<T>,
    rp: &ReducedParams<T>,
    delta: T,
    outer: T,
) -> Result<(T, T)> {
    if !(delta > T::zero()) || delta >= outer || outer > p.radius {
        return Err(Error::Domain(format!(
            "annulus [{}, {}] invalid for domain radius {}",
            delta.as_f64(),
            outer.as_f64(),
            p.radius.as_f64()
        )));
    }
    let s_field = DividedByProfile::new(HedgehogField::new(p), p);
    let order = 16;
    let lhs = flux_phi(&s_field, p, outer, order)?.flux - flux_phi(&s_field, p, delta, order)?.flux;

    let eps = rp.eps();
    let rule = sphere_rule::<T>(12);
    let n_r = 160usize;
    let dr = (outer - delta) / T::of_usize(n_r);
    let gauss = dr / (T::of(2.0) * T::of(3.0).sqrt());
    let mut rhs = T::zero();
    for i in 0..n_r {
        let mid = delta + (T::of_usize(i) + T::of(0.5)) * dr;
        for sign in [-T::one(), T::one()] {
            let r = mid + sign * gauss;
            let (h, dh) = interpolate_h(p, r)?;
            let mut shell = T::zero();
            for (point, w) in rule.points.iter().zip(rule.weights.iter()) {
                let x = [point[0] * r, point[1] * r, point[2] * r];
                let s = s_field.value(x)?;
                let grad = s_field.gradient(x)?;
                let radial = grad[0] * point[0] + grad[1] * point[1] + grad[2] * point[2];
                let radial_sq = radial.norm_sq();
                let one_minus_s2 = T::one() - s.norm_sq();
                let s_norm = s.norm();
                // S_ij S_ij,k x^_k = (d|S|^2/dr)/2.
                let s_dot_radial = s.dot(&radial);
                let density = radial_sq / r
                    + (T::one() + eps) * one_minus_s2 * one_minus_s2 / T::of(4.0)
                        * (T::of(2.0) * h * dh + T::of(2.0) * h * h / r)
                    + T::of(2.0) * dh / h * radial_sq
                    - eps * h * (T::one() - s_norm) * s_dot_radial;
                shell += *w * density;
            }
            rhs += dr / T::of(2.0) * r * r * shell;
        }
    }
    Ok((lhs, rhs))
}

/// One named identity check for the verification report.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            pass: value.abs() <= tolerance,
        }
    }
}

/// Run the full identity suite against a solved profile.
pub fn verification_suite<T: Real>(
    p: &RadialProfile<T>,
    rp: &ReducedParams<T>,
    seed: u64,
    order: usize,
    n_tensors: usize,
) -> Result<Vec<IdentityCheck>> {
    if order < 6 {
        return Err(Error::InvalidParameter(format!(
            "verification quadrature order must be at least 6, got {order}"
        )));
    }
    let mut checks = Vec::new();
    let four_pi_3 = 4.0 * std::f64::consts::PI / 3.0;

    let m2 = sphere_moment2::<T>(order);
    let mut worst = 0.0f64;
    for q in 0..3 {
        for s in 0..3 {
            let expect = if q == s { four_pi_3 } else { 0.0 };
            worst = worst.max((m2[q][s].as_f64() - expect).abs());
        }
    }
    checks.push(IdentityCheck::new("sphere_moment2", worst, 1e-12));

    let m4 = sphere_moment4::<T>(order);
    let coef = 4.0 * std::f64::consts::PI / 15.0;
    let mut worst = 0.0f64;
    for p_ix in 0..3 {
        for q in 0..3 {
            for r in 0..3 {
                for s in 0..3 {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let expect = coef
                        * (d(p_ix, q) * d(r, s) + d(p_ix, r) * d(q, s) + d(p_ix, s) * d(q, r));
                    worst = worst.max((m4[p_ix][q][r][s].as_f64() - expect).abs());
                }
            }
        }
    }
    checks.push(IdentityCheck::new("sphere_moment4", worst, 1e-12));

    let mut worst_quad = 0.0f64;
    let mut worst_gap = 0.0f64;
    for k in 0..n_tensors {
        let b = random_btensor::<T>(seed.wrapping_add(k as u64));
        let v = core_surface_integral(&b, order)?;
        worst_quad = worst_quad.max(v.quadrature.as_f64().abs());
        worst_gap = worst_gap.max((v.quadrature - v.closed_form).as_f64().abs());
    }
    checks.push(IdentityCheck::new("core_surface_integral", worst_quad, 1e-10));
    checks.push(IdentityCheck::new(
        "core_surface_closed_form_agreement",
        worst_gap,
        1e-9,
    ));

    let twelve_pi = 12.0 * std::f64::consts::PI;
    let s_field = DividedByProfile::new(HedgehogField::new(p), p);
    let mut worst = 0.0f64;
    for delta in [0.05, 0.5, 5.0] {
        let d = flux_phi(&s_field, p, T::of(delta), order.max(16))?;
        worst = worst.max((d.flux.as_f64() - twelve_pi).abs());
    }
    checks.push(IdentityCheck::new("hedgehog_flux_12pi", worst, 1e-6));

    let (lhs, rhs) = pohozaev_balance(p, rp, T::of(0.5), T::of(10.0).min(p.radius))?;
    checks.push(IdentityCheck::new(
        "radial_balance_annulus",
        lhs.as_f64().abs().max(rhs.as_f64().abs()),
        1e-8,
    ));

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::solve_profile;
    use crate::tensor::{uniaxial_unchecked, QTensor};

    #[test]
    fn random_tensors_satisfy_constraints() {
        for seed in 0..50 {
            let b = random_btensor::<f64>(seed);
            assert!(b.constraint_violation() < 1e-14);
        }
    }

    #[test]
    fn projection_is_idempotent_and_zero_maps_to_zero() {
        let b = random_btensor::<f64>(7);
        let again = project_btensor(b.b);
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..3 {
                    for c in 0..3 {
                        assert!((b.b[i][j][a][c] - again.b[i][j][a][c]).abs() < 1e-15);
                    }
                }
            }
        }
        let z = project_btensor([[[[0.0f64; 3]; 3]; 3]; 3]);
        assert_eq!(z.constraint_violation(), 0.0);
        assert_eq!(core_surface_closed_form_raw(&z.b), 0.0);
        assert_eq!(core_surface_quadrature_raw(&z.b, 8), 0.0);
    }

    #[test]
    fn second_moments_match_the_closed_form() {
        let m = sphere_moment2::<f64>(12);
        let c = 4.0 * std::f64::consts::PI / 3.0;
        for q in 0..3 {
            for s in 0..3 {
                let expect = if q == s { c } else { 0.0 };
                assert!((m[q][s] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fourth_moments_match_the_closed_form() {
        let m = sphere_moment4::<f64>(12);
        let c = 4.0 * std::f64::consts::PI / 15.0;
        assert!((m[0][0][1][1] - c).abs() < 1e-12);
        assert!((m[0][0][0][0] - 3.0 * c).abs() < 1e-12);
        assert!((m[2][2][2][2] - 3.0 * c).abs() < 1e-12);
        assert!(m[0][1][2][0].abs() < 1e-12);
    }

    #[test]
    fn admissible_tensors_have_vanishing_core_integral() {
        for seed in 0..100 {
            let b = random_btensor::<f64>(seed);
            let v = core_surface_integral(&b, 24).unwrap();
            assert!(v.quadrature.abs() < 1e-10, "seed {seed}: {}", v.quadrature);
            assert!(v.closed_form.abs() < 1e-12);
            assert!((v.quadrature - v.closed_form).abs() < 1e-9);
        }
    }

    #[test]
    fn dropping_the_trace_constraint_breaks_the_identity() {
        // Keep both symmetrizations but skip the trace removals.
        let mut rng = crate::rng::SplitMix64::new(99);
        let mut raw = [[[[0.0f64; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                for a in 0..3 {
                    for c in a..3 {
                        let v = rng.next_symmetric();
                        raw[i][j][a][c] = v;
                        raw[j][i][a][c] = v;
                        raw[i][j][c][a] = v;
                        raw[j][i][c][a] = v;
                    }
                }
            }
        }
        let quad = core_surface_quadrature_raw(&raw, 24);
        let closed = core_surface_closed_form_raw(&raw);
        assert!(quad.abs() > 1e-3, "quadrature {quad}");
        // The closed form still matches the quadrature (the derivation only
        // needs the symmetries), so the oracle pins the nonzero value.
        assert!((quad - closed).abs() < 1e-9);
        // An invariant-violating tensor is rejected by the checked API.
        let b = BTensor { b: raw };
        assert!(core_surface_integral(&b, 24).is_err());
    }

    #[test]
    fn moment_quadrature_is_spectrally_exact() {
        // Already exact at low order for polynomial integrands; order 12 is
        // far below 1e-12 error.
        let m_lo = sphere_moment4::<f64>(6);
        let m_hi = sphere_moment4::<f64>(12);
        for p in 0..3 {
            for q in 0..3 {
                for r in 0..3 {
                    for s in 0..3 {
                        assert!((m_lo[p][q][r][s] - m_hi[p][q][r][s]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn hedgehog_balance_is_zero_equals_zero() {
        let p: crate::profile::RadialProfile<f64> = solve_profile(100.0, 50.0, 1200).unwrap();
        let rp = ReducedParams::from_t_r(100.0, 50.0).unwrap();
        let (lhs, rhs) = pohozaev_balance(&p, &rp, 0.5, 10.0).unwrap();
        assert!(lhs.abs() < 1e-8, "lhs {lhs}");
        assert!(rhs.abs() < 1e-8, "rhs {rhs}");
        // The flux at each radius individually is 12 pi.
        let s = DividedByProfile::new(HedgehogField::new(&p), &p);
        let twelve_pi = 12.0 * std::f64::consts::PI;
        for &d in &[0.5, 10.0] {
            let f = flux_phi(&s, &p, d, 16).unwrap();
            assert!((f.flux - twelve_pi).abs() < 1e-8);
        }
    }

    #[test]
    fn flux_is_radius_independent_for_hedgehog() {
        let p: crate::profile::RadialProfile<f64> = solve_profile(100.0, 50.0, 1200).unwrap();
        let s = DividedByProfile::new(HedgehogField::new(&p), &p);
        let reference = flux_phi(&s, &p, 0.05, 16).unwrap().flux;
        for &d in &[0.1, 1.0, 5.0, 25.0] {
            let f = flux_phi(&s, &p, d, 16).unwrap().flux;
            assert!((f - reference).abs() < 1e-8);
        }
    }

    /// Radially rescaled quotient field f(r) sqrt(3/2)(m m - I/3) with
    /// f = 1 - 0.01 exp(-r); analytic value and gradient.
    struct ScaledRadialUniaxial;

    impl ScaledRadialUniaxial {
        fn f(r: f64) -> f64 {
            1.0 - 0.01 * (-r).exp()
        }
        fn df(r: f64) -> f64 {
            0.01 * (-r).exp()
        }
    }

    impl TensorField<f64> for ScaledRadialUniaxial {
        fn value(&self, x: [f64; 3]) -> crate::error::Result<QTensor<f64>> {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let m = [x[0] / r, x[1] / r, x[2] / r];
            Ok(uniaxial_unchecked(Self::f(r), m))
        }
        fn gradient(&self, x: [f64; 3]) -> crate::error::Result<[QTensor<f64>; 3]> {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let m = [x[0] / r, x[1] / r, x[2] / r];
            let base = crate::fields::HarmonicMapField.gradient(x)?;
            let radial = uniaxial_unchecked(Self::df(r), m);
            Ok(std::array::from_fn(|k| {
                base[k] * Self::f(r) + radial * m[k]
            }))
        }
    }

    #[test]
    fn divergence_theorem_plumbing_on_synthetic_field() {
        // For S = f(r) M the flux vector is radial with magnitude
        // phi(r) = -f'^2/2 + 3/r^2 + (1 + eps) h^2 (1 - f^2)^2 / 4,
        // so the flux difference must match the volume integral of
        // (1/r^2) d(r^2 phi)/dr.
        let p = solve_profile(100.0, 50.0, 2000).unwrap();
        let eps = 3.0 * crate::material::h_plus_of_t(100.0) / 100.0;
        let field = ScaledRadialUniaxial;
        let (delta, outer) = (1.0, 10.0);
        let lhs = flux_phi(&field, &p, outer, 24).unwrap().flux
            - flux_phi(&field, &p, delta, 24).unwrap().flux;

        // h'' from the profile equation itself.
        let rhs_quadrature = {
            let n = 4000;
            let dr = (outer - delta) / n as f64;
            let gauss = dr / (2.0 * 3.0f64.sqrt());
            let mut total = 0.0;
            for i in 0..n {
                let mid = delta + (i as f64 + 0.5) * dr;
                for s in [-1.0, 1.0] {
                    let r = mid + s * gauss;
                    let (h, dh) = interpolate_h(&p, r).unwrap();
                    let f = ScaledRadialUniaxial::f(r);
                    let df = ScaledRadialUniaxial::df(r);
                    let ddf = -0.01 * (-r).exp();
                    let phi = -0.5 * df * df + 3.0 / (r * r)
                        + (1.0 + eps) * h * h * (1.0 - f * f).powi(2) / 4.0;
                    let dphi = -df * ddf - 6.0 / (r * r * r)
                        + (1.0 + eps) / 4.0
                            * (2.0 * h * dh * (1.0 - f * f).powi(2)
                                - 4.0 * h * h * (1.0 - f * f) * f * df);
                    let div = dphi + 2.0 * phi / r;
                    total += dr / 2.0 * 4.0 * std::f64::consts::PI * r * r * div;
                }
            }
            total
        };
        let rel = (lhs - rhs_quadrature).abs() / lhs.abs().max(1.0);
        assert!(rel < 1e-4, "lhs {lhs} rhs {rhs_quadrature}");
    }

    #[test]
    fn verification_suite_passes_for_all_seeds() {
        let p: crate::profile::RadialProfile<f64> = solve_profile(100.0, 50.0, 1200).unwrap();
        let rp = ReducedParams::from_t_r(100.0, 50.0).unwrap();
        let checks = verification_suite(&p, &rp, 0, 16, 20).unwrap();
        for c in &checks {
            assert!(c.pass, "{} value {} tol {}", c.name, c.value, c.tolerance);
        }
        assert!(verification_suite(&p, &rp, 0, 4, 5).is_err());
    }
}
