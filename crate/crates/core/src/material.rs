//! Material constants, nondimensionalization and the bulk potential in
//! dimensional and reduced form.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::QTensor;

/// Dimensional material constants of the quartic bulk potential plus the
/// elastic constant and droplet radius.
#[derive(Debug, Clone, Copy)]
pub struct MaterialParams<T> {
    pub a2: T,
    pub b2: T,
    pub c2: T,
    pub l: T,
    pub r0: T,
}

impl<T: Real> MaterialParams<T> {
    pub fn new(a2: T, b2: T, c2: T, l: T, r0: T) -> Result<Self> {
        for (name, v) in [("a2", a2), ("b2", b2), ("c2", c2), ("L", l), ("R0", r0)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {}",
                    v.as_f64()
                )));
            }
        }
        Ok(Self { a2, b2, c2, l, r0 })
    }
}

/// Reduced (dimensionless) parameters.
///
/// In reduced units the biaxial correlation length is the unit of length and
/// the stationary uniaxial amplitude is 1, so a directly-constructed reduced
/// parameter set carries `xi_b = 1` and `s_plus = 1`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedParams<T> {
    /// Reduced temperature t = 27 a^2 c^2 / b^4.
    pub t: T,
    /// h_+ = (3 + sqrt(9 + 8t)) / 4.
    pub h_plus: T,
    /// Dimensional stationary amplitude s_+ = (b^2 + sqrt(b^4 + 24 a^2 c^2)) / (4 c^2).
    pub s_plus: T,
    /// Biaxial correlation length xi_b = sqrt(27 c^2 L / (t b^4)).
    pub xi_b: T,
    /// Additive bulk shift C(t) = 1/2 + h_+/t - h_+^2/(2t).
    pub c_t: T,
    /// Reduced droplet radius R_t = R0 / xi_b.
    pub r_t: T,
}

/// h_+ as a function of the reduced temperature.
pub fn h_plus_of_t<T: Real>(t: T) -> T {
    (T::of(3.0) + (T::of(9.0) + T::of(8.0) * t).sqrt()) / T::of(4.0)
}

/// Bulk shift C(t) making the reduced bulk density nonnegative with value 0
/// on the uniaxial minimizers.
pub fn c_of_t<T: Real>(t: T) -> T {
    let hp = h_plus_of_t(t);
    T::of(0.5) + hp / t - hp * hp / (T::of(2.0) * t)
}

impl<T: Real> ReducedParams<T> {
    /// Build directly from reduced temperature and reduced radius.
    pub fn from_t_r(t: T, r_t: T) -> Result<Self> {
        if !(t > T::zero()) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reduced temperature must be positive, got {}",
                t.as_f64()
            )));
        }
        if !(r_t > T::zero()) || !r_t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reduced radius must be positive, got {}",
                r_t.as_f64()
            )));
        }
        Ok(Self {
            t,
            h_plus: h_plus_of_t(t),
            s_plus: T::one(),
            xi_b: T::one(),
            c_t: c_of_t(t),
            r_t,
        })
    }

    /// 3 h_+ / t, the coefficient of the asymmetric bulk term.
    pub fn eps(&self) -> T {
        T::of(3.0) * self.h_plus / self.t
    }
}

/// Nondimensionalize a material parameter set.
pub fn reduce<T: Real>(p: &MaterialParams<T>) -> Result<ReducedParams<T>> {
    let b4 = p.b2 * p.b2;
    let t = T::of(27.0) * p.a2 * p.c2 / b4;
    let h_plus = h_plus_of_t(t);
    let s_plus = (p.b2 + (b4 + T::of(24.0) * p.a2 * p.c2).sqrt()) / (T::of(4.0) * p.c2);
    let xi_b = (T::of(27.0) * p.c2 * p.l / (t * b4)).sqrt();
    Ok(ReducedParams {
        t,
        h_plus,
        s_plus,
        xi_b,
        c_t: c_of_t(t),
        r_t: p.r0 / xi_b,
    })
}

/// Dimensional bulk density -(a^2/2) tr Q^2 - (b^2/3) tr Q^3 + (c^2/4) (tr Q^2)^2.
pub fn bulk_f_dimensional<T: Real>(q: &QTensor<T>, p: &MaterialParams<T>) -> T {
    let t2 = q.tr_q2();
    let t3 = q.tr_q3();
    -p.a2 / T::of(2.0) * t2 - p.b2 / T::of(3.0) * t3 + p.c2 / T::of(4.0) * t2 * t2
}

/// Reduced bulk density
/// -tr Q^2 / 2 - (sqrt(6) h_+/t) tr Q^3 + (h_+^2 / 2t) (tr Q^2)^2 + C(t),
/// nonnegative on all of S0.
pub fn bulk_f_reduced<T: Real>(q: &QTensor<T>, rp: &ReducedParams<T>) -> T {
    let t2 = q.tr_q2();
    let t3 = q.tr_q3();
    bulk_f_reduced_traces(t2, t3, rp)
}

/// Same density from precomputed invariants (hot loops).
#[inline]
pub fn bulk_f_reduced_traces<T: Real>(tr_q2: T, tr_q3: T, rp: &ReducedParams<T>) -> T {
    let hp = rp.h_plus;
    let t = rp.t;
    -tr_q2 / T::of(2.0) - T::of(6.0).sqrt() * hp / t * tr_q3
        + hp * hp / (T::of(2.0) * t) * tr_q2 * tr_q2
        + rp.c_t
}

/// Reduced bulk density along the prolate uniaxial ray with amplitude h >= 0:
/// -h^2/2 - (h_+/t) h^3 + (h_+^2/2t) h^4 + C(t).
pub fn bulk_f_uniaxial<T: Real>(h: T, rp: &ReducedParams<T>) -> Result<T> {
    if h < T::zero() {
        return Err(Error::Domain(format!(
            "uniaxial amplitude must be nonnegative, got {}",
            h.as_f64()
        )));
    }
    Ok(bulk_f_uniaxial_unchecked(h, rp))
}

#[inline]
pub(crate) fn bulk_f_uniaxial_unchecked<T: Real>(h: T, rp: &ReducedParams<T>) -> T {
    let hp = rp.h_plus;
    let t = rp.t;
    let h2 = h * h;
    -h2 / T::of(2.0) - hp / t * h2 * h + hp * hp / (T::of(2.0) * t) * h2 * h2 + rp.c_t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::tensor::{from_uniaxial, QTensor};

    fn unit_material() -> MaterialParams<f64> {
        MaterialParams::new(1.0, 1.0, 1.0, 1.0, 10.0).unwrap()
    }

    #[test]
    fn reduce_unit_material() {
        let rp = reduce(&unit_material()).unwrap();
        assert!((rp.t - 27.0).abs() < 1e-13);
        assert!((rp.h_plus - 4.5).abs() < 1e-13);
        assert!((rp.s_plus - 1.5).abs() < 1e-13);
        assert!((rp.r_t - 10.0 / rp.xi_b).abs() < 1e-12);
    }

    #[test]
    fn bulk_shift_from_formula() {
        // t = 27, h_+ = 4.5: C = 1/2 + 4.5/27 - 20.25/54 = 7/24.
        let rp = ReducedParams::from_t_r(27.0f64, 10.0).unwrap();
        assert!((rp.c_t - 7.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn h_plus_asymptotics() {
        let t = 1e8;
        let hp = h_plus_of_t(t);
        let limit = (t / 2.0f64).sqrt();
        assert!((hp - limit).abs() / limit < 1e-3);
    }

    #[test]
    fn h_plus_envelope_for_moderate_t() {
        // sigma_1/sqrt(t) <= h_+/t <= sigma_2/sqrt(t) with (0.5, 1) for t >= 9.
        for &t in &[9.0f64, 20.0, 100.0, 1e4, 1e8] {
            let ratio = h_plus_of_t(t) / t * t.sqrt();
            assert!(ratio >= 0.5 - 1e-12 && ratio <= 1.0 + 1e-12, "t = {t}");
        }
    }

    #[test]
    fn reduced_temperature_monotone_in_a2() {
        let mut prev = 0.0;
        for k in 1..20 {
            let p = MaterialParams::new(k as f64 * 0.3, 1.0, 1.0, 1.0, 10.0).unwrap();
            let t = reduce(&p).unwrap().t;
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(MaterialParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(MaterialParams::new(1.0, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ReducedParams::from_t_r(-2.0, 10.0).is_err());
    }

    #[test]
    fn dimensional_bulk_zero_tensor() {
        let p = unit_material();
        assert_eq!(bulk_f_dimensional(&QTensor::zero(), &p), 0.0);
    }

    #[test]
    fn dimensional_bulk_minimized_at_s_plus() {
        // 1-D scan oracle over the uniaxial ray s in [0, 3] with the
        // unnormalized form s (n(x)n - I/3).
        let p = unit_material();
        let rp = reduce(&p).unwrap();
        let f_of_s = |s: f64| {
            let t2 = 2.0 / 3.0 * s * s;
            let t3 = 2.0 / 9.0 * s * s * s;
            -p.a2 / 2.0 * t2 - p.b2 / 3.0 * t3 + p.c2 / 4.0 * t2 * t2
        };
        let mut best = (0.0, f_of_s(0.0));
        let n = 30_000;
        for i in 0..=n {
            let s = 3.0 * i as f64 / n as f64;
            let f = f_of_s(s);
            if f < best.1 {
                best = (s, f);
            }
        }
        assert!((best.0 - rp.s_plus).abs() < 3.0 / n as f64 * 2.0);
        // Derivative vanishes at s_plus.
        let d = 1e-6;
        let slope = (f_of_s(rp.s_plus + d) - f_of_s(rp.s_plus - d)) / (2.0 * d);
        assert!(slope.abs() < 1e-10 * (1.0 + best.1.abs()));
        // And the tensor evaluation agrees with the ray formula.
        let q = from_uniaxial(rp.s_plus * (2.0f64 / 3.0).sqrt(), [0.0, 0.0, 1.0]).unwrap();
        assert!((bulk_f_dimensional(&q, &p) - f_of_s(rp.s_plus)).abs() < 1e-12);
    }

    #[test]
    fn dimensional_bulk_homogeneous_in_coefficients() {
        let mut rng = SplitMix64::new(11);
        let p = unit_material();
        let doubled = MaterialParams::new(2.0, 2.0, 2.0, 1.0, 10.0).unwrap();
        for _ in 0..100 {
            let q = QTensor::from_coeffs([
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
            ]);
            let f1 = bulk_f_dimensional(&q, &p);
            let f2 = bulk_f_dimensional(&q, &doubled);
            assert!((f2 - 2.0 * f1).abs() < 1e-12 * (1.0 + f1.abs()));
        }
    }

    #[test]
    fn reduced_bulk_vanishes_on_unit_uniaxial() {
        let rp = ReducedParams::from_t_r(100.0, 50.0).unwrap();
        let mut rng = SplitMix64::new(12);
        for _ in 0..100 {
            let q = from_uniaxial(1.0, rng.next_unit_vector()).unwrap();
            assert!(bulk_f_reduced(&q, &rp).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_bulk_at_zero_is_c_t() {
        let rp = ReducedParams::from_t_r(100.0, 50.0).unwrap();
        assert_eq!(bulk_f_reduced(&QTensor::zero(), &rp), rp.c_t);
        assert_eq!(bulk_f_uniaxial(0.0, &rp).unwrap(), rp.c_t);
    }

    #[test]
    fn reduced_bulk_dominates_double_well() {
        // f(uniaxial h) >= (1 - h^2)^2 / 4 on [0, 1].
        let rp = ReducedParams::from_t_r(100.0, 50.0).unwrap();
        for i in 1..10 {
            let h = i as f64 / 10.0;
            let q = from_uniaxial(h, [0.0, 0.0, 1.0]).unwrap();
            let f = bulk_f_reduced(&q, &rp);
            assert!(f >= (1.0 - h * h).powi(2) / 4.0 - 1e-14);
        }
    }

    #[test]
    fn double_well_lower_bound_many_samples() {
        let mut rng = SplitMix64::new(13);
        for &t in &[10.0, 1e2, 1e4, 1e8] {
            let rp = ReducedParams::from_t_r(t, 50.0).unwrap();
            for _ in 0..100_000 {
                let h = rng.next_f64();
                let f = bulk_f_uniaxial(h, &rp).unwrap();
                assert!(f >= (1.0 - h * h).powi(2) / 4.0 - 1e-14, "t={t} h={h}");
            }
        }
    }

    #[test]
    fn reduced_bulk_nonnegative_on_ball() {
        let mut rng = SplitMix64::new(14);
        let rp = ReducedParams::from_t_r(10.0, 50.0).unwrap();
        for _ in 0..100_000 {
            let mut q = QTensor::from_coeffs([
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
            ]);
            // Rescale into |Q| <= 1.2.
            let target = 1.2 * rng.next_f64();
            let n = q.norm();
            if n > 1e-12 {
                q = q * (target / n);
            }
            assert!(bulk_f_reduced(&q, &rp) >= -1e-12);
        }
    }

    #[test]
    fn uniaxial_bulk_negative_amplitude_is_domain_error() {
        let rp = ReducedParams::from_t_r(100.0, 50.0).unwrap();
        assert!(bulk_f_uniaxial(-0.1, &rp).is_err());
    }

    #[test]
    fn uniaxial_bulk_consistent_with_tensor_form() {
        let rp = ReducedParams::from_t_r(100.0, 50.0).unwrap();
        for i in 0..=12 {
            let h = i as f64 / 10.0;
            let q = from_uniaxial(h, [0.0, 0.0, 1.0]).unwrap();
            let a = bulk_f_uniaxial(h, &rp).unwrap();
            let b = bulk_f_reduced(&q, &rp);
            assert!((a - b).abs() < 1e-12);
        }
        assert!(bulk_f_uniaxial(1.0, &rp).unwrap().abs() < 1e-15);
    }
}
