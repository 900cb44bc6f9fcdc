//! Algebra of symmetric traceless 3x3 tensors (the Q-tensor order parameter).
//!
//! Tensors are stored as five coefficients in the orthonormal basis
//!
//! ```text
//! E1 = (x(x)x - y(x)y)/sqrt(2)        E2 = (2 z(x)z - x(x)x - y(x)y)/sqrt(6)
//! E3 = (x(x)y + y(x)x)/sqrt(2)        E4 = (x(x)z + z(x)x)/sqrt(2)
//! E5 = (y(x)z + z(x)y)/sqrt(2)
//! ```
//!
//! orthonormal under the Frobenius inner product A_ij B_ij, so
//! |Q|^2 = sum c_i^2 and coefficient sums of derivative tensors equal the
//! corresponding index sums of the reconstructed matrices.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

pub mod vec3 {
    use super::Vec3;
    use crate::scalar::Real;

    pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn norm<T: Real>(a: Vec3<T>) -> T {
        dot(a, a).sqrt()
    }

    pub fn scale<T: Real>(a: Vec3<T>, s: T) -> Vec3<T> {
        [a[0] * s, a[1] * s, a[2] * s]
    }

    pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    pub fn normalize<T: Real>(a: Vec3<T>) -> Vec3<T> {
        let n = norm(a);
        [a[0] / n, a[1] / n, a[2] / n]
    }
}

pub mod mat3 {
    use super::{Mat3, Vec3};
    use crate::scalar::Real;

    pub fn zero<T: Real>() -> Mat3<T> {
        [[T::zero(); 3]; 3]
    }

    pub fn mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
        let mut out = zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s += a[i][k] * b[k][j];
                }
                out[i][j] = s;
            }
        }
        out
    }

    pub fn mul_vec<T: Real>(a: &Mat3<T>, v: Vec3<T>) -> Vec3<T> {
        let mut out = [T::zero(); 3];
        for (i, row) in a.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    pub fn transpose<T: Real>(a: &Mat3<T>) -> Mat3<T> {
        let mut out = zero();
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = a[j][i];
            }
        }
        out
    }

    pub fn trace<T: Real>(a: &Mat3<T>) -> T {
        a[0][0] + a[1][1] + a[2][2]
    }
}

const SQRT2: f64 = std::f64::consts::SQRT_2;
const SQRT6: f64 = 2.449489742783178;

/// Symmetric traceless 3x3 tensor stored as five basis coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QTensor<T> {
    c: [T; 5],
}

impl<T: Real> QTensor<T> {
    pub fn zero() -> Self {
        Self { c: [T::zero(); 5] }
    }

    pub fn from_coeffs(c: [T; 5]) -> Self {
        Self { c }
    }

    pub fn coeffs(&self) -> [T; 5] {
        self.c
    }

    /// Reconstruct the matrix. Symmetric and traceless by construction.
    pub fn to_matrix(&self) -> Mat3<T> {
        let s2 = T::of(SQRT2);
        let s6 = T::of(SQRT6);
        let [c1, c2, c3, c4, c5] = self.c;
        let m11 = c1 / s2 - c2 / s6;
        let m22 = -c1 / s2 - c2 / s6;
        let m33 = T::of(2.0) * c2 / s6;
        let m12 = c3 / s2;
        let m13 = c4 / s2;
        let m23 = c5 / s2;
        [[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]]
    }

    /// Extract coefficients from a symmetric traceless matrix.
    /// The caller guarantees symmetry; the traceless part is projected out
    /// so that feeding e.g. Q^2 (traceful) still lands in S0.
    pub fn from_sym_matrix(m: &Mat3<T>) -> Self {
        let s2 = T::of(SQRT2);
        let s6 = T::of(SQRT6);
        let tr3 = mat3::trace(m) / T::of(3.0);
        let m11 = m[0][0] - tr3;
        let m22 = m[1][1] - tr3;
        let m33 = m[2][2] - tr3;
        Self {
            c: [
                (m11 - m22) / s2,
                m33 * s6 / T::of(2.0),
                m[0][1] * s2,
                m[0][2] * s2,
                m[1][2] * s2,
            ],
        }
    }

    /// |Q|^2 = Q_ij Q_ij.
    pub fn norm_sq(&self) -> T {
        let [c1, c2, c3, c4, c5] = self.c;
        c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4 + c5 * c5
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// tr Q^2, identical to `norm_sq` for symmetric tensors.
    pub fn tr_q2(&self) -> T {
        self.norm_sq()
    }

    /// tr Q^3 = Q_ij Q_jp Q_pi.
    pub fn tr_q3(&self) -> T {
        let m = self.to_matrix();
        let m2 = mat3::mul(&m, &m);
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s += m2[i][j] * m[j][i];
            }
        }
        s
    }

    /// Frobenius contraction Q_ij P_ij.
    pub fn dot(&self, other: &Self) -> T {
        let mut s = T::zero();
        for i in 0..5 {
            s += self.c[i] * other.c[i];
        }
        s
    }

    /// The traceless part of Q^2, i.e. Q^2 - (|Q|^2/3) I.
    pub fn squared_traceless(&self) -> Self {
        let m = self.to_matrix();
        let m2 = mat3::mul(&m, &m);
        Self::from_sym_matrix(&m2)
    }

    /// Conjugate by a rotation: R Q R^T.
    pub fn rotate(&self, r: &Mat3<T>) -> Self {
        let m = self.to_matrix();
        let rm = mat3::mul(r, &m);
        let rmrt = mat3::mul(&rm, &mat3::transpose(r));
        Self::from_sym_matrix(&rmrt)
    }

    /// Degree of biaxiality beta = 1 - 6 (tr Q^3)^2 / |Q|^6, clamped to
    /// [0, 1]; beta(0) is defined as 0.
    pub fn biaxiality(&self) -> T {
        let n2 = self.norm_sq();
        if n2 < T::of(1e-30) {
            return T::zero();
        }
        let t3 = self.tr_q3();
        let beta = T::one() - T::of(6.0) * t3 * t3 / (n2 * n2 * n2);
        beta.max(T::zero()).min(T::one())
    }

    /// Eigen-decomposition with eigenvalues sorted in descending order.
    pub fn eigen(&self) -> EigenFrame<T> {
        eigen_sym_traceless(self)
    }
}

/// Uniaxial tensor sqrt(3/2) * s * (n(x)n - I/3); |result| = |s|.
pub fn from_uniaxial<T: Real>(s: T, n: Vec3<T>) -> Result<QTensor<T>> {
    let tol = T::of(1e-12).max(T::epsilon() * T::of(16.0));
    let len = vec3::norm(n);
    if (len - T::one()).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "director must be a unit vector, |n| = {}",
            len.as_f64()
        )));
    }
    Ok(uniaxial_unchecked(s, n))
}

/// Same as [`from_uniaxial`] without the unit-norm check; for internal use
/// where `n` is normalized by construction.
pub(crate) fn uniaxial_unchecked<T: Real>(s: T, n: Vec3<T>) -> QTensor<T> {
    let amp = T::of(1.5).sqrt() * s;
    let third = T::one() / T::of(3.0);
    let mut m = mat3::zero();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = amp * (n[i] * n[j] - if i == j { third } else { T::zero() });
        }
    }
    QTensor::from_sym_matrix(&m)
}

/// Eigen-decomposition of a symmetric traceless tensor.
#[derive(Debug, Clone)]
pub struct EigenFrame<T> {
    /// Eigenvalues, descending; they sum to zero.
    pub eigenvalues: [T; 3],
    /// Orthonormal eigenvectors, `eigenvectors[k]` pairs with `eigenvalues[k]`.
    pub eigenvectors: [Vec3<T>; 3],
}

impl<T: Real> EigenFrame<T> {
    /// Max-norm error of sum_k lambda_k v_k (x) v_k against `q`.
    pub fn reconstruction_error(&self, q: &QTensor<T>) -> T {
        let m = q.to_matrix();
        let mut err = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s += self.eigenvalues[k] * self.eigenvectors[k][i] * self.eigenvectors[k][j];
                }
                err = err.max((s - m[i][j]).abs());
            }
        }
        err
    }
}

fn eigen_sym_traceless<T: Real>(q: &QTensor<T>) -> EigenFrame<T> {
    let scale = q.norm();
    if scale < T::of(1e-300) {
        return EigenFrame {
            eigenvalues: [T::zero(); 3],
            eigenvectors: identity_frame(),
        };
    }
    let m = q.to_matrix();
    if let Some(frame) = closed_form_eigen(&m, scale) {
        let tol = T::of(1e-11).max(T::epsilon() * T::of(1e4)) * T::one().max(scale);
        if frame.reconstruction_error(q) < tol {
            return frame;
        }
    }
    jacobi_eigen(&m)
}

fn identity_frame<T: Real>() -> [Vec3<T>; 3] {
    [
        [T::one(), T::zero(), T::zero()],
        [T::zero(), T::one(), T::zero()],
        [T::zero(), T::zero(), T::one()],
    ]
}

/// Trigonometric solution of the characteristic cubic for a traceless
/// symmetric matrix, with eigenvectors from cross products of the shifted
/// matrix columns.
fn closed_form_eigen<T: Real>(m: &Mat3<T>, scale: T) -> Option<EigenFrame<T>> {
    // For tr M = 0 the invariants reduce to p2 = |M|^2, det via direct 3x3.
    let norm2 = {
        let mut s = T::zero();
        for row in m {
            for v in row {
                s += *v * *v;
            }
        }
        s
    };
    let p = (norm2 / T::of(6.0)).sqrt();
    if p < T::of(1e-14) * scale.max(T::one()) {
        return None;
    }
    let b = [
        [m[0][0] / p, m[0][1] / p, m[0][2] / p],
        [m[1][0] / p, m[1][1] / p, m[1][2] / p],
        [m[2][0] / p, m[2][1] / p, m[2][2] / p],
    ];
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / T::of(2.0)).max(-T::one()).min(T::one());
    let phi = r.acos() / T::of(3.0);
    let two_pi_3 = T::of(2.0) * T::PI() / T::of(3.0);
    let l1 = T::of(2.0) * p * phi.cos();
    let l3 = T::of(2.0) * p * (phi + two_pi_3).cos();
    let l2 = -l1 - l3;
    let mut lam = [l1, l2, l3];
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let v0 = eigenvector_for(m, lam[0])?;
    let v2 = eigenvector_for(m, lam[2])?;
    // Re-orthogonalize the pair, middle vector from the cross product.
    let v2 = {
        let d = vec3::dot(v0, v2);
        let w = vec3::sub(v2, vec3::scale(v0, d));
        let n = vec3::norm(w);
        if n < T::of(1e-6) {
            return None;
        }
        vec3::scale(w, T::one() / n)
    };
    let v1 = vec3::cross(v2, v0);
    Some(EigenFrame {
        eigenvalues: lam,
        eigenvectors: [v0, v1, v2],
    })
}

fn eigenvector_for<T: Real>(m: &Mat3<T>, lambda: T) -> Option<Vec3<T>> {
    let a = [
        [m[0][0] - lambda, m[0][1], m[0][2]],
        [m[1][0], m[1][1] - lambda, m[1][2]],
        [m[2][0], m[2][1], m[2][2] - lambda],
    ];
    let rows = [a[0], a[1], a[2]];
    let c01 = vec3::cross(rows[0], rows[1]);
    let c12 = vec3::cross(rows[1], rows[2]);
    let c20 = vec3::cross(rows[2], rows[0]);
    let mut best = c01;
    let mut best_n = vec3::dot(c01, c01);
    for c in [c12, c20] {
        let n = vec3::dot(c, c);
        if n > best_n {
            best = c;
            best_n = n;
        }
    }
    if best_n.sqrt() < T::of(1e-12) {
        return None;
    }
    Some(vec3::normalize(best))
}

/// Cyclic Jacobi sweeps; robust fallback for degenerate spectra.
fn jacobi_eigen<T: Real>(m: &Mat3<T>) -> EigenFrame<T> {
    let mut a = *m;
    let mut v = identity_frame();
    for _ in 0..50 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off < T::of(1e-34) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() < T::of(1e-300) {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::of(2.0) * a[p][q]);
            let t = {
                let s = if theta >= T::zero() { T::one() } else { -T::one() };
                s / (theta.abs() + (theta * theta + T::one()).sqrt())
            };
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            let mut b = a;
            for k in 0..3 {
                b[p][k] = c * a[p][k] - s * a[q][k];
                b[q][k] = s * a[p][k] + c * a[q][k];
            }
            let mut a2 = b;
            for k in 0..3 {
                a2[k][p] = c * b[k][p] - s * b[k][q];
                a2[k][q] = s * b[k][p] + c * b[k][q];
            }
            a = a2;
            for k in 0..3 {
                let vp = v[p][k];
                let vq = v[q][k];
                v[p][k] = c * vp - s * vq;
                v[q][k] = s * vp + c * vq;
            }
        }
    }
    let mut pairs: Vec<(T, Vec3<T>)> = (0..3).map(|k| (a[k][k], v[k])).collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    EigenFrame {
        eigenvalues: [pairs[0].0, pairs[1].0, pairs[2].0],
        eigenvectors: [pairs[0].1, pairs[1].1, pairs[2].1],
    }
}

impl<T: Real> Add for QTensor<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.c;
        for i in 0..5 {
            c[i] += rhs.c[i];
        }
        Self { c }
    }
}

impl<T: Real> Sub for QTensor<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.c;
        for i in 0..5 {
            c[i] -= rhs.c[i];
        }
        Self { c }
    }
}

impl<T: Real> Neg for QTensor<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x = -*x;
        }
        Self { c }
    }
}

impl<T: Real> Mul<T> for QTensor<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x = *x * s;
        }
        Self { c }
    }
}
