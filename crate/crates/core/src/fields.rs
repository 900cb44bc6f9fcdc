//! Q-tensor fields on the ball: the limiting harmonic map, the radial
//! hedgehog, its explicit biaxial core perturbation, the quotient field
//! S = Q/h, discretized ball fields on a Cartesian lattice, and the
//! spherical flux diagnostic.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::material::h_plus_of_t;
use crate::profile::{interpolate_h, RadialProfile};
use crate::quad::sphere_rule;
use crate::scalar::Real;
use crate::tensor::{mat3, uniaxial_unchecked, QTensor, Vec3};

/// A tensor field with an analytically evaluable gradient.
/// `gradient(x)[k]` is the partial derivative of the field along axis k.
pub trait TensorField<T: Real> {
    fn value(&self, x: Vec3<T>) -> Result<QTensor<T>>;
    fn gradient(&self, x: Vec3<T>) -> Result<[QTensor<T>; 3]>;
}

fn radius_of<T: Real>(x: Vec3<T>) -> T {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// sqrt(3/2) (x^_i x^_j - delta_ij / 3): the unit-norm uniaxial tensor with
/// radial director. Dirichlet datum of every field here.
pub fn boundary_datum<T: Real>(x: Vec3<T>) -> Result<QTensor<T>> {
    let r = radius_of(x);
    if r < T::of(1e-300) {
        return Err(Error::Domain("radial director undefined at the origin".into()));
    }
    let m = [x[0] / r, x[1] / r, x[2] / r];
    Ok(uniaxial_unchecked(T::one(), m))
}

/// Gradient tensors of the unit radial uniaxial field at x (one per axis):
/// sqrt(3/2) (1/r) (delta_ki m_j + delta_kj m_i - 2 m_i m_j m_k).
fn radial_director_gradient<T: Real>(x: Vec3<T>) -> [QTensor<T>; 3] {
    let r = radius_of(x);
    let m = [x[0] / r, x[1] / r, x[2] / r];
    let amp = T::of(1.5).sqrt() / r;
    std::array::from_fn(|k| {
        let mut g = mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut v = -T::of(2.0) * m[i] * m[j] * m[k];
                if k == i {
                    v += m[j];
                }
                if k == j {
                    v += m[i];
                }
                g[i][j] = amp * v;
            }
        }
        QTensor::from_sym_matrix(&g)
    })
}

/// The limiting harmonic map Q0 = sqrt(3/2)(x^ (x) x^ - I/3); |Q0| = 1.
pub struct HarmonicMapField;

impl<T: Real> TensorField<T> for HarmonicMapField {
    fn value(&self, x: Vec3<T>) -> Result<QTensor<T>> {
        boundary_datum(x)
    }

    fn gradient(&self, x: Vec3<T>) -> Result<[QTensor<T>; 3]> {
        let r = radius_of(x);
        if r < T::of(1e-300) {
            return Err(Error::Domain("harmonic map singular at the origin".into()));
        }
        Ok(radial_director_gradient(x))
    }
}

/// Evaluate the harmonic map at a point.
pub fn harmonic_map_field<T: Real>(x: Vec3<T>) -> Result<QTensor<T>> {
    boundary_datum(x)
}

/// The radial hedgehog sqrt(3/2) h(|x|) (x^ (x) x^ - I/3); |H| = h.
pub struct HedgehogField<'a, T> {
    pub profile: &'a RadialProfile<T>,
}

impl<'a, T: Real> HedgehogField<'a, T> {
    pub fn new(profile: &'a RadialProfile<T>) -> Self {
        Self { profile }
    }
}

impl<T: Real> TensorField<T> for HedgehogField<'_, T> {
    fn value(&self, x: Vec3<T>) -> Result<QTensor<T>> {
        let r = radius_of(x);
        if r == T::zero() {
            return Ok(QTensor::zero());
        }
        let (h, _) = interpolate_h(self.profile, r)?;
        let m = [x[0] / r, x[1] / r, x[2] / r];
        Ok(uniaxial_unchecked(h, m))
    }

    fn gradient(&self, x: Vec3<T>) -> Result<[QTensor<T>; 3]> {
        let r = radius_of(x);
        if r == T::zero() {
            return Ok([QTensor::zero(); 3]);
        }
        let (h, dh) = interpolate_h(self.profile, r)?;
        let m = [x[0] / r, x[1] / r, x[2] / r];
        let radial_part = uniaxial_unchecked(dh, m);
        let angular = radial_director_gradient(x);
        Ok(std::array::from_fn(|k| {
            angular[k] * h + radial_part * m[k]
        }))
    }
}

/// Evaluate the hedgehog field at a point.
pub fn hedgehog_field<T: Real>(p: &RadialProfile<T>, x: Vec3<T>) -> Result<QTensor<T>> {
    HedgehogField::new(p).value(x)
}

/// Amplitude of the explicit biaxial core perturbation,
/// g(r) = (r^2 + 12)^-2 (1 - r/10).
pub fn perturbation_amplitude<T: Real>(r: T) -> T {
    let sigma = T::of(10.0);
    let d = r * r + T::of(12.0);
    (T::one() - r / sigma) / (d * d)
}

fn perturbation_amplitude_deriv<T: Real>(r: T) -> T {
    let sigma = T::of(10.0);
    let d = r * r + T::of(12.0);
    let d3 = d * d * d;
    -T::of(4.0) * r * (T::one() - r / sigma) / d3 - T::one() / (sigma * d * d)
}

/// The hedgehog plus the biaxial core perturbation
/// H_b = H + g(r) (z (x) z - I/3). The added term does not vanish at the
/// origin, so the core is no longer isotropic.
pub struct BiaxialPerturbationField<'a, T> {
    hedgehog: HedgehogField<'a, T>,
}

impl<'a, T: Real> BiaxialPerturbationField<'a, T> {
    pub fn new(profile: &'a RadialProfile<T>) -> Self {
        Self {
            hedgehog: HedgehogField::new(profile),
        }
    }
}

fn z_axis_tensor<T: Real>() -> QTensor<T> {
    // z (x) z - I/3 (without the sqrt(3/2) factor); |.| = sqrt(2/3).
    let third = T::one() / T::of(3.0);
    QTensor::from_sym_matrix(&[
        [-third, T::zero(), T::zero()],
        [T::zero(), -third, T::zero()],
        [T::zero(), T::zero(), T::of(2.0) * third],
    ])
}

impl<T: Real> TensorField<T> for BiaxialPerturbationField<'_, T> {
    fn value(&self, x: Vec3<T>) -> Result<QTensor<T>> {
        let r = radius_of(x);
        let h = self.hedgehog.value(x)?;
        Ok(h + z_axis_tensor() * perturbation_amplitude(r))
    }

    fn gradient(&self, x: Vec3<T>) -> Result<[QTensor<T>; 3]> {
        let r = radius_of(x);
        if r < T::of(1e-300) {
            return Err(Error::Domain(
                "perturbation gradient undefined at the origin".into(),
            ));
        }
        let base = self.hedgehog.gradient(x)?;
        let gp = perturbation_amplitude_deriv(r);
        let zt = z_axis_tensor::<T>();
        Ok(std::array::from_fn(|k| base[k] + zt * (gp * x[k] / r)))
    }
}

/// Evaluate the perturbed hedgehog at a point (error outside the profile
/// domain).
pub fn biaxial_perturbation_field<T: Real>(
    p: &RadialProfile<T>,
    x: Vec3<T>,
) -> Result<QTensor<T>> {
    BiaxialPerturbationField::new(p).value(x)
}

/// Quotient field S = Q / h(|x|). Division is refused inside
/// r_min = 1e-4 R where it is ill-conditioned.
pub struct DividedByProfile<'a, T, F> {
    pub field: F,
    pub profile: &'a RadialProfile<T>,
}

impl<'a, T: Real, F: TensorField<T>> DividedByProfile<'a, T, F> {
    pub fn new(field: F, profile: &'a RadialProfile<T>) -> Self {
        Self { field, profile }
    }

    fn amplitude(&self, r: T) -> Result<(T, T)> {
        if r < T::of(1e-4) * self.profile.radius {
            return Err(Error::Domain(format!(
                "division by the profile is ill-conditioned at r = {}",
                r.as_f64()
            )));
        }
        let (h, dh) = interpolate_h(self.profile, r)?;
        if h < T::of(1e-14) {
            return Err(Error::Domain(format!(
                "profile amplitude {} too small to divide by",
                h.as_f64()
            )));
        }
        Ok((h, dh))
    }
}

impl<T: Real, F: TensorField<T>> TensorField<T> for DividedByProfile<'_, T, F> {
    fn value(&self, x: Vec3<T>) -> Result<QTensor<T>> {
        let r = radius_of(x);
        let (h, _) = self.amplitude(r)?;
        Ok(self.field.value(x)? * (T::one() / h))
    }

    fn gradient(&self, x: Vec3<T>) -> Result<[QTensor<T>; 3]> {
        let r = radius_of(x);
        let (h, dh) = self.amplitude(r)?;
        let q = self.field.value(x)?;
        let dq = self.field.gradient(x)?;
        let m = [x[0] / r, x[1] / r, x[2] / r];
        Ok(std::array::from_fn(|k| {
            (dq[k] * h - q * (dh * m[k])) * (T::one() / (h * h))
        }))
    }
}

/// S = Q/h at a point.
pub fn divide_by_profile<T: Real, F: TensorField<T>>(
    field: &F,
    p: &RadialProfile<T>,
    x: Vec3<T>,
) -> Result<QTensor<T>>
where
    for<'b> &'b F: TensorField<T>,
{
    DividedByProfile::new(field, p).value(x)
}

impl<T: Real, F: TensorField<T>> TensorField<T> for &F {
    fn value(&self, x: Vec3<T>) -> Result<QTensor<T>> {
        (*self).value(x)
    }
    fn gradient(&self, x: Vec3<T>) -> Result<[QTensor<T>; 3]> {
        (*self).gradient(x)
    }
}

/// Central-difference gradient wrapper; cross-checks analytic gradients in
/// tests and serves fields that only provide values.
pub struct FdGradient<F> {
    pub field: F,
    pub step: f64,
}

impl<T: Real, F: TensorField<T>> TensorField<T> for FdGradient<F> {
    fn value(&self, x: Vec3<T>) -> Result<QTensor<T>> {
        self.field.value(x)
    }

    fn gradient(&self, x: Vec3<T>) -> Result<[QTensor<T>; 3]> {
        let eta = T::of(self.step);
        let mut out = [QTensor::zero(); 3];
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += eta;
            xm[k] -= eta;
            out[k] = (self.field.value(xp)? - self.field.value(xm)?) * (T::one() / (T::of(2.0) * eta));
        }
        Ok(out)
    }
}

/// Provenance of a discretized field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    HarmonicMap,
    Hedgehog,
    BiaxialPerturbation,
    FrozenBoundary,
    Relaxed,
    Custom,
}

impl FieldKind {
    pub fn tag(&self) -> &'static str {
        match self {
            FieldKind::HarmonicMap => "harmonic_map",
            FieldKind::Hedgehog => "hedgehog",
            FieldKind::BiaxialPerturbation => "biaxial_perturbation",
            FieldKind::FrozenBoundary => "frozen_boundary",
            FieldKind::Relaxed => "relaxed",
            FieldKind::Custom => "custom",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Ok(match tag {
            "harmonic_map" => FieldKind::HarmonicMap,
            "hedgehog" => FieldKind::Hedgehog,
            "biaxial_perturbation" => FieldKind::BiaxialPerturbation,
            "frozen_boundary" => FieldKind::FrozenBoundary,
            "relaxed" => FieldKind::Relaxed,
            "custom" => FieldKind::Custom,
            other => {
                return Err(Error::InvalidParameter(format!("unknown field tag {other}")))
            }
        })
    }

    /// Fields with an unresolved point defect at the origin (|grad Q|^2
    /// ~ 6/r^2 there) need the analytic core patch during quadrature.
    pub fn has_singular_core(&self) -> bool {
        matches!(self, FieldKind::HarmonicMap | FieldKind::FrozenBoundary)
    }
}

/// Node classification on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mask {
    Interior,
    Boundary,
    Exterior,
}

impl Mask {
    pub fn as_u8(self) -> u8 {
        match self {
            Mask::Interior => 0,
            Mask::Boundary => 1,
            Mask::Exterior => 2,
        }
    }
}

/// Q-tensor field sampled on a uniform Cartesian lattice over the cube
/// [-R, R]^3, masked to the ball |x| < R. Boundary and exterior nodes hold
/// the radial Dirichlet datum evaluated at their own position.
pub struct BallField<T> {
    pub n: usize,
    pub radius: T,
    pub t: T,
    pub dx: T,
    pub kind: FieldKind,
    pub values: Vec<QTensor<T>>,
    pub mask: Vec<Mask>,
}

impl<T: Real> BallField<T> {
    /// Coordinate of lattice index k along one axis; exactly antisymmetric
    /// under k -> n-1-k so the node set is symmetric about the origin.
    #[inline]
    pub fn axis_coord(&self, k: usize) -> T {
        let half = self.radius / T::of_usize(self.n - 1);
        T::of(2.0 * k as f64 - (self.n - 1) as f64) * half
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.n + iy) * self.n + ix
    }

    pub fn position(&self, ix: usize, iy: usize, iz: usize) -> Vec3<T> {
        [self.axis_coord(ix), self.axis_coord(iy), self.axis_coord(iz)]
    }

    /// Sample a field on the lattice: interior nodes from the field,
    /// boundary/exterior nodes from the Dirichlet datum.
    pub fn sample<F: TensorField<T>>(
        field: &F,
        kind: FieldKind,
        radius: T,
        t: T,
        n: usize,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "lattice needs at least 2 nodes per axis, got {n}"
            )));
        }
        let dx = T::of(2.0) * radius / T::of_usize(n - 1);
        let mut out = Self {
            n,
            radius,
            t,
            dx,
            kind,
            values: vec![QTensor::zero(); n * n * n],
            mask: vec![Mask::Exterior; n * n * n],
        };
        let r_int = radius - dx / T::of(2.0);
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let x = out.position(ix, iy, iz);
                    let r = radius_of(x);
                    let idx = out.index(ix, iy, iz);
                    if r < r_int {
                        out.mask[idx] = Mask::Interior;
                        out.values[idx] = field.value(x)?;
                    } else {
                        out.mask[idx] = if r <= radius { Mask::Boundary } else { Mask::Exterior };
                        out.values[idx] = boundary_datum(x)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rebuild a field from raw coefficient rows in lattice order (resume
    /// path); the mask is recomputed, non-interior nodes are reset to the
    /// Dirichlet datum.
    pub fn from_values(
        n: usize,
        radius: T,
        t: T,
        kind: FieldKind,
        values: Vec<QTensor<T>>,
    ) -> Result<Self> {
        if values.len() != n * n * n {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                n * n * n,
                values.len()
            )));
        }
        let dx = T::of(2.0) * radius / T::of_usize(n - 1);
        let mut out = Self {
            n,
            radius,
            t,
            dx,
            kind,
            values,
            mask: vec![Mask::Exterior; n * n * n],
        };
        let r_int = radius - dx / T::of(2.0);
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let x = out.position(ix, iy, iz);
                    let r = radius_of(x);
                    let idx = out.index(ix, iy, iz);
                    if r < r_int {
                        out.mask[idx] = Mask::Interior;
                    } else {
                        out.mask[idx] = if r <= radius { Mask::Boundary } else { Mask::Exterior };
                        out.values[idx] = boundary_datum(x)?;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn max_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, q| acc.max(q.norm()))
    }

    /// CSV dump `x,y,z,c1..c5,mask`, one row per node in lattice order.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "x,y,z,c1,c2,c3,c4,c5,mask")?;
        for iz in 0..self.n {
            for iy in 0..self.n {
                for ix in 0..self.n {
                    let p = self.position(ix, iy, iz);
                    let idx = self.index(ix, iy, iz);
                    let c = self.values[idx].coeffs();
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{},{}",
                        g17(p[0].as_f64()),
                        g17(p[1].as_f64()),
                        g17(p[2].as_f64()),
                        g17(c[0].as_f64()),
                        g17(c[1].as_f64()),
                        g17(c[2].as_f64()),
                        g17(c[3].as_f64()),
                        g17(c[4].as_f64()),
                        self.mask[idx].as_u8()
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Parse a CSV produced by [`BallField::write_csv`] given the lattice
    /// metadata from the JSON sidecar.
    pub fn read_csv<R: BufRead>(
        reader: R,
        n: usize,
        radius: T,
        t: T,
        kind: FieldKind,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(n * n * n);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidParameter(format!("read error: {e}")))?;
            if lineno == 0 {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 9 {
                return Err(Error::InvalidParameter(format!(
                    "line {} has {} columns, expected 9",
                    lineno + 1,
                    cols.len()
                )));
            }
            let mut c = [T::zero(); 5];
            for (k, v) in c.iter_mut().enumerate() {
                let parsed: f64 = cols[3 + k].trim().parse().map_err(|e| {
                    Error::InvalidParameter(format!("line {}: bad float: {e}", lineno + 1))
                })?;
                *v = T::of(parsed);
            }
            values.push(QTensor::from_coeffs(c));
        }
        Self::from_values(n, radius, t, kind, values)
    }
}

/// Spherical flux of the stress vector of the quotient field at one radius.
#[derive(Debug, Clone, Copy)]
pub struct FluxDiagnostic<T> {
    pub delta: T,
    pub flux: T,
}

/// Surface integral over |x| = delta of
/// |grad S|^2/2 - (dS/dr)^2 + (1 + 3h_+/t) h^2 (1 - |S|^2)^2/4
/// + 3(1 - |S|^2)/delta^2.
/// Equals 12 pi exactly whenever |S| = 1 and S is radially constant.
pub fn flux_phi<T: Real, F: TensorField<T>>(
    s_field: &F,
    p: &RadialProfile<T>,
    delta: T,
    order: usize,
) -> Result<FluxDiagnostic<T>> {
    if order < 6 {
        return Err(Error::InvalidParameter(format!(
            "sphere quadrature order must be at least 6, got {order}"
        )));
    }
    let r_min = T::of(1e-4) * p.radius;
    if delta <= r_min || delta >= p.radius {
        return Err(Error::Domain(format!(
            "flux radius {} outside ({}, {})",
            delta.as_f64(),
            r_min.as_f64(),
            p.radius.as_f64()
        )));
    }
    let eps = T::of(3.0) * h_plus_of_t(p.t) / p.t;
    let (h, _) = interpolate_h(p, delta)?;
    let rule = sphere_rule::<T>(order);
    let mut flux = T::zero();
    for (point, weight) in rule.points.iter().zip(rule.weights.iter()) {
        let x = [point[0] * delta, point[1] * delta, point[2] * delta];
        let s = s_field.value(x)?;
        let grad = s_field.gradient(x)?;
        let mut grad_sq = T::zero();
        for g in &grad {
            grad_sq += g.norm_sq();
        }
        let radial =
            grad[0] * point[0] + grad[1] * point[1] + grad[2] * point[2];
        let radial_sq = radial.norm_sq();
        let one_minus_s2 = T::one() - s.norm_sq();
        let integrand = grad_sq / T::of(2.0) - radial_sq
            + (T::one() + eps) * h * h * one_minus_s2 * one_minus_s2 / T::of(4.0)
            + T::of(3.0) * one_minus_s2 / (delta * delta);
        flux += *weight * integrand;
    }
    // Weights are on the unit sphere; scale the area element to radius delta,
    // while the integrand above is already evaluated at |x| = delta.
    Ok(FluxDiagnostic {
        delta,
        flux: flux * delta * delta,
    })
}
