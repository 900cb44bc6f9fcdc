//! Gradient-flow relaxation of the full Euler-Lagrange system on the ball
//! with radial Dirichlet data.
//!
//! Explicit Euler steps Q <- Q + dt (lap Q - el_rhs(Q)) on interior nodes
//! with a 7-point Laplacian; Dirichlet nodes frozen. The flow is the exact
//! gradient flow of the face-based discrete energy, which is therefore
//! monitored every step as a dissipation check. Sweeps use two buffers so
//! results are independent of traversal order, and reductions are
//! accumulated per z-plane and combined in plane order, which makes results
//! independent of the worker count as well.

use crate::energy::{field_energy, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::fields::{
    boundary_datum, BallField, BiaxialPerturbationField, FieldKind, HedgehogField, Mask,
    TensorField,
};
use crate::material::{bulk_f_reduced_traces, ReducedParams};
use crate::profile::RadialProfile;
use crate::scalar::Real;
use crate::tensor::{QTensor, Vec3};

/// Initial condition of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxInit {
    Hedgehog,
    PerturbedHedgehog,
    FrozenBoundaryExtension,
}

impl RelaxInit {
    pub fn tag(&self) -> &'static str {
        match self {
            RelaxInit::Hedgehog => "hedgehog",
            RelaxInit::PerturbedHedgehog => "perturbed_hedgehog",
            RelaxInit::FrozenBoundaryExtension => "frozen_boundary_extension",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Ok(match tag {
            "hedgehog" => RelaxInit::Hedgehog,
            "perturbed_hedgehog" => RelaxInit::PerturbedHedgehog,
            "frozen_boundary_extension" => RelaxInit::FrozenBoundaryExtension,
            other => return Err(Error::InvalidParameter(format!("unknown init {other}"))),
        })
    }
}

/// Flow configuration; `dt = dx^2 / dt_factor` with `dt_factor >= 6`
/// (explicit stability bound of the 7-point Laplacian).
#[derive(Debug, Clone, Copy)]
pub struct RelaxConfig<T> {
    pub t: T,
    pub radius: T,
    pub grid_n: usize,
    pub dt_factor: T,
    pub max_steps: usize,
    /// Residual tolerance: stop once sup |update| / dt < tol.
    pub tol: T,
    pub init: RelaxInit,
    pub threads: usize,
    /// Treat the linear -Q reaction term implicitly.
    pub semi_implicit: bool,
}

impl<T: Real> RelaxConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 33 {
            return Err(Error::InvalidParameter(format!(
                "relaxation grid needs at least 33 nodes per axis, got {}",
                self.grid_n
            )));
        }
        if self.dt_factor < T::of(6.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_factor must be at least 6 for stability, got {}",
                self.dt_factor.as_f64()
            )));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidParameter("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> T {
        T::of(2.0) * self.radius / T::of_usize(self.grid_n - 1)
    }

    pub fn dt(&self) -> T {
        let dx = self.dx();
        dx * dx / self.dt_factor
    }
}

/// Outcome of a relaxation run.
pub struct RelaxResult<T> {
    pub field: BallField<T>,
    pub steps: usize,
    pub converged: bool,
    /// sup |Q_new - Q_old| of the last step.
    pub final_update: T,
    /// sup-norm imbalance of the stationarity equations, final_update / dt.
    pub final_residual: T,
    /// Reported energy of the final field (central-difference quadrature).
    pub energy: EnergyBreakdown<T>,
    /// Largest |Q| over interior nodes of the final field.
    pub max_abs_q: T,
    /// Largest |Q| seen at any interior node after the first 100 steps.
    pub peak_abs_q_after_transient: T,
    /// Face-based discrete energy at the last step.
    pub discrete_energy: T,
}

/// Right-hand side of the stationarity system:
/// -Q - (3 sqrt(6) h_+/t)(Q^2 - |Q|^2 I/3) + (2 h_+^2/t) |Q|^2 Q.
/// Traceless by construction of the Lagrange-multiplier term.
pub fn el_rhs<T: Real>(q: &QTensor<T>, rp: &ReducedParams<T>) -> QTensor<T> {
    let c1 = T::of(3.0) * T::of(6.0).sqrt() * rp.h_plus / rp.t;
    let c2 = T::of(2.0) * rp.h_plus * rp.h_plus / rp.t;
    let n2 = q.norm_sq();
    -*q - q.squared_traceless() * c1 + *q * (c2 * n2)
}

/// The same right-hand side reduced along the prolate uniaxial ray:
/// (|Q|^2 - 1) Q + (3 h_+/t)(|Q|^2 - |Q|) Q.
pub fn uniaxial_rhs<T: Real>(q: &QTensor<T>, rp: &ReducedParams<T>) -> QTensor<T> {
    let n2 = q.norm_sq();
    let n = n2.sqrt();
    *q * (n2 - T::one() + rp.eps() * (n2 - n))
}

/// sup over interior nodes of |lap Q - el_rhs(Q)|.
pub fn residual_field<T: Real>(field: &BallField<T>, rp: &ReducedParams<T>) -> T {
    residual_field_within(field, rp, field.radius)
}

/// Same imbalance restricted to |x| <= r_max. Useful for separating bulk
/// discretization error from the admissibility mismatch 1 - h(R) that sits
/// in the rim band of sampled hedgehog-type fields.
pub fn residual_field_within<T: Real>(
    field: &BallField<T>,
    rp: &ReducedParams<T>,
    r_max: T,
) -> T {
    let n = field.n;
    let dx2 = field.dx * field.dx;
    let mut sup = T::zero();
    for iz in 1..n - 1 {
        for iy in 1..n - 1 {
            for ix in 1..n - 1 {
                let idx = field.index(ix, iy, iz);
                if field.mask[idx] != Mask::Interior {
                    continue;
                }
                let x = field.position(ix, iy, iz);
                if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() > r_max {
                    continue;
                }
                let q = field.values[idx];
                let lap = (field.values[idx - 1]
                    + field.values[idx + 1]
                    + field.values[idx - n]
                    + field.values[idx + n]
                    + field.values[idx - n * n]
                    + field.values[idx + n * n]
                    - q * T::of(6.0))
                    * (T::one() / dx2);
                sup = sup.max((lap - el_rhs(&q, rp)).norm());
            }
        }
    }
    sup
}

struct FrozenBoundaryInit<T> {
    radius: T,
}

impl<T: Real> TensorField<T> for FrozenBoundaryInit<T> {
    fn value(&self, x: Vec3<T>) -> Result<QTensor<T>> {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        if r2.sqrt() < T::of(1e-12) * self.radius {
            // The radial datum has no limit at the center; start isotropic.
            return Ok(QTensor::zero());
        }
        boundary_datum(x)
    }

    fn gradient(&self, _x: Vec3<T>) -> Result<[QTensor<T>; 3]> {
        Err(Error::Domain("initializer provides values only".into()))
    }
}

/// Build the initial lattice for a configuration.
pub fn initial_field<T: Real>(
    cfg: &RelaxConfig<T>,
    profile: &RadialProfile<T>,
) -> Result<BallField<T>> {
    match cfg.init {
        RelaxInit::Hedgehog => BallField::sample(
            &HedgehogField::new(profile),
            FieldKind::Hedgehog,
            cfg.radius,
            cfg.t,
            cfg.grid_n,
        ),
        RelaxInit::PerturbedHedgehog => BallField::sample(
            &BiaxialPerturbationField::new(profile),
            FieldKind::BiaxialPerturbation,
            cfg.radius,
            cfg.t,
            cfg.grid_n,
        ),
        RelaxInit::FrozenBoundaryExtension => BallField::sample(
            &FrozenBoundaryInit { radius: cfg.radius },
            FieldKind::FrozenBoundary,
            cfg.radius,
            cfg.t,
            cfg.grid_n,
        ),
    }
}

/// Relax from the configured initial condition.
pub fn relax<T: Real>(
    cfg: &RelaxConfig<T>,
    rp: &ReducedParams<T>,
    profile: &RadialProfile<T>,
) -> Result<RelaxResult<T>> {
    cfg.validate()?;
    let field = initial_field(cfg, profile)?;
    relax_field(field, cfg, rp, 0)
}

/// Relax a given lattice (resume path); `steps_done` counts completed steps
/// so a resumed run stops at the same total step count.
pub fn relax_field<T: Real>(
    mut field: BallField<T>,
    cfg: &RelaxConfig<T>,
    rp: &ReducedParams<T>,
    steps_done: usize,
) -> Result<RelaxResult<T>> {
    cfg.validate()?;
    if field.n != cfg.grid_n {
        return Err(Error::InvalidParameter(format!(
            "field lattice {} does not match configured grid {}",
            field.n, cfg.grid_n
        )));
    }
    if steps_done >= cfg.max_steps {
        return Err(Error::InvalidParameter(format!(
            "resume step {steps_done} already reaches max_steps {}",
            cfg.max_steps
        )));
    }
    let dt = cfg.dt();
    let update_tol = cfg.tol * dt;

    let mut back = field.values.clone();
    let mut energy_prev = T::infinity();
    let mut final_update = T::infinity();
    let mut peak_after_transient = T::zero();
    let mut converged = false;
    let mut steps = steps_done;

    while steps < cfg.max_steps {
        let stats = step_sweep(&field, &mut back, cfg, rp, dt)?;
        std::mem::swap(&mut field.values, &mut back);
        steps += 1;
        final_update = stats.sup_update;
        if !stats.sup_update.is_finite() || !stats.discrete_energy.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite state at step {steps}"
            )));
        }
        let allowed = energy_prev + T::of(1e-10) * (T::one() + energy_prev.abs());
        if stats.discrete_energy > allowed {
            return Err(Error::Instability(format!(
                "discrete energy rose from {} to {} at step {steps}; reduce dt",
                energy_prev.as_f64(),
                stats.discrete_energy.as_f64()
            )));
        }
        energy_prev = stats.discrete_energy;
        if steps > 100 {
            peak_after_transient = peak_after_transient.max(stats.max_abs_q);
        }
        if stats.sup_update < update_tol {
            converged = true;
            break;
        }
    }

    field.kind = FieldKind::Relaxed;
    let energy = field_energy(&field, rp)?;
    let max_abs_q = field
        .values
        .iter()
        .zip(field.mask.iter())
        .filter(|(_, m)| **m == Mask::Interior)
        .fold(T::zero(), |acc, (q, _)| acc.max(q.norm()));
    Ok(RelaxResult {
        field,
        steps,
        converged,
        final_update,
        final_residual: final_update / dt,
        energy,
        max_abs_q,
        peak_abs_q_after_transient: peak_after_transient,
        discrete_energy: energy_prev,
    })
}

struct StepStats<T> {
    sup_update: T,
    max_abs_q: T,
    discrete_energy: T,
}

/// One explicit step plus the post-step diagnostics. Writes the new state
/// into `next`. Partial reductions are per z-plane; combining them in plane
/// order keeps the result identical for any worker count.
fn step_sweep<T: Real>(
    field: &BallField<T>,
    next: &mut [QTensor<T>],
    cfg: &RelaxConfig<T>,
    rp: &ReducedParams<T>,
    dt: T,
) -> Result<StepStats<T>> {
    let n = field.n;
    let plane = n * n;
    let dx2 = field.dx * field.dx;
    let inv_dx2 = T::one() / dx2;
    let semi = cfg.semi_implicit;

    let mut sup_update = vec![T::zero(); n];
    let mut max_q = vec![T::zero(); n];
    let mut elastic = vec![T::zero(); n];
    let mut bulk = vec![T::zero(); n];

    {
        let values = &field.values[..];
        let mask = &field.mask[..];
        let update_planes: Vec<(usize, &mut [QTensor<T>])> =
            next.chunks_mut(plane).enumerate().collect();
        let stats: Vec<(usize, &mut T, &mut T)> = sup_update
            .iter_mut()
            .zip(max_q.iter_mut())
            .enumerate()
            .map(|(iz, (s, m))| (iz, s, m))
            .collect();
        let work: Vec<((usize, &mut [QTensor<T>]), (usize, &mut T, &mut T))> =
            update_planes.into_iter().zip(stats).collect();

        let worker = |chunk: &mut [((usize, &mut [QTensor<T>]), (usize, &mut T, &mut T))]| {
            for ((iz, out_plane), (_, sup, mq)) in chunk.iter_mut() {
                let iz = *iz;
                for iy in 0..n {
                    for ix in 0..n {
                        let idx = (iz * n + iy) * n + ix;
                        let local = iy * n + ix;
                        let q = values[idx];
                        if mask[idx] != Mask::Interior {
                            out_plane[local] = q;
                            continue;
                        }
                        let lap = (values[idx - 1]
                            + values[idx + 1]
                            + values[idx - n]
                            + values[idx + n]
                            + values[idx - plane]
                            + values[idx + plane]
                            - q * T::of(6.0))
                            * inv_dx2;
                        let new = if semi {
                            // Linear -Q term implicit: q_new (1 - dt) =
                            // q + dt (lap - el_rhs(q) - q).
                            let explicit = lap - el_rhs(&q, rp) - q;
                            (q + explicit * dt) * (T::one() / (T::one() - dt))
                        } else {
                            q + (lap - el_rhs(&q, rp)) * dt
                        };
                        out_plane[local] = new;
                        **sup = sup.max((new - q).norm());
                        **mq = mq.max(new.norm());
                    }
                }
            }
        };
        run_in_slabs(work, cfg.threads, worker);
    }

    // Post-step diagnostics on the new state: face-based Dirichlet energy
    // (faces with at least one interior endpoint, counted from the lower
    // node) plus nodal bulk on interior nodes.
    {
        let mask = &field.mask[..];
        let new_vals = &next[..];
        let cell = field.dx * dx2;
        let work: Vec<(usize, (&mut T, &mut T))> = elastic
            .iter_mut()
            .zip(bulk.iter_mut())
            .enumerate()
            .map(|(iz, (e, b))| (iz, (e, b)))
            .collect();
        let worker = |chunk: &mut [(usize, (&mut T, &mut T))]| {
            for (iz, (elast, blk)) in chunk.iter_mut() {
                let iz = *iz;
                for iy in 0..n {
                    for ix in 0..n {
                        let idx = (iz * n + iy) * n + ix;
                        let q = new_vals[idx];
                        let interior = mask[idx] == Mask::Interior;
                        if interior {
                            **blk += bulk_f_reduced_traces(q.tr_q2(), q.tr_q3(), rp) * cell;
                        }
                        for (step, in_range) in
                            [(1usize, ix + 1 < n), (n, iy + 1 < n), (plane, iz + 1 < n)]
                        {
                            if !in_range {
                                continue;
                            }
                            let jdx = idx + step;
                            if interior || mask[jdx] == Mask::Interior {
                                let d = new_vals[jdx] - q;
                                **elast +=
                                    d.norm_sq() * inv_dx2 * cell / T::of(2.0);
                            }
                        }
                    }
                }
            }
        };
        run_in_slabs(work, cfg.threads, worker);
    }

    let mut stats = StepStats {
        sup_update: T::zero(),
        max_abs_q: T::zero(),
        discrete_energy: T::zero(),
    };
    for iz in 0..n {
        stats.sup_update = stats.sup_update.max(sup_update[iz]);
        stats.max_abs_q = stats.max_abs_q.max(max_q[iz]);
        stats.discrete_energy += elastic[iz] + bulk[iz];
    }
    Ok(stats)
}

/// Distribute contiguous chunks of per-plane work over up to `threads`
/// scoped workers.
fn run_in_slabs<W: Send, F>(mut work: Vec<W>, threads: usize, worker: F)
where
    F: Fn(&mut [W]) + Sync,
{
    let threads = threads.max(1).min(work.len().max(1));
    if threads <= 1 {
        worker(&mut work);
        return;
    }
    let chunk = work.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for slab in work.chunks_mut(chunk) {
            scope.spawn(|| worker(slab));
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::ReducedParams;
    use crate::profile::{solve_profile, RadialProfile};
    use crate::rng::SplitMix64;
    use crate::tensor::{from_uniaxial, mat3};

    fn small_profile() -> RadialProfile<f64> {
        solve_profile(100.0, 10.0, 800).unwrap()
    }

    fn small_cfg(init: RelaxInit) -> RelaxConfig<f64> {
        RelaxConfig {
            t: 100.0,
            radius: 10.0,
            grid_n: 33,
            dt_factor: 7.0,
            max_steps: 400,
            tol: 1e-4,
            init,
            threads: 1,
            semi_implicit: false,
        }
    }

    #[test]
    fn el_rhs_vanishes_at_zero_and_is_traceless() {
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        assert_eq!(el_rhs(&QTensor::zero(), &rp).norm_sq(), 0.0);
        let mut rng = SplitMix64::new(31);
        for _ in 0..100_000 {
            let q = QTensor::from_coeffs([
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
                rng.next_symmetric(),
            ]);
            let m = el_rhs(&q, &rp).to_matrix();
            let tr = mat3::trace(&m);
            assert!(tr.abs() < 1e-12);
        }
    }

    #[test]
    fn unit_uniaxial_is_stationary_for_the_bulk_flow() {
        // The reduced bulk is built so that |Q| = 1 uniaxial states kill the
        // reaction term at every temperature.
        let mut rng = SplitMix64::new(32);
        for &t in &[10.0, 100.0, 1e6] {
            let rp = ReducedParams::from_t_r(t, 10.0).unwrap();
            let q = from_uniaxial(1.0, rng.next_unit_vector()).unwrap();
            assert!(el_rhs(&q, &rp).norm() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn el_rhs_matches_bulk_derivative_along_the_ray() {
        // d/ds of the uniaxial bulk equals the rhs coefficient times s.
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let d = 1e-6;
        for i in 1..12 {
            let s = i as f64 / 10.0;
            let q = from_uniaxial(s, [0.0, 0.0, 1.0]).unwrap();
            let rhs = el_rhs(&q, &rp);
            // rhs is parallel to q; extract the coefficient.
            let coeff = rhs.dot(&q) / q.norm_sq();
            let fp = (crate::material::bulk_f_uniaxial(s + d, &rp).unwrap()
                - crate::material::bulk_f_uniaxial(s - d, &rp).unwrap())
                / (2.0 * d);
            assert!((coeff * s - fp).abs() < 1e-8, "s={s}");
        }
    }

    #[test]
    fn el_and_uniaxial_rhs_agree_on_prolate_states() {
        let mut rng = SplitMix64::new(33);
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        for _ in 0..100_000 {
            let s = 1.2 * rng.next_f64();
            let q = from_uniaxial(s, rng.next_unit_vector()).unwrap();
            let a = el_rhs(&q, &rp);
            let b = uniaxial_rhs(&q, &rp);
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn hedgehog_profile_solves_the_uniaxial_reduction() {
        // lap H = uniaxial_rhs(H) reduces along the radial line to the
        // profile equation: on the grid this is exactly the certified
        // collocation residual.
        let p = solve_profile(100.0, 20.0, 4000).unwrap();
        let rp = ReducedParams::from_t_r(100.0, 20.0).unwrap();
        assert!(crate::profile::profile_residual(&p) < 1e-8);
        // Field-level cross-check by finite differences; accuracy here is
        // limited by the C1 interpolant between nodes, not the solution.
        let f = HedgehogField::new(&p);
        let eta = 1e-3;
        for &r in &[2.0f64, 5.0, 9.0] {
            let x = [0.0, 0.0, r];
            let mut lap = QTensor::zero();
            for k in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[k] += eta;
                xm[k] -= eta;
                lap = lap
                    + (f.value(xp).unwrap() + f.value(xm).unwrap()
                        - f.value(x).unwrap() * 2.0)
                        * (1.0 / (eta * eta));
            }
            let rhs = uniaxial_rhs(&f.value(x).unwrap(), &rp);
            assert!((lap - rhs).norm() < 1e-3, "r={r}");
        }
    }

    #[test]
    fn flow_from_hedgehog_dissipates_and_stays_bounded() {
        let p = small_profile();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let cfg = small_cfg(RelaxInit::Hedgehog);
        let initial = initial_field(&cfg, &p).unwrap();
        let e0 = field_energy(&initial, &rp).unwrap();
        let out = relax(&cfg, &rp, &p).unwrap();
        assert!(out.energy.total <= e0.total + 1e-9);
        assert!(out.max_abs_q <= 1.0 + 1e-3);
        assert!(out.peak_abs_q_after_transient <= 1.0 + 1e-3);
        assert!(out.steps > 0);
    }

    #[test]
    fn converged_flow_has_small_residual() {
        let p = small_profile();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let mut cfg = small_cfg(RelaxInit::Hedgehog);
        cfg.max_steps = 20_000;
        cfg.tol = 1e-6;
        let out = relax(&cfg, &rp, &p).unwrap();
        assert!(out.converged, "residual {}", out.final_residual);
        assert!(out.final_residual <= cfg.tol);
        let measured = residual_field(&out.field, &rp);
        assert!(measured <= 10.0 * cfg.tol, "measured {measured}");
    }

    #[test]
    fn frozen_boundary_extension_has_large_core_residual() {
        let p = small_profile();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let cfg = small_cfg(RelaxInit::FrozenBoundaryExtension);
        let field = initial_field(&cfg, &p).unwrap();
        let res = residual_field(&field, &rp);
        assert!(res > 1.0, "residual {res}");
    }

    #[test]
    fn diverging_state_is_reported() {
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let cfg = small_cfg(RelaxInit::Hedgehog);
        let n = cfg.grid_n;
        let huge = from_uniaxial(1e6, [0.0, 0.0, 1.0]).unwrap();
        let field = BallField::from_values(
            n,
            10.0,
            100.0,
            FieldKind::Custom,
            vec![huge; n * n * n],
        )
        .unwrap();
        match relax_field(field, &cfg, &rp, 0) {
            Err(Error::Divergence(_)) | Err(Error::Instability(_)) => {}
            Err(other) => panic!("unexpected error {other}"),
            Ok(_) => panic!("flow on a wildly out-of-range state must fail"),
        }
    }

    #[test]
    fn rejects_invalid_configs() {
        let p = small_profile();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let mut cfg = small_cfg(RelaxInit::Hedgehog);
        cfg.grid_n = 17;
        assert!(relax(&cfg, &rp, &p).is_err());
        let mut cfg = small_cfg(RelaxInit::Hedgehog);
        cfg.dt_factor = 4.0;
        assert!(relax(&cfg, &rp, &p).is_err());
    }

    #[test]
    fn worker_count_does_not_change_the_result() {
        let p = small_profile();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let mut cfg1 = small_cfg(RelaxInit::PerturbedHedgehog);
        cfg1.max_steps = 40;
        let mut cfg4 = cfg1;
        cfg4.threads = 4;
        let a = relax(&cfg1, &rp, &p).unwrap();
        let b = relax(&cfg4, &rp, &p).unwrap();
        assert_eq!(a.steps, b.steps);
        for (qa, qb) in a.field.values.iter().zip(b.field.values.iter()) {
            assert_eq!(qa.coeffs(), qb.coeffs());
        }
        assert_eq!(a.discrete_energy, b.discrete_energy);
    }

    #[test]
    fn relaxation_commutes_with_lattice_rotation() {
        // 90-degree rotation about x maps the lattice onto itself and the
        // z-axis perturbation onto the y-axis.
        let p = small_profile();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let mut cfg = small_cfg(RelaxInit::PerturbedHedgehog);
        cfg.max_steps = 150;
        let rot = [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]];
        let base = initial_field(&cfg, &p).unwrap();
        let n = cfg.grid_n;
        let mut rotated_values = vec![QTensor::zero(); n * n * n];
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    // Q'(x) = R Q(R^T x) R^T; R^T x has lattice indices
                    // (ix, iz, n-1-iy).
                    let src = base.index(ix, iz, n - 1 - iy);
                    rotated_values[base.index(ix, iy, iz)] = base.values[src].rotate(&rot);
                }
            }
        }
        let rotated =
            BallField::from_values(n, 10.0, 100.0, FieldKind::Custom, rotated_values).unwrap();
        let out_base = relax_field(base, &cfg, &rp, 0).unwrap();
        let out_rot = relax_field(rotated, &cfg, &rp, 0).unwrap();
        let mut worst = 0.0f64;
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let src = out_base.field.index(ix, iz, n - 1 - iy);
                    let expect = out_base.field.values[src].rotate(&rot);
                    let got = out_rot.field.values[out_rot.field.index(ix, iy, iz)];
                    worst = worst.max((got - expect).norm());
                }
            }
        }
        assert!(worst < 1e-6, "equivariance defect {worst}");
    }

    #[test]
    fn hedgehog_lattice_residual_shrinks_under_refinement() {
        // Two-grid oracle: the stationarity imbalance of the sampled
        // hedgehog is discretization error and drops with the lattice step.
        let p = solve_profile(100.0, 10.0, 4000).unwrap();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let coarse = BallField::sample(
            &HedgehogField::new(&p),
            FieldKind::Hedgehog,
            10.0,
            100.0,
            33,
        )
        .unwrap();
        let fine = BallField::sample(
            &HedgehogField::new(&p),
            FieldKind::Hedgehog,
            10.0,
            100.0,
            65,
        )
        .unwrap();
        // Away from the rim band (where the 1 - h(R) admissibility mismatch
        // lives) the imbalance is pure discretization error.
        let res_coarse = residual_field_within(&coarse, &rp, 7.5);
        let res_fine = residual_field_within(&fine, &rp, 7.5);
        assert!(res_coarse < 1.0, "coarse residual {res_coarse}");
        assert!(
            res_fine < 0.5 * res_coarse,
            "no refinement: {res_coarse} -> {res_fine}"
        );
    }

    #[test]
    fn relaxed_biaxial_field_has_bounded_quotient() {
        // |S| = |Q|/h stays O(1) on the unit-scale core region r in [1, 5]
        // because h >= r^2/15 there; the relaxed core amplitude itself does
        // not vanish, so the quotient is only controlled away from 0.
        let p = small_profile();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let mut cfg = small_cfg(RelaxInit::PerturbedHedgehog);
        cfg.max_steps = 300;
        let out = relax(&cfg, &rp, &p).unwrap();
        let f = &out.field;
        let mut samples = 0;
        for iz in 0..f.n {
            for iy in 0..f.n {
                for ix in 0..f.n {
                    let idx = f.index(ix, iy, iz);
                    if f.mask[idx] != Mask::Interior {
                        continue;
                    }
                    let x = f.position(ix, iy, iz);
                    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                    if !(1.0..=5.0).contains(&r) {
                        continue;
                    }
                    let (h, _) = crate::profile::interpolate_h(&p, r).unwrap();
                    let s_norm = f.values[idx].norm() / h;
                    assert!(s_norm <= 20.0, "r={r}: |S| = {s_norm}");
                    samples += 1;
                }
            }
        }
        assert!(samples > 100);
    }

    #[test]
    fn semi_implicit_variant_also_dissipates() {
        let p = small_profile();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let mut cfg = small_cfg(RelaxInit::Hedgehog);
        cfg.semi_implicit = true;
        cfg.max_steps = 100;
        let out = relax(&cfg, &rp, &p).unwrap();
        assert!(out.max_abs_q <= 1.0 + 1e-3);
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let p = small_profile();
        let rp = ReducedParams::from_t_r(100.0, 10.0).unwrap();
        let mut cfg = small_cfg(RelaxInit::PerturbedHedgehog);
        cfg.max_steps = 60;
        let full = relax(&cfg, &rp, &p).unwrap();

        let mut cfg_half = cfg;
        cfg_half.max_steps = 30;
        let half = relax(&cfg_half, &rp, &p).unwrap();
        let resumed = relax_field(half.field, &cfg, &rp, half.steps).unwrap();
        assert_eq!(resumed.steps, full.steps);
        for (qa, qb) in resumed.field.values.iter().zip(full.field.values.iter()) {
            assert_eq!(qa.coeffs(), qb.coeffs());
        }
    }
}
