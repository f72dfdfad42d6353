//! The decaying two-level atom.
//!
//! `J = u|g><e|` with `u = exp(-i eps t)`, its unitary dilation `S` on
//! atom (x) apparatus, the isometry `F = S|0>` and the Lindblad column
//! `L = sqrt(nu) (-J^dag J, J)^T`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{re, ComplexMatrix, Ket, TOLERANCE, ZERO};

/// Atom basis index of `|g>`.
pub const GROUND: usize = 0;
/// Atom basis index of `|e>`.
pub const EXCITED: usize = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct AtomParams {
    nu: f64,
    alpha: Complex64,
    beta: Complex64,
    epsilon: f64,
    r: f64,
}

impl AtomParams {
    /// Validates `nu > 0`, `r > 0` and `|alpha|^2 + |beta|^2 = 1` to 1e-12.
    pub fn new(nu: f64, alpha: Complex64, beta: Complex64, epsilon: f64, r: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::param(
                "nu",
                format!("decay rate must be positive, got {nu}"),
            ));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param(
                "r",
                format!("horizon must be positive, got {r}"),
            ));
        }
        if !epsilon.is_finite() {
            return Err(Error::param("epsilon", "phase rate must be finite"));
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::param(
                "alpha/beta",
                format!("|alpha|^2 + |beta|^2 = {norm}, expected 1"),
            ));
        }
        Ok(Self {
            nu,
            alpha,
            beta,
            epsilon,
            r,
        })
    }

    /// Real amplitudes, no phase rotation.
    pub fn real(nu: f64, alpha: f64, beta: f64, r: f64) -> Result<Self> {
        Self::new(nu, re(alpha), re(beta), 0.0, r)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `|psi> = alpha|g> + beta|e>`.
    pub fn psi(&self) -> Ket {
        Ket::new(vec![self.alpha, self.beta]).expect("two amplitudes")
    }

    /// Interaction-picture phase `u = exp(-i eps t)`.
    pub fn phase(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.epsilon * t)
    }
}

pub fn ground() -> Ket {
    Ket::basis(2, GROUND)
}

pub fn excited() -> Ket {
    Ket::basis(2, EXCITED)
}

/// Apparatus projector `P_k = |k><k|`.
pub fn apparatus_projector(k: usize) -> ComplexMatrix {
    Ket::basis(2, k).projector()
}

/// `|a><b|` on the apparatus fiber.
fn apparatus_unit(a: usize, b: usize) -> ComplexMatrix {
    Ket::basis(2, a).outer(&Ket::basis(2, b))
}

/// Operators of the dilation at one instant.
#[derive(Clone, Debug)]
pub struct DilationOps {
    /// `J = u|g><e|`, 2x2.
    pub j: ComplexMatrix,
    /// Unitary dilation, 4x4 on atom (x) apparatus.
    pub s: ComplexMatrix,
    /// Isometry `S (I (x) |0>)`, 4x2.
    pub f: ComplexMatrix,
    /// Lindblad column `sqrt(nu) (-J^dag J (x) |0> + J (x) |1>)`, 4x2.
    pub l: ComplexMatrix,
}

impl DilationOps {
    /// `F_0 = JJ^dag`, `F_1 = J`.
    pub fn f_components(&self) -> [ComplexMatrix; 2] {
        column_components(&self.f)
    }

    /// `L_1 = -sqrt(nu) J^dag J`, `L_2 = sqrt(nu) J`.
    pub fn l_components(&self) -> [ComplexMatrix; 2] {
        column_components(&self.l)
    }
}

/// Splits a 4x2 column `sum_k M_k (x) |k>` into its atom blocks `M_k`.
pub fn column_components(column: &ComplexMatrix) -> [ComplexMatrix; 2] {
    assert_eq!(
        column.shape(),
        (4, 2),
        "column_components expects a 4x2 column"
    );
    let pick = |k: usize| ComplexMatrix::from_fn(2, 2, |i, j| column.get(2 * i + k, j));
    [pick(0), pick(1)]
}

/// Inverse of [`column_components`].
pub fn assemble_column(components: &[ComplexMatrix; 2]) -> ComplexMatrix {
    let k0 = Ket::basis(2, 0).as_column();
    let k1 = Ket::basis(2, 1).as_column();
    &components[0].kron(&k0) + &components[1].kron(&k1)
}

pub fn lowering(u: Complex64) -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, u, ZERO, ZERO]).expect("2x2")
}

/// Dilation operators with the phase evaluated at time `t`.
pub fn build_dilation(p: &AtomParams, t: f64) -> DilationOps {
    let j = lowering(p.phase(t));
    let jd = j.adjoint();
    let jjd = &j * &jd;
    let jdj = &jd * &j;

    // S = sum_ab S_ab (x) |a><b| with S_00 = JJ^dag, S_01 = J^dag, S_10 = J, S_11 = J^dag J
    let s = &(&jjd.kron(&apparatus_unit(0, 0)) + &jd.kron(&apparatus_unit(0, 1)))
        + &(&j.kron(&apparatus_unit(1, 0)) + &jdj.kron(&apparatus_unit(1, 1)));

    let embed_zero = ComplexMatrix::identity(2).kron(&Ket::basis(2, 0).as_column());
    let f = &s * &embed_zero;

    let sqrt_nu = p.nu.sqrt();
    let l = assemble_column(&[&jdj * (-sqrt_nu), &j * sqrt_nu]);

    DilationOps { j, s, f, l }
}

/// Right-hand side of the master equation,
/// `-1/2 {L*L, rho} + sum_k L_k rho L_k^dag`.
pub fn lindblad_rhs(rho: &ComplexMatrix, ops: &DilationOps) -> Result<ComplexMatrix> {
    if rho.shape() != (2, 2) {
        return Err(Error::InvalidShape(format!(
            "lindblad_rhs expects a 2x2 density matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    rho.require_hermitian(1e-9)?;
    Ok(dissipator(rho, &ops.l_components()))
}

/// `sum_k L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}` without input checks.
fn dissipator(rho: &ComplexMatrix, components: &[ComplexMatrix; 2]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2, 2);
    for lk in components {
        let lkd = lk.adjoint();
        let jump = &(lk * rho) * &lkd;
        let gain = &lkd * lk;
        let drift = &(&gain * rho) + &(rho * &gain);
        out = &out + &(&jump - &drift.scale(re(0.5)));
    }
    out
}

/// `(-sqrt(nu) J^dag J, sqrt(nu) J)` at time `t`, without building `S`.
fn jump_components(p: &AtomParams, t: f64) -> [ComplexMatrix; 2] {
    let j = lowering(p.phase(t));
    let jdj = &j.adjoint() * &j;
    let sqrt_nu = p.nu.sqrt();
    [&jdj * (-sqrt_nu), &j * sqrt_nu]
}

/// Closed-form averaged decay
/// `rho(t) = |psi><psi| e^{-nu t} + |g><g| (1 - e^{-nu t})`.
pub fn analytic_rho(p: &AtomParams, t: f64) -> Result<ComplexMatrix> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::param(
            "t",
            format!("time must be non-negative, got {t}"),
        ));
    }
    let survival = (-p.nu * t).exp();
    let decayed = -(-p.nu * t).exp_m1();
    Ok(&p.psi().projector().scale(re(survival)) + &ground().projector().scale(re(decayed)))
}

/// Fixed-step RK4 trajectory of the master equation from `rho0` over
/// `[0, t_end]`. The final step is shortened to land on `t_end`.
pub fn integrate_master(
    p: &AtomParams,
    rho0: &ComplexMatrix,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, ComplexMatrix)>> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::param(
            "dt",
            format!("step must be positive, got {dt}"),
        ));
    }
    if dt.is_nan() || dt >= t_end {
        return Err(Error::param(
            "dt",
            format!("step {dt} must be smaller than t_end {t_end}"),
        ));
    }
    rho0.require_hermitian(1e-9)?;
    let steps = (t_end / dt - 1e-9).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut rho = rho0.clone();
    let mut t = 0.0;
    out.push((t, rho.clone()));
    for k in 0..steps {
        let h = if k + 1 == steps { t_end - t } else { dt };
        rho = rk4_step(p, &rho, t, h);
        t = if k + 1 == steps {
            t_end
        } else {
            (k + 1) as f64 * dt
        };
        out.push((t, rho.clone()));
    }
    Ok(out)
}

/// RK4 state at each of `times` (ascending, non-negative), stepping no
/// further than `dt` at a time.
pub fn integrate_master_at(
    p: &AtomParams,
    rho0: &ComplexMatrix,
    times: &[f64],
    dt: f64,
) -> Result<Vec<ComplexMatrix>> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::param(
            "dt",
            format!("step must be positive, got {dt}"),
        ));
    }
    rho0.require_hermitian(1e-9)?;
    let mut out = Vec::with_capacity(times.len());
    let mut rho = rho0.clone();
    let mut t = 0.0;
    for &target in times {
        if target.is_nan() || target < t {
            return Err(Error::param(
                "t_grid",
                "times must be ascending and non-negative",
            ));
        }
        let span = target - t;
        let steps = (span / dt - 1e-9).ceil().max(0.0) as usize;
        for k in 0..steps {
            let h = if k + 1 == steps { target - t } else { dt };
            rho = rk4_step(p, &rho, t, h);
            t += h;
        }
        t = target;
        out.push(rho.clone());
    }
    Ok(out)
}

fn rk4_step(p: &AtomParams, rho: &ComplexMatrix, t: f64, h: f64) -> ComplexMatrix {
    let rhs = |rho: &ComplexMatrix, t: f64| dissipator(rho, &jump_components(p, t));
    let mid = jump_components(p, t + h / 2.0);
    let k1 = rhs(rho, t);
    let k2 = dissipator(&(rho + &k1.scale(re(h / 2.0))), &mid);
    let k3 = dissipator(&(rho + &k2.scale(re(h / 2.0))), &mid);
    let k4 = rhs(&(rho + &k3.scale(re(h))), t + h);
    let incr = &(&k1 + &k2.scale(re(2.0))) + &(&k3.scale(re(2.0)) + &k4);
    rho + &incr.scale(re(h / 6.0))
}

/// One spontaneous application of the isometry, traced over the apparatus:
/// `Tr_k[F rho F*] = JJ^dag rho JJ^dag + J rho J^dag`.
pub fn channel_apply(rho: &ComplexMatrix, ops: &DilationOps) -> Result<ComplexMatrix> {
    rho.require_hermitian(1e-9)?;
    let dilated = &(&ops.f * rho) * &ops.f.adjoint();
    dilated.partial_trace(&[2, 2], 1)
}

/// Survival and decay probabilities of an exponential decay time with rate `nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayLaw {
    /// `P[decay_time > t]`
    pub survived: f64,
    /// `P[decay_time <= t]`
    pub decayed: f64,
}

pub fn spontaneous_decay_law(p: &AtomParams, t: f64) -> Result<DecayLaw> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::param(
            "t",
            format!("time must be non-negative, got {t}"),
        ));
    }
    Ok(DecayLaw {
        survived: (-p.nu * t).exp(),
        decayed: -(-p.nu * t).exp_m1(),
    })
}

/// `rho` as a density matrix from `(p_g, coherence, p_e)`. Test helper shared
/// with the integration tests.
pub fn density(p_g: f64, coherence: Complex64, p_e: f64) -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![re(p_g), coherence, coherence.conj(), re(p_e)]).expect("2x2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::c;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn half_half() -> AtomParams {
        AtomParams::real(1.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 5.0).unwrap()
    }

    fn gx(k: usize) -> Ket {
        ground().kron(&Ket::basis(2, k))
    }

    #[test]
    fn integrator_components_match_dilation() {
        let p = AtomParams::new(2.0, c(0.6, 0.0), c(0.0, 0.8), 0.9, 3.0).unwrap();
        for t in [0.0, 0.4, 2.5] {
            let fast = jump_components(&p, t);
            let full = build_dilation(&p, t).l_components();
            assert_eq!(fast, full);
        }
    }

    #[test]
    fn params_validation() {
        assert!(AtomParams::real(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(AtomParams::real(1.0, 1.0, 0.0, -1.0).is_err());
        assert!(AtomParams::real(1.0, 0.9, 0.1, 1.0).is_err());
        assert!(AtomParams::new(1.0, c(0.6, 0.0), c(0.0, 0.8), 0.3, 1.0).is_ok());
    }

    #[test]
    fn dilation_fixes_ground_vacuum() {
        let ops = build_dilation(&half_half(), 0.0);
        let out = Ket::apply(&ops.s, &gx(0)).unwrap();
        assert_eq!(out, gx(0));
    }

    #[test]
    fn dilation_decays_excited_into_dying_cat() {
        let ops = build_dilation(&half_half(), 0.0);
        let out = Ket::apply(&ops.s, &excited().kron(&Ket::basis(2, 0))).unwrap();
        assert_eq!(out, gx(1));
    }

    #[test]
    fn dilation_is_unitary_and_isometric_for_any_phase() {
        for (eps, t) in [(0.0, 0.0), (1.3, 0.7), (-4.0, 2.2), (10.0, 3.9)] {
            let p = AtomParams::new(2.0, re(0.6), c(0.0, 0.8), eps, 4.0).unwrap();
            let ops = build_dilation(&p, t);
            assert!(ops.s.is_unitary(TOLERANCE), "eps={eps} t={t}");
            assert!(ops.f.isometry_defect() < TOLERANCE);
            let [f0, f1] = ops.f_components();
            assert!(f0.approx_eq(&(&ops.j * &ops.j.adjoint()), 0.0));
            assert!(f1.approx_eq(&ops.j, 0.0));
            assert!(f0.approx_eq(&ground().projector(), 0.0));
        }
    }

    #[test]
    fn lindblad_components() {
        let p = AtomParams::real(4.0, 1.0, 0.0, 1.0).unwrap();
        let ops = build_dilation(&p, 0.0);
        let [l1, l2] = ops.l_components();
        assert!(l1.approx_eq(&excited().projector().scale(re(-2.0)), 0.0));
        assert!(l2.approx_eq(&ops.j.scale(re(2.0)), 0.0));
        assert_eq!(assemble_column(&ops.l_components()), ops.l);
    }

    #[test]
    fn rhs_vanishes_on_ground() {
        let ops = build_dilation(&half_half(), 0.0);
        let out = lindblad_rhs(&ground().projector(), &ops).unwrap();
        assert_eq!(out, ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn rhs_on_excited() {
        let ops = build_dilation(&half_half(), 0.0);
        let out = lindblad_rhs(&excited().projector(), &ops).unwrap();
        let expected = &ground().projector() - &excited().projector();
        assert!(out.approx_eq(&expected, TOLERANCE));
    }

    #[test]
    fn rhs_matches_derivative_of_closed_form_on_pure_states() {
        // d/dt at t = 0 of the closed form: nu (|g><g| - |psi><psi|)
        let nu = 1.7;
        for (a, b) in [
            (re(0.6), c(0.0, 0.8)),
            (c(0.28, 0.96), re(0.0)),
            (re(0.0), c(-0.6, 0.8)),
        ] {
            let p = AtomParams::new(nu, a, b, 0.4, 3.0).unwrap();
            let psi = p.psi().projector();
            let got = lindblad_rhs(&psi, &build_dilation(&p, 0.9)).unwrap();
            let want = (&ground().projector() - &psi).scale(re(nu));
            assert!(got.approx_eq(&want, TOLERANCE));
        }
    }

    #[test]
    fn rhs_rejects_non_hermitian() {
        let ops = build_dilation(&half_half(), 0.0);
        assert!(matches!(
            lindblad_rhs(&ops.j, &ops),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn analytic_rho_values() {
        let p = half_half();
        assert!(analytic_rho(&p, 0.0)
            .unwrap()
            .approx_eq(&p.psi().projector(), 0.0));
        let late = analytic_rho(&p, 50.0).unwrap();
        assert!(late.approx_eq(&ground().projector(), TOLERANCE));
        let mid = analytic_rho(
            &AtomParams::real(1.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 1.0).unwrap(),
            LN_2,
        )
        .unwrap();
        let expected = ComplexMatrix::from_real(2, 2, &[0.75, 0.25, 0.25, 0.25]);
        assert!(mid.approx_eq(&expected, 1e-15));
        assert!(analytic_rho(&p, -0.1).is_err());
    }

    #[test]
    fn integrate_ground_is_constant() {
        let series = integrate_master(&half_half(), &ground().projector(), 1.0, 0.01).unwrap();
        for (_, rho) in &series {
            assert!(rho.approx_eq(&ground().projector(), 0.0));
        }
    }

    #[test]
    fn integrate_matches_closed_form() {
        let p = AtomParams::new(1.0, re(0.6), c(0.0, 0.8), 0.5, 2.0).unwrap();
        let series = integrate_master(&p, &p.psi().projector(), 1.0, 1e-3).unwrap();
        assert_eq!(series.len(), 1001);
        let (t_last, rho_last) = series.last().unwrap();
        assert_eq!(*t_last, 1.0);
        let want = analytic_rho(&p, 1.0).unwrap();
        assert!(rho_last.max_abs_diff(&want).unwrap() < 1e-8);
        for (_, rho) in &series {
            assert!((rho.trace().unwrap().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn integrate_lands_on_t_end_with_short_last_step() {
        let p = half_half();
        let series = integrate_master(&p, &p.psi().projector(), 0.25, 0.1).unwrap();
        let times: Vec<f64> = series.iter().map(|(t, _)| *t).collect();
        assert_eq!(times.len(), 4);
        assert_eq!(times[3], 0.25);
        assert!((times[2] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn integrate_rejects_bad_steps() {
        let p = half_half();
        let rho = p.psi().projector();
        assert!(integrate_master(&p, &rho, 1.0, 1.0).is_err());
        assert!(integrate_master(&p, &rho, 1.0, 0.0).is_err());
        assert!(integrate_master(&p, &rho, 0.0, 1e-3).is_err());
    }

    #[test]
    fn integrate_at_grid() {
        let p = half_half();
        let times = [0.0, 0.3333, 1.0, 2.5];
        let got = integrate_master_at(&p, &p.psi().projector(), &times, 1e-3).unwrap();
        for (t, rho) in times.iter().zip(&got) {
            let want = analytic_rho(&p, *t).unwrap();
            assert!(rho.max_abs_diff(&want).unwrap() < 1e-10, "t={t}");
        }
        assert!(integrate_master_at(&p, &p.psi().projector(), &[1.0, 0.5], 1e-3).is_err());
    }

    #[test]
    fn channel_collapses_to_ground() {
        let ops = build_dilation(&half_half(), 0.3);
        let g = ground().projector();
        for rho in [
            g.clone(),
            excited().projector(),
            ComplexMatrix::identity(2).scale(re(0.5)),
        ] {
            let out = channel_apply(&rho, &ops).unwrap();
            assert!(out.approx_eq(&g, TOLERANCE));
        }
    }

    #[test]
    fn channel_equals_kraus_form() {
        let ops = build_dilation(
            &AtomParams::new(1.0, re(1.0), re(0.0), 2.0, 1.0).unwrap(),
            0.7,
        );
        let rho = density(0.3, c(0.1, -0.2), 0.7);
        let jjd = &ops.j * &ops.j.adjoint();
        let kraus = &(&(&jjd * &rho) * &jjd) + &(&(&ops.j * &rho) * &ops.j.adjoint());
        assert!(channel_apply(&rho, &ops)
            .unwrap()
            .approx_eq(&kraus, TOLERANCE));
    }

    #[test]
    fn decay_law() {
        let p = half_half();
        assert_eq!(
            spontaneous_decay_law(&p, 0.0).unwrap(),
            DecayLaw {
                survived: 1.0,
                decayed: 0.0
            }
        );
        let law = spontaneous_decay_law(&p, LN_2).unwrap();
        assert!((law.survived - 0.5).abs() < 1e-15 && (law.decayed - 0.5).abs() < 1e-15);
        for t in [0.01, 0.5, 3.0, 40.0] {
            let law = spontaneous_decay_law(&p, t).unwrap();
            assert!((law.survived + law.decayed - 1.0).abs() < 1e-15);
        }
    }
}
