//! Pseudo-Hilbert (triangular) representation of the dilation.
//!
//! The fiber `C (+) k (+) C` with `k = C^2` carries the indefinite metric
//! `eta` that swaps the two scalar corners. Operators on the atom are carried
//! along by [`lift`], which tensors every block with the 2x2 identity; the
//! extended layout is `[h (2), h (x) k (4, atom slowest), h (2)]`.

use crate::atom::{assemble_column, build_dilation, column_components, lindblad_rhs, AtomParams};
use crate::error::{Error, Result};
use crate::qmat::{re, ComplexMatrix, Ket, ONE, TOLERANCE, ZERO};

/// Indefinite metric with its adjoint twist `K* = eta K^dag eta`.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoMetric {
    eta: ComplexMatrix,
}

impl PseudoMetric {
    /// `eta` on the 4-dimensional fiber.
    pub fn fiber() -> Self {
        let mut eta = ComplexMatrix::zeros(4, 4);
        eta[(0, 3)] = ONE;
        eta[(1, 1)] = ONE;
        eta[(2, 2)] = ONE;
        eta[(3, 0)] = ONE;
        Self { eta }
    }

    /// `eta` on the atom-extended 8-dimensional space.
    pub fn extended() -> Self {
        Self {
            eta: lift(&Self::fiber().eta).expect("4x4 metric"),
        }
    }

    pub fn eta(&self) -> &ComplexMatrix {
        &self.eta
    }

    pub fn dim(&self) -> usize {
        self.eta.rows()
    }

    pub fn star(&self, k: &ComplexMatrix) -> Result<ComplexMatrix> {
        star(k, &self.eta)
    }

    /// `max |K* K - I|`.
    pub fn star_unitarity_defect(&self, k: &ComplexMatrix) -> Result<f64> {
        self.star(k)?
            .matmul(k)?
            .max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }
}

/// `eta K^dag eta`.
pub fn star(k: &ComplexMatrix, eta: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !k.is_square() {
        return Err(Error::NotSquare {
            op: "star",
            rows: k.rows(),
            cols: k.cols(),
        });
    }
    eta.matmul(&k.adjoint())?.matmul(eta)
}

/// Fiber block boundaries `[C, k, C]`.
const FIBER_BLOCKS: [(usize, usize); 3] = [(0, 1), (1, 2), (3, 1)];

/// Tensors each block of a 4x4 fiber operator with the atom identity.
pub fn lift(k: &ComplexMatrix) -> Result<ComplexMatrix> {
    if k.shape() != (4, 4) {
        return Err(Error::InvalidShape(format!(
            "lift expects a 4x4 fiber operator, got {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    let id = ComplexMatrix::identity(2);
    let grid: Vec<Vec<ComplexMatrix>> = FIBER_BLOCKS
        .iter()
        .map(|&(r0, rn)| {
            FIBER_BLOCKS
                .iter()
                .map(|&(c0, cn)| id.kron(&k.block(r0, c0, rn, cn)))
                .collect()
        })
        .collect();
    ComplexMatrix::from_blocks(&grid)
}

/// Displacement `xi = sqrt(nu)|0>` as a 2x1 column.
pub fn displacement(nu: f64) -> ComplexMatrix {
    Ket::basis(2, 0).as_column().scale(re(nu.sqrt()))
}

/// Weyl operator `(1, -xi*, -xi*xi/2; 0, I, xi; 0, 0, 1)` on the fiber.
pub fn weyl_z(xi: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_column(xi, 2, "xi")?;
    let xid = xi.adjoint();
    let corner = xid.matmul(xi)?.scale(re(-0.5));
    triangle(
        &ComplexMatrix::identity(1),
        &xid.scale(re(-1.0)),
        &corner,
        &ComplexMatrix::identity(2),
        xi,
    )
}

/// `[[e, a, b], [0, m, c], [0, 0, e]]` with `e` on the scalar corners.
fn triangle(
    e: &ComplexMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    m: &ComplexMatrix,
    c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let (n, k) = (e.rows(), m.rows());
    ComplexMatrix::from_blocks(&[
        vec![e.clone(), a.clone(), b.clone()],
        vec![ComplexMatrix::zeros(k, n), m.clone(), c.clone()],
        vec![
            ComplexMatrix::zeros(n, n),
            ComplexMatrix::zeros(n, k),
            e.clone(),
        ],
    ])
}

/// `blockdiag(I, S, I)` on the extended space.
pub fn interaction_block(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_square(s, 4, "S")?;
    let id = ComplexMatrix::identity(2);
    triangle(
        &id,
        &ComplexMatrix::zeros(2, 4),
        &ComplexMatrix::zeros(2, 2),
        s,
        &ComplexMatrix::zeros(4, 2),
    )
}

/// `L = (S - I)(I (x) xi)`, a 4x2 column on atom (x) k.
pub fn jump_column(s: &ComplexMatrix, xi: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_square(s, 4, "S")?;
    check_column(xi, 2, "xi")?;
    let shifted = s.try_sub(&ComplexMatrix::identity(4))?;
    shifted.matmul(&ComplexMatrix::identity(2).kron(xi))
}

/// `Z* blockdiag(I, S, I) Z` on the extended space and its jump column.
#[derive(Clone, Debug)]
pub struct TransformedInteraction {
    pub matrix: ComplexMatrix,
    /// Upper-right block of the middle row.
    pub l: ComplexMatrix,
}

impl TransformedInteraction {
    /// Deviation from `(1, L*, -L*L/2; 0, S, L; 0, 0, 1)`.
    pub fn block_form_deviation(&self, s: &ComplexMatrix) -> Result<f64> {
        let ld = self.l.adjoint();
        let corner = ld.matmul(&self.l)?.scale(re(-0.5));
        let expected = triangle(&ComplexMatrix::identity(2), &ld, &corner, s, &self.l)?;
        self.matrix.max_abs_diff(&expected)
    }
}

pub fn transform_interaction(
    s: &ComplexMatrix,
    xi: &ComplexMatrix,
) -> Result<TransformedInteraction> {
    let z = lift(&weyl_z(xi)?)?;
    let metric = PseudoMetric::extended();
    let matrix = metric
        .star(&z)?
        .matmul(&interaction_block(s)?)?
        .matmul(&z)?;
    let l = matrix.block(2, 6, 4, 2);
    Ok(TransformedInteraction { matrix, l })
}

/// `G = (I, -L*, -L*L/2; 0, I, L; 0, 0, I)` on the extended space.
pub fn generator_g(l: &ComplexMatrix) -> Result<ComplexMatrix> {
    if l.shape() != (4, 2) {
        return Err(Error::InvalidShape(format!(
            "L must be 4x2, got {}x{}",
            l.rows(),
            l.cols()
        )));
    }
    let ld = l.adjoint();
    let corner = ld.matmul(l)?.scale(re(-0.5));
    triangle(
        &ComplexMatrix::identity(2),
        &ld.scale(re(-1.0)),
        &corner,
        &ComplexMatrix::identity(4),
        l,
    )
}

/// Gauge vector `(0, 0, 1)^T` on the fiber.
pub fn gauge_vector() -> ComplexMatrix {
    Ket::basis(4, 3).as_column()
}

/// Gauge vector tensored with the atom identity, 8x2.
pub fn gauge_vector_extended() -> ComplexMatrix {
    ComplexMatrix::from_fn(8, 2, |i, j| if i == 6 + j { ONE } else { ZERO })
}

/// `F = G xi_0 = (-L*L/2; L; I)`, 8x2.
pub fn star_isometry(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    g.matmul(&gauge_vector_extended())
}

/// `F^{dag *} (rho (+) rho (x) I (+) rho) F^dag` where `F^dag` is `F` with
/// every atom entry replaced by its adjoint.
pub fn star_quadratic_rhs(rho: &ComplexMatrix, l: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_square(rho, 2, "rho")?;
    rho.require_hermitian(1e-9)?;
    let f = star_isometry(&generator_g(l)?)?;
    let top = f.block(0, 0, 2, 2).adjoint();
    let [m0, m1] = column_components(&f.block(2, 0, 4, 2));
    let middle = assemble_column(&[m0.adjoint(), m1.adjoint()]);
    let f_dag =
        ComplexMatrix::from_blocks(&[vec![top], vec![middle], vec![ComplexMatrix::identity(2)]])?;
    let f_dag_star = f_dag.adjoint().matmul(PseudoMetric::extended().eta())?;
    let id = ComplexMatrix::identity(2);
    let carrier = triangle(
        rho,
        &ComplexMatrix::zeros(2, 4),
        &ComplexMatrix::zeros(2, 2),
        &rho.kron(&id),
        &ComplexMatrix::zeros(4, 2),
    )?;
    f_dag_star.matmul(&carrier)?.matmul(&f_dag)
}

/// One named identity with its numerical deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub deviation: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BelavkinReport {
    pub nu: f64,
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
}

impl BelavkinReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_S_UNITARY: &str = "S unitary";
pub const CHECK_Z_STAR_UNITARY: &str = "Z star-unitary";
pub const CHECK_TRANSFORM_STAR_UNITARY: &str = "Z*SZ star-unitary";
pub const CHECK_TRANSFORM_BLOCKS: &str = "Z*SZ block form";
pub const CHECK_G_STAR_UNITARY: &str = "G star-unitary";
pub const CHECK_SHIFT_IDENTITY: &str = "(S-I)^dag(S-I) = 2(I-S)";
pub const CHECK_L_MATCH: &str = "L = (S-I)xi matches dilation L";
pub const CHECK_GAUGE_NULL: &str = "gauge vector star-null";
pub const CHECK_STAR_QUADRATIC: &str = "star-quadratic generator = Lindblad";

/// Runs every identity at rate `p.nu()` with the dilation taken at time `t`.
/// `perturbation` adds a real offset to one entry of `S` as a negative
/// control.
pub fn belavkin_report(
    p: &AtomParams,
    t: f64,
    perturbation: Option<f64>,
) -> Result<BelavkinReport> {
    let ops = build_dilation(p, t);
    let mut s = ops.s.clone();
    if let Some(delta) = perturbation {
        s[(0, 1)] += re(delta);
    }
    let xi = displacement(p.nu());
    let fiber = PseudoMetric::fiber();
    let ext = PseudoMetric::extended();
    let id4 = ComplexMatrix::identity(4);

    let mut checks = Vec::new();
    let mut push = |name, deviation: f64| {
        checks.push(IdentityCheck {
            name,
            deviation,
            passed: deviation <= TOLERANCE,
        })
    };

    push(CHECK_S_UNITARY, s.isometry_defect());
    push(
        CHECK_Z_STAR_UNITARY,
        fiber.star_unitarity_defect(&weyl_z(&xi)?)?,
    );

    let transformed = transform_interaction(&s, &xi)?;
    push(
        CHECK_TRANSFORM_STAR_UNITARY,
        ext.star_unitarity_defect(&transformed.matrix)?,
    );
    push(
        CHECK_TRANSFORM_BLOCKS,
        transformed.block_form_deviation(&s)?,
    );

    let shifted = s.try_sub(&id4)?;
    let lhs = shifted.adjoint().matmul(&shifted)?;
    let rhs = id4.try_sub(&s)?.scale(re(2.0));
    push(CHECK_SHIFT_IDENTITY, lhs.max_abs_diff(&rhs)?);

    let l = jump_column(&s, &xi)?;
    push(
        CHECK_L_MATCH,
        l.max_abs_diff(&ops.l)?
            .max(transformed.l.max_abs_diff(&ops.l)?),
    );

    push(
        CHECK_G_STAR_UNITARY,
        ext.star_unitarity_defect(&generator_g(&l)?)?,
    );

    let gauge = gauge_vector();
    let null = gauge.adjoint().matmul(fiber.eta())?.matmul(&gauge)?;
    push(CHECK_GAUGE_NULL, null.max_abs());

    let mut worst: f64 = 0.0;
    for rho in probe_states(p) {
        let star_rhs = star_quadratic_rhs(&rho, &l)?;
        worst = worst.max(star_rhs.max_abs_diff(&lindblad_rhs(&rho, &ops)?)?);
    }
    push(CHECK_STAR_QUADRATIC, worst);

    Ok(BelavkinReport {
        nu: p.nu(),
        tolerance: TOLERANCE,
        checks,
    })
}

/// Fixed density matrices used by the report.
fn probe_states(p: &AtomParams) -> Vec<ComplexMatrix> {
    let psi = p.psi().projector();
    let plus = Ket::new(vec![re(0.6), crate::qmat::c(0.0, 0.8)])
        .expect("2-dim")
        .projector();
    vec![
        Ket::basis(2, 0).projector(),
        Ket::basis(2, 1).projector(),
        ComplexMatrix::identity(2).scale(re(0.5)),
        psi,
        plus,
    ]
}

fn check_square(m: &ComplexMatrix, n: usize, what: &str) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::InvalidShape(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn check_column(m: &ComplexMatrix, n: usize, what: &str) -> Result<()> {
    if m.shape() != (n, 1) {
        return Err(Error::InvalidShape(format!(
            "{what} must be {n}x1, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::density;
    use crate::qmat::c;

    fn params(nu: f64) -> AtomParams {
        AtomParams::new(nu, c(0.6, 0.0), c(0.0, 0.8), 0.4, 5.0).unwrap()
    }

    #[test]
    fn metric_is_involutive() {
        for m in [PseudoMetric::fiber(), PseudoMetric::extended()] {
            let eta = m.eta();
            assert_eq!(eta.adjoint(), *eta);
            assert_eq!(eta * eta, ComplexMatrix::identity(m.dim()));
            assert_eq!(m.star(eta).unwrap(), *eta);
        }
    }

    #[test]
    fn star_is_an_anti_homomorphism() {
        let m = PseudoMetric::fiber();
        let a = ComplexMatrix::from_fn(4, 4, |i, j| c(i as f64 - j as f64, 0.3 * (i * j) as f64));
        let b = ComplexMatrix::from_fn(4, 4, |i, j| c((i + 2 * j) as f64 * 0.1, -(i as f64)));
        assert_eq!(m.star(&m.star(&a).unwrap()).unwrap(), a);
        let ab = m.star(&(&a * &b)).unwrap();
        let ba = &m.star(&b).unwrap() * &m.star(&a).unwrap();
        assert!(ab.max_abs_diff(&ba).unwrap() < 1e-12);
        assert!(m.star(&ComplexMatrix::zeros(4, 3)).is_err());
    }

    #[test]
    fn weyl_operator() {
        let z = weyl_z(&displacement(1.0)).unwrap();
        assert_eq!(z.get(0, 3), re(-0.5));
        assert_eq!(z.get(0, 1), re(-1.0));
        assert_eq!(z.get(1, 3), re(1.0));
        for nu in [0.25, 1.0, 4.0] {
            let z = weyl_z(&displacement(nu)).unwrap();
            assert!(PseudoMetric::fiber().star_unitarity_defect(&z).unwrap() < 1e-12);
        }
        assert_eq!(
            weyl_z(&ComplexMatrix::zeros(2, 1)).unwrap(),
            ComplexMatrix::identity(4)
        );
    }

    #[test]
    fn lift_keeps_atom_slowest_in_the_middle() {
        let k = ComplexMatrix::from_fn(4, 4, |i, j| re((4 * i + j) as f64));
        let big = lift(&k).unwrap();
        let middle = big.block(2, 2, 4, 4);
        assert_eq!(
            middle,
            ComplexMatrix::identity(2).kron(&k.block(1, 1, 2, 2))
        );
        assert_eq!(
            big.block(0, 6, 2, 2),
            ComplexMatrix::identity(2).scale(k.get(0, 3))
        );
    }

    #[test]
    fn transform_recovers_dilation_column() {
        for nu in [0.25, 1.0, 4.0] {
            let p = params(nu);
            let ops = build_dilation(&p, 1.3);
            let tr = transform_interaction(&ops.s, &displacement(nu)).unwrap();
            assert!(tr.l.max_abs_diff(&ops.l).unwrap() < 1e-12);
            assert!(tr.block_form_deviation(&ops.s).unwrap() < 1e-12);
            let [l0, l1] = ops.l_components();
            let jdj = &ops.j.adjoint() * &ops.j;
            assert!(l0.max_abs_diff(&(&jdj * -nu.sqrt())).unwrap() < 1e-15);
            assert!(l1.max_abs_diff(&(&ops.j * nu.sqrt())).unwrap() < 1e-15);
        }
    }

    #[test]
    fn zero_displacement_leaves_s_in_place() {
        let ops = build_dilation(&params(1.0), 0.0);
        let tr = transform_interaction(&ops.s, &ComplexMatrix::zeros(2, 1)).unwrap();
        assert_eq!(tr.matrix, interaction_block(&ops.s).unwrap());
        assert_eq!(
            generator_g(&ComplexMatrix::zeros(4, 2)).unwrap(),
            ComplexMatrix::identity(8)
        );
    }

    #[test]
    fn generator_and_gauge() {
        let p = params(4.0);
        let ops = build_dilation(&p, 0.2);
        let g = generator_g(&ops.l).unwrap();
        assert!(PseudoMetric::extended().star_unitarity_defect(&g).unwrap() < 1e-12);
        let f = star_isometry(&g).unwrap();
        let ld = ops.l.adjoint();
        assert!(
            f.block(0, 0, 2, 2)
                .max_abs_diff(&(&(&ld * &ops.l) * -0.5))
                .unwrap()
                < 1e-15
        );
        assert_eq!(f.block(2, 0, 4, 2), ops.l);
        assert_eq!(f.block(6, 0, 2, 2), ComplexMatrix::identity(2));
        let xi0 = gauge_vector();
        let null = &(&xi0.adjoint() * PseudoMetric::fiber().eta()) * &xi0;
        assert_eq!(null.max_abs(), 0.0);
        assert!(xi0.adjoint().matmul(&xi0).unwrap().get(0, 0) == ONE);
    }

    #[test]
    fn star_quadratic_examples() {
        let p = params(1.0);
        let ops = build_dilation(&p, 0.0);
        let g = Ket::basis(2, 0).projector();
        assert!(star_quadratic_rhs(&g, &ops.l).unwrap().max_abs() < 1e-15);
        let e = Ket::basis(2, 1).projector();
        let out = star_quadratic_rhs(&e, &ops.l).unwrap();
        assert!(out.max_abs_diff(&density(1.0, ZERO, -1.0)).unwrap() < 1e-15);
    }

    #[test]
    fn star_quadratic_matches_lindblad() {
        for nu in [0.25, 1.0, 4.0] {
            let p = params(nu);
            let ops = build_dilation(&p, 0.9);
            for k in 0..20 {
                let x = k as f64 / 20.0;
                let rho = density(x, c(0.3 * (1.0 - x), 0.1), 1.0 - x);
                let a = star_quadratic_rhs(&rho, &ops.l).unwrap();
                let b = lindblad_rhs(&rho, &ops).unwrap();
                assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn report_passes_and_catches_perturbation() {
        for nu in [0.25, 1.0, 4.0] {
            let report = belavkin_report(&params(nu), 0.5, None).unwrap();
            assert!(report.all_passed(), "{report:?}");
            assert_eq!(report.checks.len(), 9);
        }
        let bad = belavkin_report(&params(1.0), 0.5, Some(1e-3)).unwrap();
        assert!(!bad.all_passed());
        assert!(!bad.get(CHECK_S_UNITARY).unwrap().passed);
        assert!(bad.get(CHECK_Z_STAR_UNITARY).unwrap().passed);
    }
}
