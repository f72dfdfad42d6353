use eventum_core::atom::AtomParams;
use eventum_core::chainspace::{
    class_projector_eval, expectation_quadrature, number_operator_eval, psi_t_closed_form,
    psi_t_eval, uniform_chain, Chain, Observable, ObservationClass,
};
use eventum_core::parallel::stream_rng;
use eventum_core::qmat::{c, ComplexMatrix};
use rand::Rng;

fn random_params(rng: &mut impl Rng, nu: f64, r: f64) -> AtomParams {
    let theta = rng.random::<f64>() * std::f64::consts::FRAC_PI_2;
    let phase = rng.random::<f64>() * std::f64::consts::TAU;
    let beta = c(theta.sin() * phase.cos(), theta.sin() * phase.sin());
    AtomParams::new(
        nu,
        c(theta.cos(), 0.0),
        beta,
        rng.random::<f64>() * 2.0 - 1.0,
        r,
    )
    .unwrap()
}

#[test]
fn generic_product_matches_closed_form_on_random_chains() {
    let mut rng = stream_rng(8, 0);
    for _ in 0..100 {
        let p = random_params(&mut rng, 1.5, 4.0);
        let n = rng.random_range(0..8);
        let chain = uniform_chain(n, 4.0, 4.0, &mut rng);
        let t = rng.random::<f64>() * 4.0;
        let generic = psi_t_eval(&p, t, &chain).unwrap();
        let closed = psi_t_closed_form(&p, t, &chain).unwrap();
        assert!(generic.max_abs_diff(&closed) < 1e-12);
    }
}

#[test]
fn counting_identities_on_grid() {
    let mut rng = stream_rng(9, 0);
    for nu in [0.5, 1.0, 2.0, 3.0, 4.0] {
        for t in [0.0, 0.3, 1.0, 2.0, 4.0] {
            for _ in 0..5 {
                let p = random_params(&mut rng, nu, 4.0);
                let q = |obs: Observable| expectation_quadrature(&obs, &p, t, 60).unwrap().value;
                let n0 = q(Observable::Number(0));
                let n1 = q(Observable::Number(1));
                let pi1 = q(Observable::Class(ObservationClass::FirstOne));
                assert!((n1 - pi1).abs() < 1e-12);
                assert!(
                    (n0 + n1 - nu * t).abs() < 1e-10,
                    "nu={nu} t={t}: {}",
                    n0 + n1
                );
            }
        }
    }
}

#[test]
fn observations_commute_with_atom_properties() {
    let chain = Chain::new(vec![0.1, 0.4, 0.9, 1.3], 2.0).unwrap();
    let x = ComplexMatrix::new(
        2,
        2,
        vec![c(0.3, 0.0), c(0.2, -0.7), c(0.2, 0.7), c(-1.1, 0.0)],
    )
    .unwrap();
    let dim = 1 << chain.len();
    let x_ext = x.kron(&ComplexMatrix::identity(dim));
    let mut ops = vec![
        number_operator_eval(0, 1.0, &chain).unwrap(),
        number_operator_eval(1, 1.0, &chain).unwrap(),
    ];
    for class in ObservationClass::ALL {
        ops.push(class_projector_eval(class, 1.0, &chain));
        ops.push(class_projector_eval(class, 0.5, &chain));
    }
    let mats: Vec<ComplexMatrix> = ops
        .iter()
        .map(|op| ComplexMatrix::identity(2).kron(&op.to_matrix().unwrap()))
        .collect();
    for a in &mats {
        assert_eq!(a.commutator(&x_ext).unwrap().max_abs(), 0.0);
        for b in &mats {
            assert_eq!(a.commutator(b).unwrap().max_abs(), 0.0);
        }
    }
}

#[test]
fn observables_have_non_negative_spectra() {
    let chain = Chain::new(vec![0.2, 0.5, 0.7], 1.0).unwrap();
    for op in [
        number_operator_eval(0, 0.6, &chain).unwrap(),
        class_projector_eval(ObservationClass::AllZero, 0.6, &chain),
    ] {
        let eig = op.to_matrix().unwrap().hermitian_eigenvalues().unwrap();
        assert!(eig.iter().all(|&l| l >= 0.0));
    }
}

#[test]
fn counting_expectations_ignore_the_phase_rate() {
    let mut rng = stream_rng(10, 0);
    for _ in 0..5 {
        let p = random_params(&mut rng, 1.0, 5.0);
        let (alpha, beta) = (p.alpha(), p.beta());
        let still = AtomParams::new(1.0, alpha, beta, 0.0, 5.0).unwrap();
        for name in Observable::NAMES {
            let obs: Observable = name.parse().unwrap();
            for t in [0.3, 1.0, 4.0] {
                let a = expectation_quadrature(&obs, &p, t, 40).unwrap().value;
                let b = expectation_quadrature(&obs, &still, t, 40).unwrap().value;
                assert!((a - b).abs() < 1e-12, "{name} at t={t}: {a} vs {b}");
            }
        }
    }
}
