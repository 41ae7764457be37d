//! Hand-worked cases. Rates (1,1,0,0) put a pole of F inside the window, so
//! the MPO cases use pole-free rates such as (2,1,0.5,1) instead.

use approx::assert_abs_diff_eq;

use ssep_mpo::model::{assemble_h, build_boundary, build_bulk_h, BoundaryRates, ProcessSpec, Side, YVariant};
use ssep_mpo::mpo::{build_g, build_g_prime, build_rep, build_y_factor, check_sum_constraint, contract, AuxWindow, Direction};
use ssep_mpo::observables::{correlate_direct, density_profile, CorrelatorSpec};
use ssep_mpo::steady::{dehp_mps, dual_bernoulli, oracle};
use ssep_mpo::tensor::{embed_local, frobenius_residual, kron, null_space, Matrix};
use ssep_mpo::{verify, Error};

fn rates(a: f64, b: f64, g: f64, d: f64) -> BoundaryRates {
    BoundaryRates::new(a, b, g, d).unwrap()
}

fn m(rows: &[[f64; 2]]) -> Matrix<f64> {
    Matrix::from_f64_rows(rows)
}

#[test]
fn kron_of_y_with_itself() {
    let y = m(&[[-1.0, 1.0], [1.0, 0.0]]);
    let yy = kron(&y, &y).unwrap();
    assert_eq!(yy[(0, 0)], 1.0);
    assert_eq!(yy.shape(), (4, 4));
}

#[test]
fn embedding_left_boundary() {
    let a_l = build_boundary::<f64>(Side::Left, &rates(1.0, 1.0, 0.0, 0.0));
    assert_eq!(a_l, m(&[[-1.0, 0.0], [1.0, 0.0]]));
    let full = embed_local(&a_l, 1, 1, 2, 2).unwrap();
    assert_eq!(full[(0, 0)], -1.0);
    assert_eq!(full[(1, 1)], -1.0);
    assert_eq!(full[(2, 0)], 1.0);
    let h = build_bulk_h::<f64>();
    assert_eq!(embed_local(&h, 1, 2, 2, 2).unwrap(), h);
    assert!(matches!(embed_local(&h, 2, 2, 2, 2), Err(Error::Index(_))));
}

#[test]
fn single_site_null_vector() {
    let h = assemble_h::<f64>(&ProcessSpec::non_equilibrium(1, rates(1.0, 1.0, 0.0, 0.0))).unwrap();
    assert_eq!(h, m(&[[-1.0, 1.0], [1.0, -1.0]]));
    let basis = null_space(&h, 1e-10).unwrap();
    assert_eq!(basis.len(), 1);
    assert_abs_diff_eq!(basis[0].0[0].abs(), basis[0].0[1].abs(), epsilon = 1e-14);
    assert!(null_space(&Matrix::<f64>::identity(2), 1e-10).unwrap().is_empty());
    assert_eq!(null_space(&Matrix::<f64>::zeros(2, 2), 1e-10).unwrap().len(), 2);
}

#[test]
fn dual_of_pure_extraction_keeps_the_empty_lattice() {
    let h = assemble_h::<f64>(&ProcessSpec::dual(2, rates(1.0, 1.0, 0.0, 0.0), YVariant::YR)).unwrap();
    assert!(h.column_sums().iter().all(|s| *s == 0.0));
    assert!(h.matvec(&ssep_mpo::Vector::basis(4, 0)).unwrap().0.iter().all(|x| *x == 0.0));
}

#[test]
fn representation_at_n_zero() {
    let rep = build_rep::<f64>(&rates(1.0, 1.0, 0.0, 0.0), AuxWindow::for_mps(2), false).unwrap();
    let i0 = rep.window.index_of(0).unwrap();
    assert_eq!(rep.r[i0], 2.0);
    assert_eq!(rep.d[(i0, i0)], 1.0);
    assert_eq!(rep.e[(i0, i0)], -1.0);
    assert_eq!(rep.f[(i0, i0 + 1)], 0.5);
    assert_eq!(rep.e[(i0 + 1, i0)], 2.0);
    assert_eq!(rep.d[(i0 + 1, i0)], 0.0);
    assert!(matches!(
        build_rep::<f64>(&rates(1.0, 1.0, 1.0, 1.0), AuxWindow::for_mps(2), false),
        Err(Error::EquilibriumRates)
    ));
    assert!(matches!(build_g::<f64>(&rates(1.0, 1.0, 0.0, 0.0), 2, YVariant::YR), Err(Error::ZeroRn { n: -2 })));
}

#[test]
fn negated_representation() {
    let rep = build_rep::<f64>(&rates(1.0, 1.0, 0.0, 0.0), AuxWindow::new(-1, 1).unwrap(), true).unwrap();
    let i0 = rep.window.index_of(0).unwrap();
    assert_eq!(rep.d[(i0, i0)], -1.0);
}

#[test]
fn y_factors() {
    let r = rates(1.0, 1.0, 0.0, 0.0);
    let yr = build_y_factor::<f64>(&r, YVariant::YR).unwrap();
    assert_eq!(yr, m(&[[-1.0, 1.0], [1.0, 0.0]]));
    assert_eq!(yr.inverse().unwrap(), m(&[[0.0, 1.0], [1.0, 1.0]]));
    assert_eq!(build_y_factor::<f64>(&r, YVariant::YL).unwrap(), m(&[[-1.0, 0.0], [1.0, 1.0]]));
}

#[test]
fn intertwining_examples() {
    let r = rates(2.0, 1.0, 0.5, 1.0);
    for n in 1..=3 {
        for v in [YVariant::YR, YVariant::YL] {
            for d in [Direction::NeToE, Direction::EToNe] {
                let rep = verify::check_intertwining::<f64>(&r, n, d, v, 1e-10).unwrap();
                assert!(rep.passed, "N={n} {v:?} {d:?}: {}", rep.residual);
            }
        }
    }
    let rep = verify::check_intertwining::<f64>(&rates(2.0, 1.0, 0.5, 1.0), 4, Direction::NeToE, YVariant::YL, 1e-9).unwrap();
    assert!(rep.passed);
    let rep = verify::check_intertwining::<f64>(&rates(2.5, 1.0, 0.0, 1.0), 2, Direction::EToNe, YVariant::YR, 1e-10).unwrap();
    assert!(rep.passed);
    assert!(matches!(
        verify::check_intertwining::<f64>(&rates(1.0, 1.0, 1.0, 1.0), 2, Direction::NeToE, YVariant::YR, 1e-9),
        Err(Error::EquilibriumRates)
    ));
}

#[test]
fn boundary_exchange_examples() {
    for (r, d) in [(rates(2.0, 1.0, 0.5, 1.0), Direction::NeToE), (rates(2.5, 1.0, 0.0, 1.0), Direction::EToNe)] {
        let rep = verify::check_boundary_exchange::<f64>(&r, 2, d, YVariant::YR, 1e-12).unwrap();
        assert!(rep.passed, "{}", rep.residual);
    }
}

#[test]
fn composed_sum_constraint() {
    assert!(check_sum_constraint(&rates(2.0, 1.0, 0.0, 1.0), &rates(1.0, 1.0, 1.0, 1.0)).is_ok());
    assert!(matches!(
        check_sum_constraint(&rates(2.0, 1.0, 0.0, 1.0), &rates(1.0, 1.0, 0.0, 1.0)),
        Err(Error::ConstraintViolated(_))
    ));
    let rep = verify::check_composed_intertwining(&rates(2.0, 1.0, 0.5, 1.0), &rates(1.5, 1.2, 1.0, 0.8), 3, YVariant::YR, 1e-9).unwrap();
    assert!(rep.passed, "{}", rep.residual);
}

#[test]
fn g_and_g_prime_share_shape() {
    let r = rates(2.0, 1.0, 0.5, 1.0);
    let g = contract(&build_g::<f64>(&r, 2, YVariant::YR).unwrap()).unwrap();
    let gp = contract(&build_g_prime::<f64>(&r, 2, YVariant::YR).unwrap()).unwrap();
    assert_eq!(g.shape(), (4, 4));
    assert_eq!(gp.shape(), (4, 4));
    assert!(g.all_finite() && gp.all_finite());
}

#[test]
fn symmetric_single_site_density() {
    let r = rates(1.0, 1.0, 0.0, 0.0);
    let w = dehp_mps::<f64>(&r, 1).unwrap();
    assert_abs_diff_eq!(w.vector.0[1], 0.5, epsilon = 1e-15);
    let spec = CorrelatorSpec::new(vec![1], r, 1).unwrap();
    assert_abs_diff_eq!(correlate_direct(&spec).unwrap(), 0.5, epsilon = 1e-12);
}

#[test]
fn symmetric_profile_is_reflection_symmetric() {
    let r = rates(1.0, 1.0, 0.0, 0.0);
    for n in 1..=5 {
        let p = density_profile(&r, n).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(p[i] + p[n - 1 - i], 1.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn full_lattice_correlator_is_full_occupation() {
    let r = rates(1.0, 0.7, 0.0, 0.0);
    let n = 3;
    let spec = CorrelatorSpec::new((1..=n).collect(), r, n).unwrap();
    let ss = oracle(&ProcessSpec::non_equilibrium(n, r)).unwrap();
    assert_abs_diff_eq!(correlate_direct(&spec).unwrap(), ss.vector.0[(1 << n) - 1], epsilon = 1e-12);
}

#[test]
fn dual_bernoulli_cases() {
    let empty = dual_bernoulli::<f64>(&rates(2.0, 1.0, 0.5, 0.0), 3, YVariant::YR).unwrap();
    assert_abs_diff_eq!(empty.vector.0[0], 1.0, epsilon = 1e-15);
    let uniform = dual_bernoulli::<f64>(&rates(2.0, 1.0, 0.5, 1.0), 2, YVariant::YR).unwrap();
    for p in &uniform.vector.0 {
        assert_abs_diff_eq!(*p, 0.25, epsilon = 1e-15);
    }
}

#[test]
fn oracle_mass_and_positivity() {
    let ss = oracle(&ProcessSpec::non_equilibrium(4, rates(0.7, 2.1, 1.3, 0.4))).unwrap();
    assert_abs_diff_eq!(ss.vector.sum(), 1.0, epsilon = 1e-12);
    assert!(ss.vector.0.iter().all(|p| *p >= -1e-12));
}

#[test]
fn spectra_contain_zero_and_are_stable() {
    let rep = verify::check_spectra(&rates(2.0, 1.0, 0.5, 1.0), 4, YVariant::YR, 1e-8).unwrap();
    assert!(rep.passed, "{}", rep.residual);
    let h = assemble_h::<f64>(&ProcessSpec::non_equilibrium(4, rates(2.0, 1.0, 0.5, 1.0))).unwrap();
    let ev = h.eigenvalues().unwrap();
    assert!(ev.iter().any(|z| z.norm() < 1e-10));
    assert!(ev.iter().all(|z| z.re <= 1e-10));
}

#[test]
fn frobenius_distance_examples() {
    let i2 = Matrix::<f64>::identity(2);
    assert_eq!(frobenius_residual(&i2, &i2).unwrap(), 0.0);
    let z = Matrix::<f64>::zeros(2, 2);
    assert_abs_diff_eq!(i2.sub(&z).unwrap().frobenius_norm(), 2f64.sqrt(), epsilon = 1e-15);
    let h = build_bulk_h::<f64>();
    assert_eq!(frobenius_residual(&h, &h.transpose()).unwrap(), 0.0);
}
