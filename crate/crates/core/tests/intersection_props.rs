mod common;

use arithlat::intersection::{self, CosetMatch, DoubleCoset, SignOutcome, TorusDirection};
use arithlat::lattice::{self, LatticeElement, LatticeSpec};
use arithlat::modring::Modulus;
use arithlat::qfield::{u0, u0_pow};
use arithlat::{FieldElement, FieldMatrix};
use common::{block_diagonal_members, orientation_oracle, random_element, random_rotation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn diag3(a: i64, b: i64, c: i64) -> FieldMatrix {
    FieldMatrix::diag(&[FieldElement::from_int(a), FieldElement::from_int(b), FieldElement::from_int(c)])
}

#[test]
fn orientation_agrees_with_adjoint_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [3usize, 4] {
        let spec = LatticeSpec::new(n).unwrap();
        let mut seen = [0usize; 2];
        for a in block_diagonal_members(&mut rng, n, 60) {
            let got = intersection::orientation_preserving(&a, &spec).unwrap();
            assert_eq!(got, orientation_oracle(&a), "{a}");
            seen[got as usize] += 1;
        }
        // random block-diagonal matrices over L with det 1
        for _ in 0..60 {
            let mut block = FieldMatrix::zeros(n - 1, n - 1);
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    block.set(i, j, random_element(&mut rng, 5, 3));
                }
            }
            let Ok(det) = block.det() else { continue };
            if det.is_zero() {
                continue;
            }
            let z = FieldMatrix::diag(&[det.inv().unwrap()]);
            let a = FieldMatrix::block_diag(&block, &z);
            let got = intersection::orientation_preserving(&a, &spec).unwrap();
            assert_eq!(got, orientation_oracle(&a), "{a}");
            seen[got as usize] += 1;
        }
        if n % 2 == 1 {
            assert!(seen[0] > 0 && seen[1] > 0, "both outcomes exercised: {seen:?}");
        } else {
            assert_eq!(seen[0], 0);
        }
    }
}

#[test]
fn kernel_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = intersection::default_torus_direction();
    let gammas = [FieldMatrix::identity(3), intersection::k0()];
    for a0 in block_diagonal_members(&mut rng, 3, 10) {
        for gamma in &gammas {
            let base = intersection::build_star_system(gamma, &t).unwrap();
            let moved = intersection::build_star_system(&(&a0 * gamma), &t).unwrap();
            let b1 = base.solution_basis();
            let b2 = moved.solution_basis();
            assert_eq!(b1.len(), b2.len());
            // a₀·span(b1) = span(b2): compare RREF of the flattened spans
            let stack = |vs: &[FieldMatrix]| {
                let rows: Vec<Vec<FieldElement>> = vs.iter().map(|v| v.entries().to_vec()).collect();
                FieldMatrix::from_rows(rows).unwrap().rref().0
            };
            let moved_b1: Vec<FieldMatrix> = b1.iter().map(|v| &a0 * v).collect();
            assert_eq!(stack(&moved_b1), stack(&b2));
        }
    }
}

#[test]
fn identity_is_same_positive_for_transverse_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = LatticeSpec::new(3).unwrap();
    let mut checked = 0;
    while checked < 20 {
        let k = random_rotation(&mut rng, 3);
        let last_row_full = (0..3).all(|j| !k.get(2, j).is_zero());
        let t = &(&k * &diag3(1, 2, 3)) * &k.transpose();
        let t = TorusDirection::new(t).unwrap();
        let res = intersection::sign_criterion(&FieldMatrix::identity(3), &t, &spec, 10).unwrap();
        assert_eq!(res.is_same_positive(), last_row_full);
        if let SignOutcome::SamePositive { a_bar, .. } = res.outcome {
            assert!(a_bar.is_identity());
        }
        checked += 1;
    }
}

#[test]
fn mod_solvability_is_coherent_with_rational_kernels() {
    let t = intersection::default_torus_direction();
    let spec = LatticeSpec::new(3).unwrap();
    let a0 = lattice::b_generator(&spec, &LatticeElement::identity(&LatticeSpec::new(2).unwrap()), 1).unwrap();
    let k = intersection::k0();
    let b0 = &(&k * &FieldMatrix::diag(&[u0(), u0_pow(-1), FieldElement::one()])) * &k.transpose();
    for gamma in [FieldMatrix::identity(3), a0.into_matrix(), diag3(-1, -1, 1)] {
        let g = &gamma * &b0;
        let sys = intersection::build_star_system(&g, &t).unwrap();
        let basis = sys.solution_basis();
        assert_eq!(basis.len(), 1);
        for m in [2u64, 3, 4, 8, 9] {
            let r = intersection::solvable_mod(&sys, Modulus::new(m).unwrap(), true).unwrap();
            assert!(r.solvable, "m = {m}");
        }
    }
}

#[test]
fn double_coset_search_has_no_false_positives() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = LatticeSpec::new(3).unwrap();
    let small = LatticeSpec::new(2).unwrap();
    let left = vec![lattice::b_generator(&spec, &LatticeElement::identity(&small), 1).unwrap()];
    let right = vec![lattice::a_generator(&spec, &[1, -1, 0]).unwrap()];
    let members = lattice::enumerate_members(&spec, lattice::EnumerationLimits::new(2, 3.0)).unwrap().members;
    for _ in 0..30 {
        let g1 = members[rng.gen_range(0..members.len())].clone();
        let g2 = members[rng.gen_range(0..members.len())].clone();
        let d1 = DoubleCoset::new(g1.clone(), left.clone(), right.clone()).unwrap();
        let d2 = DoubleCoset::new(g2.clone(), left.clone(), right.clone()).unwrap();
        if let CosetMatch::Yes { h, t } = intersection::same_double_coset(&d1, &d2, &spec, 2, 100_000).unwrap() {
            assert_eq!(&(&h * g1.matrix()) * &t, *g2.matrix());
        }
        assert!(matches!(
            intersection::same_double_coset(&d1, &d1, &spec, 1, 100_000).unwrap(),
            CosetMatch::Yes { .. }
        ));
    }
}
