use num::complex::Complex64;

use xbiv::algebra::{algebra_from_json, algebra_to_json, FiniteAlgebra};
use xbiv::bott::CliffordRep;
use xbiv::linalg::{block_parities, SMat};
use xbiv::scalar::{Field, Gaussian, Mode, Rat, Scalar, Sym};
use xbiv::Error;

fn g(re: i64, im: i64) -> Gaussian {
    Gaussian::new(Rat::int(re), Rat::int(im))
}

/// `EᵢⱼEₖₗ = δⱼₖEᵢₗ` checked against 2×2 matrix multiplication.
#[test]
fn matrix_units_match_matrix_products() {
    let m = FiniteAlgebra::<Gaussian>::matrix_units(2);
    let unit = |k: usize| {
        let mut a = [[0i64; 2]; 2];
        a[k / 2][k % 2] = 1;
        a
    };
    for i in 0..4 {
        for j in 0..4 {
            let (a, b) = (unit(i), unit(j));
            let mut p = [[0i64; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    p[r][c] = (0..2).map(|k| a[r][k] * b[k][c]).sum();
                }
            }
            for k in 0..4 {
                let want = p[k / 2][k % 2];
                assert_eq!(m.structure_constant(i, j, k), Gaussian::from_i64(want), "E{i}·E{j} at {k}");
            }
        }
    }
}

#[test]
fn algebras_from_json() {
    let c = algebra_from_json(r#"{"dim":1,"basis":["e"],"constants":[[0,0,0,1,1,0,1]],"unit":0}"#).unwrap();
    assert_eq!(c, FiniteAlgebra::complex_numbers());
    // C₁: ε² = 1, ε odd
    let c1 = algebra_from_json(r#"{"dim":2,"basis":["1","eps"],"constants":[[0,0,0,1,1,0,1],[0,1,1,1,1,0,1],[1,0,1,1,1,0,1],[1,1,0,1,1,0,1]],"unit":0,"grading":[0,1]}"#).unwrap();
    assert_eq!(c1, FiniteAlgebra::clifford1());
    let m2 = FiniteAlgebra::matrix_units(2);
    assert_eq!(algebra_from_json(&algebra_to_json(&m2).unwrap()).unwrap(), m2);
}

#[test]
fn invalid_structure_constants() {
    let nonassoc = r#"{"dim":2,"basis":["a","b"],"constants":[[0,0,1,1,1,0,1],[0,1,0,1,1,0,1]]}"#;
    assert!(matches!(algebra_from_json(nonassoc), Err(Error::NonAssociative(..))));
    let bad_unit = r#"{"dim":2,"basis":["a","b"],"constants":[[0,0,0,1,1,0,1]],"unit":1}"#;
    assert!(matches!(algebra_from_json(bad_unit), Err(Error::BadUnit(1))));
    let zero_den = r#"{"dim":1,"basis":["e"],"constants":[[0,0,0,1,0,0,1]]}"#;
    assert!(algebra_from_json(zero_den).is_err());
    let labels = r#"{"dim":2,"basis":["e"],"constants":[]}"#;
    assert!(matches!(algebra_from_json(labels), Err(Error::DimensionMismatch(_))));
}

#[test]
fn unitalization_adds_an_even_unit() {
    for (alg, dim) in [(FiniteAlgebra::<Gaussian>::complex_numbers(), 2), (FiniteAlgebra::matrix_units(2), 5), (FiniteAlgebra::clifford1(), 3)] {
        let old_unit = alg.unit();
        let t = alg.unitalize();
        assert_eq!(t.dim(), dim);
        let u = t.unit().unwrap();
        assert_eq!(u, dim - 1);
        assert_ne!(Some(u), old_unit);
        if let Some(gr) = t.grading() {
            assert_eq!(gr[u], 0);
        }
        // the old unit stays an idempotent but is no longer the unit
        if let Some(o) = old_unit {
            assert_eq!(t.mul(o, o), &[(o, Gaussian::one())]);
            assert_eq!(t.mul(u, o), &[(o, Gaussian::one())]);
        }
    }
}

#[test]
fn supertrace_values() {
    for (p, q) in [(1, 0), (2, 1), (1, 3), (3, 3)] {
        let id = SMat::identity(&block_parities(p, q), Gaussian::one());
        assert_eq!(id.supertrace(), Gaussian::from_i64(p as i64 - q as i64));
    }
    // an odd matrix has vanishing diagonal
    let par = block_parities(2, 2);
    let mut odd = SMat::square_zeros(&par);
    odd.set(0, 2, g(3, 1));
    odd.set(3, 1, g(-2, 0));
    assert_eq!(odd.block_parity(), Some(1));
    assert_eq!(odd.supertrace(), Gaussian::zero());
    // Γγ¹γ² on the spinors of ℝ² is 2i
    let rep = CliffordRep::new(2).unwrap();
    assert_eq!(rep.product(&[0, 1]).supertrace(), g(0, 2));
}

#[test]
fn modes_do_not_mix_and_lower_explicitly() {
    let exact = Scalar::Exact(g(1, 2));
    let float = Scalar::Float(Complex64::new(0.5, 0.0));
    let sym = Scalar::Symbolic(Sym::lambda());
    assert_eq!(exact.mode(), Mode::Exact);
    assert!(matches!(exact.try_mul(&float), Err(Error::ModeMismatch(..))));
    assert!(matches!(sym.try_add(&exact), Err(Error::ModeMismatch(..))));
    assert_eq!(exact.lower(None).unwrap(), Complex64::new(1.0, 2.0));
    assert!((sym.lower(Some(2.5)).unwrap() - Complex64::new(2.5, 0.0)).norm() < 1e-15);
    assert_eq!("float".parse::<Mode>().unwrap(), Mode::Float);
}

#[test]
fn symbolic_scalars_cancel_exactly() {
    // (π/λ)^{1/2} · λ^{1/2} / π^{1/2} = 1
    let x = Sym::sqrt_pi() * Sym::sqrt_lambda().inv().unwrap();
    assert_eq!(x * Sym::sqrt_lambda() * Sym::sqrt_pi().inv().unwrap(), Sym::one());
    assert_eq!(Sym::lambda().as_constant(), None);
    assert_eq!(Sym::monomial(g(0, 1), 0, 0).as_constant(), Some(g(0, 1)));
}
