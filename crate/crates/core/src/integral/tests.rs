use super::*;

fn inst(d: u32, k: u32, lambda: Vec<Vec<i64>>) -> ProblemInstance {
    ProblemInstance::with_default_n0(d, k, lambda).unwrap()
}

fn triangle() -> ProblemInstance {
    inst(1, 1, vec![vec![1, 1, -1]])
}

#[test]
fn triangle_area() {
    let q = singular_integral_positive(&triangle(), 1000.0).unwrap();
    assert!((q.value - 0.5).abs() < 1e-3, "{}", q.value);
    let o = b_zero_oracle(&triangle(), 20_000, 7).unwrap();
    assert!((o.value - 0.5).abs() < 4.0 * o.error);
}

#[test]
fn assembled_triangle_and_density() {
    let est = assemble_i(
        &triangle(),
        1000.0,
        Some(OracleRequest {
            kind: OracleKind::RealDensity,
            samples: 2_000_000,
            seed: 11,
            epsilon: 1e-2,
        }),
    )
    .unwrap();
    assert!((est.value - 3.0).abs() < 6e-3);
    let o = est.oracle_value.unwrap();
    assert!((o - 3.0).abs() < 0.1 * 3.0);
}

#[test]
fn single_free_coordinate_is_pure_quadrature() {
    // v1 = v2 with ψ_1 = 1: the diagonal has B(0) = 1.
    let p = inst(1, 1, vec![vec![1, -1]]);
    let o = b_zero_oracle(&p, 10, 0).unwrap();
    assert!((o.value - 1.0).abs() < 1e-9 && o.error == 0.0);
}

#[test]
fn even_degree_scaling_and_sign_symmetry() {
    let b = inst(2, 1, vec![vec![1, 1, 1, -1, -1]]);
    let pos = singular_integral_positive(&b, 100.0).unwrap();
    let all = assemble_i(&b, 100.0, None).unwrap();
    assert_eq!(all.value, 32.0 * pos.value);
    let p = inst(1, 2, vec![vec![1, 2, -1]]);
    let n = inst(1, 2, vec![vec![-1, -2, 1]]);
    let a1 = assemble_i(&p, 100.0, None).unwrap();
    let a2 = assemble_i(&n, 100.0, None).unwrap();
    assert_eq!(a1.value, a2.value);
}

#[test]
fn sign_classes_cover_all_patterns() {
    let classes = sign_classes(&triangle());
    assert_eq!(classes.iter().map(|c| c.0).sum::<u64>(), 8);
    assert_eq!(classes.len(), 2);
}

#[test]
fn positive_definite_forms() {
    let p = inst(2, 1, vec![vec![1, 2, 1, 1, 3]]);
    let o = b_zero_oracle(&p, 1000, 1).unwrap();
    assert_eq!(o.value, 0.0);
    let q = singular_integral_positive(&p, 100.0).unwrap();
    assert!(q.value.abs() < 1e-4, "{}", q.value);
    let r = real_density_oracle(&p, 1e-3, 100_000, 2).unwrap();
    assert_eq!(r.value, 0.0);
}

#[test]
fn quadrature_agrees_with_b_zero_on_squares() {
    let b = inst(2, 1, vec![vec![1, 1, 1, -1, -1]]);
    let q = singular_integral_positive(&b, 100.0).unwrap();
    let o = b_zero_oracle(&b, 40_000, 5).unwrap();
    let bar = (o.error.powi(2) + q.quadrature_error.powi(2)).sqrt();
    assert!((q.value - o.value).abs() < 3.0 * bar + q.tail_heuristic);
    let q2 = singular_integral_positive(&b, 200.0).unwrap();
    assert!((q.value - q2.value).abs() < q.tail_heuristic);
}

#[test]
fn separable_pair_factorizes() {
    let one = inst(1, 1, vec![vec![1, 2, -2]]);
    let two = inst(1, 1, vec![vec![1, 2, -2, 0, 0], vec![0, 0, 0, 1, -1]]);
    let diag = inst(1, 1, vec![vec![1, -1]]);
    let y = 8.0;
    let a = singular_integral_positive(&one, y).unwrap().value;
    let b = singular_integral_positive(&diag, y).unwrap().value;
    let c = singular_integral_positive(&two, y).unwrap();
    assert!(
        (c.value - a * b).abs() < 1e-6 + c.quadrature_error,
        "{} vs {}",
        c.value,
        a * b
    );
}

#[test]
fn unsupported_and_budget() {
    let p = inst(1, 1, vec![vec![1, -1, 0], vec![0, 1, -1], vec![1, 0, -1]]);
    assert!(matches!(
        singular_integral_positive(&p, 10.0),
        Err(Error::Unsupported(_))
    ));
    let two = inst(1, 1, vec![vec![1, 2, -2, 0, 0], vec![0, 0, 0, 1, -1]]);
    let tight = IntegralConfig {
        point_budget: 100,
        ..IntegralConfig::default()
    };
    assert!(matches!(
        singular_integral_positive_with(&two, 50.0, &tight),
        Err(Error::Budget(_))
    ));
}

#[test]
fn oracles_are_reproducible() {
    let b = inst(2, 1, vec![vec![1, 1, 1, -1, -1]]);
    let x = b_zero_oracle(&b, 40_000, 9).unwrap();
    let y = b_zero_oracle(&b, 40_000, 9).unwrap();
    assert_eq!(x, y);
    let z = b_zero_oracle(&b, 40_000, 10).unwrap();
    assert_ne!(x.value, z.value);
}

#[test]
fn two_row_truncation_fits_the_budget() {
    let c2 = inst(
        1,
        1,
        vec![vec![1, 1, 1, -1, -1, -1], vec![1, 2, 3, -3, -2, -1]],
    );
    let y = default_truncation(&c2).unwrap();
    assert!(y > 10.0 && y < 12.0, "{y}");
    assert!(singular_integral_positive(&c2, y).is_ok());
    assert_eq!(default_truncation(&triangle()).unwrap(), 100.0);
}
