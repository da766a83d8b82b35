use proptest::prelude::*;

use super::*;
use crate::arith::totient;

fn a() -> ProblemInstance {
    ProblemInstance::new(1, 2, vec![vec![1, 1, -1]], 2).unwrap()
}

fn b() -> ProblemInstance {
    ProblemInstance::new(2, 1, vec![vec![1, 1, 1, -1, -1]], 4).unwrap()
}

fn c2() -> ProblemInstance {
    ProblemInstance::new(
        1,
        1,
        vec![vec![1, 1, 1, -1, -1, -1], vec![1, 2, 3, -3, -2, -1]],
        2,
    )
    .unwrap()
}

#[test]
fn trivial_modulus() {
    for inst in [a(), b(), c2()] {
        assert_eq!(t_of_q(&inst, 1).unwrap(), 1.0);
        assert_eq!(phi_congruence_count(&inst, 1).unwrap(), 1);
    }
}

#[test]
fn congruence_counts() {
    assert_eq!(phi_congruence_count(&b(), 2).unwrap(), 16);
    assert_eq!(phi_enumerate(&b(), 2), 16);
    // x1y1 + x2y2 + x3y3 ≡ 0 (mod 2): an even number of the three products equal 1.
    assert_eq!(phi_congruence_count(&a(), 2).unwrap(), 36);
    assert_eq!(phi_enumerate(&a(), 2), 36);
    for inst in [a(), b(), c2()] {
        for q in 2..=4 {
            assert_eq!(
                phi_congruence_count(&inst, q).unwrap(),
                phi_enumerate(&inst, q)
            );
        }
    }
}

#[test]
fn state_budget_is_enforced() {
    assert!(matches!(
        phi_with_budget(&c2(), 64, 100),
        Err(Error::Budget(_))
    ));
}

#[test]
fn squares_vanish_at_two_first_step() {
    assert!(t_of_q(&b(), 2).unwrap().abs() < 1e-12);
    assert!((euler_factor(&b(), 2, 1).unwrap() - 1.0).abs() < 1e-12);
    let e = euler_factor_report(&a(), 3, 1).unwrap();
    assert_eq!(e.phi, phi_enumerate(&a(), 3));
    assert!((e.from_phi - e.phi as f64 / 3f64.powi(5)).abs() < 1e-15);
}

#[test]
fn bilinear_instance_closed_form() {
    // S_2(q, a) = q·gcd(a, q) gives T(q) = φ(q)/q³.
    for q in 1..=60u64 {
        let want = totient(q) as f64 / (q as f64).powi(3);
        assert!((t_of_q(&a(), q).unwrap() - want).abs() < 1e-12, "q={q}");
    }
    let z2 = zeta_real(2.0).unwrap();
    let z3 = zeta_real(3.0).unwrap();
    let est = singular_series(&a(), 400).unwrap();
    assert!((est.value - z2 / z3).abs() < est.tail_heuristic);
    for e in &est.euler_factors {
        let p = e.p as f64;
        let omitted = 2.0 * p.powi(-2 * e.depth as i32 - 2);
        assert!(
            (e.value - (1.0 + 1.0 / (p * (p + 1.0)))).abs() <= omitted + 1e-12,
            "p={}",
            e.p
        );
    }
}

#[test]
fn partial_sum_identity_small_primes() {
    for inst in [a(), b(), c2()] {
        for p in [2u64, 3, 5] {
            for l in 1..=3 {
                let r = euler_factor_report(&inst, p, l).unwrap();
                assert!(r.mismatch <= 1e-9);
            }
        }
    }
}

#[test]
fn series_examples() {
    let one = singular_series(&b(), 1).unwrap();
    assert_eq!(one.value, 1.0);
    assert!(one.euler_factors.is_empty());
    let est = singular_series(&b(), 50).unwrap();
    assert!(est.euler_factors_positive);
    assert!((est.value - est.euler_product).abs() < 2.0 * est.tail_heuristic);
    assert!(est.tail_heuristic >= 0.0);
}

#[test]
fn local_obstruction_drives_factor_to_zero() {
    // x² + y² ≡ 3z² (mod 3) forces x ≡ y ≡ 0; no primitive lift at p = 3.
    let inst = ProblemInstance::new(2, 1, vec![vec![1, 1, -3]], 4).unwrap();
    let est = singular_series(&inst, 3).unwrap();
    let e3 = est.euler_factors.iter().find(|e| e.p == 3).unwrap();
    assert!(e3.value < 0.5);
}

#[test]
fn deep_factors_stabilize() {
    let e = stabilized_euler_factor(&b(), 3, 1, &SeriesConfig::default()).unwrap();
    assert!(e.depth >= 2);
    let fast = stabilized_euler_factor(&a(), 101, 1, &SeriesConfig::default()).unwrap();
    assert!(!fast.stable);
}

fn coprime_pairs() -> impl Strategy<Value = (u64, u64)> {
    (1u64..=40, 1u64..=40).prop_filter("coprime, product <= 200", |&(x, y)| {
        num_integer::gcd(x, y) == 1 && x * y <= 200
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn multiplicative((q1, q2) in coprime_pairs()) {
        for inst in [a(), b(), c2()] {
            let lhs = t_of_q(&inst, q1 * q2).unwrap();
            let rhs = t_of_q(&inst, q1).unwrap() * t_of_q(&inst, q2).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9);
        }
    }

    #[test]
    fn exp_sum_periodic_and_bounded(q in 1u64..30, a in -60i64..60, k in 1u32..=3, d in 1u32..=3) {
        let s1 = exp_sum_s(q, a, k, d);
        let s2 = exp_sum_s(q, a.rem_euclid(q as i64), k, d);
        prop_assert!((s1 - s2).norm() < 1e-9);
        prop_assert!(s1.norm() <= (q as f64).powi(k as i32) + 1e-9);
    }

    #[test]
    fn normalized_sum_decay(q in 2u64..60, a in 1i64..60, k in 1u32..=2, d in 1u32..=3) {
        prop_assume!(num_integer::gcd(a as u64, q) == 1);
        let tau = (1..=q).filter(|x| q % x == 0).count() as f64;
        let v = exp_sum_s(q, a, k, d).norm() / (q as f64).powi(k as i32);
        prop_assert!(v <= 4.0 * tau.powi(k as i32 - 1) * (q as f64).powf(-1.0 / f64::from(d)));
    }
}
