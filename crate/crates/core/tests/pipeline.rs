use std::path::PathBuf;

use diagonal_circle::counting::CountMode;
use diagonal_circle::predictor::{
    compare_box, family_constant, predict, slice_count, PredictOptions,
};
use diagonal_circle::solvability::Positivity;
use diagonal_circle::ProblemInstance;

fn golden(name: &str) -> ProblemInstance {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances");
    ProblemInstance::load(dir.join(format!("{name}.json"))).unwrap()
}

#[test]
fn family_slices_approach_the_family_constant() {
    let a = golden("a");
    let opts = PredictOptions::default();
    let fam = family_constant(&a, 1, &[2], &opts, 1000).unwrap();
    assert!(fam.k_bound_holds);
    let ratios: Vec<f64> = [25u64, 50, 100, 200]
        .iter()
        .map(|&v| slice_count(&a, &[2], &[v]).unwrap() as f64 / (fam.constant * (v * v) as f64))
        .collect();
    eprintln!("slice ratios {ratios:?}");
    let last = ratios[3];
    assert!((last - 1.0).abs() < 0.02, "{ratios:?}");
    assert!((last - 1.0).abs() < (ratios[0] - 1.0).abs(), "{ratios:?}");
}

#[test]
fn two_equation_system() {
    let c2 = golden("c2");
    let opts = PredictOptions {
        prime_bound: Some(7),
        gamma_max: 4,
        ..Default::default()
    };
    let r = predict(&c2, &opts).unwrap();
    assert!(r.hypotheses_satisfied);
    assert_eq!(r.positivity, Positivity::Positive);
    assert!((r.series.value - 1.0).abs() < 1e-12, "{}", r.series.value);
    assert!(r.consistent(), "{:?}", r.checks);
    let cmp = compare_box(
        &c2,
        &[vec![10], vec![20], vec![40]],
        CountMode::All,
        false,
        &r,
        &opts,
    )
    .unwrap();
    let ratios: Vec<f64> = cmp.rows.iter().filter_map(|x| x.ratio).collect();
    eprintln!("C2 ratios {ratios:?}");
    assert!(
        (ratios[2] - 1.0).abs() < (ratios[0] - 1.0).abs(),
        "{ratios:?}"
    );
}
