use kspace_forge::density::{draw_points, radial_density, DrawExponent};
use kspace_forge::Grid;

/// 99th percentile of χ² with 63 degrees of freedom.
const CHI2_63_99: f64 = 92.01;

fn chi_square(decay: f64, exponent: DrawExponent, p: f64, seed: u64) -> f64 {
    let grid = Grid::isotropic(8, 2, 1.0).unwrap();
    let pi = radial_density(&grid, decay, 0.1).unwrap();
    let n = 20_000;
    let pc = draw_points(&pi, n, exponent, seed, true).unwrap();
    let mut counts = vec![0usize; grid.len()];
    for q in pc.iter() {
        counts[grid.locate(q).expect("jittered point left the grid")] += 1;
    }
    let powered: Vec<f64> = pi.values().iter().map(|v| v.powf(p)).collect();
    let total: f64 = powered.iter().sum();
    counts
        .iter()
        .zip(&powered)
        .map(|(&o, w)| {
            let e = n as f64 * w / total;
            assert!(e >= 5.0, "expected count {e} too small for the test");
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

#[test]
fn draws_follow_the_target() {
    for seed in 0..3 {
        let stat = chi_square(2.0, DrawExponent::Identity, 1.0, seed);
        assert!(stat < CHI2_63_99, "seed {seed}: χ² = {stat}");
    }
}

#[test]
fn draws_follow_the_powered_target() {
    for seed in 0..3 {
        let stat = chi_square(2.0, DrawExponent::DimensionRatio, 0.5, seed);
        assert!(stat < CHI2_63_99, "seed {seed}: χ² = {stat}");
        // squaring a 1/k² target starves the outer cells, so use 1/k here
        let stat = chi_square(1.0, DrawExponent::TourCorrected, 2.0, seed);
        assert!(stat < CHI2_63_99, "seed {seed}: χ² = {stat}");
    }
}

#[test]
fn wrong_exponent_is_detected() {
    // the draws under p = 1/2 are far from π itself
    let grid = Grid::isotropic(8, 2, 1.0).unwrap();
    let pi = radial_density(&grid, 2.0, 0.1).unwrap();
    let pc = draw_points(&pi, 20_000, DrawExponent::DimensionRatio, 0, true).unwrap();
    let mut counts = vec![0usize; grid.len()];
    for q in pc.iter() {
        counts[grid.locate(q).unwrap()] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(pi.values())
        .map(|(&o, w)| {
            let e = 20_000.0 * w;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    assert!(stat > 10.0 * CHI2_63_99, "χ² = {stat}");
}
