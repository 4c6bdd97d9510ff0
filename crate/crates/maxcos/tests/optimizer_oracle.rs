//! Cross-checks the closed-form ratio maximizers against a brute-force grid
//! search that never consults the case analysis.

use maxcos::optimizer::{
    maximize_shifted, maximize_simple, Location, ShiftedRatioProblem, SimpleRatioProblem,
};
use maxcos_testkit::{
    grid_max_on, log_grid, phi_shifted, phi_simple, sample_shifted, sample_simple, ShiftedStratum,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Analytic supremum must dominate everything the grid can find, and any
/// claimed attainment must actually evaluate to the claimed value.
fn check_simple(xs: &[f64], r: f64, p: f64, s: f64, q: f64) {
    let verdict = maximize_simple(&SimpleRatioProblem::new(r, p, s, q).unwrap());
    let (grid_x, grid_val) = grid_max_on(xs, |x| phi_simple(r, p, s, q, x));
    assert!(
        verdict.value >= grid_val - 1e-7,
        "grid beat the analytic value for (r={r}, p={p}, s={s}, q={q}): \
         {grid_val} at x={grid_x} vs {}",
        verdict.value
    );
    match verdict.location {
        Location::Finite(x_star) => {
            assert!(x_star >= 0.0);
            let attained = phi_simple(r, p, s, q, x_star);
            assert!(
                (attained - verdict.value).abs() <= 1e-10 * verdict.value.abs().max(1.0),
                "claimed value not attained at x*={x_star} for (r={r}, p={p}, s={s}, q={q})"
            );
        }
        Location::AtZero => {
            let at_zero = phi_simple(r, p, s, q, 0.0);
            assert!((at_zero - verdict.value).abs() <= 1e-12 * verdict.value.abs().max(1.0));
        }
        Location::AtInfinity => {
            // The numeric limit: far enough out that lower-order terms wash out.
            let far = phi_simple(r, p, s, q, 1e12);
            assert!((far - verdict.value).abs() <= 1e-9 * verdict.value.abs().max(1.0));
        }
    }
}

fn check_shifted(xs: &[f64], r: f64, p: f64, s: f64, q: f64, t: f64) {
    let verdict = maximize_shifted(&ShiftedRatioProblem::new(r, p, s, q, t).unwrap());
    let (grid_x, grid_val) = grid_max_on(xs, |x| phi_shifted(r, p, s, q, t, x));
    assert!(
        verdict.value >= grid_val - 1e-7,
        "grid beat the analytic value for (r={r}, p={p}, s={s}, q={q}, t={t}): \
         {grid_val} at x={grid_x} vs {}",
        verdict.value
    );
    match verdict.location {
        Location::Finite(x_star) => {
            assert!(x_star >= 0.0);
            let attained = phi_shifted(r, p, s, q, t, x_star);
            assert!(
                (attained - verdict.value).abs() <= 1e-10 * verdict.value.abs().max(1.0),
                "claimed value not attained at x*={x_star} for (r={r}, p={p}, s={s}, q={q}, t={t})"
            );
        }
        Location::AtZero => {
            let at_zero = phi_shifted(r, p, s, q, t, 0.0);
            assert!((at_zero - verdict.value).abs() <= 1e-12 * verdict.value.abs().max(1.0));
        }
        Location::AtInfinity => {
            let far = phi_shifted(r, p, s, q, t, 1e12);
            assert!((far - verdict.value).abs() <= 1e-9 * verdict.value.abs().max(1.0));
        }
    }
}

#[test]
fn simple_random_problems_agree_with_grid() {
    let xs = log_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..300 {
        let (r, p, s, q) = sample_simple(&mut rng);
        check_simple(&xs, r, p, s, q);
    }
}

#[test]
fn shifted_random_problems_agree_with_grid_per_stratum() {
    let xs = log_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for stratum in ShiftedStratum::ALL {
        for _ in 0..80 {
            let (r, p, s, q, t) = sample_shifted(&mut rng, stratum);
            check_shifted(&xs, r, p, s, q, t);
        }
    }
}

#[test]
fn zero_shift_reduces_to_simple() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..400 {
        let (r, p, s, q) = sample_simple(&mut rng);
        let plain = maximize_simple(&SimpleRatioProblem::new(r, p, s, q).unwrap());
        let shifted = maximize_shifted(&ShiftedRatioProblem::new(r, p, s, q, 0.0).unwrap());
        assert_eq!(plain.value, shifted.value, "(r={r}, p={p}, s={s}, q={q})");
        match (plain.location, shifted.location) {
            (Location::Finite(a), Location::Finite(b)) => assert_eq!(a, b),
            (a, b) => assert_eq!(a, b, "(r={r}, p={p}, s={s}, q={q})"),
        }
    }
}

#[test]
fn frozen_examples_stay_frozen() {
    let xs = log_grid();
    check_simple(&xs, 1.0, 1.0, 1.0, 1.0);
    check_simple(&xs, 0.0, 1.0, 1.0, 1.0);
    check_simple(&xs, 1.0, -1.0, 1.0, 1.0);
    check_shifted(&xs, 1.0, 1.0, 3.0, 1.0, 1.0);
    check_shifted(&xs, 2.0, 1.0, 3.0, 1.0, 1.0);
    check_shifted(&xs, 0.0, -1.0, 2.0, 1.0, -1.0);
    // Stationary point exactly on the boundary.
    check_shifted(&xs, 2.0, 1.0, 2.0, 1.0, 1.0);
}
