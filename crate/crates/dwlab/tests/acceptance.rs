//! End-to-end acceptance suite. Each test covers one numbered criterion and
//! prints a single PASS line with the measured quantities (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dwlab::holomap::{classify, compose, denjoy_wolff, invert, DwLocation, HoloMap, MapClass, Model};
use dwlab::hypgeom::{hyp_dist_disc, hyp_dist_halfplane, DiscPoint, HalfPlanePoint};
use dwlab::verify::run_scenario;

fn rand_disc(rng: &mut ChaCha8Rng, rmax: f64) -> Complex64 {
    let r = rmax * rng.gen::<f64>().sqrt();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(r, phi)
}

fn disc_pt(z: Complex64) -> DiscPoint {
    DiscPoint::from_complex(z).expect("sample is inside the disc")
}

/// A random disc automorphism: rotation composed with a disc translation.
fn rand_automorphism(rng: &mut ChaCha8Rng) -> HoloMap {
    let a = disc_pt(rand_disc(rng, 0.9));
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    compose(&HoloMap::disc_translation(a), &HoloMap::rotation(theta)).unwrap()
}

/// A random non-automorphism self-map: automorphism ∘ shrink ∘ automorphism.
fn rand_contraction(rng: &mut ChaCha8Rng) -> HoloMap {
    let s = 0.2 + 0.75 * rng.gen::<f64>();
    let shrink = HoloMap::affine(Complex64::new(s, 0.0), Complex64::new(0.0, 0.0)).unwrap();
    let t1 = rand_automorphism(rng);
    let t2 = rand_automorphism(rng);
    compose(&t1, &compose(&shrink, &t2).unwrap()).unwrap()
}

#[test]
fn criterion_1_metric_kernel() {
    let start = Instant::now();

    let half = disc_pt(Complex64::new(0.5, 0.0));
    let ln3_err = (hyp_dist_disc(DiscPoint::origin(), half) - 3f64.ln()).abs();
    assert!(ln3_err < 1e-12, "dist(0, 1/2) off by {ln3_err:e}");

    let mut ln2_worst: f64 = 0.0;
    for n in 1..=20 {
        let hi = HalfPlanePoint::new(0.0, 0.5f64.powi(n - 1)).unwrap();
        let lo = HalfPlanePoint::new(0.0, 0.5f64.powi(n)).unwrap();
        ln2_worst = ln2_worst.max((hyp_dist_halfplane(hi, lo) - 2f64.ln()).abs());
    }
    assert!(ln2_worst < 1e-12, "log-2 ladder off by {ln2_worst:e}");

    // artanh and sinh formulations of the same distance.
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let mut agree_worst: f64 = 0.0;
    for _ in 0..10_000 {
        let z = rand_disc(&mut rng, 0.95);
        let w = rand_disc(&mut rng, 0.95);
        let d = hyp_dist_disc(disc_pt(z), disc_pt(w));
        let artanh = 2.0 * ((z - w).norm() / (1.0 - z.conj() * w).norm()).atanh();
        let sinh_form = 2.0
            * ((z - w).norm() / ((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr())).sqrt()).asinh();
        agree_worst = agree_worst.max((d - artanh).abs()).max((d - sinh_form).abs());
    }
    assert!(agree_worst < 1e-12, "formulations disagree by {agree_worst:e}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 1 took {elapsed:?}");
    println!(
        "criterion 1 PASS: ln3 err {ln3_err:.2e}, log2 ladder err {ln2_worst:.2e}, \
         formulation agreement {agree_worst:.2e}, {elapsed:?}"
    );
}

#[test]
fn criterion_2_schwarz_pick() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..1000 {
        let m = if i % 4 == 0 {
            rand_automorphism(&mut rng)
        } else {
            rand_contraction(&mut rng)
        };
        for _ in 0..1000 {
            let z = rand_disc(&mut rng, 0.9);
            let w = rand_disc(&mut rng, 0.9);
            let before = hyp_dist_disc(disc_pt(z), disc_pt(w));
            let after = hyp_dist_disc(
                disc_pt(m.eval(z).unwrap()),
                disc_pt(m.eval(w).unwrap()),
            );
            worst_excess = worst_excess.max(after - before);
        }
    }
    assert!(worst_excess <= 1e-10, "Schwarz-Pick violated by {worst_excess:e}");

    // Automorphisms are isometries: equality, not just inequality.
    let mut worst_gap: f64 = 0.0;
    for _ in 0..100 {
        let m = rand_automorphism(&mut rng);
        for _ in 0..100 {
            let z = rand_disc(&mut rng, 0.9);
            let w = rand_disc(&mut rng, 0.9);
            let before = hyp_dist_disc(disc_pt(z), disc_pt(w));
            let after = hyp_dist_disc(
                disc_pt(m.eval(z).unwrap()),
                disc_pt(m.eval(w).unwrap()),
            );
            worst_gap = worst_gap.max((after - before).abs());
        }
    }
    assert!(worst_gap <= 1e-10, "automorphism equality off by {worst_gap:e}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "criterion 2 took {elapsed:?}");
    println!(
        "criterion 2 PASS: worst contraction excess {worst_excess:.2e}, \
         worst automorphism gap {worst_gap:.2e}, {elapsed:?}"
    );
}

#[test]
fn criterion_3_theorem_b() {
    let start = Instant::now();
    let result = run_scenario("thmB", 42, 10_000).unwrap();
    assert!(result.pass, "thmB scenario failed: {result:?}");
    let worst = result.measured["max_violation"];
    assert!(worst <= 1e-10, "Theorem B violated by {worst:e}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "criterion 3 took {elapsed:?}");
    println!("criterion 3 PASS: 10^4 instances, max violation {worst:.2e}, {elapsed:?}");
}

#[test]
fn criterion_4_iteration_vs_classification() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC4);
    let mut inconclusive = 0usize;
    let mut worst_gap: f64 = 0.0;
    for i in 0..1000 {
        // Mix strict contractions (interior point) with conjugated hyperbolic
        // automorphisms (boundary point).
        let m = if i % 3 == 0 {
            let t = rand_automorphism(&mut rng);
            let hyp = HoloMap::mobius(
                Complex64::new(3.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(3.0, 0.0),
                Model::Disc,
            )
            .unwrap();
            compose(&t, &compose(&hyp, &invert(&t).unwrap()).unwrap()).unwrap()
        } else {
            rand_contraction(&mut rng)
        };
        let class = classify(&m, 1e-9, 200_000).unwrap();
        let iterated = match denjoy_wolff(&m, 1e-9, 200_000) {
            Ok(v) => v,
            Err(_) => {
                inconclusive += 1;
                continue;
            }
        };
        let (expected, location) = match class {
            MapClass::InteriorDW { point } => (point.get(), DwLocation::Interior),
            MapClass::BoundaryDW { point } => (point, DwLocation::Boundary),
            other => panic!("unexpected class for random map: {other:?}"),
        };
        assert_eq!(iterated.1, location, "interior/boundary flag mismatch");
        let gap = (iterated.0 - expected).norm();
        assert!(gap < 1e-6, "Denjoy-Wolff points differ by {gap:e}");
        worst_gap = worst_gap.max(gap);
    }
    assert!(
        inconclusive < 10,
        "inconclusive rate {inconclusive}/1000 exceeds 1%"
    );
    println!(
        "criterion 4 PASS: 1000 maps, {inconclusive} inconclusive, \
         worst point gap {worst_gap:.2e}"
    );
}

#[test]
fn criterion_5_theorems_1_and_2() {
    let thm1 = run_scenario("thm1", 42, 100).unwrap();
    assert!(thm1.pass, "thm1 scenario failed: {thm1:?}");
    assert!(thm1.measured["limit_matches_rot1"] < 1e-6);
    assert!(
        thm1.measured["affine.separation_exceeds_d"]
            > thm1.bounds["affine.separation_exceeds_d"]
    );
    assert_eq!(thm1.measured["control_rejected"], 1.0);

    let thm2 = run_scenario("thm2", 42, 100).unwrap();
    assert!(thm2.pass, "thm2 scenario failed: {thm2:?}");
    assert!(thm2.measured["limit_matches_rot1"] < 1e-6);

    let ex1 = run_scenario("example1", 42, 100).unwrap();
    assert!(ex1.pass, "example1 scenario failed: {ex1:?}");
    assert_eq!(ex1.measured["intervals_visited"], 63.0);
    println!(
        "criterion 5 PASS: thm1 limit err {:.2e}, thm2 limit err {:.2e}, \
         63/63 angle intervals visited, harmonic control rejected",
        thm1.measured["limit_matches_rot1"], thm2.measured["limit_matches_rot1"]
    );
}

#[test]
fn criterion_6_theorem_3() {
    let thm3 = run_scenario("thm3", 42, 100).unwrap();
    assert!(thm3.pass, "thm3 scenario failed: {thm3:?}");
    assert_eq!(thm3.measured["all_trials_constant_limit"], 1.0);
    assert!(thm3.measured["g1_moves_constant_count"] >= 95.0);
    println!(
        "criterion 6 PASS: 100/100 constant limits inside target disc, \
         g1 swap moved the constant in {}/100 trials",
        thm3.measured["g1_moves_constant_count"]
    );
}

#[test]
fn criterion_7_theorem_4() {
    let thm4 = run_scenario("thm4", 42, 100).unwrap();
    assert!(thm4.pass, "thm4 scenario failed: {thm4:?}");
    assert!(thm4.measured["decay.first_n_within_1e6_of_zeta"] <= 10_000.0);
    assert!(
        thm4.measured["decay.geometric_bound_excess"]
            <= thm4.bounds["decay.geometric_bound_excess"]
    );

    let ex2 = run_scenario("example2", 42, 100).unwrap();
    assert!(ex2.pass, "example2 scenario failed: {ex2:?}");
    assert!(ex2.measured["witness_separation"] >= 0.3);
    println!(
        "criterion 7 PASS: |F_N(0)| < 1e-6 by N = {}, geometric bound excess {:.2e}, \
         block-schedule witnesses separated by {:.3}",
        thm4.measured["decay.first_n_within_1e6_of_zeta"],
        thm4.measured["decay.geometric_bound_excess"],
        ex2.measured["witness_separation"]
    );
}

#[test]
fn criterion_8_theorem_5_and_counterexample() {
    let thm5 = run_scenario("thm5", 42, 100).unwrap();
    assert!(thm5.pass, "thm5 scenario failed: {thm5:?}");
    assert!(thm5.measured["strict_bound_min_margin"] > 0.0);
    assert!(thm5.measured["first_n_near_zeta"] <= 1000.0);

    let hg = run_scenario("example_hg", 42, 100).unwrap();
    assert!(hg.pass, "example_hg scenario failed: {hg:?}");
    assert!(hg.measured["right_sequence_constant"] < 1e-12);
    println!(
        "criterion 8 PASS: strict bound margin {:.3e} over m <= 60, \
         |F_n(0) - 1| < 1e-3 by n = {}, right sequence constant to {:.2e}",
        thm5.measured["strict_bound_min_margin"],
        thm5.measured["first_n_near_zeta"],
        hg.measured["right_sequence_constant"]
    );
}

#[test]
fn criterion_9_cli_determinism() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_dwlab"))
            .args(["verify", "all", "--seed", "42"])
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    assert!(first.status.success(), "verify all failed: {first:?}");
    assert_eq!(first.stdout, second.stdout, "outputs differ between runs");
    println!(
        "criterion 9 PASS: verify all --seed 42 byte-identical across runs \
         ({} bytes)",
        first.stdout.len()
    );
}
