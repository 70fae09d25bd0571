mod common;

use hammerfix_core::gibbs::{gibbs_coefficients, GibbsModel};
use hammerfix_core::quad::{binomial, compute_coefficients, integrate, DEFAULT_QUAD_TOL};
use hammerfix_core::solver::{solve, SolveOptions};
use hammerfix_core::KernelSpec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-300)
}

#[test]
fn monomial_kernel_has_beta_integrals() {
    // φ₁ = 1, φ₂ = t, ψ₁ = t^m, ψ₂ = t^n: a[i] = C(k,i)/(i+m+1)
    for k in 2..=8usize {
        for (m, n) in [(0, 0), (1, 3), (2, 5)] {
            let kern = KernelSpec::parse("1", "t", &format!("t^{m}"), &format!("t^{n}"), k).unwrap();
            let c = compute_coefficients(&kern, DEFAULT_QUAD_TOL).unwrap();
            for i in 0..=k {
                let ck = binomial(k as u64, i as u64).unwrap() as f64;
                assert!(rel_close(c.a[i], ck / (i + m + 1) as f64, 1e-12), "k={k} m={m} i={i}");
                assert!(rel_close(c.b[i], ck / (i + n + 1) as f64, 1e-12), "k={k} n={n} i={i}");
            }
        }
    }
}

#[test]
fn quadrature_matches_gibbs_closed_form() {
    for a in [0.1, 1.0, 10.0] {
        for b in [0.1, 1.0, 10.0] {
            for k in 2..=8 {
                let m = GibbsModel::new(a, b, k, 1.0).unwrap();
                let closed = gibbs_coefficients(&m).unwrap();
                let quad = compute_coefficients(&m.kernel().unwrap(), DEFAULT_QUAD_TOL).unwrap();
                for i in 0..=k {
                    assert!(rel_close(closed.a[i], quad.a[i], 1e-10), "a[{i}] a={a} b={b} k={k}");
                    assert!(rel_close(closed.b[i], quad.b[i], 1e-10), "b[{i}] a={a} b={b} k={k}");
                }
            }
        }
    }
}

#[test]
fn integrate_reaches_relative_floor_on_large_integrands() {
    // ∫ exp(40t) = (e^40 - 1)/40, far above any absolute target
    let exact = (40f64.exp() - 1.0) / 40.0;
    let got = integrate(|t| Ok((40.0 * t).exp()), 1e-10).unwrap();
    assert!(rel_close(got, exact, 1e-12));
}

#[test]
fn scaling_psi1_scales_a_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let kern = common::random_kernel(&mut rng, 2, 5);
        let Ok(base) = compute_coefficients(&kern, DEFAULT_QUAD_TOL) else { continue };
        let scaled = KernelSpec::parse(
            kern.phi1.source(),
            kern.phi2.source(),
            &format!("3*({})", kern.psi1.source()),
            kern.psi2.source(),
            kern.k,
        )
        .unwrap();
        let c = compute_coefficients(&scaled, DEFAULT_QUAD_TOL).unwrap();
        for i in 0..=kern.k {
            assert!(rel_close(c.a[i], 3.0 * base.a[i], 1e-10));
            assert!(rel_close(c.b[i], base.b[i], 1e-10));
        }
    }
}

#[test]
fn swapping_both_pairs_reverses_and_exchanges() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 20 {
        let kern = common::random_kernel(&mut rng, 2, 5);
        let Ok(base) = solve(&kern, &SolveOptions::default()) else { continue };
        let swapped = KernelSpec::parse(
            kern.phi2.source(),
            kern.phi1.source(),
            kern.psi2.source(),
            kern.psi1.source(),
            kern.k,
        )
        .unwrap();
        let other = solve(&swapped, &SolveOptions::default()).unwrap();
        let k = kern.k;
        for i in 0..=k {
            assert!(rel_close(other.coefficients.a[i], base.coefficients.b[k - i], 1e-10));
            assert!(rel_close(other.coefficients.b[i], base.coefficients.a[k - i], 1e-10));
        }
        assert_eq!(other.n_fix, base.n_fix);
        for p in &base.points {
            let mirrored = other
                .points
                .iter()
                .map(|q| (q.x - p.y).abs().max((q.y - p.x).abs()) / p.x.max(p.y))
                .fold(f64::INFINITY, f64::min);
            assert!(mirrored <= 1e-8, "{p:?} vs {:?}", other.points);
        }
        checked += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pascal_rule(k in 1u64..60, i in 1u64..60) {
        prop_assume!(i < k);
        let lhs = binomial(k, i).unwrap();
        prop_assert_eq!(lhs, binomial(k - 1, i - 1).unwrap() + binomial(k - 1, i).unwrap());
    }

    #[test]
    fn polynomial_integrals(c0 in 0.1f64..5.0, c1 in 0.0f64..5.0, c2 in 0.0f64..5.0) {
        let got = integrate(|t| Ok(c0 + c1 * t + c2 * t * t), 1e-12).unwrap();
        prop_assert!(rel_close(got, c0 + c1 / 2.0 + c2 / 3.0, 1e-13));
    }
}
