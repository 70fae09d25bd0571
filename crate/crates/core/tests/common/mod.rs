#![allow(dead_code)]

use hammerfix_core::KernelSpec;
use rand::Rng;

/// Strictly positive factor: a polynomial with positive coefficients, a
/// scaled exponential, or a product of the two.
pub fn random_factor<R: Rng>(rng: &mut R) -> String {
    let poly = |rng: &mut R| {
        let deg = rng.gen_range(0..=3);
        let mut terms = vec![format!("{:.3}", rng.gen_range(0.05..2.0))];
        for p in 1..=deg {
            if rng.gen_bool(0.7) {
                terms.push(format!("{:.3}*t^{p}", rng.gen_range(0.05..3.0)));
            }
        }
        terms.join(" + ")
    };
    match rng.gen_range(0..5) {
        0 | 1 => poly(rng),
        // steep bump at one end of [0, 1]
        4 => {
            let at_zero = rng.gen_bool(0.5);
            bump(rng, at_zero)
        }
        2 => format!(
            "{:.3}*exp({:.3}*t)",
            rng.gen_range(0.1..2.0),
            rng.gen_range(-3.0..3.0)
        ),
        _ => format!("({})*exp({:.3}*t)", poly(rng), rng.gen_range(-3.0..3.0)),
    }
}

fn bump<R: Rng>(rng: &mut R, at_zero: bool) -> String {
    let c = rng.gen_range(0.1..2.0);
    let r = rng.gen_range(3.0..8.0);
    if at_zero {
        format!("{c:.3}*exp(-{r:.3}*t)")
    } else {
        format!("{c:.3}*exp({r:.3}*(t - 1))")
    }
}

/// One kernel in five is weakly coupled (index-1 factors peaked at 0,
/// index-2 factors at 1), which is where several fixed points appear.
pub fn random_kernel<R: Rng>(rng: &mut R, k_lo: usize, k_hi: usize) -> KernelSpec {
    let k = rng.gen_range(k_lo..=k_hi);
    let f: [String; 4] = if rng.gen_bool(0.2) {
        [bump(rng, true), bump(rng, false), bump(rng, true), bump(rng, false)]
    } else {
        std::array::from_fn(|_| random_factor(rng))
    };
    KernelSpec::parse(&f[0], &f[1], &f[2], &f[3], k).expect("generated factors are strictly positive")
}
