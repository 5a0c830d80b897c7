//! Shared brute-force oracles, kept independent of the library's own
//! computation paths.
#![allow(dead_code)] // each test target uses its own subset

use airq_core::inference::{ConsequentCentroid, FiringInterval};
use airq_core::it2::It2Set;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Exhaustive switch-point enumeration for the type-reduced endpoints.
/// Every switch position is evaluated by direct re-summation.
pub fn km_oracle(rules: &[(FiringInterval, ConsequentCentroid)]) -> (f64, f64) {
    let fired: Vec<_> = rules.iter().filter(|(f, _)| f.hi > 0.0).collect();
    assert!(!fired.is_empty(), "oracle needs at least one fired rule");

    let endpoint = |left: bool| -> f64 {
        let mut items: Vec<(f64, f64, f64)> = fired
            .iter()
            .map(|(f, c)| (if left { c.cl } else { c.cr }, f.lo, f.hi))
            .collect();
        items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let n = items.len();
        let mut best = if left { f64::INFINITY } else { f64::NEG_INFINITY };
        for k in 0..=n {
            let mut num = 0.0;
            let mut den = 0.0;
            for (i, &(c, lo, hi)) in items.iter().enumerate() {
                let f = if left {
                    if i < k {
                        hi
                    } else {
                        lo
                    }
                } else if i < k {
                    lo
                } else {
                    hi
                };
                num += f * c;
                den += f;
            }
            if den > 0.0 {
                let y = num / den;
                best = if left { best.min(y) } else { best.max(y) };
            }
        }
        best
    };
    (endpoint(true), endpoint(false))
}

/// Random rule system: 2..=12 rules with valid firing intervals (at least one
/// positive) and ordered centroids in [0, 600].
pub fn random_system(rng: &mut ChaCha8Rng) -> Vec<(FiringInterval, ConsequentCentroid)> {
    let n = rng.gen_range(2..=12);
    let mut rules = Vec::with_capacity(n);
    for _ in 0..n {
        let hi: f64 = rng.gen_range(0.0..=1.0);
        let lo = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..=hi) };
        let a: f64 = rng.gen_range(0.0..600.0);
        let b: f64 = rng.gen_range(0.0..600.0);
        let (cl, cr) = if a <= b { (a, b) } else { (b, a) };
        // occasionally duplicate centroids to exercise tie handling
        rules.push((FiringInterval { lo, hi }, ConsequentCentroid { cl, cr }));
    }
    if rules.iter().all(|(f, _)| f.hi <= 0.0) {
        rules[0].0.hi = 0.5;
    }
    if rules.len() >= 2 && rng.gen_bool(0.3) {
        let c = rules[0].1;
        rules[1].1 = c;
    }
    rules
}

/// Naive per-switch re-summation centroid oracle (no prefix sums).
pub fn centroid_oracle(set: &It2Set, grid: usize, domain: (f64, f64)) -> (f64, f64) {
    let (lo, hi) = domain;
    let steps = (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / steps).collect();
    let upper: Vec<f64> = xs.iter().map(|&x| set.umf.eval(x)).collect();
    let lower: Vec<f64> = xs.iter().map(|&x| set.lmf.eval(x)).collect();
    let mut cl = f64::INFINITY;
    let mut cr = f64::NEG_INFINITY;
    for k in 0..=grid {
        let mut num_l = 0.0;
        let mut den_l = 0.0;
        let mut num_r = 0.0;
        let mut den_r = 0.0;
        for i in 0..grid {
            let (mu_l, mu_r) = if i < k { (upper[i], lower[i]) } else { (lower[i], upper[i]) };
            num_l += xs[i] * mu_l;
            den_l += mu_l;
            num_r += xs[i] * mu_r;
            den_r += mu_r;
        }
        if den_l > 0.0 {
            cl = cl.min(num_l / den_l);
        }
        if den_r > 0.0 {
            cr = cr.max(num_r / den_r);
        }
    }
    (cl, cr)
}

/// Rank-by-counting median, independent of sorting.
pub fn median_oracle(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let n = values.len();
    let rank = |k: usize| -> f64 {
        // k-th smallest by counting
        let mut best = f64::NAN;
        for &candidate in values {
            let smaller = values.iter().filter(|&&v| v < candidate).count();
            let equal = values.iter().filter(|&&v| v == candidate).count();
            if smaller <= k && k < smaller + equal {
                best = candidate;
            }
        }
        best
    };
    if n % 2 == 1 {
        rank(n / 2)
    } else {
        (rank(n / 2 - 1) + rank(n / 2)) / 2.0
    }
}
