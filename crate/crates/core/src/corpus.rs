//! Seeded corpora. Every generator takes an explicit RNG or seed, and all
//! produced values are dyadic rationals so downstream measure and Haar
//! arithmetic stays exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic_ops::{CoeffMatrix, DyadicInterval};
use crate::error::{Error, Result};
use crate::stepfn::{pow2, StepFunction};

/// Independent, reproducible RNG for case `case` of a run seeded with `seed`.
pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}

/// A uniformly random level in `[min_k, level]`, then a uniform position.
pub fn random_interval<R: Rng + ?Sized>(rng: &mut R, m: u32, level: u32, min_k: i32) -> DyadicInterval {
    let lo = min_k.max(-(m as i32));
    let k = rng.random_range(lo..=level as i32);
    let j = rng.random_range(0..1u64 << (k + m as i32));
    DyadicInterval::new(k, j)
}

fn union_indicator(m: u32, level: u32, sets: &[DyadicInterval]) -> Result<Vec<bool>> {
    let mut mask = vec![false; 1usize << (m + level)];
    for q in sets {
        q.check_domain(m)?;
        mask[q.cell_range(level)?].fill(true);
    }
    Ok(mask)
}

/// `sum_k 2^{-k} chi_{A_k} - sum_k 2^{-k} chi_{B_k}`, where `plus[i]` (resp.
/// `minus[i]`) lists dyadic intervals whose union is `A_{kmin+i}` (`B_{kmin+i}`).
pub fn s0_from_sets(
    m: u32,
    level: u32,
    kmin: i32,
    plus: &[Vec<DyadicInterval>],
    minus: &[Vec<DyadicInterval>],
) -> Result<StepFunction> {
    let mut values = vec![0.0; 1usize << (m + level)];
    for (sign, family) in [(1.0, plus), (-1.0, minus)] {
        for (i, sets) in family.iter().enumerate() {
            let weight = sign * pow2(-(kmin + i as i32));
            for (v, inside) in values.iter_mut().zip(union_indicator(m, level, sets)?) {
                if inside {
                    *v += weight;
                }
            }
        }
    }
    StepFunction::new(m, level, values)
}

/// Random function of the form `f1 - f2`, each `f_i = sum_{k=kmin}^{kmax} 2^{-k} chi_{A_k}`
/// with every `A_k` a union of up to three random dyadic intervals (possibly empty).
pub fn random_s0_with(rng: &mut impl Rng, m: u32, level: u32, kmin: i32, kmax: i32) -> Result<StepFunction> {
    if kmin >= kmax {
        return Err(Error::input(format!("need kmin < kmax, got {kmin} >= {kmax}")));
    }
    let terms = (kmax - kmin + 1) as usize;
    let mut draw = || -> Vec<Vec<DyadicInterval>> {
        (0..terms)
            .map(|_| {
                let count = rng.random_range(0..=3);
                (0..count)
                    .map(|_| random_interval(rng, m, level, -(m as i32)))
                    .collect()
            })
            .collect()
    };
    let plus = draw();
    let minus = draw();
    s0_from_sets(m, level, kmin, &plus, &minus)
}

/// Deterministic in `seed`: the same arguments always give the same function.
pub fn random_s0(seed: u64, m: u32, level: u32, kmin: i32, kmax: i32) -> Result<StepFunction> {
    random_s0_with(&mut case_rng(seed, 0), m, level, kmin, kmax)
}

/// Random dyadic interval indicator or a union of up to four of them.
pub fn random_set(rng: &mut impl Rng, m: u32, level: u32) -> Result<StepFunction> {
    let count = rng.random_range(1..=4);
    let sets: Vec<DyadicInterval> = (0..count)
        .map(|_| random_interval(rng, m, level, -(m as i32)))
        .collect();
    let mask = union_indicator(m, level, &sets)?;
    StepFunction::new(
        m,
        level,
        mask.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect(),
    )
}

/// A mean-zero function supported in a random dyadic `I0`, built from
/// signed Haar shapes on subintervals of `I0` with quarter-integer weights.
pub fn random_mean_zero(rng: &mut impl Rng, m: u32, level: u32) -> Result<(StepFunction, DyadicInterval)> {
    if level == 0 && m == 0 {
        return Err(Error::input("mean-zero functions need at least two cells"));
    }
    let k0 = rng.random_range(-(m as i32)..level as i32);
    let i0 = DyadicInterval::new(k0, rng.random_range(0..1u64 << (k0 + m as i32)));
    let mut values = vec![0.0; 1usize << (m + level)];
    let shapes = rng.random_range(1..=4);
    for _ in 0..shapes {
        let depth = rng.random_range(k0..level as i32);
        let span = 1u64 << (depth - k0);
        let q = DyadicInterval::new(depth, i0.j * span + rng.random_range(0..span));
        let c = rng.random_range(-8i32..=8) as f64 / 4.0;
        let range = q.cell_range(level)?;
        let mid = range.start + range.len() / 2;
        for v in &mut values[range.start..mid] {
            *v += c;
        }
        for v in &mut values[mid..range.end] {
            *v -= c;
        }
    }
    Ok((StepFunction::new(m, level, values)?, i0))
}

/// Random coefficients with quarter-integer entries in `[-2, 2]` on scales
/// `kmin..=kmax` and `rows` rows.
pub fn random_coeffs(rng: &mut impl Rng, kmin: i32, kmax: i32, rows: i64) -> Result<CoeffMatrix> {
    let mut a = CoeffMatrix::new();
    for j in 0..rows {
        for k in kmin..=kmax {
            if rng.random_bool(0.6) {
                a.insert(k, j, rng.random_range(-8i32..=8) as f64 / 4.0)?;
            }
        }
    }
    Ok(a)
}
