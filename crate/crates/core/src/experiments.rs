//! End-to-end desk-scale verifications: the limsup counterexample to countable
//! subadditivity, the level-set chain behind the `L log^a L` extrapolation
//! bound, countable subadditivity of `S`, and the weak-(1,1) certificate for
//! the 0-local maximal operator.

use rand::Rng;
use serde_json::Value;

use crate::corpus::{case_rng, random_mean_zero, random_s0_with, random_set};
use crate::cz::{cz_decompose, CZDecomposition};
use crate::dyadic_ops::{haar, maximal_s, CoeffMatrix, DyadicInterval};
use crate::error::{Error, Result};
use crate::lorentz::{lorentz_norm, NORM_RTOL};
use crate::report::{num, VerificationReport};
use crate::stepfn::{combine, distribution, lp_norm, pow2, LorentzIndex, StepFunction};

/// `min{1, limsup_n n int_0^{1/n} |f|}`; for a step function the limsup is `|f|` on the first cell.
pub fn limsup_functional(f: &StepFunction) -> f64 {
    f.values().first().map_or(0.0, |v| v.abs().min(1.0))
}

/// Indicator of the dyadic annulus `[2^{-j-1}, 2^{-j})` on `[0, 1)`.
pub fn annulus(j: u32, level: u32) -> Result<StepFunction> {
    StepFunction::indicator(0, level, pow2(-(j as i32) - 1), pow2(-(j as i32)), 1.0)
}

/// The annuli `f_j`, `j < n`, sum to `chi_[2^{-n}, 1)`, which tends to `chi_[0,1)` in `L^1`
/// while `T(f_j) = 0` for every `j` and `T(chi_[0,1)) = 1`.
///
/// `T` is evaluated on the canonical representative `chi_[0,1)` of the `L^1`
/// limit; `T` is not continuous on `L^1` classes, which is what makes the
/// countable inequality fail.
pub fn counterexample_demo(n: u32, level: u32, seed: u64) -> Result<VerificationReport> {
    if level < n + 1 {
        return Err(Error::input(format!(
            "need level >= n + 1 = {}, got {level}",
            n + 1
        )));
    }
    let limit = StepFunction::indicator(0, level, 0.0, 1.0, 1.0)?;
    let terms: Vec<StepFunction> = (0..n).map(|j| annulus(j, level)).collect::<Result<_>>()?;
    let partial = if terms.is_empty() {
        StepFunction::zero(0, level)?
    } else {
        combine(&vec![1.0; terms.len()], &terms)?
    };
    let tail = lp_norm(&limit.sub(&partial), 1.0)?;
    let t_limit = limsup_functional(&limit);
    let t_sum: f64 = terms.iter().map(limsup_functional).sum();

    let mut rng = case_rng(seed, u64::from(n));
    let pairs = 100;
    let mut pair_failures = 0;
    for _ in 0..pairs {
        let f = random_first_cell_heavy(&mut rng, level)?;
        let g = random_first_cell_heavy(&mut rng, level)?;
        if limsup_functional(&f.add(&g)) > limsup_functional(&f) + limsup_functional(&g) {
            pair_failures += 1;
        }
    }

    let mut r = VerificationReport::new("counterexample")
        .param("n", n)
        .param("level", level)
        .param(
            "intervals",
            "dyadic annuli [2^-j-1, 2^-j) in place of (1/(j+1), 1/j]",
        )
        .param("limit_representative", "chi_[0,1)");
    r.observe("tail_l1", num(tail));
    r.observe("t_limit", num(t_limit));
    r.observe("sum_t_terms", num(t_sum));
    r.observe("t_partial", num(limsup_functional(&partial)));
    r.observe("subadditive_pair_failures", pair_failures);
    r.set_bound("tail_l1", num(pow2(-(n as i32))));
    r.set_bound("subadditive_pairs", pairs);
    r.require("tail_exact", tail == pow2(-(n as i32)));
    r.require("violation", t_limit > t_sum);
    r.require("pairwise_subadditive", pair_failures == 0);
    Ok(r)
}

fn random_first_cell_heavy(rng: &mut impl Rng, level: u32) -> Result<StepFunction> {
    let mut f = random_s0_with(rng, 0, level, -1, 3)?.into_values();
    f[0] = rng.random_range(-12i32..=12) as f64 / 8.0;
    StepFunction::new(0, level, f)
}

/// Pieces `f chi_{S_k}` with `S_0 = {|f| < 2}` and `S_k = {2^k <= |f| < 2^{k+1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetDecomposition {
    /// `(k, piece)` in increasing `k`; `k = 0` is always present, other `k` only when `S_k` is nonempty.
    pub pieces: Vec<(u32, StepFunction)>,
}

/// Dyadic bracket `k >= 1` with `2^k <= x < 2^{k+1}`, or 0 when `x < 2`.
pub fn dyadic_bracket(x: f64) -> u32 {
    if !(x >= 2.0) {
        return 0;
    }
    let mut k = x.log2().floor() as i32;
    while pow2(k) > x {
        k -= 1;
    }
    while pow2(k + 1) <= x {
        k += 1;
    }
    k as u32
}

pub fn level_sets(f: &StepFunction) -> LevelSetDecomposition {
    let mut ks: Vec<u32> = f.values().iter().map(|v| dyadic_bracket(v.abs())).collect();
    ks.push(0);
    ks.sort_unstable();
    ks.dedup();
    let pieces = ks
        .into_iter()
        .map(|k| (k, f.restrict(|_, v| dyadic_bracket(v.abs()) == k)))
        .collect();
    LevelSetDecomposition { pieces }
}

impl LevelSetDecomposition {
    /// `mu(S_k)`; for `k = 0` this counts only the support of the piece.
    pub fn measure(&self, k: u32) -> f64 {
        self.pieces
            .iter()
            .find(|(kk, _)| *kk == k)
            .map_or(0.0, |(_, p)| p.support_measure())
    }

    pub fn sum(&self) -> Result<StepFunction> {
        let fs: Vec<StepFunction> = self.pieces.iter().map(|(_, p)| p.clone()).collect();
        combine(&vec![1.0; fs.len()], &fs)
    }

    /// `||f - sum_{k <= K} pieces||_{p,1}` for each `K` present, in increasing order.
    pub fn tail_norms(&self, f: &StepFunction, p: f64) -> Result<Vec<f64>> {
        let idx = LorentzIndex::new(p, 1.0)?;
        let mut partial = StepFunction::zero(f.m(), f.level())?;
        let mut out = Vec::with_capacity(self.pieces.len());
        for (_, piece) in &self.pieces {
            partial = partial.add(piece);
            out.push(lorentz_norm(&f.sub(&partial), idx)?);
        }
        Ok(out)
    }
}

/// `int |f| (log_2^+ |f|)^alpha`.
pub fn llog_functional(f: &StepFunction, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::input(format!("alpha must be positive, got {alpha}")));
    }
    let total: f64 = f
        .values()
        .iter()
        .map(|v| {
            let a = v.abs();
            if a > 1.0 {
                a * a.log2().powf(alpha)
            } else {
                0.0
            }
        })
        .sum();
    Ok(total * f.cell_width())
}

/// `C_alpha = sum_{k>=1} 2^{k+1} k^alpha 4^{-k}`, truncated once terms drop below `1e-14`
/// past the peak of `k^alpha 2^{-k}`.
pub fn yano_constant(alpha: f64) -> f64 {
    let peak = (alpha / std::f64::consts::LN_2).ceil() as u32;
    let mut total = 0.0;
    let mut k = 1u32;
    loop {
        let term = 2.0 * f64::from(k).powf(alpha) * pow2(-(k as i32));
        total += term;
        if k > peak && term < 1e-14 {
            break;
        }
        k += 1;
    }
    total
}

/// Per-scale Young inequality `mu^{k/(k+1)} <= k/(k+1) 4mu + 1/(k+1) 4^{-k} <= 4mu + 4^{-k}`
/// and the summed chain `sum_{k>=1} 2^{k+1} k^a mu(S_k)^{k/(k+1)} <= 8 int |f|(log_2^+|f|)^a + C_a`.
pub fn yano_chain_check(f: &StepFunction, alpha: f64) -> Result<VerificationReport> {
    // The middle Young bound is attained when 4 mu = 4^{-k}; powf may land one ulp above.
    const YOUNG_RTOL: f64 = 1e-12;
    let llog = llog_functional(f, alpha)?;
    let c_alpha = yano_constant(alpha);
    let dec = level_sets(f);
    let mut young_ok = true;
    let mut worst_young = 0.0f64;
    let mut lhs = 0.0;
    let mut scales = 0usize;
    for &(k, ref piece) in dec.pieces.iter().filter(|(k, _)| *k >= 1) {
        let mu = piece.support_measure();
        if mu == 0.0 {
            continue;
        }
        scales += 1;
        let kf = f64::from(k);
        let e = kf / (kf + 1.0);
        let powered = mu.powf(e);
        let four_k = pow2(-2 * k as i32);
        let mid = e * 4.0 * mu + four_k / (kf + 1.0);
        let loose = 4.0 * mu + four_k;
        young_ok &= powered <= mid * (1.0 + YOUNG_RTOL) && mid <= loose;
        worst_young = worst_young.max(powered / loose);
        lhs += pow2(k as i32 + 1) * kf.powf(alpha) * powered;
    }
    let rhs = 8.0 * llog + c_alpha;

    let mut r = VerificationReport::new("yano_chain").param("alpha", num(alpha));
    r.observe("scales", scales);
    r.observe("young_ratio_max", num(worst_young));
    r.observe("chain_lhs", num(lhs));
    r.observe("llog", num(llog));
    r.set_bound("young_ratio_max", 1.0);
    r.set_bound("chain_rhs", num(rhs));
    r.set_bound("c_alpha", num(c_alpha));
    r.require("young", young_ok);
    r.require("chain", lhs <= rhs * (1.0 + YOUNG_RTOL));
    Ok(r)
}

/// Round-off allowance for pointwise comparisons of `S` values, relative to the largest value on the grid.
const SUBADD_RTOL: f64 = 1e-12;

/// Pointwise `S(sum f_j) <= sum S(f_j)` on every cell, up to [`SUBADD_RTOL`].
pub fn countable_subadd_check(a: &CoeffMatrix, fs: &[StepFunction]) -> Result<VerificationReport> {
    let total = combine(&vec![1.0; fs.len()], fs)?;
    let (m, level) = (total.m(), total.level());
    let lhs = maximal_s(&total, a)?;
    let mut rhs = vec![0.0; total.len()];
    for f in fs {
        let s = maximal_s(&f.refine(level, m)?, a)?;
        for (acc, v) in rhs.iter_mut().zip(s.values()) {
            *acc += v;
        }
    }
    let slacks: Vec<f64> = rhs.iter().zip(lhs.values()).map(|(r, l)| r - l).collect();
    let tol = SUBADD_RTOL * rhs.iter().copied().fold(0.0, f64::max);
    let pointwise = rhs.iter().zip(lhs.values()).all(|(r, l)| l - r <= tol);
    let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    let max_slack = slacks.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut r = VerificationReport::new("countable_subadditivity")
        .param("terms", fs.len())
        .param("level", level)
        .param("m", m);
    r.observe("min_slack", num(min_slack));
    r.observe("max_slack", num(max_slack));
    r.set_bound("min_slack", 0.0);
    r.require("pointwise", pointwise);
    Ok(r)
}

/// Empirical `||S||_{L^{r,1} -> L^{r,inf}}`: the largest ratio `||S phi||_{r,inf} / ||phi||_{r,1}`
/// over a seeded corpus on the given grid. The corpus holds one Haar function per scale
/// (at a random position) and `samples` draws cycling through random dyadic sets,
/// random `S_0` functions and random mean-zero functions.
///
/// This is a lower estimate of the operator norm.
pub fn estimate_s_norm(
    a: &CoeffMatrix,
    m: u32,
    level: u32,
    r: f64,
    seed: u64,
    samples: usize,
) -> Result<f64> {
    let strong = LorentzIndex::new(r, 1.0)?;
    let weak = LorentzIndex::new(r, f64::INFINITY)?;
    let mut rng = case_rng(seed, 0x5eed);
    let mut corpus = Vec::with_capacity(samples + (m + level) as usize);
    for k in -(m as i32)..level as i32 {
        let j = rng.random_range(0..1u64 << (k + m as i32));
        corpus.push(haar(DyadicInterval::new(k, j), m, level)?);
    }
    for i in 0..samples {
        corpus.push(match i % 3 {
            0 => random_set(&mut rng, m, level)?,
            1 => random_s0_with(&mut rng, m, level, -2, 2)?,
            _ => random_mean_zero(&mut rng, m, level)?.0,
        });
    }
    let mut best = 0.0f64;
    for phi in &corpus {
        let denom = lorentz_norm(phi, strong)?;
        if denom > 0.0 {
            best = best.max(lorentz_norm(&maximal_s(phi, a)?, weak)? / denom);
        }
    }
    if best == 0.0 {
        return Err(Error::UndefinedRatio(
            "S vanished on the whole estimation corpus".into(),
        ));
    }
    Ok(best)
}

/// `lambda |{S f > lambda}| / ||f||_1`, zero for `f = 0`.
pub fn weak11_ratio(s_f: &StepFunction, f_l1: f64, lambda: f64) -> f64 {
    if f_l1 == 0.0 {
        0.0
    } else {
        lambda * distribution(s_f, lambda) / f_l1
    }
}

/// The weak-(1,1) chain at one height with a given operator-norm estimate `k_s`:
/// `gamma = 1/k_s`, CZ decomposition at `gamma lambda`, then
/// (a) `||S g||_{r,inf} <= k_s ||g||_{r,1}`, (b) each `S(b_j)` supported in `Q_j`
/// with `|S b| <= sum |S b_j|`, and (c) the certificate ratio
/// `lambda |{S f > lambda}| / (k_s ||f||_1)`, reported but not bounded.
pub fn weak11_certificate(
    a: &CoeffMatrix,
    f: &StepFunction,
    lambda: f64,
    r: f64,
    k_s: f64,
) -> Result<(VerificationReport, CZDecomposition)> {
    if !(lambda > 0.0) {
        return Err(Error::input(format!("lambda must be positive, got {lambda}")));
    }
    let gamma = 1.0 / k_s;
    let dec = cz_decompose(f, gamma * lambda)?;
    let strong = LorentzIndex::new(r, 1.0)?;
    let weak = LorentzIndex::new(r, f64::INFINITY)?;

    let s_g = maximal_s(&dec.good, a)?;
    let sg_weak = lorentz_norm(&s_g, weak)?;
    let g_strong = lorentz_norm(&dec.good, strong)?;

    let mut support_ok = true;
    let mut sum_sb = vec![0.0; f.len()];
    for b in &dec.bad {
        let sb = maximal_s(&b.part, a)?;
        let range = b.cube.cell_range(f.level())?;
        for (i, &v) in sb.values().iter().enumerate() {
            if !range.contains(&i) && v != 0.0 {
                support_ok = false;
            }
            sum_sb[i] += v;
        }
    }
    let b_total = f.sub(&dec.good);
    let s_b = maximal_s(&b_total, a)?;
    let tol = SUBADD_RTOL * sum_sb.iter().copied().fold(0.0, f64::max);
    let countable_ok = s_b.values().iter().zip(&sum_sb).all(|(l, r)| l - r <= tol);

    let s_f = maximal_s(f, a)?;
    let f_l1 = lp_norm(f, 1.0)?;
    let level_measure = distribution(&s_f, lambda);
    let certificate = if f_l1 == 0.0 {
        0.0
    } else {
        lambda * level_measure / (k_s * f_l1)
    };

    let mut rep = VerificationReport::new("weak11")
        .param("lambda", num(lambda))
        .param("r", num(r))
        .param("k_s", num(k_s))
        .param("gamma", num(gamma))
        .param("height", num(dec.height))
        .param("cubes", dec.bad.len());
    rep.observe("s_g_weak", num(sg_weak));
    rep.set_bound("s_g_weak", num(k_s * g_strong));
    rep.require("good_part_route", sg_weak <= k_s * g_strong * (1.0 + NORM_RTOL));
    rep.require("bad_support_in_cubes", support_ok);
    rep.require("bad_countable_subadditive", countable_ok);
    rep.observe("level_set_measure", num(level_measure));
    rep.observe("f_l1", num(f_l1));
    rep.observe("certificate_c", num(certificate));
    Ok((rep, dec))
}

/// [`weak11_certificate`] with `k_s` estimated on the grid of `f` (64 seeded samples).
pub fn weak11_demo(a: &CoeffMatrix, f: &StepFunction, lambda: f64, r: f64) -> Result<VerificationReport> {
    if !(r > 1.0) || r.is_infinite() {
        return Err(Error::input(format!("need 1 < r < inf, got {r}")));
    }
    let k_s = estimate_s_norm(a, f.m(), f.level(), r, u64::from(f.level()), 64)?;
    Ok(weak11_certificate(a, f, lambda, r, k_s)?.0)
}

/// Spikes of unit-order mass shrinking with the resolution, plus a flat
/// background on `[1, 2)`: `f_L = sum_i w_i 2^L chi_[x_i, x_i + 2^-L) + chi_[1,2)` on `[0, 2^m)`.
pub fn spiky_function(m: u32, level: u32) -> Result<StepFunction> {
    if m < 1 {
        return Err(Error::input("the spiky family needs m >= 1"));
    }
    const SPIKES: [(f64, f64); 3] = [(0.1875, 1.0), (0.625, 2.0), (0.90625, 0.5)];
    let height = pow2(level as i32);
    let mut values = StepFunction::indicator(m, level, 1.0, 2.0, 1.0)?.into_values();
    for (x, w) in SPIKES {
        values[(x * height) as usize] += w * height;
    }
    StepFunction::new(m, level, values)
}

/// Three rows over scales `-m..level`: all ones, alternating signs, even scales only.
pub fn spiky_coeffs(m: u32, level: u32) -> Result<CoeffMatrix> {
    let mut a = CoeffMatrix::new();
    for k in -(m as i32)..level as i32 {
        a.insert(k, 0, 1.0)?;
        a.insert(k, 1, if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 })?;
        if k.rem_euclid(2) == 0 {
            a.insert(k, 2, 1.0)?;
        }
    }
    Ok(a)
}

/// Geometric grid `2^{i/2} ||f||_1`, `i = -16..=16`.
pub fn lambda_grid(f_l1: f64) -> Vec<f64> {
    (-16..=16).map(|i| pow2(i).sqrt() * f_l1).collect()
}

/// Weak-(1,1) certificate across resolutions: at each level, the maximum over the
/// lambda grid of `lambda |{S f > lambda}| / ||f||_1`, plus the CZ-route checks at every
/// admissible lambda. Growth between consecutive levels must stay below `max_growth` and every
/// bad part must stay inside its cube. The good-part route uses an empirical (lower) estimate of
/// the operator norm, so its failures are counted rather than asserted.
pub fn weak11_stability(
    m: u32,
    levels: &[u32],
    r: f64,
    seed: u64,
    max_growth: f64,
) -> Result<VerificationReport> {
    let mut maxima = Vec::new();
    let mut route_failures = 0usize;
    let mut support_ok = true;
    let mut admissible = 0usize;
    let mut skipped = 0usize;
    let mut k_values = Vec::new();
    for &level in levels {
        let f = spiky_function(m, level)?;
        let a = spiky_coeffs(m, level)?;
        let s_f = maximal_s(&f, &a)?;
        let f_l1 = lp_norm(&f, 1.0)?;
        let grid = lambda_grid(f_l1);
        let best = grid
            .iter()
            .map(|&l| weak11_ratio(&s_f, f_l1, l))
            .fold(0.0, f64::max);
        maxima.push(best);

        let k_s = estimate_s_norm(&a, m, level, r, seed, 48)?;
        k_values.push(num(k_s));
        for &lambda in &grid {
            match weak11_certificate(&a, &f, lambda, r, k_s) {
                Ok((rep, _)) => {
                    admissible += 1;
                    if rep.observed["good_part_route.ok"] != Value::Bool(true) {
                        route_failures += 1;
                    }
                    support_ok &= rep.observed["bad_support_in_cubes.ok"] == Value::Bool(true)
                        && rep.observed["bad_countable_subadditive.ok"] == Value::Bool(true);
                }
                Err(Error::InvalidInput(_)) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    let growth: Vec<f64> = maxima.windows(2).map(|w| w[1] / w[0]).collect();
    let worst_growth = growth.iter().copied().fold(0.0, f64::max);

    let mut rep = VerificationReport::new("weak11_stability")
        .param("m", m)
        .param("levels", levels.to_vec())
        .param("r", num(r))
        .param("lambda_points", 33);
    rep.observe(
        "ratio_max_per_level",
        maxima.iter().map(|&x| num(x)).collect::<Vec<_>>(),
    );
    rep.observe("growth", growth.iter().map(|&x| num(x)).collect::<Vec<_>>());
    rep.observe("k_s_per_level", k_values);
    rep.observe("cz_admissible_lambdas", admissible);
    rep.observe("cz_skipped_lambdas", skipped);
    rep.set_bound("growth_max", num(max_growth));
    rep.require("growth", worst_growth < max_growth);
    rep.observe("good_part_route_failures", route_failures);
    rep.require("bad_support_in_cubes", support_ok);
    Ok(rep)
}
