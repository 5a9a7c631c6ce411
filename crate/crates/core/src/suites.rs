//! Named verification suites over seeded corpora.
//!
//! Every case draws from its own RNG stream (`case_rng(seed, case)`), cases run
//! in parallel, and reports are collected in case order, so a suite's output
//! depends only on its [`SuiteConfig`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde_json::{Map, Value};
use sha1::{Digest, Sha1};

use crate::corpus::{case_rng, random_coeffs, random_mean_zero, random_s0_with, random_set};
use crate::cz::{
    bad_part_kernel_estimate, cz_decompose, good_part_lorentz, hormander_integral, kernel_size_sup,
    stopping_time_check, verify_cz, HormanderGrid, KernelSpec, SampleGrid,
};
use crate::dyadic_ops::{haar, zero_locality_check, DyadicInterval};
use crate::error::{Error, Result};
use crate::experiments::{
    countable_subadd_check, counterexample_demo, estimate_s_norm, weak11_certificate, weak11_stability,
    yano_chain_check,
};
use crate::lorentz::{
    estimate_quasi_constant, hunt_constant, hunt_split, lorentz_norm, nesting_ratio, series_quasi_check,
};
use crate::report::{num, ReportCollection, VerificationReport};
use crate::stepfn::{distribution, lp_norm, rearrange, LorentzIndex, StepFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Counterexample,
    Aoki,
    Nesting,
    HuntSplit,
    Cz,
    Hormander,
    ZeroLocal,
    Countable,
    Yano,
    Weak11,
    Rearrange,
    Indicator,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Counterexample,
        Suite::Aoki,
        Suite::Nesting,
        Suite::HuntSplit,
        Suite::Cz,
        Suite::Hormander,
        Suite::ZeroLocal,
        Suite::Countable,
        Suite::Yano,
        Suite::Weak11,
        Suite::Rearrange,
        Suite::Indicator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Counterexample => "counterexample",
            Suite::Aoki => "aoki",
            Suite::Nesting => "nesting",
            Suite::HuntSplit => "huntsplit",
            Suite::Cz => "cz",
            Suite::Hormander => "hormander",
            Suite::ZeroLocal => "zerolocal",
            Suite::Countable => "countable",
            Suite::Yano => "yano",
            Suite::Weak11 => "weak11",
            Suite::Rearrange => "rearrange",
            Suite::Indicator => "indicator",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|s| s.name()).collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                Error::input(format!(
                    "unknown suite '{s}'; valid suites: {}",
                    Self::names().join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    pub level: u32,
    pub m: u32,
    /// Series length for the counterexample suite; `None` sweeps `1..=8`.
    pub terms: Option<u32>,
}

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            seed: 0,
            cases: 100,
            level: 10,
            m: 0,
            terms: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cases == 0 {
            return Err(Error::input("cases must be at least 1"));
        }
        if self.level == 0 {
            return Err(Error::input("level must be at least 1"));
        }
        if self.m + self.level > 20 {
            return Err(Error::input("suites are limited to m + level <= 20"));
        }
        Ok(())
    }

    /// The configuration block echoed into reports and hashed for provenance.
    pub fn seed_block(&self) -> Map<String, Value> {
        let mut map = Map::new();
        map.insert("suite".into(), self.suite.name().into());
        map.insert("seed".into(), self.seed.into());
        map.insert("cases".into(), self.cases.into());
        map.insert("level".into(), self.level.into());
        map.insert("m".into(), self.m.into());
        map.insert("terms".into(), self.terms.map_or(Value::Null, Value::from));
        map
    }
}

/// Git blob object id (`sha1("blob <len>\0" + content)`) of the canonical seed block.
pub fn corpus_hash(cfg: &SuiteConfig) -> String {
    let body = serde_json::to_string(&cfg.seed_block()).expect("maps always serialize");
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<ReportCollection> {
    cfg.validate()?;
    let reports = match cfg.suite {
        Suite::Counterexample => counterexample_suite(cfg)?,
        Suite::Aoki => aoki_suite(cfg)?,
        Suite::Nesting => nesting_suite(cfg)?,
        Suite::HuntSplit => hunt_suite(cfg)?,
        Suite::Cz => cz_suite(cfg)?,
        Suite::Hormander => hormander_suite(cfg)?,
        Suite::ZeroLocal => zero_local_suite(cfg)?,
        Suite::Countable => countable_suite(cfg)?,
        Suite::Yano => yano_suite(cfg)?,
        Suite::Weak11 => weak11_suite(cfg)?,
        Suite::Rearrange => rearrange_suite(cfg)?,
        Suite::Indicator => indicator_suite(cfg)?,
    };
    Ok(ReportCollection::new(
        cfg.suite.name(),
        cfg.seed_block(),
        corpus_hash(cfg),
        reports,
    ))
}

fn per_case<F>(cfg: &SuiteConfig, f: F) -> Result<Vec<VerificationReport>>
where
    F: Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<Vec<VerificationReport>> + Sync,
{
    let chunks: Vec<Vec<VerificationReport>> = (0..cfg.cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(cfg.seed, i as u64);
            f(i, &mut rng).map(|mut reps| {
                for r in &mut reps {
                    r.params.insert("case".into(), i.into());
                }
                reps
            })
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn counterexample_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    match cfg.terms {
        Some(n) => Ok(vec![counterexample_demo(n, cfg.level, cfg.seed)?]),
        None => (1..=8)
            .map(|n| counterexample_demo(n, cfg.level.max(n + 1), cfg.seed))
            .collect(),
    }
}

fn random_series(rng: &mut impl Rng, m: u32, level: u32) -> Result<Vec<StepFunction>> {
    let len = rng.random_range(2..=6);
    (0..len).map(|_| random_s0_with(rng, m, level, -1, 3)).collect()
}

fn aoki_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let indices = [
        LorentzIndex::new(0.5, 0.5)?,
        LorentzIndex::new(1.0, f64::INFINITY)?,
    ];
    let mut rng = case_rng(cfg.seed, u64::MAX);
    let mut pairs = Vec::with_capacity(2 * cfg.cases);
    while pairs.len() < 2 * cfg.cases {
        let f = random_s0_with(&mut rng, cfg.m, cfg.level, -1, 3)?;
        let g = random_s0_with(&mut rng, cfg.m, cfg.level, -1, 3)?;
        if !(f.is_zero() && g.is_zero()) {
            pairs.push((f, g));
        }
    }
    let mut out = Vec::new();
    let mut ks = Vec::new();
    for idx in indices {
        let k_emp = estimate_quasi_constant(&pairs, idx)?;
        let mut r = VerificationReport::new("quasi_constant_estimate")
            .param("p", num(idx.p))
            .param("q", num(idx.q))
            .param("pairs", pairs.len());
        r.observe("k_emp", num(k_emp));
        r.observe("k_used", num(2.0 * k_emp));
        r.require("k_at_least_one", k_emp >= 1.0);
        out.push(r);
        ks.push(2.0 * k_emp);
    }
    out.extend(per_case(cfg, |_, rng| {
        let series = random_series(rng, cfg.m, cfg.level)?;
        indices
            .iter()
            .zip(&ks)
            .map(|(&idx, &k)| series_quasi_check(&series, idx, k))
            .collect()
    })?);
    Ok(out)
}

/// Triples `(p, q, r)` with `q = 1 <= r`; for these the ratio is a convex
/// functional over the layers of `f*`, so indicators are the extremal candidates.
const NESTING_TRIPLES: [(f64, f64, f64); 5] = [
    (1.0, 1.0, f64::INFINITY),
    (2.0, 1.0, 2.0),
    (2.0, 1.0, f64::INFINITY),
    (0.5, 1.0, 2.0),
    (4.0, 1.0, 4.0),
];

fn nesting_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut rng = case_rng(cfg.seed, u64::MAX);
    let sets: Vec<StepFunction> = (0..64)
        .map(|_| random_set(&mut rng, cfg.m, cfg.level))
        .collect::<Result<_>>()?;
    let mut bounds = Vec::new();
    for &(p, q, r) in &NESTING_TRIPLES {
        let mut best = 0.0f64;
        for s in &sets {
            best = best.max(nesting_ratio(s, p, q, r)?);
        }
        bounds.push(best);
    }
    per_case(cfg, |_, rng| {
        let f = random_s0_with(rng, cfg.m, cfg.level, -1, 3)?;
        if f.is_zero() {
            return Ok(Vec::new());
        }
        NESTING_TRIPLES
            .iter()
            .zip(&bounds)
            .map(|(&(p, q, r), &bound)| {
                let ratio = nesting_ratio(&f, p, q, r)?;
                let mut rep = VerificationReport::new("nesting")
                    .param("p", num(p))
                    .param("q", num(q))
                    .param("r", num(r))
                    .param("direction", "||f||_{p,r} <= C ||f||_{p,q}, q < r");
                rep.observe("ratio_r_over_q", num(ratio));
                rep.observe("ratio_q_over_r", num(1.0 / ratio));
                rep.set_bound("indicator_max", num(bound));
                rep.require("bounded_by_indicators", ratio <= bound * (1.0 + 1e-9));
                Ok(rep)
            })
            .collect()
    })
}

const HUNT_BATCHES: usize = 5;

fn hunt_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let m = cfg.m.max(3);
    let level = cfg.level.min(20 - m);
    let mut reps = per_case(cfg, |_, rng| {
        let f = random_s0_with(rng, m, level, -2, 3)?;
        let split = hunt_split(&f);
        let mut r = split.check_dominations(&f).param("m", m).param("level", level);
        if !f.is_zero() {
            let c = hunt_constant(&f, 1.0, 2.0, 4.0)?;
            r.observe("split_constant", num(c));
            r.require("split_constant_finite", c.is_finite());
        }
        Ok(vec![r])
    })?;
    let constants: Vec<f64> = reps
        .iter()
        .filter_map(|r| r.observed_f64("split_constant"))
        .collect();
    let batch = constants.len().div_ceil(HUNT_BATCHES).max(1);
    let maxima: Vec<f64> = constants
        .chunks(batch)
        .map(|c| c.iter().copied().fold(0.0, f64::max))
        .collect();
    let hi = maxima.iter().copied().fold(0.0, f64::max);
    let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    let mut summary = VerificationReport::new("hunt_split_constant")
        .param("p0", 1.0)
        .param("p", 2.0)
        .param("p1", 4.0)
        .param("batches", maxima.len());
    summary.observe("batch_maxima", maxima.iter().map(|&x| num(x)).collect::<Vec<_>>());
    summary.observe("c_emp", num(hi));
    summary.observe("spread", num(hi / lo));
    summary.set_bound("spread", 2.0);
    summary.require("finite", hi.is_finite() && lo > 0.0);
    summary.require("stable", hi / lo < 2.0);
    reps.push(summary);
    Ok(reps)
}

/// Hormander constant of the Hilbert kernel, measured once at a fine grid.
fn hilbert_a_prime() -> Result<f64> {
    let grid = HormanderGrid {
        cells_per_delta: 128,
        radius_in_deltas: 2048.0,
    };
    hormander_integral(&KernelSpec::hilbert(), 0.0, 0.25, &grid)
}

/// Cases whose decomposition also gets the kernel quadrature checks.
const CZ_KERNEL_CASES: usize = 50;

fn cz_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let a_prime = hilbert_a_prime()?;
    let kernel = KernelSpec::hilbert();
    per_case(cfg, |i, rng| {
        let f = random_s0_with(rng, cfg.m, cfg.level, -3, 2)?;
        let root_avg = lp_norm(&f, 1.0)? / f.domain_measure();
        let octave = (i % 4) as i32;
        let base = if root_avg > 0.0 { root_avg } else { 1.0 };
        let height = base * 2f64.powi(octave);
        let dec = cz_decompose(&f, height)?;
        let mut out = vec![
            verify_cz(&f, &dec)?.param("octave", octave),
            stopping_time_check(&f, &dec).param("octave", octave),
        ];
        if i < CZ_KERNEL_CASES {
            out.push(bad_part_kernel_estimate(&kernel, &dec, a_prime, 8, 32.0)?);
            out.push(good_part_lorentz(&f, &dec, 2.0)?);
        }
        Ok(out)
    })
}

const HORMANDER_STEPS: usize = 4;

fn hormander_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let ln3 = 3f64.ln();
    let hilbert = KernelSpec::hilbert();
    let start = HormanderGrid {
        cells_per_delta: 8,
        radius_in_deltas: 128.0,
    };
    let mut grids = vec![start];
    for _ in 0..HORMANDER_STEPS {
        grids.push(grids.last().expect("nonempty").refined());
    }
    let finest = *grids.last().expect("nonempty");

    let mut out = Vec::new();
    let values: Vec<f64> = grids
        .iter()
        .map(|g| hormander_integral(&hilbert, 0.0, 0.25, g))
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = values.iter().map(|v| (v - ln3).abs() / ln3).collect();
    let mut r = VerificationReport::new("hormander_refinement")
        .param("kernel", hilbert.description.clone())
        .param("delta", 0.25)
        .param("steps", HORMANDER_STEPS);
    r.observe("values", values.iter().map(|&v| num(v)).collect::<Vec<_>>());
    r.observe(
        "relative_errors",
        errors.iter().map(|&v| num(v)).collect::<Vec<_>>(),
    );
    r.set_bound("limit", num(ln3));
    r.set_bound("relative_error", 0.02);
    r.require("converged", errors[HORMANDER_STEPS] <= 0.02);
    r.require("monotone", errors.windows(2).all(|w| w[1] <= w[0]));
    out.push(r);

    let sup_grid = SampleGrid {
        lo: 0.0,
        hi: 1.0,
        points: 128,
    };
    let size = kernel_size_sup(&hilbert, &sup_grid);
    let gauss = kernel_size_sup(
        &KernelSpec::gauss(),
        &SampleGrid {
            lo: -4.0,
            hi: 4.0,
            points: 256,
        },
    );
    let gauss_sup = (2.0 * std::f64::consts::E).powf(-0.5);
    let mut r = VerificationReport::new("kernel_size").param("points", sup_grid.points);
    r.observe("hilbert", num(size));
    r.observe("gauss", num(gauss));
    r.set_bound("hilbert", 1.0);
    r.set_bound("gauss", num(gauss_sup));
    r.require("hilbert_exact", size == 1.0);
    r.require("gauss_below_sup", gauss <= gauss_sup);
    out.push(r);

    out.extend(per_case(cfg, |_, rng| {
        let delta = 2f64.powi(-rng.random_range(0..8));
        let y = rng.random_range(-64i32..=64) as f64 / 16.0;
        let y2 = if rng.random_bool(0.5) {
            y + delta
        } else {
            y - delta
        };
        let coarse = hormander_integral(&hilbert, y, y2, &finest)?;
        let halved = hormander_integral(&hilbert, y, y + 0.5 * (y2 - y), &finest)?;
        let shifted = hormander_integral(&hilbert, y + 3.0, y2 + 3.0, &finest)?;
        let mut r = VerificationReport::new("hormander_invariance")
            .param("y", num(y))
            .param("y2", num(y2));
        r.observe("value", num(coarse));
        r.observe("halved_delta", num(halved));
        r.observe("translated", num(shifted));
        r.set_bound("relative", 0.02);
        r.require("near_ln3", (coarse - ln3).abs() <= 0.02 * ln3);
        r.require("scale_invariant", (halved - coarse).abs() <= 0.02 * coarse);
        r.require("translation_invariant", (shifted - coarse).abs() <= 0.02 * coarse);
        Ok(vec![r])
    })?);
    Ok(out)
}

fn zero_local_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    per_case(cfg, |_, rng| {
        let (f, i0) = random_mean_zero(rng, cfg.m, cfg.level)?;
        let rows = rng.random_range(1..=4);
        let a = random_coeffs(rng, -(cfg.m as i32), cfg.level as i32 - 1, rows)?;
        Ok(vec![zero_locality_check(&f, &a, i0)?])
    })
}

fn countable_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    per_case(cfg, |_, rng| {
        let rows = rng.random_range(1..=4);
        let a = random_coeffs(rng, -(cfg.m as i32), cfg.level as i32 - 1, rows)?;
        let terms = rng.random_range(2..=10);
        let mut fs = Vec::with_capacity(terms);
        for t in 0..terms {
            if t % 2 == 0 {
                fs.push(random_s0_with(rng, cfg.m, cfg.level, -1, 3)?);
            } else {
                let k = rng.random_range(-(cfg.m as i32)..cfg.level as i32);
                let j = rng.random_range(0..1u64 << (k + cfg.m as i32));
                let c = rng.random_range(-8i32..=8) as f64 / 4.0;
                fs.push(haar(DyadicInterval::new(k, j), cfg.m, cfg.level)?.scale(c));
            }
        }
        Ok(vec![countable_subadd_check(&a, &fs)?])
    })
}

const YANO_ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];

fn yano_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    per_case(cfg, |_, rng| {
        let f = random_s0_with(rng, cfg.m, cfg.level, -12, 2)?;
        YANO_ALPHAS.iter().map(|&a| yano_chain_check(&f, a)).collect()
    })
}

const WEAK11_M: u32 = 4;
const WEAK11_LEVELS: [u32; 3] = [8, 10, 12];

fn weak11_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = vec![weak11_stability(WEAK11_M, &WEAK11_LEVELS, 2.0, cfg.seed, 1.5)?];
    let level = cfg.level.min(8);
    let mut rng = case_rng(cfg.seed, u64::MAX);
    let a = random_coeffs(&mut rng, -(WEAK11_M as i32), level as i32 - 1, 3)?;
    let k_s = estimate_s_norm(&a, WEAK11_M, level, 2.0, cfg.seed, 48)?;
    out.extend(per_case(cfg, |i, rng| {
        let f = random_s0_with(rng, WEAK11_M, level, -3, 2)?;
        let root_avg = lp_norm(&f, 1.0)? / f.domain_measure();
        let base = if root_avg > 0.0 { root_avg } else { 1.0 };
        let lambda = k_s * base * 2f64.powi((i % 6) as i32);
        let (r, _) = weak11_certificate(&a, &f, lambda, 2.0, k_s)?;
        Ok(vec![r])
    })?);
    Ok(out)
}

const REARRANGE_PS: [f64; 4] = [0.5, 1.0, 2.0, f64::INFINITY];

fn rearrange_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    per_case(cfg, |_, rng| {
        let f = random_s0_with(rng, cfg.m, cfg.level, -1, 3)?;
        let profile = rearrange(&f);
        let mut mags: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        mags.sort_by(f64::total_cmp);
        mags.dedup();
        let mut grid = mags.clone();
        grid.extend(mags.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        if let Some(&top) = mags.last() {
            grid.push(top + 1.0);
        }
        let equimeasurable = grid
            .iter()
            .all(|&s| distribution(&f, s) == profile.measure_above(s));
        let mut worst = 0.0f64;
        for p in REARRANGE_PS {
            let a = lp_norm(&f, p)?;
            let b = profile.lp_norm(p);
            if a > 0.0 {
                worst = worst.max((a - b).abs() / a);
            } else {
                worst = worst.max(b);
            }
        }
        let mut r = VerificationReport::new("rearrangement")
            .param("grid_points", grid.len())
            .param("m", cfg.m)
            .param("level", cfg.level);
        r.observe("norm_rel_err_max", num(worst));
        r.set_bound("norm_rel_err_max", 1e-10);
        r.require("equimeasurable", equimeasurable);
        r.require("norms", worst <= 1e-10);
        Ok(vec![r])
    })
}

const INDICATOR_EXPONENTS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 4.0];

fn indicator_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    per_case(cfg, |_, rng| {
        let set = random_set(rng, cfg.m, cfg.level)?;
        let mu = set.support_measure();
        let mut worst = 0.0f64;
        for p in INDICATOR_EXPONENTS {
            for q in INDICATOR_EXPONENTS.iter().copied().chain([f64::INFINITY]) {
                let got = lorentz_norm(&set, LorentzIndex::new(p, q)?)?;
                let want = if q.is_infinite() {
                    mu.powf(1.0 / p)
                } else {
                    (p / q).powf(1.0 / q) * mu.powf(1.0 / p)
                };
                worst = worst.max((got - want).abs() / want);
            }
        }
        let f = random_s0_with(rng, cfg.m, cfg.level, -1, 3)?;
        let mut diag = 0.0f64;
        for p in INDICATOR_EXPONENTS {
            let lp = lp_norm(&f, p)?;
            let lpp = lorentz_norm(&f, LorentzIndex::new(p, p)?)?;
            if lp > 0.0 {
                diag = diag.max((lpp - lp).abs() / lp);
            }
        }
        let mut r = VerificationReport::new("lorentz_indicator_law").param("measure", num(mu));
        r.observe("rel_err_max", num(worst));
        r.observe("diagonal_rel_err_max", num(diag));
        r.set_bound("rel_err_max", 1e-12);
        r.set_bound("diagonal_rel_err_max", 1e-10);
        r.require("indicator_law", worst <= 1e-12);
        r.require("diagonal_is_lp", diag <= 1e-10);
        Ok(vec![r])
    })
}
