//! Lorentz quasi-norms and the quasi-norm calculus built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{num, VerificationReport};
use crate::stepfn::{combine, dyadic_sum, rearrange, DecreasingProfile, LorentzIndex, StepFunction};

/// Relative slack allowed on comparisons between derived norms.
pub const NORM_RTOL: f64 = 1e-9;

/// Quasi-triangle constant `K` together with the exponent `alpha` solving `(2K)^alpha = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiNormProfile {
    pub index: LorentzIndex,
    pub k: f64,
    pub alpha: f64,
}

impl QuasiNormProfile {
    pub fn new(index: LorentzIndex, k: f64) -> Result<Self> {
        let alpha = alpha_for(k)?;
        Ok(Self { index, k, alpha })
    }
}

/// `log 2 / log(2K)`, the exponent with `(2K)^alpha = 2`.
pub fn alpha_for(k: f64) -> Result<f64> {
    if !(k >= 1.0) || k.is_infinite() {
        return Err(Error::input(format!(
            "quasi-triangle constant must be a finite K >= 1, got {k}"
        )));
    }
    if k == 1.0 {
        return Ok(1.0);
    }
    Ok(std::f64::consts::LN_2 / (2.0 * k).ln())
}

/// Lorentz quasi-norm of a decreasing profile, evaluated step by step in closed form.
pub fn lorentz_norm_profile(profile: &DecreasingProfile, idx: LorentzIndex) -> Result<f64> {
    let LorentzIndex { p, q } = idx;
    if p.is_infinite() && q.is_finite() {
        return Err(Error::UnsupportedIndex { p, q });
    }
    if profile.is_zero() {
        return Ok(0.0);
    }
    if q.is_infinite() {
        let inv_p = 1.0 / p;
        let sup = profile
            .iter_steps()
            .map(|(_, b, v)| v * b.powf(inv_p))
            .fold(0.0, f64::max);
        return Ok(sup);
    }
    let ratio = q / p;
    let terms: Vec<f64> = profile
        .iter_steps()
        .map(|(a, b, v)| v.powf(q) * (p / q) * (b.powf(ratio) - a.powf(ratio)))
        .collect();
    Ok(dyadic_sum(&terms).powf(1.0 / q))
}

/// `||f||_{L^{p,q}}` computed from the decreasing rearrangement.
pub fn lorentz_norm(f: &StepFunction, idx: LorentzIndex) -> Result<f64> {
    lorentz_norm_profile(&rearrange(f), idx)
}

/// `||f||_{p,r} / ||f||_{p,q}` for `q < r`, the constant of the embedding `L^{p,q} in L^{p,r}`.
pub fn nesting_ratio(f: &StepFunction, p: f64, q: f64, r: f64) -> Result<f64> {
    if !(q > 0.0 && q < r) {
        return Err(Error::input(format!(
            "nesting requires 0 < q < r (q = {q}, r = {r})"
        )));
    }
    let profile = rearrange(f);
    if profile.is_zero() {
        return Err(Error::UndefinedRatio("nesting ratio of the zero function".into()));
    }
    let small = lorentz_norm_profile(&profile, LorentzIndex::new(p, q)?)?;
    let large = lorentz_norm_profile(&profile, LorentzIndex::new(p, r)?)?;
    Ok(large / small)
}

/// `f = f0 + f1` with `f0 = f * chi_{|f| > f*(1)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HuntSplit {
    pub f0: StepFunction,
    pub f1: StepFunction,
    /// `f*(1)`; zero when the domain has measure at most 1.
    pub threshold: f64,
}

pub fn hunt_split(f: &StepFunction) -> HuntSplit {
    let threshold = rearrange(f).eval(1.0);
    let f0 = f.restrict(|_, v| v.abs() > threshold);
    let f1 = f.restrict(|_, v| v.abs() <= threshold);
    HuntSplit { f0, f1, threshold }
}

impl HuntSplit {
    /// Checks `f0*(t) <= f*(t) chi_(0,1)(t)` and `f1*(t) <= min(f*(1), f*(t))` on the
    /// union of all three profiles' breakpoints, the point 1, and the midpoints between them.
    pub fn check_dominations(&self, f: &StepFunction) -> VerificationReport {
        let pf = rearrange(f);
        let p0 = rearrange(&self.f0);
        let p1 = rearrange(&self.f1);
        let mut grid: Vec<f64> = pf
            .breakpoints()
            .iter()
            .chain(p0.breakpoints())
            .chain(p1.breakpoints())
            .copied()
            .chain([1.0])
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let mids: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        grid.extend(mids);
        grid.push(grid.iter().copied().fold(0.0, f64::max) + 1.0);

        let mut worst0 = f64::NEG_INFINITY;
        let mut worst1 = f64::NEG_INFINITY;
        let mut points = 0usize;
        for &t in grid.iter().filter(|&&t| t > 0.0) {
            points += 1;
            let cap0 = if t < 1.0 { pf.eval(t) } else { 0.0 };
            let cap1 = if t < 1.0 { self.threshold } else { pf.eval(t) };
            worst0 = worst0.max(p0.eval(t) - cap0);
            worst1 = worst1.max(p1.eval(t) - cap1);
        }
        let sum_exact = self.f0.add(&self.f1) == *f;

        let mut r = VerificationReport::new("hunt_split")
            .param("threshold", num(self.threshold))
            .param("grid_points", points);
        r.observe("f0_excess_max", num(worst0.max(0.0)));
        r.observe("f1_excess_max", num(worst1.max(0.0)));
        r.set_bound("excess", 0.0);
        r.require("reconstruction", sum_exact);
        r.require("f0_domination", worst0 <= 0.0);
        r.require("f1_domination", worst1 <= 0.0);
        r
    }
}

/// `(||f0||_{p0,1} + ||f1||_{p1,1}) / ||f||_{p,inf}` for the split at `f*(1)`.
pub fn hunt_constant(f: &StepFunction, p0: f64, p: f64, p1: f64) -> Result<f64> {
    if !(p0 < p && p < p1) {
        return Err(Error::input(format!("need p0 < p < p1, got ({p0}, {p}, {p1})")));
    }
    let weak = lorentz_norm(f, LorentzIndex::new(p, f64::INFINITY)?)?;
    if weak == 0.0 {
        return Err(Error::UndefinedRatio(
            "split constant of the zero function".into(),
        ));
    }
    let split = hunt_split(f);
    let lhs = lorentz_norm(&split.f0, LorentzIndex::new(p0, 1.0)?)?
        + lorentz_norm(&split.f1, LorentzIndex::new(p1, 1.0)?)?;
    Ok(lhs / weak)
}

/// Empirical quasi-triangle constant: `max(1, max ||f+g|| / (||f|| + ||g||))`.
pub fn estimate_quasi_constant(corpus: &[(StepFunction, StepFunction)], idx: LorentzIndex) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::input("quasi-constant estimate needs a nonempty corpus"));
    }
    let mut k = 1.0f64;
    for (i, (f, g)) in corpus.iter().enumerate() {
        let nf = lorentz_norm(f, idx)?;
        let ng = lorentz_norm(g, idx)?;
        if nf + ng == 0.0 {
            return Err(Error::input(format!("pair {i} has two zero functions")));
        }
        let nsum = lorentz_norm(&f.add(g), idx)?;
        k = k.max(nsum / (nf + ng));
    }
    Ok(k)
}

/// `||sum f_j||^alpha <= 4 sum ||f_j||^alpha` with `(2K)^alpha = 2`.
pub fn series_quasi_check(fs: &[StepFunction], idx: LorentzIndex, k: f64) -> Result<VerificationReport> {
    if fs.is_empty() {
        return Err(Error::input("series check needs at least one term"));
    }
    let alpha = alpha_for(k)?;
    let total = combine(&vec![1.0; fs.len()], fs)?;
    let lhs = lorentz_norm(&total, idx)?.powf(alpha);
    let mut terms = Vec::with_capacity(fs.len());
    for f in fs {
        terms.push(lorentz_norm(f, idx)?.powf(alpha));
    }
    let rhs = 4.0 * terms.iter().sum::<f64>();

    let mut r = VerificationReport::new("aoki_rolewicz_series")
        .param("p", num(idx.p))
        .param("q", num(idx.q))
        .param("K", num(k))
        .param("alpha", num(alpha))
        .param("terms", fs.len());
    r.observe("lhs", num(lhs));
    r.set_bound("rhs", num(rhs));
    r.require("series", lhs <= rhs * (1.0 + NORM_RTOL));
    Ok(r)
}
