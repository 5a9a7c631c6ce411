//! Dyadic step functions on `[0, 2^m)` with Lebesgue measure.
//!
//! A [`StepFunction`] stores one value per cell of width `2^-level`. Cell
//! measures and all block sums over aligned power-of-two ranges are computed
//! with pairwise summation, so for dyadic-rational data every measure, mean
//! and Haar coefficient is exact in binary floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported `m + level`; `2^26` cells is 512 MiB of `f64`.
pub const MAX_LOG2_CELLS: u32 = 26;

/// `2^e` for any integer exponent in the normal range.
#[inline]
pub fn pow2(e: i32) -> f64 {
    f64::powi(2.0, e)
}

/// Pairwise sum. For power-of-two lengths the summation tree coincides with
/// the dyadic tree, so sums of aligned blocks are reproducible.
pub fn dyadic_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let half = n.next_power_of_two() / 2;
            dyadic_sum(&xs[..half]) + dyadic_sum(&xs[half..])
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawStepFunction {
    m: u32,
    level: u32,
    values: Vec<f64>,
}

impl TryFrom<RawStepFunction> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStepFunction) -> Result<Self> {
        StepFunction::new(raw.m, raw.level, raw.values)
    }
}

/// A piecewise-constant function on `[0, 2^m)` with `2^(m + level)` cells.
///
/// The function vanishes outside `[0, 2^m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFunction")]
pub struct StepFunction {
    m: u32,
    level: u32,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(m: u32, level: u32, values: Vec<f64>) -> Result<Self> {
        let cells = cell_count(m, level)?;
        if values.len() != cells {
            return Err(Error::input(format!(
                "expected 2^(m+level) = {cells} values for m = {m}, level = {level}, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("cell {i} holds a non-finite value")));
        }
        Ok(Self { m, level, values })
    }

    pub fn zero(m: u32, level: u32) -> Result<Self> {
        let cells = cell_count(m, level)?;
        Ok(Self {
            m,
            level,
            values: vec![0.0; cells],
        })
    }

    /// Builds `c * chi_[a, b)`; both endpoints must be multiples of the cell width.
    pub fn indicator(m: u32, level: u32, a: f64, b: f64, c: f64) -> Result<Self> {
        let mut f = Self::zero(m, level)?;
        let scale = pow2(level as i32);
        let (lo, hi) = (a * scale, b * scale);
        if lo.fract() != 0.0 || hi.fract() != 0.0 || lo < 0.0 || hi > f.len() as f64 || lo > hi {
            return Err(Error::input(format!(
                "[{a}, {b}) is not a union of cells at level {level} inside [0, 2^{m})"
            )));
        }
        for v in &mut f.values[lo as usize..hi as usize] {
            *v = c;
        }
        Ok(f)
    }

    /// Builds a function from a per-cell closure `cell index -> value`.
    pub fn from_cells(m: u32, level: u32, value: impl Fn(usize) -> f64) -> Result<Self> {
        let cells = cell_count(m, level)?;
        Self::new(m, level, (0..cells).map(value).collect())
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_width(&self) -> f64 {
        pow2(-(self.level as i32))
    }

    pub fn domain_measure(&self) -> f64 {
        pow2(self.m as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Exact integral over the domain.
    pub fn integral(&self) -> f64 {
        dyadic_sum(&self.values) * self.cell_width()
    }

    /// Measure of `{f != 0}`.
    pub fn support_measure(&self) -> f64 {
        self.values.iter().filter(|&&v| v != 0.0).count() as f64 * self.cell_width()
    }

    /// Same function on a finer grid and/or larger domain.
    pub fn refine(&self, level: u32, m: u32) -> Result<Self> {
        if level < self.level || m < self.m {
            return Err(Error::input(format!(
                "cannot coarsen (level {}, m {}) to (level {level}, m {m})",
                self.level, self.m
            )));
        }
        if level == self.level && m == self.m {
            return Ok(self.clone());
        }
        let shift = level - self.level;
        let old_len = self.values.len();
        Self::from_cells(m, level, |i| {
            let src = i >> shift;
            if src < old_len {
                self.values[src]
            } else {
                0.0
            }
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            m: self.m,
            level: self.level,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            m: self.m,
            level: self.level,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Pointwise product with the indicator of `{cells where keep(i, value)}`.
    pub fn restrict(&self, keep: impl Fn(usize, f64) -> bool) -> Self {
        Self {
            m: self.m,
            level: self.level,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| if keep(i, v) { v } else { 0.0 })
                .collect(),
        }
    }

    /// `self - other` on a common grid.
    pub fn sub(&self, other: &Self) -> Self {
        combine(&[1.0, -1.0], &[self.clone(), other.clone()]).expect("two coefficients for two functions")
    }

    pub fn add(&self, other: &Self) -> Self {
        combine(&[1.0, 1.0], &[self.clone(), other.clone()]).expect("two coefficients for two functions")
    }
}

fn cell_count(m: u32, level: u32) -> Result<usize> {
    let log = m.checked_add(level).filter(|&e| e <= MAX_LOG2_CELLS);
    match log {
        Some(e) => Ok(1usize << e),
        None => Err(Error::input(format!(
            "m + level must not exceed {MAX_LOG2_CELLS} (got m = {m}, level = {level})"
        ))),
    }
}

/// Linear combination `sum coeffs[i] * fs[i]`, refined to the finest level and
/// the largest domain among the inputs.
pub fn combine(coeffs: &[f64], fs: &[StepFunction]) -> Result<StepFunction> {
    if fs.is_empty() {
        return Err(Error::input("combine needs at least one function"));
    }
    if coeffs.len() != fs.len() {
        return Err(Error::input(format!(
            "{} coefficients for {} functions",
            coeffs.len(),
            fs.len()
        )));
    }
    let level = fs.iter().map(StepFunction::level).max().unwrap_or(0);
    let m = fs.iter().map(StepFunction::m).max().unwrap_or(0);
    let mut acc: Option<Vec<f64>> = None;
    for (&c, f) in coeffs.iter().zip(fs) {
        let r = f.refine(level, m)?;
        match acc.as_mut() {
            // Seeding with the first term keeps the sign of zero for `combine([1], [f])`.
            None => acc = Some(r.values.iter().map(|v| c * v).collect()),
            Some(a) => {
                for (x, v) in a.iter_mut().zip(&r.values) {
                    *x += c * v;
                }
            }
        }
    }
    StepFunction::new(m, level, acc.unwrap_or_default())
}

/// Measure of `{|f| > s}`.
pub fn distribution(f: &StepFunction, s: f64) -> f64 {
    f.values.iter().filter(|v| v.abs() > s).count() as f64 * f.cell_width()
}

/// Extended positive exponent pair `(p, q)` of a Lorentz space; `f64::INFINITY` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzIndex {
    pub p: f64,
    pub q: f64,
}

impl LorentzIndex {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0) || !(q > 0.0) {
            return Err(Error::input(format!(
                "Lorentz exponents must be positive (p = {p}, q = {q})"
            )));
        }
        Ok(Self { p, q })
    }
}

/// Decreasing rearrangement `f*` as a right-continuous step profile on `[0, inf)`.
///
/// `values[i]` holds on `[breakpoints[i], breakpoints[i + 1])`; the profile is
/// zero from the last breakpoint on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecreasingProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl DecreasingProfile {
    pub fn empty() -> Self {
        Self {
            breakpoints: vec![0.0],
            values: Vec::new(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Right end of the support, `t_M`.
    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().unwrap_or(&0.0)
    }

    /// Iterator over `(t_i, t_{i+1}, v_i)`.
    pub fn iter_steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    /// `f*(t)` with right-continuity at breakpoints.
    pub fn eval(&self, t: f64) -> f64 {
        // first breakpoint strictly greater than t, minus one
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        if idx == 0 || idx > self.values.len() {
            0.0
        } else {
            self.values[idx - 1]
        }
    }

    /// Measure of `{t : f*(t) > s}`.
    pub fn measure_above(&self, s: f64) -> f64 {
        let k = self.values.partition_point(|&v| v > s);
        self.breakpoints[k]
    }

    /// `L^p` norm of the profile on `[0, inf)`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.first().copied().unwrap_or(0.0);
        }
        let terms: Vec<f64> = self.iter_steps().map(|(a, b, v)| v.powf(p) * (b - a)).collect();
        dyadic_sum(&terms).powf(1.0 / p)
    }
}

/// Sorts `|values|` in decreasing order with their cell measures, merging ties.
pub fn rearrange(f: &StepFunction) -> DecreasingProfile {
    let mut mags: Vec<f64> = f.values.iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let width = f.cell_width();
    let mut profile = DecreasingProfile::empty();
    let mut count = 0usize;
    let mut i = 0;
    while i < mags.len() {
        let v = mags[i];
        let run = mags[i..].iter().take_while(|&&x| x == v).count();
        count += run;
        i += run;
        profile.values.push(v);
        profile.breakpoints.push(count as f64 * width);
    }
    profile
}

/// Classical `L^p` norm, `p` in `(0, inf]`.
pub fn lp_norm(f: &StepFunction, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::input(format!("L^p exponent must be positive, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.values.iter().fold(0.0, |acc, v| acc.max(v.abs())));
    }
    let powered: Vec<f64> = f.values.iter().map(|v| v.abs().powf(p)).collect();
    Ok((dyadic_sum(&powered) * f.cell_width()).powf(1.0 / p))
}
