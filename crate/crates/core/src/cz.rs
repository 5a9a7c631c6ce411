//! Calderon-Zygmund stopping-time decomposition on dyadic intervals, kernel
//! hypothesis probes, and empirical (restricted) weak-type estimation.

use std::fmt;
use std::sync::Arc;

use crate::dyadic_ops::{BlockSums, DyadicInterval};
use crate::error::{Error, Result};
use crate::lorentz::{lorentz_norm, NORM_RTOL};
use crate::report::{num, VerificationReport};
use crate::stepfn::{lp_norm, pow2, LorentzIndex, StepFunction};

/// Ambient dimension; every `2^n` constant is written in terms of it.
pub const DIM: i32 = 1;

/// Relative slack on kernel quadrature checks.
pub const QUADRATURE_SLACK: f64 = 0.05;

/// Slack on zero-mean checks, relative to `||f||_1`.
pub const MEAN_RTOL: f64 = 1e-12;

/// A bad part `b_j` together with its stopping cube `Q_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BadPart {
    pub cube: DyadicInterval,
    pub part: StepFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CZDecomposition {
    pub good: StepFunction,
    pub bad: Vec<BadPart>,
    pub height: f64,
    pub dimension: i32,
}

impl CZDecomposition {
    pub fn cubes(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        self.bad.iter().map(|b| b.cube)
    }

    pub fn cube_measure(&self) -> f64 {
        self.cubes().map(|q| q.length()).sum()
    }
}

fn avg_over(sums: &BlockSums, q: DyadicInterval, level: u32) -> f64 {
    sums.at_level(q.k)[q.j as usize] * pow2(q.k - level as i32)
}

/// Selects the maximal dyadic intervals with `avg |f| > height` below the root
/// `[0, 2^m)`; `g` is `f` off the cubes and the mean of `f` on each cube,
/// `b_j = (f - avg_{Q_j} f) chi_{Q_j}`.
pub fn cz_decompose(f: &StepFunction, height: f64) -> Result<CZDecomposition> {
    if !(height > 0.0) || !height.is_finite() {
        return Err(Error::input(format!(
            "height must be positive and finite, got {height}"
        )));
    }
    let level = f.level();
    let abs = BlockSums::new(f.abs().values(), f.m());
    let signed = BlockSums::new(f.values(), f.m());
    let root = DyadicInterval::root(f.m());
    let root_avg = avg_over(&abs, root, level);
    if root_avg > height {
        return Err(Error::input(format!(
            "average of |f| over [0, 2^{}) is {root_avg} > height {height}; \
             increase the domain exponent m",
            f.m()
        )));
    }

    let mut cubes = Vec::new();
    let mut stack: Vec<DyadicInterval> = root.children().into_iter().rev().collect();
    if level as i32 == root.k {
        stack.clear();
    }
    while let Some(q) = stack.pop() {
        if abs.at_level(q.k)[q.j as usize] == 0.0 {
            continue;
        }
        if avg_over(&abs, q, level) > height {
            cubes.push(q);
        } else if q.k < level as i32 {
            stack.extend(q.children().into_iter().rev());
        }
    }

    let mut good = f.values().to_vec();
    let mut bad = Vec::with_capacity(cubes.len());
    for q in cubes {
        let mean = avg_over(&signed, q, level);
        let range = q.cell_range(level)?;
        let mut part = vec![0.0; f.len()];
        for i in range {
            part[i] = f.values()[i] - mean;
            good[i] = mean;
        }
        bad.push(BadPart {
            cube: q,
            part: StepFunction::new(f.m(), level, part)?,
        });
    }
    Ok(CZDecomposition {
        good: StepFunction::new(f.m(), level, good)?,
        bad,
        height,
        dimension: DIM,
    })
}

/// Checks the five inequalities of the decomposition
/// (`||g||_1 <= ||f||_1`, `|g| <= 2^n h`, `||b_j||_1 <= 2^{n+1} h |Q_j|`,
/// `int b_j = 0`, `sum |Q_j| <= ||f||_1 / h`) plus disjointness, support and
/// exact reconstruction.
pub fn verify_cz(f: &StepFunction, dec: &CZDecomposition) -> Result<VerificationReport> {
    if dec.good.m() != f.m() || dec.good.level() != f.level() {
        return Err(Error::input("decomposition was built on a different grid"));
    }
    let h = dec.height;
    let f_l1 = lp_norm(f, 1.0)?;
    let g_l1 = lp_norm(&dec.good, 1.0)?;
    let g_sup = lp_norm(&dec.good, f64::INFINITY)?;
    let two_n = pow2(DIM);

    let mut worst_b_ratio = 0.0f64;
    let mut worst_mean = 0.0f64;
    let mut support_ok = true;
    let mut recon = dec.good.values().to_vec();
    for b in &dec.bad {
        let range = b.cube.cell_range(f.level())?;
        let b_l1 = lp_norm(&b.part, 1.0)?;
        worst_b_ratio = worst_b_ratio.max(b_l1 / (two_n * 2.0 * h * b.cube.length()));
        worst_mean = worst_mean.max(b.part.integral().abs());
        for (i, &v) in b.part.values().iter().enumerate() {
            if range.contains(&i) {
                recon[i] += v;
            } else if v != 0.0 {
                support_ok = false;
            }
        }
    }
    let mut sorted: Vec<DyadicInterval> = dec.cubes().collect();
    sorted.sort_by(|a, b| a.start().total_cmp(&b.start()));
    let disjoint = sorted.windows(2).all(|w| w[0].end() <= w[1].start());
    let cube_measure = dec.cube_measure();
    let reconstruction = recon.as_slice() == f.values();

    let mut r = VerificationReport::new("cz_decomposition")
        .param("height", num(h))
        .param("dimension", DIM)
        .param("cubes", dec.bad.len());
    r.observe("g_l1", num(g_l1));
    r.set_bound("g_l1", num(f_l1));
    r.require("g_l1", g_l1 <= f_l1);
    r.observe("g_sup", num(g_sup));
    r.set_bound("g_sup", num(two_n * h));
    r.require("g_sup", g_sup <= two_n * h);
    r.observe("b_l1_ratio_max", num(worst_b_ratio));
    r.set_bound("b_l1_ratio_max", 1.0);
    r.require("b_l1", worst_b_ratio <= 1.0);
    r.observe("b_mean_abs_max", num(worst_mean));
    r.set_bound("b_mean_abs_max", num(MEAN_RTOL * f_l1));
    r.require("b_mean", worst_mean <= MEAN_RTOL * f_l1);
    r.observe("cube_measure", num(cube_measure));
    r.set_bound("cube_measure", num(f_l1 / h));
    r.require("cube_measure", cube_measure <= f_l1 / h);
    r.require("cubes_disjoint", disjoint);
    r.require("b_support", support_ok);
    r.require("reconstruction", reconstruction);
    Ok(r)
}

/// Maximality of the stopping cubes and the bracket `h < avg_Q |f| <= 2^n h`.
pub fn stopping_time_check(f: &StepFunction, dec: &CZDecomposition) -> VerificationReport {
    let abs = BlockSums::new(f.abs().values(), f.m());
    let level = f.level();
    let h = dec.height;
    let (mut above, mut parent_ok, mut bracket) = (true, true, true);
    for q in dec.cubes() {
        let avg = avg_over(&abs, q, level);
        above &= avg > h;
        bracket &= avg <= pow2(DIM) * h;
        parent_ok &= avg_over(&abs, q.parent(), level) <= h;
    }
    let mut r = VerificationReport::new("cz_stopping_time")
        .param("height", num(h))
        .param("cubes", dec.bad.len());
    r.require("selected_above_height", above);
    r.require("parent_at_most_height", parent_ok);
    r.require("height_bracket", bracket);
    r
}

/// `||g||_{r,1} / (||f||_1^{1/r} h^{1-1/r})` together with the bound
/// `2^{1-1/r} r^2 / (r-1)` that follows from `g* <= min(2h, ||f||_1 / t)`.
pub fn good_part_lorentz(f: &StepFunction, dec: &CZDecomposition, r: f64) -> Result<VerificationReport> {
    if !(r > 1.0) || r.is_infinite() {
        return Err(Error::input(format!("need 1 < r < inf, got {r}")));
    }
    let f_l1 = lp_norm(f, 1.0)?;
    let g_norm = lorentz_norm(&dec.good, LorentzIndex::new(r, 1.0)?)?;
    let scale = f_l1.powf(1.0 / r) * dec.height.powf(1.0 - 1.0 / r);
    let ratio = if scale > 0.0 { g_norm / scale } else { 0.0 };
    let bound = pow2(DIM).powf(1.0 - 1.0 / r) * r * r / (r - 1.0);
    let mut rep = VerificationReport::new("cz_good_part_lorentz")
        .param("r", num(r))
        .param("height", num(dec.height));
    rep.observe("ratio", num(ratio));
    rep.set_bound("ratio", num(bound));
    rep.require("good_part", ratio <= bound * (1.0 + NORM_RTOL));
    Ok(rep)
}

/// A kernel `K(x, y)` defined off the diagonal.
#[derive(Clone)]
pub struct KernelSpec {
    evaluator: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub description: String,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("description", &self.description)
            .finish()
    }
}

impl KernelSpec {
    pub fn new(description: impl Into<String>, k: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            evaluator: Arc::new(k),
            description: description.into(),
        }
    }

    /// `1 / (x - y)`
    pub fn hilbert() -> Self {
        Self::new("hilbert: 1/(x-y)", |x, y| 1.0 / (x - y))
    }

    /// `exp(-(x - y)^2)`
    pub fn gauss() -> Self {
        Self::new("gauss: exp(-(x-y)^2)", |x, y| (-(x - y) * (x - y)).exp())
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("constant: {c}"), move |_, _| c)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "hilbert" => Ok(Self::hilbert()),
            "gauss" => Ok(Self::gauss()),
            "constant" => Ok(Self::constant(1.0)),
            other => Err(Error::input(format!(
                "unknown kernel '{other}' (expected hilbert, gauss, constant)"
            ))),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.evaluator)(x, y)
    }
}

/// Midpoints `lo + (i + 1/2)(hi - lo)/points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SampleGrid {
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = (self.hi - self.lo) / self.points as f64;
        (0..self.points).map(move |i| self.lo + (i as f64 + 0.5) * h)
    }
}

/// `max |x - y| |K(x, y)|` over distinct grid pairs, a lower bound for the size constant.
pub fn kernel_size_sup(k: &KernelSpec, grid: &SampleGrid) -> f64 {
    let nodes: Vec<f64> = grid.nodes().collect();
    let mut sup = 0.0f64;
    for &x in &nodes {
        for &y in &nodes {
            if x != y {
                sup = sup.max((x - y).abs() * k.eval(x, y).abs());
            }
        }
    }
    sup
}

/// Midpoint quadrature for the smoothness integral, in units of `delta = |y - y2|`:
/// cells of width `delta / cells_per_delta` tile `2 delta <= |x - y| <= radius_in_deltas * delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HormanderGrid {
    pub cells_per_delta: usize,
    pub radius_in_deltas: f64,
}

impl HormanderGrid {
    /// Doubles both the resolution and the truncation radius.
    pub fn refined(&self) -> Self {
        Self {
            cells_per_delta: 2 * self.cells_per_delta,
            radius_in_deltas: 2.0 * self.radius_in_deltas,
        }
    }
}

/// `int_{|x-y| >= 2|y-y2|} |K(x,y) - K(x,y2)| dx` by the midpoint rule.
pub fn hormander_integral(k: &KernelSpec, y: f64, y2: f64, grid: &HormanderGrid) -> Result<f64> {
    let delta = (y - y2).abs();
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::input(format!(
            "need distinct finite points, got y = {y}, y' = {y2}"
        )));
    }
    if grid.cells_per_delta == 0 || !(grid.radius_in_deltas > 2.0) {
        return Err(Error::input(
            "quadrature needs cells_per_delta >= 1 and radius > 2 delta",
        ));
    }
    let h = delta / grid.cells_per_delta as f64;
    let cells = ((grid.radius_in_deltas - 2.0) * grid.cells_per_delta as f64).floor() as usize;
    let mut total = 0.0;
    for i in 0..cells {
        let off = 2.0 * delta + (i as f64 + 0.5) * h;
        for x in [y + off, y - off] {
            total += (k.eval(x, y) - k.eval(x, y2)).abs();
        }
    }
    Ok(total * h)
}

/// Discretized `T f(x) = int K(x, y) f(y) dy` at cell midpoints, skipping the diagonal cell.
pub fn apply_kernel(k: &KernelSpec, f: &StepFunction) -> Result<StepFunction> {
    let w = f.cell_width();
    let mids: Vec<f64> = (0..f.len()).map(|i| (i as f64 + 0.5) * w).collect();
    let support: Vec<usize> = (0..f.len()).filter(|&i| f.values()[i] != 0.0).collect();
    StepFunction::from_cells(f.m(), f.level(), |i| {
        support
            .iter()
            .filter(|&&c| c != i)
            .map(|&c| k.eval(mids[i], mids[c]) * f.values()[c])
            .sum::<f64>()
            * w
    })
}

/// For each `b_j`, the quadrature of `int_{outside Q_j*} |T b_j|` against
/// `2^{n+1} A' h |Q_j| (1 + slack)`, where `Q_j*` is the `2 sqrt(n)` dilate.
pub fn bad_part_kernel_estimate(
    k: &KernelSpec,
    dec: &CZDecomposition,
    a_prime: f64,
    outer_cells_per_cube: usize,
    radius_in_cubes: f64,
) -> Result<VerificationReport> {
    let dilate = 2.0 * (DIM as f64).sqrt();
    let mut worst = 0.0f64;
    for b in &dec.bad {
        let ell = b.cube.length();
        let c = b.cube.center();
        let w = b.part.cell_width();
        let range = b.cube.cell_range(b.part.level())?;
        let inner: Vec<(f64, f64)> = range
            .map(|i| ((i as f64 + 0.5) * w, b.part.values()[i]))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        let hx = ell / outer_cells_per_cube as f64;
        let start = 0.5 * dilate * ell;
        let cells = ((radius_in_cubes - 0.5 * dilate) * outer_cells_per_cube as f64).floor() as usize;
        let mut integral = 0.0;
        for i in 0..cells {
            let off = start + (i as f64 + 0.5) * hx;
            for x in [c + off, c - off] {
                let tb: f64 = inner.iter().map(|&(y, v)| k.eval(x, y) * v).sum::<f64>() * w;
                integral += tb.abs();
            }
        }
        integral *= hx;
        let bound = pow2(DIM + 1) * a_prime * dec.height * ell;
        if bound > 0.0 {
            worst = worst.max(integral / bound);
        } else if integral > 0.0 {
            worst = f64::INFINITY;
        }
    }
    let mut r = VerificationReport::new("cz_bad_part_kernel")
        .param("kernel", k.description.clone())
        .param("a_prime", num(a_prime))
        .param("height", num(dec.height))
        .param("cubes", dec.bad.len())
        .param("dilate", num(dilate));
    r.observe("ratio_max", num(worst));
    r.set_bound("ratio_max", num(1.0 + QUADRATURE_SLACK));
    r.require("bad_part", worst <= 1.0 + QUADRATURE_SLACK);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakTypeMode {
    /// `||T f||_{q,inf} / ||f||_p` over functions.
    Full,
    /// `||T chi_A||_{q,inf} / mu(A)^{1/p}` over indicators.
    Restricted,
}

/// Maximum weak-type ratio over a corpus; the report names the maximizer.
pub fn empirical_weak_type(
    op: &dyn Fn(&StepFunction) -> Result<StepFunction>,
    inputs: &[StepFunction],
    p: f64,
    q: f64,
    mode: WeakTypeMode,
) -> Result<VerificationReport> {
    if inputs.is_empty() {
        return Err(Error::input("weak-type estimate needs a nonempty corpus"));
    }
    let weak = LorentzIndex::new(q, f64::INFINITY)?;
    let mut best = (0.0f64, None::<usize>);
    let mut used = 0usize;
    for (i, f) in inputs.iter().enumerate() {
        let denom = match mode {
            WeakTypeMode::Full => lp_norm(f, p)?,
            WeakTypeMode::Restricted => {
                if f.values().iter().any(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::input(format!("input {i} is not an indicator function")));
                }
                f.support_measure().powf(1.0 / p)
            }
        };
        if denom == 0.0 {
            continue;
        }
        used += 1;
        let ratio = lorentz_norm(&op(f)?, weak)? / denom;
        if best.1.is_none() || ratio > best.0 {
            best = (ratio, Some(i));
        }
    }
    if used == 0 {
        return Err(Error::input("weak-type corpus contains only zero functions"));
    }
    let mut r = VerificationReport::new("empirical_weak_type")
        .param("p", num(p))
        .param("q", num(q))
        .param(
            "mode",
            if mode == WeakTypeMode::Full {
                "full"
            } else {
                "restricted"
            },
        )
        .param("inputs", used);
    r.observe("max_ratio", num(best.0));
    r.observe("argmax", best.1.unwrap_or(0));
    r.require("finite", best.0.is_finite());
    Ok(r)
}
