//! Haar system, dyadic martingale differences `D_k`, and the maximal operator
//! `S(f) = max_j |sum_k a_{k,j} D_k(f)|`.
//!
//! Levels are integers `k >= -m`: an interval of level `k` has length `2^-k`,
//! so the whole domain `[0, 2^m)` is the single interval of level `-m`.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{num, VerificationReport};
use crate::stepfn::{lp_norm, pow2, StepFunction};

/// `[j 2^-k, (j+1) 2^-k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub k: i32,
    pub j: u64,
}

impl DyadicInterval {
    pub fn new(k: i32, j: u64) -> Self {
        Self { k, j }
    }

    /// The whole domain `[0, 2^m)`.
    pub fn root(m: u32) -> Self {
        Self { k: -(m as i32), j: 0 }
    }

    pub fn length(&self) -> f64 {
        pow2(-self.k)
    }

    pub fn start(&self) -> f64 {
        self.j as f64 * self.length()
    }

    pub fn end(&self) -> f64 {
        (self.j + 1) as f64 * self.length()
    }

    pub fn center(&self) -> f64 {
        (self.j as f64 + 0.5) * self.length()
    }

    pub fn parent(&self) -> Self {
        Self {
            k: self.k - 1,
            j: self.j / 2,
        }
    }

    pub fn children(&self) -> [Self; 2] {
        [
            Self {
                k: self.k + 1,
                j: 2 * self.j,
            },
            Self {
                k: self.k + 1,
                j: 2 * self.j + 1,
            },
        ]
    }

    pub fn contains(&self, other: &Self) -> bool {
        other.k >= self.k && (other.j >> (other.k - self.k)) == self.j
    }

    /// Errors unless the interval lies inside `[0, 2^m)`.
    pub fn check_domain(&self, m: u32) -> Result<()> {
        let m = m as i32;
        if self.k < -m || self.k + m >= 63 || self.j >= 1u64 << (self.k + m) {
            return Err(Error::input(format!(
                "interval (k = {}, j = {}) is not a dyadic subinterval of [0, 2^{m})",
                self.k, self.j
            )));
        }
        Ok(())
    }

    /// Cell indices covered at resolution `level`; requires `level >= k`.
    pub fn cell_range(&self, level: u32) -> Result<Range<usize>> {
        let shift = level as i32 - self.k;
        if shift < 0 {
            return Err(Error::input(format!(
                "interval of level {} is not resolvable at level {level}",
                self.k
            )));
        }
        let start = (self.j as usize) << shift;
        Ok(start..start + (1usize << shift))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CoeffEntry {
    k: i32,
    j: i64,
    a: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawCoeffMatrix {
    entries: Vec<CoeffEntry>,
}

/// Finitely supported coefficients `a_{k,j}`: `k` is the scale, `j` the row of the sup.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoeffMatrix", into = "RawCoeffMatrix")]
pub struct CoeffMatrix {
    entries: BTreeMap<(i32, i64), f64>,
}

impl TryFrom<RawCoeffMatrix> for CoeffMatrix {
    type Error = Error;

    fn try_from(raw: RawCoeffMatrix) -> Result<Self> {
        let mut out = CoeffMatrix::new();
        for e in raw.entries {
            if out.entries.contains_key(&(e.k, e.j)) {
                return Err(Error::input(format!(
                    "duplicate coefficient (k = {}, j = {})",
                    e.k, e.j
                )));
            }
            out.insert(e.k, e.j, e.a)?;
        }
        Ok(out)
    }
}

impl From<CoeffMatrix> for RawCoeffMatrix {
    fn from(c: CoeffMatrix) -> Self {
        RawCoeffMatrix {
            entries: c
                .entries
                .into_iter()
                .map(|((k, j), a)| CoeffEntry { k, j, a })
                .collect(),
        }
    }
}

impl CoeffMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (i32, i64, f64)>) -> Result<Self> {
        let mut out = Self::new();
        for (k, j, a) in entries {
            out.insert(k, j, a)?;
        }
        Ok(out)
    }

    pub fn insert(&mut self, k: i32, j: i64, a: f64) -> Result<()> {
        if !a.is_finite() {
            return Err(Error::input(format!(
                "coefficient (k = {k}, j = {j}) is not finite"
            )));
        }
        self.entries.insert((k, j), a);
        Ok(())
    }

    pub fn get(&self, k: i32, j: i64) -> f64 {
        self.entries.get(&(k, j)).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn scales(&self) -> Option<(i32, i32)> {
        let min = self.entries.keys().map(|&(k, _)| k).min()?;
        let max = self.entries.keys().map(|&(k, _)| k).max()?;
        Some((min, max))
    }

    /// Rows keyed by `j`, each a list of `(k, a)` in increasing `k`.
    pub fn rows(&self) -> BTreeMap<i64, Vec<(i32, f64)>> {
        let mut rows: BTreeMap<i64, Vec<(i32, f64)>> = BTreeMap::new();
        for (&(k, j), &a) in &self.entries {
            rows.entry(j).or_default().push((k, a));
        }
        for row in rows.values_mut() {
            row.sort_by_key(|&(k, _)| k);
        }
        rows
    }
}

/// Block sums of `f` for every dyadic level from the root down to single cells.
///
/// `sums[d]` holds the `2^d` sums at level `d - m`, built pairwise from the
/// cells so each sum is exactly what [`crate::stepfn::dyadic_sum`] gives.
pub(crate) struct BlockSums {
    m: u32,
    sums: Vec<Vec<f64>>,
}

impl BlockSums {
    pub(crate) fn new(values: &[f64], m: u32) -> Self {
        let depth = values.len().trailing_zeros() as usize;
        let mut sums = vec![Vec::new(); depth + 1];
        sums[depth] = values.to_vec();
        for d in (0..depth).rev() {
            sums[d] = sums[d + 1].chunks_exact(2).map(|c| c[0] + c[1]).collect();
        }
        Self { m, sums }
    }

    /// Sums over the intervals of level `k`.
    pub(crate) fn at_level(&self, k: i32) -> &[f64] {
        &self.sums[(k + self.m as i32) as usize]
    }
}

fn check_scale(f: &StepFunction, k: i32) -> Result<()> {
    let m = f.m() as i32;
    if k < -m {
        return Err(Error::input(format!(
            "scale k = {k} is coarser than the domain [0, 2^{m})"
        )));
    }
    if k + 1 > f.level() as i32 {
        return Err(Error::input(format!(
            "scale k = {k} needs resolution level >= {}, function has level {}",
            k + 1,
            f.level()
        )));
    }
    Ok(())
}

/// The Haar function `h_I`: `+|I|^{-1/2}` on the left half of `I`, `-|I|^{-1/2}` on the right.
pub fn haar(interval: DyadicInterval, m: u32, level: u32) -> Result<StepFunction> {
    interval.check_domain(m)?;
    if level as i32 <= interval.k {
        return Err(Error::input(format!(
            "Haar function of level {} needs resolution level >= {}, got {level}",
            interval.k,
            interval.k + 1
        )));
    }
    let height = pow2(interval.k).sqrt();
    let range = interval.cell_range(level)?;
    let mid = range.start + range.len() / 2;
    let mut values = vec![0.0; 1usize << (m + level)];
    values[range.start..mid].fill(height);
    values[mid..range.end].fill(-height);
    StepFunction::new(m, level, values)
}

fn diff_values(f: &StepFunction, sums: &BlockSums, k: i32) -> Vec<f64> {
    let children = sums.at_level(k + 1);
    let half = 1usize << (f.level() as i32 - k - 1);
    let scale = pow2(k - f.level() as i32);
    let mut out = Vec::with_capacity(f.len());
    for pair in children.chunks_exact(2) {
        let d = (pair[0] - pair[1]) * scale;
        out.extend(std::iter::repeat_n(d, half));
        out.extend(std::iter::repeat_n(-d, half));
    }
    out
}

/// `D_k(f) = sum_{|I| = 2^-k} <f, h_I> h_I`.
///
/// On each interval `I` of level `k` the result is `+-(avg_left - avg_right) / 2`,
/// computed from exact block sums.
pub fn martingale_diff(f: &StepFunction, k: i32) -> Result<StepFunction> {
    check_scale(f, k)?;
    let sums = BlockSums::new(f.values(), f.m());
    StepFunction::new(f.m(), f.level(), diff_values(f, &sums, k))
}

/// All `D_k(f)` for `k = -m, ..., level - 1`, indexed by `k + m`.
pub fn martingale_diffs(f: &StepFunction) -> Vec<StepFunction> {
    let sums = BlockSums::new(f.values(), f.m());
    let m = f.m() as i32;
    (-m..f.level() as i32)
        .map(|k| {
            StepFunction::new(f.m(), f.level(), diff_values(f, &sums, k))
                .expect("difference of a valid function is valid")
        })
        .collect()
}

/// `S(f) = max_j |sum_k a_{k,j} D_k(f)|`, the max running over the rows present in `a`.
pub fn maximal_s(f: &StepFunction, a: &CoeffMatrix) -> Result<StepFunction> {
    let Some((kmin, kmax)) = a.scales() else {
        return StepFunction::zero(f.m(), f.level());
    };
    check_scale(f, kmin)?;
    check_scale(f, kmax)?;
    let sums = BlockSums::new(f.values(), f.m());
    let diffs: BTreeMap<i32, Vec<f64>> = (kmin..=kmax).map(|k| (k, diff_values(f, &sums, k))).collect();
    let mut out = vec![0.0f64; f.len()];
    let mut row_acc = vec![0.0f64; f.len()];
    for row in a.rows().values() {
        row_acc.fill(0.0);
        for &(k, coeff) in row {
            for (acc, d) in row_acc.iter_mut().zip(&diffs[&k]) {
                *acc += coeff * d;
            }
        }
        for (o, r) in out.iter_mut().zip(&row_acc) {
            *o = o.max(r.abs());
        }
    }
    StepFunction::new(f.m(), f.level(), out)
}

/// Mean-zero functions supported in `I0` must have `S(f)` supported in `I0`,
/// and `D_k(f) = 0` for every `k` coarser than `I0`.
///
/// Returns [`Error::Precondition`] when `f` leaves `I0` or has nonzero mean;
/// a failed check is reported with `pass = false`.
pub fn zero_locality_check(
    f: &StepFunction,
    a: &CoeffMatrix,
    i0: DyadicInterval,
) -> Result<VerificationReport> {
    i0.check_domain(f.m())?;
    let range = i0.cell_range(f.level())?;
    let outside_support = f
        .values()
        .iter()
        .enumerate()
        .filter(|(i, &v)| !range.contains(i) && v != 0.0)
        .count();
    if outside_support > 0 {
        return Err(Error::precondition(format!(
            "f has {outside_support} nonzero cells outside I0 = (k = {}, j = {})",
            i0.k, i0.j
        )));
    }
    let l1 = lp_norm(f, 1.0)?;
    let mean = f.integral();
    if mean.abs() > 1e-12 * l1 {
        return Err(Error::precondition(format!("f has nonzero integral {mean}")));
    }

    let s = maximal_s(f, a)?;
    let leaked = s
        .values()
        .iter()
        .enumerate()
        .filter(|(i, &v)| !range.contains(i) && v != 0.0)
        .count();
    let m = f.m() as i32;
    let smallest_active = martingale_diffs(f)
        .iter()
        .position(|d| !d.is_zero())
        .map(|idx| idx as i32 - m);

    let mut r = VerificationReport::new("zero_locality")
        .param("k0", i0.k)
        .param("j0", i0.j)
        .param("m", f.m())
        .param("level", f.level())
        .param("coefficients", a.len());
    r.observe("cells_outside_nonzero", leaked);
    r.observe(
        "smallest_active_scale",
        smallest_active.map_or(serde_json::Value::Null, serde_json::Value::from),
    );
    r.observe("integral", num(mean));
    r.set_bound("cells_outside_nonzero", 0);
    r.set_bound("smallest_active_scale_min", i0.k);
    r.require("support_in_I0", leaked == 0);
    r.require("coarse_scales_vanish", smallest_active.is_none_or(|k| k >= i0.k));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::combine;

    fn h(k: i32, j: u64, m: u32, level: u32) -> StepFunction {
        haar(DyadicInterval::new(k, j), m, level).unwrap()
    }

    #[test]
    fn haar_examples() {
        assert_eq!(h(0, 0, 0, 1).values(), &[1.0, -1.0]);
        let r2 = 2f64.sqrt();
        assert_eq!(h(1, 0, 0, 2).values(), &[r2, -r2, 0.0, 0.0]);
        for (k, j) in [(0, 0), (1, 1), (2, 3), (3, 5), (-1, 0)] {
            let f = h(k, j, 1, 5);
            assert!((lp_norm(&f, 2.0).unwrap() - 1.0).abs() < 4.0 * f64::EPSILON);
            assert_eq!(f.integral(), 0.0);
        }
        assert!(haar(DyadicInterval::new(2, 0), 0, 2).is_err());
        assert!(haar(DyadicInterval::new(0, 1), 0, 3).is_err());
    }

    #[test]
    fn martingale_diff_examples() {
        let h0 = h(0, 0, 0, 3);
        assert_eq!(martingale_diff(&h0, 0).unwrap(), h0);
        assert!(martingale_diff(&h0, 1).unwrap().is_zero());

        let one = StepFunction::indicator(0, 3, 0.0, 1.0, 1.0).unwrap();
        for k in 0..3 {
            assert!(martingale_diff(&one, k).unwrap().is_zero());
        }

        let left = StepFunction::indicator(0, 1, 0.0, 0.5, 1.0).unwrap();
        assert_eq!(martingale_diff(&left, 0).unwrap().values(), &[0.5, -0.5]);
        assert!(martingale_diff(&left, 1).is_err());
        assert!(martingale_diff(&left, -1).is_err());
    }

    #[test]
    fn coarse_scales_on_larger_domain() {
        // chi_[0,1) on [0,4): D_{-2} compares [0,2) with [2,4); D_{-1} compares [0,1) with [1,2).
        let f = StepFunction::indicator(2, 0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(
            martingale_diff(&f, -2).unwrap().values(),
            &[0.25, 0.25, -0.25, -0.25]
        );
        assert_eq!(martingale_diff(&f, -1).unwrap().values(), &[0.5, -0.5, 0.0, 0.0]);
    }

    #[test]
    fn maximal_examples() {
        let f = StepFunction::new(0, 2, vec![1.0, 0.0, 3.0, -2.0]).unwrap();
        let a = CoeffMatrix::from_entries([(0, 0, 1.0)]).unwrap();
        assert_eq!(maximal_s(&f, &a).unwrap(), martingale_diff(&f, 0).unwrap().abs());

        assert!(maximal_s(&f, &CoeffMatrix::new()).unwrap().is_zero());

        let h0 = h(0, 0, 0, 2);
        let a = CoeffMatrix::from_entries([(0, 0, 1.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(maximal_s(&h0, &a).unwrap().values(), &[1.0; 4]);

        let deep = CoeffMatrix::from_entries([(2, 0, 1.0)]).unwrap();
        assert!(maximal_s(&f, &deep).is_err());
    }

    #[test]
    fn zero_locality_examples() {
        let f = h(1, 0, 0, 4);
        let a = CoeffMatrix::from_entries([(0, 0, 1.0), (1, 0, 2.0), (2, 1, -1.0), (3, 0, 0.5)]).unwrap();
        let r = zero_locality_check(&f, &a, DyadicInterval::new(1, 0)).unwrap();
        assert!(r.pass);
        assert_eq!(r.observed["smallest_active_scale"], serde_json::Value::from(1));

        let g = StepFunction::indicator(0, 4, 0.0, 0.5, 1.0).unwrap();
        assert!(matches!(
            zero_locality_check(&g, &a, DyadicInterval::new(1, 0)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            zero_locality_check(&f, &a, DyadicInterval::new(1, 1)),
            Err(Error::Precondition(_))
        ));

        let z = StepFunction::zero(0, 4).unwrap();
        let r = zero_locality_check(&z, &a, DyadicInterval::new(2, 3)).unwrap();
        assert!(r.pass);
        assert!(r.observed["smallest_active_scale"].is_null());
    }

    #[test]
    fn reconstruction_on_unit_interval() {
        let f = StepFunction::new(0, 3, vec![1.0, -2.0, 0.5, 4.0, 0.0, 0.25, -1.0, 3.0]).unwrap();
        let mut parts = vec![StepFunction::indicator(0, 3, 0.0, 1.0, f.integral()).unwrap()];
        parts.extend(martingale_diffs(&f));
        let total = combine(&vec![1.0; parts.len()], &parts).unwrap();
        assert_eq!(total, f);
    }

    #[test]
    fn coeff_matrix_json() {
        let a = CoeffMatrix::from_entries([(0, 0, 1.0), (2, -1, 0.5)]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"entries":[{"k":0,"j":0,"a":1.0},{"k":2,"j":-1,"a":0.5}]}"#);
        let back: CoeffMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        let dup: std::result::Result<CoeffMatrix, _> =
            serde_json::from_str(r#"{"entries":[{"k":0,"j":0,"a":1},{"k":0,"j":0,"a":2}]}"#);
        assert!(dup.is_err());
    }

    #[test]
    fn interval_geometry() {
        let i = DyadicInterval::new(2, 3);
        assert_eq!((i.start(), i.end(), i.center()), (0.75, 1.0, 0.875));
        assert_eq!(i.parent(), DyadicInterval::new(1, 1));
        assert!(i.parent().contains(&i));
        assert!(!i.contains(&i.parent()));
        assert_eq!(i.cell_range(3).unwrap(), 6..8);
        assert!(DyadicInterval::new(-2, 0).check_domain(1).is_err());
        assert!(DyadicInterval::new(0, 2).check_domain(1).is_err());
        assert!(DyadicInterval::root(3).check_domain(3).is_ok());
    }
}
