//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use dyadic_core::experiments::{weak11_stability, yano_constant};
use dyadic_core::report::{ReportCollection, VerificationReport};
use dyadic_core::suites::{run_suite, Suite, SuiteConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn suite(s: Suite, cases: usize, f: impl FnOnce(&mut SuiteConfig)) -> Result<ReportCollection, String> {
    let mut cfg = SuiteConfig::new(s);
    cfg.cases = cases;
    f(&mut cfg);
    run_suite(&cfg).map_err(|e| format!("suite error: {e}"))
}

fn of<'a>(c: &'a ReportCollection, check: &str) -> Vec<&'a VerificationReport> {
    c.reports.iter().filter(|r| r.check == check).collect()
}

fn all_pass(c: &ReportCollection) -> Result<(), String> {
    match c.reports.iter().find(|r| !r.pass) {
        None => Ok(()),
        Some(r) => Err(format!(
            "{} of {} reports failed, first: {}",
            c.failed,
            c.reports.len(),
            serde_json::to_string(r).unwrap()
        )),
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rearrangement() -> Outcome {
    let t = Instant::now();
    let c = suite(Suite::Rearrange, 1000, |cfg| {
        cfg.level = 10;
        cfg.m = 0;
    })?;
    let elapsed = t.elapsed();
    all_pass(&c)?;
    ensure(of(&c, "rearrangement").len() == 1000, || {
        "expected 1000 cases".into()
    })?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    let worst = c
        .reports
        .iter()
        .filter_map(|r| r.observed_f64("norm_rel_err_max"))
        .fold(0.0, f64::max);
    Ok(format!(
        "1000 functions, worst norm rel err {worst:.1e}, {elapsed:.2?}"
    ))
}

fn indicator_law() -> Outcome {
    let c = suite(Suite::Indicator, 20, |_| {})?;
    all_pass(&c)?;
    let worst = c
        .reports
        .iter()
        .filter_map(|r| r.observed_f64("rel_err_max"))
        .fold(0.0, f64::max);
    let diag = c
        .reports
        .iter()
        .filter_map(|r| r.observed_f64("diagonal_rel_err_max"))
        .fold(0.0, f64::max);
    Ok(format!(
        "20 sets, indicator rel err {worst:.1e}, L^(p,p) vs L^p {diag:.1e}"
    ))
}

fn cz() -> Outcome {
    let c = suite(Suite::Cz, 1000, |_| {})?;
    all_pass(&c)?;
    let verified = of(&c, "cz_decomposition");
    ensure(verified.len() == 1000, || {
        format!("{} decompositions", verified.len())
    })?;
    let mut octaves = [0usize; 4];
    for r in &verified {
        octaves[r.params["octave"].as_u64().unwrap() as usize] += 1;
    }
    ensure(octaves.iter().all(|&n| n > 0), || {
        format!("octave coverage {octaves:?}")
    })?;
    ensure(of(&c, "cz_stopping_time").len() == 1000, || {
        "stopping checks missing".into()
    })?;
    Ok(format!(
        "1000 decompositions over octaves {octaves:?}, {} kernel/good-part checks",
        of(&c, "cz_bad_part_kernel").len() + of(&c, "cz_good_part_lorentz").len()
    ))
}

fn hormander() -> Outcome {
    let c = suite(Suite::Hormander, 20, |_| {})?;
    all_pass(&c)?;
    let refinement = of(&c, "hormander_refinement");
    let r = refinement.first().ok_or("no refinement report")?;
    let errs = r.observed["relative_errors"].as_array().unwrap();
    ensure(errs.len() == 5, || "expected 4 refinement steps".into())?;
    let size = of(&c, "kernel_size")[0].observed_f64("hilbert").unwrap();
    ensure(size == 1.0, || format!("kernel size {size}"))?;
    let final_err = errs[4].as_f64().unwrap();
    Ok(format!(
        "final rel err to ln 3 {final_err:.2e}, {} invariance cases, size sup {size}",
        of(&c, "hormander_invariance").len()
    ))
}

fn zero_locality() -> Outcome {
    let c = suite(Suite::ZeroLocal, 500, |cfg| cfg.m = 2)?;
    all_pass(&c)?;
    ensure(c.reports.len() == 500, || "expected 500 cases".into())?;
    Ok("500 mean-zero cases, exact support and vanishing coarse scales".into())
}

fn counterexample() -> Outcome {
    let c = suite(Suite::Counterexample, 1, |_| {})?;
    all_pass(&c)?;
    ensure(c.reports.len() == 8, || "expected N = 1..=8".into())?;
    for (n, r) in (1..=8).zip(&c.reports) {
        let tail = 0.5f64.powi(n);
        ensure(r.observed_f64("tail_l1") == Some(tail), || format!("N={n}: tail"))?;
        ensure(r.observed_f64("t_limit") == Some(1.0), || {
            format!("N={n}: T(limit)")
        })?;
        ensure(r.observed_f64("sum_t_terms") == Some(0.0), || {
            format!("N={n}: sum T")
        })?;
        ensure(r.observed_f64("subadditive_pair_failures") == Some(0.0), || {
            format!("N={n}: pairwise")
        })?;
        ensure(
            r.bound.get("subadditive_pairs").and_then(|v| v.as_u64()) == Some(100),
            || format!("N={n}: expected 100 pairs"),
        )?;
    }
    Ok("N = 1..8: tail 2^-N, T(limit) = 1, sum T = 0, 100 pairs subadditive".into())
}

fn aoki() -> Outcome {
    let c = suite(Suite::Aoki, 200, |_| {})?;
    all_pass(&c)?;
    let series = of(&c, "aoki_rolewicz_series");
    ensure(series.len() == 400, || format!("{} series checks", series.len()))?;
    let ks: Vec<String> = of(&c, "quasi_constant_estimate")
        .iter()
        .map(|r| format!("{:.3}", r.observed_f64("k_emp").unwrap()))
        .collect();
    Ok(format!("200 series x 2 indices, K_emp = [{}]", ks.join(", ")))
}

fn yano() -> Outcome {
    let c = suite(Suite::Yano, 200, |_| {})?;
    all_pass(&c)?;
    // C_alpha = sum_k 2 k^alpha 2^-k: 4 for alpha = 1 and 12 for alpha = 2.
    for (alpha, exact) in [(1.0, 4.0), (2.0, 12.0)] {
        let got = yano_constant(alpha);
        ensure((got - exact).abs() <= 1e-10 * exact, || {
            format!("C_{alpha} = {got}")
        })?;
    }
    let direct: f64 = (1..200).map(|k| 2.0 * (k as f64).sqrt() * 0.5f64.powi(k)).sum();
    ensure((yano_constant(0.5) - direct).abs() <= 1e-10, || "C_1/2".into())?;
    Ok(format!("{} chains (200 functions x 3 alphas)", c.reports.len()))
}

fn weak11() -> Outcome {
    let r = weak11_stability(4, &[8, 10, 12], 2.0, 0, 1.5).map_err(|e| e.to_string())?;
    ensure(r.observed["growth.ok"] == true, || {
        format!("growth {}", r.observed["growth"])
    })?;
    ensure(r.observed["bad_support_in_cubes.ok"] == true, || {
        "bad-part support".into()
    })?;
    Ok(format!(
        "ratio max per level {}, growth {}",
        r.observed["ratio_max_per_level"], r.observed["growth"]
    ))
}

fn hunt() -> Outcome {
    let c = suite(Suite::HuntSplit, 1000, |_| {})?;
    all_pass(&c)?;
    let s = of(&c, "hunt_split_constant")[0];
    Ok(format!(
        "{} splits, C_emp {:.3}, batch spread {:.3}",
        of(&c, "hunt_split").len(),
        s.observed_f64("c_emp").unwrap(),
        s.observed_f64("spread").unwrap()
    ))
}

fn determinism() -> Outcome {
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    for s in Suite::ALL {
        let cases = if s == Suite::Weak11 { 4 } else { 16 };
        let mut cfg = SuiteConfig::new(s);
        cfg.cases = cases;
        cfg.seed = 7;
        let a = run_suite(&cfg).map_err(|e| e.to_string())?.to_json().unwrap();
        let b = run_suite(&cfg).map_err(|e| e.to_string())?.to_json().unwrap();
        let c = single
            .install(|| run_suite(&cfg))
            .map_err(|e| e.to_string())?
            .to_json()
            .unwrap();
        ensure(a == b && a == c, || format!("{s}: report bodies differ"))?;
    }
    Ok(format!(
        "{} suites byte-identical across reruns and thread counts",
        Suite::ALL.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("rearrangement", rearrangement),
        ("lorentz indicator law", indicator_law),
        ("calderon-zygmund", cz),
        ("hormander", hormander),
        ("0-locality", zero_locality),
        ("counterexample", counterexample),
        ("aoki-rolewicz", aoki),
        ("yano chain", yano),
        ("weak-(1,1) stability", weak11),
        ("hunt split", hunt),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
