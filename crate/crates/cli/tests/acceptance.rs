//! Acceptance suite: one PASS/FAIL line per criterion, then a summary.
//! With `ACCEPTANCE_STRICT=1` the process exits nonzero when any criterion
//! fails; otherwise failures are reported but do not abort `cargo test`.
//!
//! Run with `cargo test -p attrition-cli --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use attrition::learners::adaboost::adaboost_round;
use attrition::learners::knn::{knn_query, KnnIndex, Minkowski};
use attrition::learners::logistic::logistic_loss_grad;
use attrition::learners::svm::{kernel_matrix, smo_solve, Kernel};
use attrition::learners::tree::best_split;
use attrition::learners::{self, GradientBoostParams, LearnerSpec, ModelParams};
use attrition::metrics;
use attrition::preprocess::{fit_pipeline, skewness};
use attrition::resample::smote_oversample;
use attrition::seed;
use attrition::tabular::{class_distribution, load_csv, summarize, ColumnKind, SchemaPolicy, Table};
use attrition::Matrix;
use attrition_cli::artifacts::{RunDir, CORPUS_FILE, MANIFEST_FILE, REPORT_CSV_FILE};
use attrition_cli::config::ExperimentConfig;
use attrition_cli::experiment::{prepare, run_experiment, RunOptions};
use attrition_cli::{llm, RunManifest, Stage};
use attrition_llm::{
    parse_completion, to_jsonl, Backoff, Client, ClientConfig, Label, MockConfig, MockService, Parsed,
    PromptRecord, PROMPT_PREFIX,
};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::Rng;
use sha2::{Digest, Sha256};

// Tolerances.
const STAT_MEAN_STD_TOL: f64 = 0.01;
const STAT_QUARTILE_TOL: f64 = 0.5;
const CLASS_FRACTION_TOL: f64 = 0.001;
const FD_MAX_REL_ERR: f64 = 1e-4;
const FD_STEP: f64 = 1e-5;
const FD_REL_FLOOR: f64 = 1e-6;
const SPLIT_GAIN_TOL: f64 = 1e-12;
const SMO_TOL: f64 = 1e-3;
const SMO_EQUALITY_TOL: f64 = 1e-9;
const ADA_WEIGHT_SUM_TOL: f64 = 1e-12;
const F1_BAND: f64 = 0.08;
const SVM_F1_FLOOR: f64 = 0.74;

// Reference values.
const N_ROWS: usize = 1470;
const N_COLS: usize = 35;
const CLASS_COUNTS: (usize, usize) = (1233, 237);
const CLASS_FRACTIONS: (f64, f64) = (0.839, 0.161);
const SPLIT_SIZES: (usize, usize) = (1176, 294);
const TRAIN_CLASSES: (usize, usize) = (986, 190);
const BALANCED_CLASSES: (usize, usize) = (986, 986);

/// Feature, count, mean, std, min, 25%, 50%, 75%, max.
type StatRow = (&'static str, usize, f64, f64, f64, f64, f64, f64, f64);
const DESCRIPTIVE_STATS: &[StatRow] = &[
    ("Age", 1470, 36.92, 9.14, 18.0, 30.0, 36.0, 43.0, 60.0),
    ("DailyRate", 1470, 802.49, 403.51, 102.0, 465.0, 802.0, 1157.0, 1499.0),
    ("DistanceFromHome", 1470, 9.19, 8.11, 1.0, 2.0, 7.0, 14.0, 29.0),
    ("Education", 1470, 2.91, 1.02, 1.0, 2.0, 3.0, 4.0, 5.0),
    ("MonthlyIncome", 1470, 6502.93, 4707.96, 1009.0, 2911.0, 4919.0, 8379.0, 19999.0),
    ("NumCompaniesWorked", 1470, 2.69, 2.50, 0.0, 1.0, 2.0, 4.0, 9.0),
    ("PercentSalaryHike", 1470, 15.21, 3.66, 11.0, 12.0, 14.0, 18.0, 25.0),
    ("TotalWorkingYears", 1470, 11.28, 7.78, 0.0, 6.0, 10.0, 15.0, 40.0),
    ("TrainingTimesLastYear", 1470, 2.80, 1.29, 0.0, 2.0, 3.0, 3.0, 6.0),
    ("YearsAtCompany", 1470, 7.01, 6.13, 0.0, 3.0, 5.0, 9.0, 40.0),
    ("YearsInCurrentRole", 1470, 4.23, 3.62, 0.0, 2.0, 3.0, 7.0, 18.0),
    ("YearsSinceLastPromotion", 1470, 2.19, 3.22, 0.0, 0.0, 1.0, 3.0, 15.0),
    ("YearsWithCurrManager", 1470, 4.12, 3.57, 0.0, 2.0, 3.0, 7.0, 17.0),
];

/// Weighted F1 per learner key.
const REFERENCE_F1: &[(&str, f64)] = &[
    ("logistic_regression", 0.78),
    ("knn", 0.71),
    ("svm", 0.82),
    ("decision_tree", 0.80),
    ("random_forest", 0.80),
    ("adaboost", 0.79),
    ("gradient_boost", 0.80),
];

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dataset_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/WA_Fn-UseC_-HR-Employee-Attrition.csv")
}

fn dataset() -> Table {
    load_csv(dataset_path(), &SchemaPolicy::Infer).expect("dataset loads")
}

fn bundled() -> ExperimentConfig {
    ExperimentConfig::bundled().expect("bundled config")
}

fn panic_text(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panicked".into())
}

#[derive(Default)]
struct Suite {
    passed: usize,
    failed: Vec<String>,
}

impl Suite {
    fn criterion(&mut self, id: &str, title: &str, budget: Duration, check: impl FnOnce() -> Check) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| Err(panic_text(p)));
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; over time budget of {:.0} s", budget.as_secs_f64()))
            }
        });
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.as_str()),
            Err(e) => ("FAIL", e.as_str()),
        };
        println!("{tag} {id:<3} {title} [{:.2} s] {detail}", elapsed.as_secs_f64());
        match result {
            Ok(_) => self.passed += 1,
            Err(_) => self.failed.push(id.to_string()),
        }
    }
}

fn c1_dataset_integrity() -> Check {
    let mut rdr = csv::Reader::from_path(dataset_path()).map_err(|e| e.to_string())?;
    let width = rdr.headers().map_err(|e| e.to_string())?.len();
    let (mut rows, mut blank) = (0usize, 0usize);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        ensure(rec.len() == width, || format!("row {rows} has {} fields", rec.len()))?;
        blank += rec.iter().filter(|f| f.trim().is_empty()).count();
        rows += 1;
    }
    let table = dataset();
    ensure((rows, width) == (N_ROWS, N_COLS), || format!("raw CSV is {rows} x {width}"))?;
    ensure((table.n_rows(), table.n_cols()) == (rows, width), || {
        format!("table is {} x {}", table.n_rows(), table.n_cols())
    })?;
    ensure(blank == 0, || format!("{blank} missing cells"))?;
    Ok(format!("{rows} x {width}, 0 missing cells"))
}

fn c2_descriptive_stats() -> Check {
    let table = dataset();
    let mut worst: f64 = 0.0;
    for &(name, count, mean, std, min, q25, q50, q75, max) in DESCRIPTIVE_STATS {
        let s = summarize(&table, name).map_err(|e| format!("{name}: {e}"))?;
        ensure(s.count == count, || format!("{name}: count {}", s.count))?;
        for (what, got, want) in [("mean", s.mean, mean), ("std", s.std, std)] {
            let d = (got - want).abs();
            worst = worst.max(d);
            ensure(d <= STAT_MEAN_STD_TOL, || format!("{name}: {what} {got:.4} vs {want}"))?;
        }
        ensure(s.min == min && s.max == max, || format!("{name}: range [{}, {}]", s.min, s.max))?;
        for (what, got, want) in [("25%", s.q25, q25), ("50%", s.q50, q50), ("75%", s.q75, q75)] {
            ensure((got - want).abs() <= STAT_QUARTILE_TOL, || format!("{name}: {what} {got} vs {want}"))?;
        }
    }
    Ok(format!(
        "{} rows, largest mean/std deviation {worst:.4}",
        DESCRIPTIVE_STATS.len()
    ))
}

fn c3_class_distribution() -> Check {
    // brute-force oracle straight from the CSV text
    let mut rdr = csv::Reader::from_path(dataset_path()).map_err(|e| e.to_string())?;
    let col = rdr
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .position(|h| h == "Attrition")
        .ok_or("no Attrition column")?;
    let (mut no, mut yes) = (0usize, 0usize);
    for rec in rdr.records() {
        match &rec.map_err(|e| e.to_string())?[col] {
            "No" => no += 1,
            "Yes" => yes += 1,
            other => return Err(format!("unexpected label {other}")),
        }
    }
    ensure((no, yes) == CLASS_COUNTS, || format!("oracle counts {no}/{yes}"))?;
    let shares = class_distribution(&dataset(), "Attrition").map_err(|e| e.to_string())?;
    let get = |l: &str| shares.iter().find(|s| s.label == l).ok_or(format!("no {l} share"));
    let (n, y) = (get("No")?, get("Yes")?);
    ensure((n.count, y.count) == (no, yes), || format!("counts {}/{}", n.count, y.count))?;
    ensure(
        (n.fraction - CLASS_FRACTIONS.0).abs() <= CLASS_FRACTION_TOL
            && (y.fraction - CLASS_FRACTIONS.1).abs() <= CLASS_FRACTION_TOL,
        || format!("fractions {:.4}/{:.4}", n.fraction, y.fraction),
    )?;
    Ok(format!("{no}/{yes}, fractions {:.4}/{:.4}", n.fraction, y.fraction))
}

fn c4_pipeline_counts() -> Check {
    let raw = dataset();
    let mut seeds = vec![bundled().seed];
    seeds.extend(0..5);
    for master in &seeds {
        let config = ExperimentConfig {
            seed: *master,
            ..bundled()
        };
        let (_, data) = fit_pipeline(&raw, &config.pipeline_spec()).map_err(|e| e.to_string())?;
        let sizes = (data.y_train.len(), data.y_test.len());
        ensure(sizes == SPLIT_SIZES, || format!("seed {master}: split {sizes:?}"))?;
        let pos = data.y_train.iter().filter(|&&l| l == 1).count();
        let train = (data.y_train.len() - pos, pos);
        ensure(train == TRAIN_CLASSES, || format!("seed {master}: train classes {train:?}"))?;
        let b = smote_oversample(&data.x_train, &data.y_train, &config.smote_config()).map_err(|e| e.to_string())?;
        let bpos = b.y.iter().filter(|&&l| l == 1).count();
        let balanced = (b.y.len() - bpos, bpos);
        ensure(balanced == BALANCED_CLASSES, || format!("seed {master}: balanced {balanced:?}"))?;
    }
    Ok(format!("1176/294, 986/190, 986/986 for master seeds {seeds:?}"))
}

fn c5_skew_handling() -> Check {
    let raw = dataset();
    let config = bundled();
    let (fitted, _) = fit_pipeline(&raw, &config.pipeline_spec()).map_err(|e| e.to_string())?;
    let cleaned = fitted.cleaned(&raw).map_err(|e| e.to_string())?;
    let threshold = config.pipeline.skew_threshold;
    let mut expected = Vec::new();
    let mut failures = Vec::new();
    let mut flat = Vec::new();
    for s in cleaned.schema().iter().filter(|s| s.kind == ColumnKind::Numeric) {
        let values = cleaned.numeric(&s.name).map_err(|e| e.to_string())?;
        let Ok(before) = skewness(values) else { continue };
        if before <= threshold {
            continue;
        }
        expected.push(s.name.clone());
        let logged: Vec<f64> = values.iter().map(|v| v.ln_1p()).collect();
        let after = skewness(&logged).map_err(|e| e.to_string())?;
        if (before - after).abs() <= 1e-9 * before.abs() {
            flat.push(format!("{} {before:.6} -> {after:.6}", s.name));
        }
        if !(after < before) {
            failures.push(format!("{} {before:.17} -> {after:.17}", s.name));
        }
    }
    if !flat.is_empty() {
        println!("     note: skewness unchanged up to rounding (two-valued column): {}", flat.join(", "));
    }
    ensure(fitted.log1p_applied == expected, || {
        format!("transformed {:?}, expected {expected:?}", fitted.log1p_applied)
    })?;
    ensure(failures.is_empty(), || format!("skewness did not decrease: {}", failures.join("; ")))?;
    Ok(format!("{} columns transformed, all strictly less skewed", expected.len()))
}

type ClassOracle = [(f64, f64, f64, usize); 2];

fn metrics_oracle(t: &[u8], p: &[u8]) -> (ClassOracle, f64, f64, f64) {
    let mut per = [(0.0, 0.0, 0.0, 0usize); 2];
    for c in 0..2u8 {
        let mut tp = 0usize;
        let mut predicted = 0usize;
        let mut support = 0usize;
        for i in 0..t.len() {
            if t[i] == c && p[i] == c {
                tp += 1;
            }
            if p[i] == c {
                predicted += 1;
            }
            if t[i] == c {
                support += 1;
            }
        }
        let prec = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
        let rec = if support == 0 { 0.0 } else { tp as f64 / support as f64 };
        let f1 = if prec + rec == 0.0 { 0.0 } else { 2.0 * prec * rec / (prec + rec) };
        per[c as usize] = (prec, rec, f1, support);
    }
    let n = t.len() as f64;
    let w = |f: fn(&(f64, f64, f64, usize)) -> f64| {
        (per[0].3 as f64 * f(&per[0]) + per[1].3 as f64 * f(&per[1])) / n
    };
    (per, w(|c| c.0), w(|c| c.1), w(|c| c.2))
}

fn c6_metrics_oracle() -> Check {
    let mut rng = seed::rng(6);
    for case in 0..1000 {
        let n = rng.random_range(1..=300);
        let bias: f64 = rng.random_range(0.0..1.0);
        let t: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(bias))).collect();
        let p: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
        let got = metrics::evaluate(&t, &p).map_err(|e| e.to_string())?;
        let (per, wp, wr, wf) = metrics_oracle(&t, &p);
        for (c, r) in got.classes.iter().enumerate() {
            let o = per[c];
            ensure(
                (r.precision, r.recall, r.f1, r.support) == o,
                || format!("case {case} class {c}: {r:?} vs {o:?}"),
            )?;
        }
        ensure((got.precision, got.recall, got.f1) == (wp, wr, wf), || {
            format!("case {case}: weighted ({}, {}, {}) vs ({wp}, {wr}, {wf})", got.precision, got.recall, got.f1)
        })?;
        ensure(got.support == n, || format!("case {case}: support {}", got.support))?;
    }
    Ok("1000 random label vectors match the counting oracle exactly".into())
}

fn random_points(rng: &mut seed::Rng, n: usize, d: usize, grid: bool) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if grid {
                        rng.random_range(0..4) as f64
                    } else {
                        rng.random_range(-3.0..3.0)
                    }
                })
                .collect()
        })
        .collect();
    Matrix::from_rows(&rows)
}

fn c7a_knn() -> Result<(), String> {
    let mut rng = seed::rng(71);
    for case in 0..50 {
        let n = rng.random_range(2..150);
        let d = rng.random_range(1..6);
        let grid = case % 2 == 0;
        let p = [1.0, 2.0, 3.0][case % 3];
        let points = random_points(&mut rng, n, d, grid);
        let query = random_points(&mut rng, 1, d, grid).row(0).to_vec();
        let k = rng.random_range(1..=n);
        let index = KnnIndex::new(points.clone(), Minkowski { p }, rng.random_range(1..20));
        let got = knn_query(&index, &query, k).map_err(|e| e.to_string())?;
        let mut all: Vec<(f64, usize)> = (0..n)
            .map(|i| {
                let s: f64 = points.row(i).iter().zip(&query).map(|(a, b)| (a - b).abs().powf(p)).sum();
                (s, i)
            })
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let want: Vec<usize> = all[..k].iter().map(|&(_, i)| i).collect();
        let got_idx: Vec<usize> = got.iter().map(|nb| nb.index).collect();
        ensure(got_idx == want, || format!("knn case {case}: {got_idx:?} vs {want:?}"))?;
        for (nb, &(s, _)) in got.iter().zip(&all) {
            let dist = s.powf(1.0 / p);
            ensure((nb.distance - dist).abs() <= 1e-12 * dist.max(1.0), || {
                format!("knn case {case}: distance {} vs {dist}", nb.distance)
            })?;
        }
    }
    Ok(())
}

fn gini(w: f64, pos: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let p = pos / w;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

fn c7b_best_split() -> Result<(), String> {
    let mut rng = seed::rng(72);
    for case in 0..50 {
        let x = random_points(&mut rng, 8, 3, true);
        let y: Vec<u8> = (0..8).map(|_| u8::from(rng.random_bool(0.5))).collect();
        let w: Vec<f64> = if case % 2 == 0 {
            vec![1.0; 8]
        } else {
            (0..8).map(|_| rng.random_range(1..5) as f64).collect()
        };
        let total: f64 = w.iter().sum();
        let pos: f64 = (0..8).filter(|&i| y[i] == 1).map(|i| w[i]).sum();
        // exhaustive enumeration over features and midpoints
        let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
        if pos > 0.0 && pos < total {
            for f in 0..3 {
                let mut vals: Vec<f64> = (0..8).map(|i| x.get(i, f)).collect();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                for pair in vals.windows(2) {
                    let thr = (pair[0] + pair[1]) / 2.0;
                    let (mut lw, mut lp) = (0.0, 0.0);
                    for i in 0..8 {
                        if x.get(i, f) <= thr {
                            lw += w[i];
                            if y[i] == 1 {
                                lp += w[i];
                            }
                        }
                    }
                    let gain = gini(total, pos)
                        - lw / total * gini(lw, lp)
                        - (total - lw) / total * gini(total - lw, pos - lp);
                    candidates.push((f, thr, gain));
                }
            }
        }
        let got = best_split(&x, &y, &w, &[0, 1, 2]);
        let best = candidates.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        let want = candidates.iter().find(|c| c.2 >= best - SPLIT_GAIN_TOL);
        match (got, want) {
            (None, None) => {}
            (Some(s), Some(&(f, thr, gain))) => ensure(
                s.feature == f && s.threshold == thr && (s.gain - gain).abs() <= SPLIT_GAIN_TOL,
                || format!("split case {case}: {s:?} vs ({f}, {thr}, {gain})"),
            )?,
            (g, w) => return Err(format!("split case {case}: {g:?} vs {w:?}")),
        }
    }
    Ok(())
}

fn c7c_logistic_gradient() -> Result<f64, String> {
    let mut rng = seed::rng(73);
    let (n, d, c) = (60, 5, 1.0);
    let x = random_points(&mut rng, n, d, false);
    let y: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.4))).collect();
    let theta: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let loss = |t: &[f64]| logistic_loss_grad(&t[..d], t[d], &x, &y, c).0;
    let (_, grad) = logistic_loss_grad(&theta[..d], theta[d], &x, &y, c);
    let mut worst: f64 = 0.0;
    for j in 0..=d {
        let (mut up, mut down) = (theta.clone(), theta.clone());
        up[j] += FD_STEP;
        down[j] -= FD_STEP;
        let fd = (loss(&up) - loss(&down)) / (2.0 * FD_STEP);
        let rel = (grad[j] - fd).abs() / grad[j].abs().max(fd.abs()).max(FD_REL_FLOOR);
        worst = worst.max(rel);
    }
    ensure(worst < FD_MAX_REL_ERR, || format!("gradient rel. error {worst:.2e}"))?;
    Ok(worst)
}

fn dual(q: &[Vec<f64>], a: &[f64]) -> f64 {
    let n = a.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += a[i] * a[j] * q[i][j];
        }
    }
    0.5 * quad - a.iter().sum::<f64>()
}

fn c7d_smo() -> Result<(f64, usize), String> {
    let mut rng = seed::rng(74);
    let (n, c) = (40, 1.0);
    let mut worst_gap: f64 = 0.0;
    let mut compared = 0;
    for case in 0..3 {
        let x = random_points(&mut rng, n, 3, false);
        let y: Vec<f64> = (0..n).map(|i| if (i + case) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let k = kernel_matrix(&x, &Kernel::Rbf { gamma: 0.5 });
        let sol = smo_solve(&k, &y, c, SMO_TOL, 1_000_000);
        ensure(sol.converged, || format!("smo case {case} did not converge"))?;
        let a = &sol.alphas;
        let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k.get(i, j)).collect()).collect();
        ensure(a.iter().all(|&v| (0.0..=c).contains(&v)), || format!("smo case {case}: box violated"))?;
        let eq: f64 = a.iter().zip(&y).map(|(a, y)| a * y).sum();
        ensure(eq.abs() <= SMO_EQUALITY_TOL, || format!("smo case {case}: sum y a = {eq:e}"))?;
        let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i][j] * a[j]).sum::<f64>() - 1.0).collect();
        let up = |i: usize| (y[i] > 0.0 && a[i] < c) || (y[i] < 0.0 && a[i] > 0.0);
        let low = |i: usize| (y[i] > 0.0 && a[i] > 0.0) || (y[i] < 0.0 && a[i] < c);
        let m = (0..n).filter(|&i| up(i)).map(|i| -y[i] * g[i]).fold(f64::NEG_INFINITY, f64::max);
        let big_m = (0..n).filter(|&i| low(i)).map(|i| -y[i] * g[i]).fold(f64::INFINITY, f64::min);
        let gap = m - big_m;
        worst_gap = worst_gap.max(gap);
        ensure(gap <= SMO_TOL, || format!("smo case {case}: KKT gap {gap:e}"))?;
        let best = dual(&q, a);
        for trial in 0..100 {
            let mut r: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..c)).collect();
            let pos: f64 = (0..n).filter(|&i| y[i] > 0.0).map(|i| r[i]).sum();
            let neg: f64 = (0..n).filter(|&i| y[i] < 0.0).map(|i| r[i]).sum();
            let (scale_pos, scale_neg) = if pos > neg { (neg / pos, 1.0) } else { (1.0, pos / neg) };
            for i in 0..n {
                r[i] *= if y[i] > 0.0 { scale_pos } else { scale_neg };
            }
            let value = dual(&q, &r);
            ensure(best <= value, || format!("smo case {case} trial {trial}: {best} > {value}"))?;
            compared += 1;
        }
    }
    Ok((worst_gap, compared))
}

fn c7e_adaboost() -> Result<usize, String> {
    let mut rng = seed::rng(75);
    let n = 200;
    let mut rounds = 0;
    for lr in [0.01, 0.5, 1.0] {
        let mut w = vec![1.0 / n as f64; n];
        for round in 0..150 {
            let rate = if round == 149 { 0.0 } else { rng.random_range(0.05..0.45) };
            let mis: Vec<bool> = (0..n).map(|_| rng.random_bool(rate)).collect();
            let err: f64 = w.iter().zip(&mis).filter(|(_, &m)| m).map(|(w, _)| w).sum();
            let r = adaboost_round(&w, &mis, err, lr);
            let sum: f64 = r.weights.iter().sum();
            ensure((sum - 1.0).abs() <= ADA_WEIGHT_SUM_TOL, || {
                format!("lr {lr} round {round}: weights sum to {sum:.17}")
            })?;
            w = r.weights;
            rounds += 1;
            if r.stop {
                break;
            }
        }
    }
    Ok(rounds)
}

fn c7f_gbt() -> Result<String, String> {
    let config = bundled();
    let raw = dataset();
    let (_, data) = fit_pipeline(&raw, &config.pipeline_spec()).map_err(|e| e.to_string())?;
    let b = smote_oversample(&data.x_train, &data.y_train, &config.smote_config()).map_err(|e| e.to_string())?;
    let spec = LearnerSpec::GradientBoost(GradientBoostParams::default());
    let model = learners::fit(&spec, &b.x, &b.y, config.learner_seed(&spec)).map_err(|e| e.to_string())?;
    let ModelParams::Gbt(g) = &model.params else {
        return Err("not a boosting model".into());
    };
    let h = &g.loss_history;
    ensure(h.len() == 351, || format!("{} losses logged, expected 351", h.len()))?;
    for i in 0..10 {
        ensure(h[i + 1] <= h[i], || format!("round {}: loss {} > {}", i + 1, h[i + 1], h[i]))?;
    }
    let increases = h.windows(2).filter(|w| w[1] > w[0]).count();
    Ok(format!(
        "loss {:.4} -> {:.4} over 350 rounds, {increases} increases",
        h[0],
        h[350]
    ))
}

fn c7_learner_oracles() -> Check {
    c7a_knn()?;
    c7b_best_split()?;
    let fd = c7c_logistic_gradient()?;
    let (gap, compared) = c7d_smo()?;
    let rounds = c7e_adaboost()?;
    let gbt = c7f_gbt()?;
    Ok(format!(
        "knn 50/50, split 50/50, grad rel err {fd:.1e}, SMO gap {gap:.1e} beats {compared} points, {rounds} AdaBoost rounds, GBT {gbt}"
    ))
}

fn run_default(out: &Path) -> Result<RunManifest, String> {
    let config = ExperimentConfig {
        output_dir: out.to_path_buf(),
        ..bundled()
    };
    run_experiment(&config, RunOptions { no_llm: true }).map_err(|e| e.to_string())
}

fn c8_table_bands() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let m = run_default(tmp.path())?;
    let mut cells = Vec::new();
    let mut misses = Vec::new();
    for &(key, reference) in REFERENCE_F1 {
        let got = m
            .models
            .iter()
            .find(|r| r.key == key)
            .ok_or(format!("no {key} result"))?
            .report
            .f1;
        cells.push(format!("{key} {got:.3}"));
        if (got - reference).abs() > F1_BAND {
            misses.push(format!("{key} {got:.3} vs {reference}"));
        }
        if key == "svm" && got < SVM_F1_FLOOR {
            misses.push(format!("svm {got:.3} below {SVM_F1_FLOOR}"));
        }
    }
    ensure(misses.is_empty(), || format!("outside band: {}", misses.join(", ")))?;
    Ok(cells.join(", "))
}

fn prop<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn c9_llm_substitute() -> Check {
    // (a) corpus from the default configuration against the frozen hash
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = RunDir::create(tmp.path(), Stage::Config).map_err(|e| e.to_string())?;
    prepare(&bundled(), &dir).map_err(|e| e.to_string())?;
    llm::prepare_corpus(&dir, Some(false)).map_err(|e| e.to_string())?;
    let corpus = std::fs::read(dir.path(CORPUS_FILE)).map_err(|e| e.to_string())?;
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/default_corpus.sha256"))
        .map_err(|e| e.to_string())?;
    let hash = hex::encode(Sha256::digest(&corpus));
    ensure(hash == golden.trim(), || format!("corpus hash {hash}"))?;
    let text = String::from_utf8(corpus).map_err(|e| e.to_string())?;
    for (i, line) in text.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        let keys: Vec<&str> = v.as_object().ok_or("not an object")?.keys().map(String::as_str).collect();
        ensure(keys == ["completion", "prompt"], || format!("line {}: keys {keys:?}", i + 1))?;
    }
    let lines = text.lines().count();

    // (b) echo run against the mock service
    let records: Vec<PromptRecord> = (0..30)
        .map(|i| {
            let label = if i % 4 == 0 { Label::Yes } else { Label::No };
            PromptRecord {
                prompt: format!("{PROMPT_PREFIX}Id={i}; Answer={label}"),
                completion: label.as_str().into(),
            }
        })
        .collect();
    let mock = MockService::start("127.0.0.1:0", MockConfig::default()).map_err(|e| e.to_string())?;
    let client = Client::new(ClientConfig {
        base_url: mock.url().into(),
        api_key: Some("acceptance".into()),
        base_model: "base".into(),
        backoff: Backoff::mock(),
        parallelism: 8,
        request_timeout: Duration::from_secs(10),
    })
    .map_err(|e| e.to_string())?;
    let job = client.run_finetune("echo.jsonl", &to_jsonl(&records)).map_err(|e| e.to_string())?;
    let model = job.fine_tuned_model.ok_or("no fine-tuned model")?;
    let prompts: Vec<String> = records.iter().map(|r| r.prompt.clone()).collect();
    let preds = client.predict_all(&model, &prompts).map_err(|e| e.to_string())?;
    let truth: Vec<u8> = records.iter().map(|r| u8::from(r.completion == "Yes")).collect();
    let guess: Vec<u8> = preds.iter().map(|p| p.parsed.label().map_or(0, Label::class)).collect();
    let w = metrics::evaluate(&truth, &guess).map_err(|e| e.to_string())?;
    ensure((w.precision, w.recall, w.f1) == (1.0, 1.0, 1.0), || format!("echo metrics {w:?}"))?;
    let unknown = client.llm_predict(&model, "not in the corpus").map_err(|e| e.to_string())?;
    ensure(unknown.parsed == Parsed::Unparseable, || format!("unknown prompt parsed as {:?}", unknown.parsed))?;

    // (c) completion parsing properties
    let mut runner = TestRunner::new(PropConfig {
        cases: 512,
        failure_persistence: None,
        ..PropConfig::default()
    });
    prop(runner.run(&any::<bool>(), |yes| {
        let l = if yes { Label::Yes } else { Label::No };
        prop_assert_eq!(parse_completion(l.as_str()).label(), Some(l));
        Ok(())
    }))?;
    prop(runner.run(&("[a-mp-xz ,.]{0,12}", any::<bool>(), "[a-z ,.!]{0,12}"), |(pre, first, post)| {
        let (a, b, want) = if first { ("YES", "no", Parsed::Yes) } else { ("No", "yes", Parsed::No) };
        prop_assert_eq!(parse_completion(&format!("{pre} {a}. {b} {post}")), want);
        Ok(())
    }))?;
    prop(runner.run(&"[a-z]{1,4}", |affix| {
        let text = format!("{affix}yes no{affix} {affix}no");
        prop_assert_eq!(parse_completion(&text), Parsed::Unparseable);
        Ok(())
    }))?;
    prop(runner.run(&".*", |s| {
        let _ = parse_completion(&s);
        Ok(())
    }))?;
    ensure(parse_completion(" yes.") == Parsed::Yes, || "\" yes.\"".into())?;
    ensure(parse_completion("The employee seems happy") == Parsed::Unparseable, || "free text".into())?;

    Ok(format!(
        "corpus {lines} lines matches golden hash, echo p=r=f1=1, unknown prompt Unparseable, parser properties hold"
    ))
}

fn c10_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_default(&a)?;
    run_default(&b)?;
    let read = |dir: &Path, name: &str| std::fs::read(dir.join(name)).map_err(|e| e.to_string());
    ensure(read(&a, REPORT_CSV_FILE)? == read(&b, REPORT_CSV_FILE)?, || "report.csv differs".into())?;
    let manifest = |dir: &Path| -> Result<RunManifest, String> {
        serde_json::from_slice(&read(dir, MANIFEST_FILE)?).map_err(|e| e.to_string())
    };
    let (ma, mb) = (manifest(&a)?, manifest(&b)?);
    ensure(ma.counts == mb.counts, || "count chains differ".into())?;
    ma.counts.check()?;
    ensure(ma.without_timings() == mb.without_timings(), || "manifests differ beyond timings".into())?;
    Ok("report.csv byte-identical, manifests equal apart from wall clock".into())
}

fn main() {
    let mut suite = Suite::default();
    let s = Duration::from_secs;
    suite.criterion("C1", "dataset integrity", s(1), c1_dataset_integrity);
    suite.criterion("C2", "descriptive statistics", s(1), c2_descriptive_stats);
    suite.criterion("C3", "class distribution", s(1), c3_class_distribution);
    suite.criterion("C4", "pipeline counts", s(5), c4_pipeline_counts);
    suite.criterion("C5", "skew handling", s(1), c5_skew_handling);
    suite.criterion("C6", "metrics oracle", s(5), c6_metrics_oracle);
    suite.criterion("C7", "learner oracles", s(60), c7_learner_oracles);
    suite.criterion("C8", "reference F1 bands", s(120), c8_table_bands);
    suite.criterion("C9", "language-model substitute", s(10), c9_llm_substitute);
    suite.criterion("C10", "determinism", s(240), c10_determinism);
    println!(
        "\nacceptance: {} passed, {} failed{}",
        suite.passed,
        suite.failed.len(),
        if suite.failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", suite.failed.join(", "))
        }
    );
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !suite.failed.is_empty() {
        std::process::exit(1);
    }
}
