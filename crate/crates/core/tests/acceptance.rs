//! Acceptance gate. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use m5x::copulas::{lattice, random_grid};
use m5x::estimate::{
    empirical_extremal_index, empirical_limit_prob, empirical_tail_dependence, Sequence,
    TailOptions, DEGENERATE_TAU,
};
use m5x::rng::stream;
use m5x::simulate::{block_maxima, stationary_samples};
use m5x::theory::closed_forms;
use m5x::theory::CoefficientKind;
use m5x::{Copula, M5Model, SignatureArray, SimConfig, TauVector};
use rand::Rng;

use common::{
    disjoint_support, example_model, identical_columns, random_models, random_signatures,
    random_tau,
};

const SEED: u64 = 20_240_601;
const Z_GATE: f64 = 4.0;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(label: &str, start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || {
        format!("{label} took {took:?}, limit {limit:?}")
    })
}

// 1. Generic evaluator against the three special-case closed forms.
fn special_cases() -> Check {
    let start = Instant::now();
    let mut rng = stream(SEED, 1);
    let mut worst = 0.0f64;
    for sig in random_signatures(SEED) {
        let d = sig.dim();
        let tau = random_tau(&mut rng, d);
        let tv = TauVector::new(tau.clone()).unwrap();
        let alpha = rng.random_range(1.0..4.0);

        let co = M5Model::new(sig.clone(), Copula::comonotone(d)).unwrap();
        let ind = M5Model::new(sig.clone(), Copula::independence(d)).unwrap();
        let lg = M5Model::new(sig.clone(), Copula::logistic(d, alpha).unwrap()).unwrap();
        let diffs = [
            co.limit_block_maxima(&tv).unwrap() - closed_forms::comonotone_limit(&sig, &tau),
            ind.limit_block_maxima(&tv).unwrap() - closed_forms::independence_limit(&sig, &tau),
            lg.extremal_index(&tv).unwrap()
                - closed_forms::logistic_extremal_index(&sig, alpha, &tau),
        ];
        for diff in diffs {
            worst = worst.max(diff.abs());
        }
    }
    ensure(worst <= 1e-12, || {
        format!("max deviation {worst:e} > 1e-12")
    })?;
    within_time("special cases", start, Duration::from_secs(1))?;
    Ok(format!(
        "25 signatures x 3 kinds, max deviation {worst:.1e}"
    ))
}

// 2. Both expressions of lambda^(C) through the hat copula.
fn cross_identities() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for m in random_models(SEED) {
        for j in 0..m.dim() {
            for j2 in j + 1..m.dim() {
                let r = m.tail_dependence_relation(j, j2).unwrap();
                worst = worst
                    .max((r.lambda_c - r.via_scaled_hat).abs())
                    .max((r.lambda_c - r.via_log_ratio).abs());
                pairs += 1;
            }
        }
    }
    ensure(worst <= 1e-10, || {
        format!("max deviation {worst:e} > 1e-10")
    })?;
    within_time("cross identities", start, Duration::from_secs(1))?;
    Ok(format!("{pairs} pairs, max deviation {worst:.1e}"))
}

// 3. eps = 2 - lambda on every bivariate sub-model.
fn duality() -> Check {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for m in random_models(SEED) {
        for j in 0..m.dim() {
            for j2 in j + 1..m.dim() {
                let p = m.pair(j, j2).unwrap();
                let eh = p.extremal_coefficient(CoefficientKind::Hat).unwrap();
                let ec = p.extremal_coefficient(CoefficientKind::Limiting).unwrap();
                let lh = m.tail_dependence_hat(j, j2).unwrap();
                let lc = m.tail_dependence_limit(j, j2).unwrap();
                worst = worst
                    .max((eh - (2.0 - lh)).abs())
                    .max((ec - (2.0 - lc)).abs());
                pairs += 1;
            }
        }
    }
    ensure(worst <= 1e-12, || {
        format!("max deviation {worst:e} > 1e-12")
    })?;
    Ok(format!("{pairs} sub-models, max deviation {worst:.1e}"))
}

/// Margins, groundedness, monotonicity, PLOD and max-stability of `f` on
/// `grid`. Returns the first violation.
fn copula_laws(
    name: &str,
    d: usize,
    grid: &[Vec<f64>],
    f: &dyn Fn(&[f64]) -> f64,
) -> Result<(), String> {
    for u in grid {
        for j in 0..d {
            let mut e = vec![1.0; d];
            e[j] = u[j];
            let m = f(&e);
            ensure((m - u[j]).abs() <= 1e-12, || {
                format!("{name}: margin {j} at {:?} gives {m}", u[j])
            })?;
            let mut g = u.clone();
            g[j] = 0.0;
            let z = f(&g);
            ensure(z.abs() <= 1e-15, || {
                format!("{name}: not grounded at {g:?}: {z}")
            })?;
            let mut up = u.clone();
            up[j] = (u[j] + 0.05).min(1.0);
            let (lo, hi) = (f(u), f(&up));
            ensure(hi >= lo - 1e-14, || {
                format!("{name}: decreasing in {j} at {u:?}")
            })?;
        }
        let c = f(u);
        let prod: f64 = u.iter().product();
        ensure(c >= prod - 1e-12, || {
            format!("{name}: PLOD fails at {u:?}: {c} < {prod}")
        })?;
        for n in [2u32, 5, 10] {
            let root: Vec<f64> = u.iter().map(|x| x.powf(1.0 / n as f64)).collect();
            let dev = (f(&root).powi(n as i32) - c).abs();
            ensure(dev <= 1e-10, || {
                format!("{name}: max-stability n={n} at {u:?} off by {dev:e}")
            })?;
        }
    }
    Ok(())
}

// 4. Copula axioms for C*, Ĉ and C.
fn copula_law_suite() -> Check {
    let start = Instant::now();
    let mut rng = stream(SEED, 4);
    let mut checked = 0;
    for d in [2usize, 3] {
        let grid = if d == 2 {
            lattice(2, 10)
        } else {
            random_grid(3, 100, &mut rng)
        };
        for c in [
            Copula::independence(d),
            Copula::comonotone(d),
            Copula::logistic(d, 2.5).unwrap(),
        ] {
            let name = format!("{:?} d={d}", c.kind());
            copula_laws(&name, d, &grid, &|u| c.evaluate(u).unwrap())?;
            checked += 1;
        }
    }
    let grid = lattice(2, 10);
    for c in [
        Copula::independence(2),
        Copula::comonotone(2),
        Copula::logistic(2, 2.5).unwrap(),
    ] {
        let m = example_model(c);
        let kind = format!("{:?}", c.kind());
        copula_laws(&format!("hat copula, {kind}"), 2, &grid, &|u| {
            m.copula_hat(u).unwrap()
        })?;
        copula_laws(&format!("limiting copula, {kind}"), 2, &grid, &|u| {
            m.copula_limit(u).unwrap()
        })?;
        checked += 2;
    }
    within_time("copula laws", start, Duration::from_secs(5))?;
    Ok(format!("{checked} copulas on 100-point grids"))
}

fn example_maxima() -> (SimConfig, Vec<m5x::BlockMaxima>) {
    let cfg = SimConfig::new(example_model(Copula::comonotone(2)), 1000, 10_000, SEED).unwrap();
    let maxima = block_maxima(&cfg);
    (cfg, maxima)
}

fn z_line(label: &str, value: f64, se: f64, truth: f64) -> (bool, String) {
    let z = (value - truth) / se;
    (
        z.abs() <= Z_GATE,
        format!("{label} {value:.5} (se {se:.5}, truth {truth:.6}, z {z:+.2})"),
    )
}

// 5. Empirical P(M_n <= n / tau) against the limit law.
fn block_maxima_limit(cfg: &SimConfig, maxima: &[m5x::BlockMaxima]) -> Check {
    let tau = TauVector::ones(2);
    let est = empirical_limit_prob(maxima, cfg.n, &tau, Sequence::Dependent).unwrap();
    let truth = (-0.9f64).exp();
    let model_truth = cfg.model.limit_block_maxima(&tau).unwrap();
    ensure((model_truth - truth).abs() <= 1e-15, || {
        format!("closed form gives {model_truth}")
    })?;
    let (ok, line) = z_line("P", est.value, est.se, truth);
    if ok {
        Ok(line)
    } else {
        Err(line)
    }
}

// 6. Extremal index and both marginal indices.
fn extremal_index(cfg: &SimConfig, maxima: &[m5x::BlockMaxima]) -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    let cases = [
        ("theta(1,1)", vec![1.0, 1.0], 0.9 / 1.4),
        ("theta_1", vec![1.0, DEGENERATE_TAU], 0.7),
        ("theta_2", vec![DEGENERATE_TAU, 1.0], 0.8),
    ];
    for (label, tau, truth) in cases {
        let est = empirical_extremal_index(maxima, cfg.n, &TauVector::new(tau).unwrap()).unwrap();
        let (pass, line) = z_line(label, est.value, est.se, truth);
        ok &= pass;
        lines.push(line);
    }
    let text = lines.join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

// 7. lambda_hat at u = 0.99 from 10^5 stationary draws.
fn tail_dependence() -> Check {
    // At u = 0.99 a tail-independent pair has about 10 joint exceedances in
    // 10^5 draws, so the zero-dependence cases lower the drop threshold.
    let cases: [(&str, M5Model, f64, usize); 4] = [
        (
            "comonotone example",
            example_model(Copula::comonotone(2)),
            0.6,
            50,
        ),
        (
            "independence example",
            example_model(Copula::independence(2)),
            0.0,
            5,
        ),
        (
            "comonotone disjoint",
            M5Model::new(disjoint_support(), Copula::comonotone(2)).unwrap(),
            0.0,
            5,
        ),
        (
            "comonotone identical",
            M5Model::new(identical_columns(), Copula::comonotone(2)).unwrap(),
            1.0,
            50,
        ),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, (label, model, truth, min_joint)) in cases.into_iter().enumerate() {
        let theory = model.tail_dependence_hat(0, 1).unwrap();
        if (theory - truth).abs() > 1e-12 {
            ok = false;
            lines.push(format!("{label}: closed form {theory} != {truth}"));
            continue;
        }
        let samples = stationary_samples(&model, 100_000, SEED + i as u64);
        let opts = TailOptions {
            bootstrap_resamples: 200,
            min_joint_exceedances: min_joint,
            seed: SEED + i as u64,
        };
        let est = empirical_tail_dependence(&samples, 0, 1, &[0.99], &opts).unwrap();
        let Some(level) = est.levels.first() else {
            ok = false;
            lines.push(format!("{label}: level dropped ({:?})", est.dropped));
            continue;
        };
        let diff = level.estimate - truth;
        let pass = diff.abs() <= Z_GATE * level.se;
        ok &= pass;
        lines.push(format!(
            "{label} {:.4} (se {:.4}, truth {truth}, {} joint)",
            level.estimate, level.se, level.joint_exceedances
        ));
    }
    let text = lines.join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

/// All `(l, k, j)` fillings of a 2-pattern, 2-lag, 2-component array with
/// quarter weights and unit column sums.
fn quarter_signatures() -> Vec<SignatureArray> {
    let mut columns = Vec::new();
    for a in 0..=4 {
        for b in 0..=4 - a {
            for c in 0..=4 - a - b {
                columns.push([a, b, c, 4 - a - b - c]);
            }
        }
    }
    let cells = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let mut out = Vec::new();
    for c1 in &columns {
        for c2 in &columns {
            let mut entries = Vec::new();
            for (i, &(l, k)) in cells.iter().enumerate() {
                entries.push((l, k as i64, 0, c1[i] as f64 / 4.0));
                entries.push((l, k as i64, 1, c2[i] as f64 / 4.0));
            }
            if let Ok(sig) = SignatureArray::from_entries(2, 2, 0, 1, &entries) {
                out.push(sig);
            }
        }
    }
    out
}

// 8. lambda^(C) above and below lambda^(Ĉ), with the comparison statistic
// agreeing in sign.
fn both_signs() -> Check {
    let mut above = None;
    let mut below = None;
    let mut checked = 0;
    for sig in quarter_signatures() {
        let m = M5Model::new(sig.clone(), Copula::comonotone(2)).unwrap();
        let (hat, lim) = (
            m.tail_dependence_hat(0, 1).unwrap(),
            m.tail_dependence_limit(0, 1).unwrap(),
        );
        ensure(
            (hat - closed_forms::comonotone_tail_dependence_hat(&sig, 0, 1)).abs() <= 1e-12,
            || format!("hat closed form disagrees on {:?}", sig.entries()),
        )?;
        ensure(
            (lim - closed_forms::comonotone_tail_dependence_limit(&sig, 0, 1)).abs() <= 1e-12,
            || format!("limit closed form disagrees on {:?}", sig.entries()),
        )?;
        let gap = closed_forms::comonotone_lambda_gap(&sig, 0, 1);
        let diff = lim - hat;
        checked += 1;
        if diff.abs() <= 1e-12 {
            continue;
        }
        ensure(gap.signum() == diff.signum() && gap.abs() > 1e-12, || {
            format!(
                "sign mismatch: lambda gap {diff}, statistic {gap} on {:?}",
                sig.entries()
            )
        })?;
        if diff > 0.0 && above.is_none() {
            above = Some((sig.entries(), hat, lim));
        }
        if diff < 0.0 && below.is_none() {
            below = Some((sig.entries(), hat, lim));
        }
    }
    match (above, below) {
        (Some(a), Some(b)) => Ok(format!(
            "{checked} signatures searched; above: hat {:.4} < limit {:.4}; below: hat {:.4} > limit {:.4}",
            a.1, a.2, b.1, b.2
        )),
        (a, b) => Err(format!("found above: {}, below: {}", a.is_some(), b.is_some())),
    }
}

const SMALL_VERIFY: &str = r#"
[model]
d = 2
patterns = 2
k_min = 0
k_max = 1
copula = { kind = "comonotone" }
weights = [
    { l = 1, k = 0, j = 1, w = 0.5 },
    { l = 1, k = 1, j = 1, w = 0.3 },
    { l = 2, k = 0, j = 1, w = 0.2 },
    { l = 1, k = 0, j = 2, w = 0.4 },
    { l = 1, k = 1, j = 2, w = 0.1 },
    { l = 2, k = 0, j = 2, w = 0.1 },
    { l = 2, k = 1, j = 2, w = 0.4 },
]

[sim]
n = 200
reps = 2000
seed = 7
tail_samples = 20000

[experiment]
tau = [[1.0, 1.0]]
u_levels = [0.95]
commands = ["verify"]
"#;

fn m5x(config: &Path, out: &Path, extra: &[&str], threads: &str) -> Result<(i32, String), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_m5x"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .env("M5X_THREADS", threads)
        .output()
        .map_err(|e| format!("cannot run m5x: {e}"))?;
    let code = output.status.code().ok_or("m5x killed by signal")?;
    Ok((code, String::from_utf8_lossy(&output.stderr).into_owned()))
}

// 9. Byte-identical reruns and the exit-status contract.
fn cli_contract() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let good = root.join("good.toml");
    fs::write(&good, SMALL_VERIFY).map_err(|e| e.to_string())?;

    let (a, b) = (root.join("a"), root.join("b"));
    let (code_a, err_a) = m5x(&good, &a, &[], "1")?;
    let (code_b, _) = m5x(&good, &b, &[], "3")?;
    ensure(code_a == 0 && code_b == 0, || {
        format!("verify exited {code_a}/{code_b}: {err_a}")
    })?;
    let bytes_a = fs::read(a.join("verify.csv")).map_err(|e| e.to_string())?;
    let bytes_b = fs::read(b.join("verify.csv")).map_err(|e| e.to_string())?;
    ensure(bytes_a == bytes_b, || {
        "verify.csv differs between runs".into()
    })?;

    let (code, _) = m5x(&good, &root.join("t"), &["--command", "theory"], "0")?;
    ensure(code == 0, || format!("theory exited {code}"))?;

    let one_step = root.join("one_step.toml");
    fs::write(&one_step, SMALL_VERIFY.replace("n = 200", "n = 1")).map_err(|e| e.to_string())?;
    let (code, _) = m5x(&one_step, &root.join("c"), &[], "0")?;
    ensure(code == 1, || {
        format!("failing verify exited {code}, expected 1")
    })?;

    let negative = root.join("negative.toml");
    fs::write(&negative, SMALL_VERIFY.replace("w = 0.3", "w = -0.3")).map_err(|e| e.to_string())?;
    let (code, _) = m5x(&negative, &root.join("d"), &[], "0")?;
    ensure(code == 2, || {
        format!("invalid config exited {code}, expected 2")
    })?;

    let blocker = root.join("not_a_dir");
    fs::write(&blocker, "").map_err(|e| e.to_string())?;
    let (code, _) = m5x(&good, &blocker, &[], "0")?;
    ensure(code == 3, || {
        format!("unwritable output exited {code}, expected 3")
    })?;

    Ok(format!(
        "identical verify.csv ({} bytes); exit codes 0/1/2/3 as specified",
        bytes_a.len()
    ))
}

fn main() -> ExitCode {
    // Simulation-heavy criteria 5 and 6 share one run.
    let sim = std::cell::OnceCell::new();
    let maxima = || sim.get_or_init(example_maxima);

    let criteria: Vec<Criterion> = vec![
        ("special-case closed forms", Box::new(special_cases)),
        (
            "tail dependence cross-identities",
            Box::new(cross_identities),
        ),
        ("extremal coefficient duality", Box::new(duality)),
        ("copula laws", Box::new(copula_law_suite)),
        (
            "block-maxima limit",
            Box::new(|| {
                let (cfg, m) = maxima();
                block_maxima_limit(cfg, m)
            }),
        ),
        (
            "extremal index",
            Box::new(|| {
                let (cfg, m) = maxima();
                extremal_index(cfg, m)
            }),
        ),
        ("tail dependence estimates", Box::new(tail_dependence)),
        ("both-sign comparison", Box::new(both_signs)),
        ("cli determinism and exit codes", Box::new(cli_contract)),
    ];

    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name} [{secs:.2}s]: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name} [{secs:.2}s]: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
