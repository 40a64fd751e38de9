//! Acceptance run: every criterion prints one PASS/FAIL line; the process
//! fails if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pathcount_cli::{cmd_check, without_timestamp, Config};
use pathcount_core::corpus;
use pathcount_core::suites::{Proposition, Report};
use pathcount_core::ProblemKind;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&Path) -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn config(dir: &Path, p: Proposition) -> Config {
    Config {
        report_dir: dir.to_path_buf(),
        proposition: Some(p),
        ..Config::default()
    }
}

/// Runs one suite through the report-writing driver.
fn check(cfg: &Config) -> Result<(Report, Duration), String> {
    let start = Instant::now();
    let mut written = cmd_check(cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let w = written.pop().ok_or("no report written")?;
    let text = fs::read_to_string(&w.path).map_err(|e| e.to_string())?;
    ensure(text.ends_with(&format!("{}\n", w.report.summary())), || {
        format!("{} does not end with its summary", w.path.display())
    })?;
    Ok((w.report, elapsed))
}

fn passing(cfg: &Config) -> Result<(Report, Duration), String> {
    let (r, t) = check(cfg)?;
    ensure(r.passed(), || {
        let first = r.failures().next().unwrap_or("").to_string();
        format!("{} failed {}/{}; first: {first}", r.proposition, r.failed, r.cases)
    })?;
    Ok((r, t))
}

/// The same suite with a broken construction must fail with a witness.
fn control_fails(cfg: &Config) -> Result<String, String> {
    let mut bad = cfg.clone();
    bad.suite.negative_control = true;
    let (r, _) = check(&bad)?;
    ensure(!r.passed(), || format!("negative control of {} passed", r.proposition))?;
    let witness = r.failures().next().ok_or("no counterexample line")?;
    Ok(witness.chars().take(60).collect())
}

fn closure(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::Closure);
    let c = &cfg.suite.corpus;
    ensure(c.count >= 1000 && c.max_depth <= 6 && c.max_fanout <= 3, || {
        format!("corpus too weak: {c:?}")
    })?;
    for e in corpus::generate(c) {
        let m = e.build_pure().map_err(|e| e.to_string())?;
        ensure(m.depth_bound() <= 6 && m.fanout_bound() <= 3, || format!("corpus machine {e} out of shape"))?;
    }
    let (r, t) = passing(&cfg)?;
    ensure(r.cases == 3 * c.count, || format!("expected {} cases, got {}", 3 * c.count, r.cases))?;
    ensure(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    let mut add_only = cfg.clone();
    add_only.proposition = Some(Proposition::ClosureAdd);
    control_fails(&add_only)?;
    Ok(format!("{} machines, sub1/add/mul on {} pairs, {t:.2?}, naive add caught", c.count, r.cases / 3))
}

fn gap(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::GapDecompose);
    let (r, _) = passing(&cfg)?;
    ensure(r.cases >= 500, || format!("only {} pairs", r.cases))?;
    control_fails(&cfg)?;
    Ok(format!("{} pairs", r.cases))
}

fn normalize(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::Normalize);
    ensure(cfg.suite.p_values == vec![4, 5, 6, 7, 8], || "p must range over 4..8".into())?;
    let (r, _) = passing(&cfg)?;
    let mut per_p = Vec::new();
    for p in 4..=8 {
        let n = r.stat(&format!("normalized-p{p}"));
        ensure(n >= 200, || format!("only {n} machines normalized at p={p}"))?;
        per_p.push(format!("p{p}:{n}"));
    }
    control_fails(&cfg)?;
    Ok(format!("normalized {}", per_p.join(" ")))
}

fn modk(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::ModK);
    ensure(cfg.suite.k_values == (2..=7).collect::<Vec<_>>(), || "k must range over 2..7".into())?;
    let (r, _) = passing(&cfg)?;
    ensure(r.cases == 6 * cfg.suite.corpus.count && cfg.suite.corpus.count >= 500, || {
        format!("{} cases", r.cases)
    })?;
    control_fails(&cfg)?;
    Ok(format!("k=2..7 over {} machines", cfg.suite.corpus.count))
}

fn parity(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::Parity);
    let (r, _) = passing(&cfg)?;
    ensure(r.cases == cfg.suite.corpus.count, || format!("{} cases", r.cases))?;
    control_fails(&cfg)?;
    Ok(format!("{} machines", r.cases))
}

fn fig1(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::Fig1);
    let (r, t) = passing(&cfg)?;
    // labelled bipartite graphs with sides a <= b, a + b <= 8
    let exhaustive: usize = (0..=4usize)
        .flat_map(|a| (a..=8 - a).map(move |b| 1usize << (a * b)))
        .sum();
    ensure(r.stat("perf-match-exhaustive") == exhaustive, || {
        format!("exhaustive family has {} graphs, expected {exhaustive}", r.stat("perf-match-exhaustive"))
    })?;
    for (tag, min) in [
        ("perf-match-random", 100),
        ("dnf-sat", 100),
        ("indep-sets-random", 100),
        ("indep-sets-exhaustive", 1),
    ] {
        ensure(r.stat(tag) >= min, || format!("{tag}: only {}", r.stat(tag)))?;
    }
    ensure(t < Duration::from_secs(300), || format!("took {t:?}"))?;
    control_fails(&cfg)?;
    Ok(format!(
        "{exhaustive} exhaustive + {} random bipartite graphs, {} DNF, {} IS, {t:.2?}",
        r.stat("perf-match-random"),
        r.stat("dnf-sat"),
        r.stat("indep-sets-random") + r.stat("indep-sets-exhaustive")
    ))
}

fn poly_bounded(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::PolyBounded);
    let (r, _) = passing(&cfg)?;
    ensure(r.cases == cfg.suite.corpus.count, || format!("{} cases", r.cases))?;
    control_fails(&cfg)?;
    Ok(format!("{} machines", r.cases))
}

fn diff_family(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::DiffFamily);
    let (r, _) = passing(&cfg)?;
    let mut violated = 0;
    for kind in ProblemKind::ALL {
        let pairs = r.stat(&format!("{kind}-pairs"));
        ensure(pairs >= 200, || format!("{kind}: only {pairs} pairs"))?;
        let v = r.stat(&format!("{kind}-violated"));
        ensure(v > 0, || format!("{kind}: no off-promise pairs exercised"))?;
        violated += v;
    }
    control_fails(&cfg)?;
    Ok(format!("{} pairs, {violated} off-promise with witnesses", r.cases))
}

fn scaling(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::Scaling);
    let (r, _) = passing(&cfg)?;
    let q = r.stat("quadruples");
    ensure(q >= 20, || format!("only {q} quadruples"))?;
    ensure(r.stat("reflexive") > 0, || "no random reflexive quadruples".into())?;
    control_fails(&cfg)?;
    Ok(format!("{q} hand-built quadruples (T and T±1), {} random reflexive", r.stat("reflexive")))
}

fn parsimony(dir: &Path) -> Outcome {
    let cfg = config(dir, Proposition::Parsimony);
    let (r, _) = passing(&cfg)?;
    let shipped: Vec<_> = r.stats.iter().filter(|(k, _)| k.starts_with("instances-")).collect();
    ensure(shipped.len() >= 4, || format!("only {} reductions checked", shipped.len()))?;
    for (name, n) in &shipped {
        ensure(**n >= 100, || format!("{name}: {n} instances"))?;
    }
    ensure(r.lines.iter().any(|l| l.starts_with("OK control drop-last-term caught") && l.contains("witness=[FAIL ")), || {
        "negative control not caught with a witness".into()
    })?;
    let witness = control_fails(&cfg)?;
    Ok(format!("{} reductions x >=100 instances; control witness `{witness}...`", shipped.len()))
}

/// Runs the binary twice with the same configuration and compares every
/// report byte for byte after the timestamp line.
fn determinism(dir: &Path) -> Outcome {
    let bin = env!("CARGO_BIN_EXE_pathcount");
    let cfg_file = dir.join("run.cfg");
    fs::write(&cfg_file, "seed = 11\ncount = 400\ninstances = 120\n").map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.join(name);
        let status = Command::new(bin)
            .arg("check")
            .arg("--config")
            .arg(&cfg_file)
            .arg("--report-dir")
            .arg(&out_dir)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.code() == Some(0), || {
            format!("run {name} exited with {:?}", status.status.code())
        })?;
        let mut files: Vec<_> = fs::read_dir(&out_dir)
            .map_err(|e| e.to_string())?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        files.sort();
        let texts = files
            .iter()
            .map(|p| fs::read_to_string(p).map(|t| (p.file_name().unwrap().to_owned(), t)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        runs.push((texts, String::from_utf8_lossy(&status.stdout).into_owned()));
    }
    let (a, b) = (&runs[0], &runs[1]);
    ensure(a.0.len() == Proposition::SUITES.len(), || format!("{} reports written", a.0.len()))?;
    ensure(a.1 == b.1, || "stdout summaries differ".into())?;
    for ((na, ta), (nb, tb)) in a.0.iter().zip(&b.0) {
        ensure(na == nb, || format!("report names differ: {na:?} {nb:?}"))?;
        ensure(ta.starts_with("# generated-at="), || format!("{na:?} lacks the timestamp header"))?;
        ensure(without_timestamp(ta) == without_timestamp(tb), || format!("{na:?} differs between runs"))?;
    }
    Ok(format!("{} reports identical modulo timestamp", a.0.len()))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let criteria: [Criterion; 11] = [
        ("closure suite", closure),
        ("gap suite", gap),
        ("normal-form suite", normalize),
        ("mod-k suite", modk),
        ("parity suite", parity),
        ("self-reduction machine suite", fig1),
        ("poly-bounded evaluation", poly_bounded),
        ("diff-family suite", diff_family),
        ("scaling-identity suite", scaling),
        ("parsimony suite", parsimony),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let dir = tmp.path().join(format!("c{}", i + 1));
        fs::create_dir_all(&dir).expect("criterion directory");
        match f(&dir) {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
