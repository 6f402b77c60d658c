//! Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned
//! next to each check.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use relkit::agreement::{
    alpha_2x2, cohen_kappa_2x2, decompose, fleiss_kappa, krippendorff_alpha, AgreementTable,
    AssessmentSet, ContingencyTable2x2, Dataset, Measure, SetKey, AVERAGE_SCOPE,
};
use relkit::dataio::{display_decimal, parse_prescored, read_to_string, round_half_away};
use relkit::evalmetrics::{mean_over_topics, rms_error, RankedRun, RunCatalog, Variant};
use relkit::reliability::{filter_sets, EvalReport, FilterReport, ReliabilityThresholds};
use relkit::synthgen::{generate_set, SimulationConfig};
use relkit::Id;

type Check = fn() -> Result<String, String>;

const SERVICES: [&str; 5] = ["SOLR", "RAND", "AUTH", "BRAD", "STR"];

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn agreement_path() -> PathBuf {
    manifest().join("data/campaign_agreement.tsv")
}

fn fixture(name: &str) -> String {
    read_to_string(&manifest().join("tests/fixtures").join(name)).expect("fixture")
}

fn campaign_scores() -> AgreementTable {
    let text = read_to_string(&agreement_path()).expect("agreement fixture");
    AgreementTable::from_records(parse_prescored(&text).expect("agreement fixture parses"))
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn relkit(args: &[&str]) -> (i32, Vec<u8>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_relkit"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        out.stdout,
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn keys(sets: &BTreeSet<SetKey>) -> Vec<String> {
    sets.iter()
        .map(|k| format!("{}/{}", k.session, k.topic))
        .collect()
}

fn filter_replay() -> Result<String, String> {
    let table = campaign_scores();
    ensure(
        table.records.len() == 30,
        format!("{} records in fixture", table.records.len()),
    )?;
    let kappa = filter_sets(&table.records, Measure::Kappa, 0.4);
    let alpha = filter_sets(&table.records, Measure::Alpha, 0.1);
    ensure(
        kappa.dropped_count() == 17,
        format!("kappa drops {}", kappa.dropped_count()),
    )?;
    ensure(
        alpha.dropped_count() == 11,
        format!("alpha drops {}", alpha.dropped_count()),
    )?;
    ensure(
        alpha.kept().contains(&SetKey::new("2010", "166")),
        "2010/166 (alpha .100) dropped",
    )?;
    let expected_kappa_kept = [
        "2010/83", "2010/88", "2010/96", "2010/105", "2010/173", "2011/83", "2011/84", "2011/93",
        "2011/166", "2012/88", "2012/93", "2012/110", "2012/166",
    ];
    ensure(
        keys(&kappa.kept()) == expected_kappa_kept,
        format!("kappa kept {:?}", keys(&kappa.kept())),
    )?;

    let path = agreement_path();
    let (code, stdout, stderr) = relkit(&[
        "filter",
        "--agreement",
        path.to_str().unwrap(),
        "--kappa-min",
        "0.4",
        "--alpha-min",
        "0.1",
        "--format",
        "json",
    ]);
    ensure(code == 0, format!("cli exit {code}: {stderr}"))?;
    let report: FilterReport = serde_json::from_slice(&stdout).map_err(|e| e.to_string())?;
    let dropped = |m| report.outcome(m).map(|o| o.dropped_count());
    ensure(dropped(Measure::Kappa) == Some(17), "cli kappa drop count")?;
    ensure(dropped(Measure::Alpha) == Some(11), "cli alpha drop count")?;
    Ok("kappa ≥ 0.4 drops 17/30, alpha ≥ 0.1 drops 11/30 (library and cli)".into())
}

/// Published precision grid: `variant -> topic -> service -> value`, absent cells
/// left out.
fn campaign_precision() -> BTreeMap<String, BTreeMap<Id, BTreeMap<String, f64>>> {
    let mut grid: BTreeMap<String, BTreeMap<Id, BTreeMap<String, f64>>> = BTreeMap::new();
    for line in fixture("campaign_precision.tsv").lines().skip(1) {
        let fields: Vec<&str> = line.split('\t').collect();
        let row = grid
            .entry(fields[1].to_owned())
            .or_default()
            .entry(Id::from(fields[0]))
            .or_default();
        for (service, cell) in SERVICES.iter().zip(&fields[2..]) {
            if !cell.is_empty() {
                row.insert((*service).to_owned(), cell.parse().unwrap());
            }
        }
    }
    grid
}

fn empty_cell_pattern() -> Result<String, String> {
    let table = campaign_scores();
    let docs: Vec<String> = (1..=12).map(|d| format!("d{d:02}")).collect();
    let sets = table.records.iter().map(|r| {
        let judgments = (0..r.assessor_count).flat_map(|a| {
            docs.iter()
                .enumerate()
                .map(move |(d, doc)| (format!("a{a:02}"), doc.clone(), u32::from((a + d) % 3 == 0)))
        });
        AssessmentSet::from_judgments(r.session.clone(), r.topic.clone(), [0, 1], judgments)
            .unwrap()
    });
    let dataset = Dataset::from_sets(sets).map_err(|e| e.to_string())?;

    let mut catalog = RunCatalog::new();
    let run = |service: &str, topic: &Id, shift: usize| {
        let mut order = docs.clone();
        order.rotate_left(shift);
        RankedRun::from_docs(service, topic.clone(), order).unwrap()
    };
    for (s, service) in SERVICES.iter().enumerate().filter(|(_, s)| **s != "RAND") {
        catalog
            .add_shared(table.topics.iter().map(|t| run(service, t, s)))
            .map_err(|e| e.to_string())?;
    }
    for session in ["2011", "2012"] {
        catalog
            .add_scoped(session, table.topics.iter().map(|t| run("RAND", t, 7)))
            .map_err(|e| e.to_string())?;
    }

    let filters = FilterReport::from_table(
        &table,
        &[Measure::Kappa, Measure::Alpha],
        &ReliabilityThresholds::default(),
    );
    let eval = EvalReport::compute(&catalog, &dataset, Some(&filters), 10)
        .and_then(EvalReport::diff)
        .map_err(|e| e.to_string())?;

    let printed = campaign_precision();
    let mut checked = 0;
    for (variant, name) in [
        (Variant::Unfiltered, "unfiltered"),
        (Variant::KappaFiltered, "kappa-filtered"),
        (Variant::AlphaFiltered, "alpha-filtered"),
    ] {
        let report = eval.variant(variant).ok_or(format!("no {name} report"))?;
        for (topic, row) in &printed[name] {
            for service in SERVICES {
                let ours = report.cell(topic, service).is_some();
                let theirs = row.contains_key(service);
                ensure(
                    ours == theirs,
                    format!("{name} topic {topic} {service}: computed present={ours}, printed present={theirs}"),
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} cells match the printed presence pattern"
    ))
}

fn agreement_aggregation() -> Result<String, String> {
    let table = campaign_scores();
    let tol = 0.0015;
    let mut compared = 0;
    for line in fixture("campaign_averages.tsv").lines().skip(1) {
        let f: Vec<&str> = line.split('\t').collect();
        let averages = match f[0] {
            "topic" => table.topic_averages.iter().find(|a| a.key == f[1]),
            "session" => table.session_averages.iter().find(|a| a.key == f[1]),
            _ => Some(&table.overall),
        }
        .ok_or(format!("no averages for {}", f[1]))?;
        let n = averages.assessors.unwrap();
        ensure(
            display_decimal(n, 1).trim_start_matches('0') == f[2].trim_start_matches('0'),
            format!("{} {} avg n {n} vs printed {}", f[0], f[1], f[2]),
        )?;
        for (what, ours, printed) in [
            ("alpha", averages.alpha, f[3]),
            ("kappa", averages.kappa, f[4]),
        ] {
            let printed: f64 = printed.parse().unwrap();
            let ours = ours.unwrap();
            ensure(
                (ours - printed).abs() <= tol,
                format!(
                    "{} {} avg {what} {ours:.4} vs printed {printed}",
                    f[0], f[1]
                ),
            )?;
        }
        compared += 1;
    }
    Ok(format!(
        "{compared} average rows within ±{tol} (n exact at 1 decimal)"
    ))
}

fn correlations() -> Result<String, String> {
    let table = campaign_scores();
    let mut detail = Vec::new();
    for (scope, printed, tol) in [
        ("2010", 0.581, 0.005),
        (AVERAGE_SCOPE, 0.447, 0.02),
        ("2011", 0.406, 0.02),
        ("2012", 0.326, 0.02),
    ] {
        let r = table
            .correlation(scope)
            .and_then(|c| c.value.value())
            .ok_or(format!("no correlation for {scope}"))?;
        ensure(
            (r - printed).abs() <= tol,
            format!("{scope}: r = {r:.4}, printed {printed} ± {tol}"),
        )?;
        detail.push(format!("{scope} {r:.3}"));
    }
    Ok(detail.join(", "))
}

fn precision_means() -> Result<String, String> {
    let grid = campaign_precision();
    let column = |variant: &str, service: &str| -> BTreeMap<Id, f64> {
        grid[variant]
            .iter()
            .filter_map(|(t, row)| row.get(service).map(|v| (t.clone(), *v)))
            .collect()
    };
    let printed_means = [".55", ".46", ".55", ".53", ".63"];
    for (service, printed) in SERVICES.iter().zip(printed_means) {
        let mean =
            mean_over_topics(column("unfiltered", service).values().map(|v| Some(*v))).unwrap();
        ensure(
            display_decimal(mean, 2) == printed,
            format!(
                "{service} unfiltered mean {mean:.4} shows {} vs {printed}",
                display_decimal(mean, 2)
            ),
        )?;
    }

    let printed_rms = [0.03, 0.05, 0.06, 0.05, 0.12];
    let tol = 0.03;
    let mut kappa_rms = Vec::new();
    for (service, printed) in SERVICES.iter().zip(printed_rms) {
        let rms = rms_error(
            &column("unfiltered", service),
            &column("kappa-filtered", service),
        )
        .unwrap();
        ensure(
            (rms - printed).abs() <= tol,
            format!("{service} kappa rms {rms:.4} vs {printed} ± {tol}"),
        )?;
        kappa_rms.push(rms);
    }
    for (service, recomputed) in [("STR", 0.127), ("BRAD", 0.053), ("RAND", 0.061)] {
        let i = SERVICES.iter().position(|s| *s == service).unwrap();
        ensure(
            round_half_away(kappa_rms[i], 3) == recomputed,
            format!(
                "{service} kappa rms {:.4} expected {recomputed}",
                kappa_rms[i]
            ),
        )?;
    }
    let alpha_rms: Vec<String> = SERVICES
        .iter()
        .map(|s| {
            let v = rms_error(&column("unfiltered", s), &column("alpha-filtered", s)).unwrap();
            format!("{s} {v:.3}")
        })
        .collect();
    let kappa_shown: Vec<String> = SERVICES
        .iter()
        .zip(&kappa_rms)
        .map(|(s, v)| format!("{s} {v:.3}"))
        .collect();
    Ok(format!(
        "means .55/.46/.55/.53/.63; kappa rms [{}]; alpha rms, not asserted [{}]",
        kappa_shown.join(", "),
        alpha_rms.join(", ")
    ))
}

fn coefficient_oracles() -> Result<String, String> {
    let tol = 1e-9;
    let near = |got: f64, want: f64, what: &str| {
        ensure(
            (got - want).abs() <= tol,
            format!("{what}: {got} vs {want}"),
        )
    };
    let table = ContingencyTable2x2::new(0.4, 0.1, 0.1, 0.4, 20).map_err(|e| e.to_string())?;
    near(cohen_kappa_2x2(&table).unwrap(), 0.6, "cohen kappa")?;
    near(alpha_2x2(&table).unwrap(), 0.62, "alpha 2x2")?;

    // Relevant votes per document: 3, 0, 2, 1.
    let grid = [[1, 0, 1, 1], [1, 0, 1, 0], [1, 0, 0, 0]];
    let set = AssessmentSet::from_judgments(
        "s",
        "t",
        [0, 1],
        grid.iter().enumerate().flat_map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(move |(d, &l)| (format!("a{a}"), format!("d{d}"), l))
        }),
    )
    .map_err(|e| e.to_string())?;
    near(fleiss_kappa(&set).score.unwrap(), 1.0 / 3.0, "fleiss kappa")?;
    near(
        krippendorff_alpha(&set).unwrap(),
        7.0 / 18.0,
        "krippendorff alpha",
    )?;
    let d = decompose(&set).map_err(|r| format!("{r:?}"))?;
    near(d.observed, 1.0 / 3.0, "observed disagreement")?;
    near(d.expected, 6.0 / 11.0, "expected disagreement")?;
    Ok(format!(
        "cohen .6, alpha2x2 .62, fleiss 1/3, alpha 7/18, D_o 1/3, D_e 6/11 within {tol:e}"
    ))
}

fn property_suite() -> Result<String, String> {
    let cases = 512;
    let runner = || {
        TestRunner::new_with_rng(
            Config {
                cases,
                failure_persistence: None,
                ..Config::default()
            },
            TestRng::deterministic_rng(RngAlgorithm::ChaCha),
        )
    };
    let fail = |name: &str, e: &dyn std::fmt::Display| format!("{name}: {e}");
    runner()
        .run(&common::permuted_grid(), common::permutation_invariance)
        .map_err(|e| fail("permutation invariance", &e))?;
    runner()
        .run(&common::perfect_copies(), common::perfect_agreement)
        .map_err(|e| fail("perfect agreement", &e))?;
    runner()
        .run(
            &common::two_rater_grid(),
            common::alpha_reduces_to_closed_form,
        )
        .map_err(|e| fail("alpha closed form", &e))?;
    runner()
        .run(
            &common::two_rater_grid(),
            common::alpha_kappa_small_sample_identity,
        )
        .map_err(|e| fail("alpha/kappa identity", &e))?;
    runner()
        .run(
            &common::symmetric_table(),
            common::cohen_equals_fleiss_on_equal_marginals,
        )
        .map_err(|e| fail("equal marginals", &e))?;
    runner()
        .run(&common::unit_pair(), common::landis_koch_partition)
        .map_err(|e| fail("band partition", &e))?;
    runner()
        .run(&common::scored_records(), common::filter_monotone)
        .map_err(|e| fail("filter monotone", &e))?;
    runner()
        .run(&common::scored_records(), common::undefined_always_dropped)
        .map_err(|e| fail("undefined dropped", &e))?;
    Ok(format!("8 properties × {cases} cases"))
}

fn ensemble(error_rate: f64, seeds: std::ops::Range<u64>) -> (f64, f64) {
    let n = (seeds.end - seeds.start) as f64;
    let (mut kappa, mut alpha) = (0.0, 0.0);
    for seed in seeds {
        let config = SimulationConfig {
            assessors: 5,
            documents: 200,
            prevalence: 0.3,
            error_rate,
            missing_rate: 0.0,
            seed,
            sessions: 1,
            topics: 1,
        };
        let set = generate_set(&config, 0, 0).unwrap();
        kappa += fleiss_kappa(&set).score.unwrap();
        alpha += krippendorff_alpha(&set).unwrap();
    }
    (kappa / n, alpha / n)
}

fn monte_carlo() -> Result<String, String> {
    for seed in 0..100 {
        let config = SimulationConfig {
            assessors: 5,
            documents: 200,
            error_rate: 0.0,
            seed,
            ..SimulationConfig::default()
        };
        let set = generate_set(&config, 0, 0).unwrap();
        ensure(
            fleiss_kappa(&set).score.unwrap() == 1.0,
            format!("seed {seed}: kappa below 1 at ε = 0"),
        )?;
        ensure(
            krippendorff_alpha(&set).unwrap() == 1.0,
            format!("seed {seed}: alpha below 1 at ε = 0"),
        )?;
    }

    let tol = 0.05;
    let (kappa, alpha) = ensemble(0.5, 0..1000);
    ensure(
        kappa.abs() <= tol,
        format!("mean kappa {kappa:.4} at ε = 0.5"),
    )?;
    ensure(
        alpha.abs() <= tol,
        format!("mean alpha {alpha:.4} at ε = 0.5"),
    )?;

    let mut previous = (f64::INFINITY, f64::INFINITY);
    let mut sweep = Vec::new();
    for eps in [0.0, 0.1, 0.25, 0.5] {
        let (k, a) = ensemble(eps, 0..200);
        ensure(
            k <= previous.0 && a <= previous.1,
            format!("means rise at ε = {eps}: kappa {k:.4}, alpha {a:.4}"),
        )?;
        previous = (k, a);
        sweep.push(format!("{eps}: {k:.3}/{a:.3}"));
    }
    Ok(format!(
        "ε = 0 exact over 100 seeds; ε = 0.5 over 1000 seeds mean kappa {kappa:.4}, alpha {alpha:.4}; sweep kappa/alpha [{}]",
        sweep.join(", ")
    ))
}

fn determinism() -> Result<String, String> {
    let sim = [
        "simulate",
        "--seed",
        "42",
        "--sessions",
        "2",
        "--topics",
        "3",
        "--missing-rate",
        "0.02",
    ];
    let first = relkit(&sim);
    let second = relkit(&sim);
    ensure(first.0 == 0, format!("simulate failed: {}", first.2))?;
    ensure(
        first.1 == second.1,
        "simulate --seed 42 output differs between runs",
    )?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let judgments = dir.path().join("judgments.tsv");
    let runs = dir.path().join("runs.txt");
    let (j, r) = (judgments.to_str().unwrap(), runs.to_str().unwrap());
    let mut args = sim.to_vec();
    args.extend(["--out", j, "--runs-out", r]);
    let (code, _, err) = relkit(&args);
    ensure(code == 0, format!("simulate to files failed: {err}"))?;

    let mut sizes = Vec::new();
    for format in ["markdown", "json", "csv"] {
        let study = ["study", "--assessments", j, "--runs", r, "--format", format];
        let a = relkit(&study);
        let b = relkit(&study);
        ensure(a.0 == 0, format!("study ({format}) failed: {}", a.2))?;
        ensure(
            a.1 == b.1,
            format!("study ({format}) output differs between runs"),
        )?;
        sizes.push(format!("{format} {}B", a.1.len()));
    }
    Ok(format!(
        "simulate {}B identical; study identical ({})",
        first.1.len(),
        sizes.join(", ")
    ))
}

fn main() {
    let criteria: [(u32, &str, Check); 9] = [
        (1, "filter replay", filter_replay),
        (2, "empty-cell pattern", empty_cell_pattern),
        (3, "agreement aggregation", agreement_aggregation),
        (4, "alpha/kappa correlations", correlations),
        (5, "precision means and rms", precision_means),
        (6, "coefficient oracles", coefficient_oracles),
        (7, "property suite", property_suite),
        (8, "monte carlo calibration", monte_carlo),
        (9, "determinism", determinism),
    ];
    let mut failures = 0;
    for (n, name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {n} {name}: PASS ({detail})"),
            Err(why) => {
                failures += 1;
                println!("criterion {n} {name}: FAIL ({why})");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criterion/criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
