//! Property checks shared by the property tests and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use relkit::agreement::{
    alpha_2x2, cohen_kappa_2x2, fleiss_kappa, interpret_kappa, jaccard_mean, krippendorff_alpha,
    percent_agreement, AgreementRecord, AssessmentSet, Category, ContingencyTable2x2, LandisKoch,
    Measure, Score, UndefinedReason,
};
use relkit::reliability::filter_sets;

pub type Grid = Vec<Vec<Option<Category>>>;

pub fn set_from_grid(
    grid: &Grid,
    assessor_names: &[usize],
    doc_names: &[usize],
) -> Option<AssessmentSet> {
    let judgments: Vec<(String, String, Category)> = grid
        .iter()
        .enumerate()
        .flat_map(|(a, row)| {
            row.iter().enumerate().filter_map(move |(d, cell)| {
                cell.map(|l| {
                    (
                        format!("a{:02}", assessor_names[a]),
                        format!("d{:02}", doc_names[d]),
                        l,
                    )
                })
            })
        })
        .collect();
    if judgments.is_empty() {
        return None;
    }
    AssessmentSet::from_judgments("s", "t", [0, 1], judgments).ok()
}

/// A grid with optional missing cells and a random assessor / document
/// relabelling.
pub fn permuted_grid() -> impl Strategy<Value = (Grid, Vec<usize>, Vec<usize>)> {
    (2usize..6, 1usize..12, 2u32..4).prop_flat_map(|(m, n, k)| {
        (
            prop::collection::vec(
                prop::collection::vec(prop::option::weighted(0.85, 0..k), n),
                m,
            ),
            Just((0..m).collect::<Vec<_>>()).prop_shuffle(),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        )
    })
}

fn same(a: Score, b: Score, what: &str) -> Result<(), TestCaseError> {
    prop_assert_eq!(a, b, "{} differs after relabelling", what);
    Ok(())
}

pub fn permutation_invariance(
    (grid, pa, pd): (Grid, Vec<usize>, Vec<usize>),
) -> Result<(), TestCaseError> {
    let m = grid.len();
    let n = grid[0].len();
    let identity_a: Vec<usize> = (0..m).collect();
    let identity_d: Vec<usize> = (0..n).collect();
    let (Some(x), Some(y)) = (
        set_from_grid(&grid, &identity_a, &identity_d),
        set_from_grid(&grid, &pa, &pd),
    ) else {
        return Ok(());
    };
    same(
        fleiss_kappa(&x).score,
        fleiss_kappa(&y).score,
        "fleiss kappa",
    )?;
    same(krippendorff_alpha(&x), krippendorff_alpha(&y), "alpha")?;
    same(
        percent_agreement(&x),
        percent_agreement(&y),
        "percent agreement",
    )?;
    same(jaccard_mean(&x), jaccard_mean(&y), "jaccard")?;
    Ok(())
}

/// Truth labels with both categories, copied by every assessor.
pub fn perfect_copies() -> impl Strategy<Value = (usize, Vec<Category>)> {
    (2usize..7, prop::collection::vec(0u32..2, 2..30))
        .prop_filter("both labels present", |(_, truth)| {
            truth.contains(&0) && truth.contains(&1)
        })
}

pub fn perfect_agreement((m, truth): (usize, Vec<Category>)) -> Result<(), TestCaseError> {
    let grid: Grid = vec![truth.iter().map(|&l| Some(l)).collect(); m];
    let names: Vec<usize> = (0..truth.len()).collect();
    let set = set_from_grid(&grid, &(0..m).collect::<Vec<_>>(), &names).unwrap();
    prop_assert_eq!(fleiss_kappa(&set).score, Score::Defined(1.0));
    prop_assert_eq!(krippendorff_alpha(&set), Score::Defined(1.0));
    prop_assert_eq!(percent_agreement(&set), Score::Defined(1.0));
    prop_assert_eq!(jaccard_mean(&set), Score::Defined(1.0));
    if m == 2 {
        let table = ContingencyTable2x2::from_set(&set).unwrap();
        prop_assert_eq!(cohen_kappa_2x2(&table), Score::Defined(1.0));
        prop_assert!((alpha_2x2(&table).unwrap() - 1.0).abs() < 1e-12);
    }
    Ok(())
}

/// Two complete binary rows.
pub fn two_rater_grid() -> impl Strategy<Value = Vec<(Category, Category)>> {
    prop::collection::vec((0u32..2, 0u32..2), 1..40)
}

fn two_rater_set(pairs: &[(Category, Category)]) -> AssessmentSet {
    let grid: Grid = vec![
        pairs.iter().map(|p| Some(p.0)).collect(),
        pairs.iter().map(|p| Some(p.1)).collect(),
    ];
    set_from_grid(&grid, &[0, 1], &(0..pairs.len()).collect::<Vec<_>>()).unwrap()
}

fn close(a: Score, b: Score, tol: f64) -> bool {
    match (a, b) {
        (Score::Defined(x), Score::Defined(y)) => (x - y).abs() <= tol,
        (Score::Undefined(_), Score::Undefined(_)) => true,
        _ => false,
    }
}

pub fn alpha_reduces_to_closed_form(pairs: Vec<(Category, Category)>) -> Result<(), TestCaseError> {
    let set = two_rater_set(&pairs);
    let table = ContingencyTable2x2::from_set(&set).unwrap();
    let general = krippendorff_alpha(&set);
    let closed = alpha_2x2(&table);
    prop_assert!(
        close(general, closed, 1e-9),
        "general {:?} vs closed form {:?}",
        general,
        closed
    );
    Ok(())
}

pub fn alpha_kappa_small_sample_identity(
    pairs: Vec<(Category, Category)>,
) -> Result<(), TestCaseError> {
    let set = two_rater_set(&pairs);
    let n = 2.0 * pairs.len() as f64;
    match (krippendorff_alpha(&set), fleiss_kappa(&set).score) {
        (Score::Defined(alpha), Score::Defined(kappa)) => {
            let expected = 1.0 - (1.0 - kappa) * (n - 1.0) / n;
            prop_assert!(
                (alpha - expected).abs() < 1e-9,
                "alpha {} vs {}",
                alpha,
                expected
            );
        }
        (a, k) => prop_assert!(
            !a.is_defined() && !k.is_defined(),
            "alpha {:?}, kappa {:?}",
            a,
            k
        ),
    }
    Ok(())
}

/// Equal marginals: off-diagonal counts equal.
pub fn symmetric_table() -> impl Strategy<Value = (u32, u32, u32)> {
    (0u32..20, 0u32..20, 0u32..20).prop_filter("non-empty", |(a, b, d)| a + 2 * b + d > 0)
}

pub fn cohen_equals_fleiss_on_equal_marginals(
    (a, b, d): (u32, u32, u32),
) -> Result<(), TestCaseError> {
    let mut pairs = Vec::new();
    pairs.extend(std::iter::repeat_n((1, 1), a as usize));
    pairs.extend(std::iter::repeat_n((1, 0), b as usize));
    pairs.extend(std::iter::repeat_n((0, 1), b as usize));
    pairs.extend(std::iter::repeat_n((0, 0), d as usize));
    let set = two_rater_set(&pairs);
    let table = ContingencyTable2x2::from_set(&set).unwrap();
    let cohen = cohen_kappa_2x2(&table);
    let fleiss = fleiss_kappa(&set).score;
    prop_assert!(
        close(cohen, fleiss, 1e-9),
        "cohen {:?} vs fleiss {:?}",
        cohen,
        fleiss
    );
    Ok(())
}

fn band_bounds(band: LandisKoch) -> (f64, f64) {
    match band {
        LandisKoch::Poor => (-1.0, 0.0),
        LandisKoch::Slight => (0.0, 0.2),
        LandisKoch::Fair => (0.2, 0.4),
        LandisKoch::Moderate => (0.4, 0.6),
        LandisKoch::Substantial => (0.6, 0.8),
        LandisKoch::AlmostPerfect => (0.8, 1.0),
    }
}

pub fn landis_koch_partition((x, y): (f64, f64)) -> Result<(), TestCaseError> {
    let bx = interpret_kappa(x).unwrap().landis_koch;
    let by = interpret_kappa(y).unwrap().landis_koch;
    let (lo, hi) = band_bounds(bx);
    let inside = x >= lo && (x < hi || (bx == LandisKoch::AlmostPerfect && x <= hi));
    prop_assert!(inside, "{} not inside {:?}", x, bx);
    if x <= y {
        prop_assert!(bx <= by);
    }
    Ok(())
}

pub fn unit_pair() -> impl Strategy<Value = (f64, f64)> {
    (-1.0f64..=1.0, -1.0f64..=1.0)
}

pub fn scored_records() -> impl Strategy<Value = (Vec<AgreementRecord>, f64, f64)> {
    let score = prop_oneof![
        4 => (-1.0f64..=1.0).prop_map(Score::Defined),
        1 => Just(Score::Undefined(UndefinedReason::NoVariation)),
        1 => Just(Score::Undefined(UndefinedReason::SingleAssessor)),
    ];
    (
        prop::collection::vec(score, 0..30),
        -1.0f64..=1.0,
        -1.0f64..=1.0,
    )
        .prop_map(|(scores, t1, t2)| {
            let records = scores
                .into_iter()
                .enumerate()
                .map(|(i, s)| {
                    AgreementRecord::prescored("s".into(), format!("{i}").into(), 3, s, s)
                })
                .collect();
            (records, t1.min(t2), t1.max(t2))
        })
}

pub fn filter_monotone(
    (records, low, high): (Vec<AgreementRecord>, f64, f64),
) -> Result<(), TestCaseError> {
    for measure in [Measure::Kappa, Measure::Alpha] {
        let lo = filter_sets(&records, measure, low);
        let hi = filter_sets(&records, measure, high);
        let dropped = |o: &relkit::reliability::FilterOutcome| -> BTreeSet<String> {
            o.dropped_sets.iter().map(|d| d.topic.to_string()).collect()
        };
        prop_assert!(dropped(&lo).is_subset(&dropped(&hi)));
        prop_assert_eq!(lo.kept_count() + lo.dropped_count(), records.len());
        let kept: BTreeSet<String> = lo.kept_sets.iter().map(|k| k.topic.to_string()).collect();
        prop_assert!(kept.is_disjoint(&dropped(&lo)));
    }
    Ok(())
}

pub fn undefined_always_dropped(
    (records, low, _): (Vec<AgreementRecord>, f64, f64),
) -> Result<(), TestCaseError> {
    let out = filter_sets(&records, Measure::Kappa, low.min(-1.0));
    for r in records.iter().filter(|r| !r.kappa.is_defined()) {
        prop_assert!(out.dropped_sets.iter().any(|d| d.topic == r.topic));
    }
    Ok(())
}
