//! Property-based checks of the invariants that hold for every input.

use std::path::Path;

use gasket::cli::config::{
    parse_config, RuleSpec, RunConfig, RunSection, SequenceSource, WeightSpec,
};
use gasket::geometry::cell_count;
use gasket::measures::{cylinder_reports, fraction_text, verify_decomposition};
use gasket::numerics::{int, parse_rational, rat, schur_complement, ExactRational, RationalMatrix};
use gasket::renorm::corner_energy;
use gasket::singularity::{affinity_upper_bound, gap_bound};
use gasket::words::{check_star_event, sample_path, LevelSequence, SequenceTail};
use gasket::{BoundaryVector, LabelRule, Letter, LevelSet, WeightSystem, Word};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = ExactRational> {
    (-60i64..=60, 1i64..=24).prop_map(|(n, d)| rat(n, d))
}

fn boundary() -> impl Strategy<Value = BoundaryVector> {
    [rational(), rational(), rational()].prop_map(BoundaryVector::new)
}

/// Constant or periodic rules over levels 2 to 4.
fn rule() -> impl Strategy<Value = LabelRule> {
    prop_oneof![
        (2u32..=4).prop_map(|nu| LabelRule::constant(nu).unwrap()),
        prop::collection::vec(2u32..=4, 1..=4).prop_map(|t| LabelRule::periodic(t).unwrap()),
    ]
}

/// A weight system on the rule's levels built from positive integer weights.
fn weights_for(rule: &LabelRule, raw: &[u32]) -> WeightSystem {
    let rows = rule.levels().iter().map(|nu| {
        let row = &raw[..cell_count(nu)];
        let total: u32 = row.iter().sum();
        (
            nu,
            row.iter().map(|&w| rat(w as i64, total as i64)).collect(),
        )
    });
    WeightSystem::from_levels(rows).unwrap()
}

fn raw_weights() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..=9, 10)
}

/// Weighted graph Laplacian on `n` vertices with positive rational conductances.
fn laplacian(n: usize, conductances: &[ExactRational]) -> RationalMatrix {
    let mut rows = vec![vec![int(0); n]; n];
    let mut c = conductances.iter().cycle();
    for i in 0..n {
        for j in i + 1..n {
            let w = c.next().unwrap().clone();
            rows[i][j] -= &w;
            rows[j][i] -= &w;
            rows[i][i] += &w;
            rows[j][j] += &w;
        }
    }
    RationalMatrix::from_rows(rows).unwrap()
}

proptest! {
    #[test]
    fn schur_complement_is_a_tower(
        n in 3usize..=6,
        cond in prop::collection::vec((1i64..=12, 1i64..=6).prop_map(|(a, b)| rat(a, b)), 15),
        cut in any::<prop::sample::Index>(),
        cut2 in any::<prop::sample::Index>(),
    ) {
        let m = laplacian(n, &cond);
        let outer = 2 + cut.index(n - 1);
        let inner = 1 + cut2.index(outer - 1);
        let outer_idx: Vec<usize> = (0..outer).collect();
        let inner_idx: Vec<usize> = (0..inner).collect();
        let step = schur_complement(&m, &outer_idx).unwrap();
        let two_step = if inner == outer { step.clone() } else { schur_complement(&step, &inner_idx).unwrap() };
        let direct = schur_complement(&m, &inner_idx).unwrap();
        prop_assert_eq!(&two_step, &direct);
        prop_assert!(step.is_symmetric());
        for i in 0..step.rows() {
            let row_sum: ExactRational = step.row(i).iter().sum();
            prop_assert_eq!(row_sum, int(0));
        }
    }

    #[test]
    fn rational_text_round_trips(x in rational(), y in rational()) {
        let z = &x * &y - &y;
        prop_assert_eq!(parse_rational(&fraction_text(&z)).unwrap(), z.clone());
        prop_assert_eq!(parse_rational(&z.to_string()).unwrap(), z);
    }

    #[test]
    fn word_text_round_trips(raw in prop::collection::vec((2u32..=6, any::<prop::sample::Index>()), 0..8)) {
        let letters: Vec<Letter> = raw
            .iter()
            .map(|(nu, i)| Letter::new(1 + i.index(cell_count(*nu)), *nu).unwrap())
            .collect();
        let w = Word::from_letters(letters);
        prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
    }

    #[test]
    fn decomposition_is_exact(x in boundary(), nu in 2u32..=4, seed in any::<u64>(), len in 0usize..=2, m in 1usize..=2) {
        let rule = LabelRule::constant(nu).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let xi = sample_path(&rule, &q, len, seed).unwrap();
        prop_assert!(verify_decomposition(&rule, &x, &xi, m).unwrap());
    }

    #[test]
    fn measures_have_the_right_mass(rule in rule(), raw in raw_weights(), x in boundary(), m in 0usize..=3) {
        let q = weights_for(&rule, &raw);
        let rows = cylinder_reports(&rule, &q, &x, m, 1_000_000).unwrap();
        let mass_q: ExactRational = rows.iter().map(|r| &r.lambda_q).sum();
        let mass_x: ExactRational = rows.iter().map(|r| &r.lambda_energy).sum();
        prop_assert_eq!(mass_q, int(1));
        prop_assert_eq!(mass_x, int(2) * corner_energy(x.values()));
    }

    #[test]
    fn enumeration_is_complete_and_admissible(terms in prop::collection::vec(2u32..=4, 1..=3), depth in 0usize..=4) {
        let rule = LabelRule::periodic(terms.clone()).unwrap();
        let words: Vec<Word> = rule.enumerate(depth).collect::<Result<_, _>>().unwrap();
        let expected: usize = (0..depth).map(|n| cell_count(terms[n % terms.len()])).product();
        prop_assert_eq!(words.len(), expected);
        prop_assert!(words.windows(2).all(|p| p[0] < p[1]));
        for w in &words {
            prop_assert_eq!(w.len(), depth);
            prop_assert!(rule.is_admissible(w));
        }
    }

    #[test]
    fn sampled_paths_are_admissible(rule in rule(), raw in raw_weights(), depth in 0usize..=30, seed in any::<u64>()) {
        let q = weights_for(&rule, &raw);
        let path = sample_path(&rule, &q, depth, seed).unwrap();
        prop_assert_eq!(path.len(), depth);
        prop_assert!(rule.is_admissible(&path));
    }

    #[test]
    fn constant_rules_always_see_the_star_event(
        nu in 2u32..=5,
        seed in any::<u64>(),
        k in 0usize..=6,
        l0 in 1usize..=3,
        l1 in 1usize..=3,
        l2 in 1usize..=3,
    ) {
        let rule = LabelRule::constant(nu).unwrap();
        let q = WeightSystem::uniform(rule.levels());
        let prefix = sample_path(&rule, &q, 6, seed).unwrap();
        prop_assert!(check_star_event(&rule, &prefix, k, l0, l1, l2).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn log_ratio_gap_bound(s in 1e-6f64..1e3, t in 1e-6f64..1e3, a in 1e-4f64..8.0) {
        let g = gap_bound(s, t, a).unwrap();
        prop_assert!(g.holds, "s = {s}, t = {t}, a = {a}: {g:?}");
        if (t / s).ln().abs() < a * 0.999 {
            prop_assert!(!g.applies);
        }
    }

    #[test]
    fn log_ratio_gap_bound_is_sharp(a in 1e-3f64..5.0) {
        let t = a.exp();
        let g = gap_bound(1.0, t, a).unwrap();
        prop_assert!(g.applies);
        prop_assert!(((t - 1.0) - g.bound).abs() <= 1e-12 * t);
    }

    #[test]
    fn affinity_bound_on_the_simplex(
        raw in prop::collection::vec((0u32..=1000, 0u32..=1000), 2..=10),
    ) {
        let (ra, rb): (Vec<f64>, Vec<f64>) = raw.iter().map(|&(a, b)| (a as f64 + 1e-3, b as f64 + 1e-3)).unzip();
        let (sa, sb) = (ra.iter().sum::<f64>(), rb.iter().sum::<f64>());
        let a: Vec<f64> = ra.iter().map(|v| v / sa).collect();
        let b: Vec<f64> = rb.iter().map(|v| v / sb).collect();
        let bound = affinity_upper_bound(&a, &b).unwrap();
        prop_assert!(bound.holds, "{bound:?}");
        prop_assert!(bound.lhs <= 1.0 + 1e-12);
    }
}

fn rho() -> impl Strategy<Value = Vec<(u32, ExactRational)>> {
    (1i64..=9).prop_map(|p| vec![(2, rat(p, 10)), (3, rat(10 - p, 10))])
}

fn config() -> impl Strategy<Value = RunConfig> {
    let rule = prop_oneof![
        (2u32..=3).prop_map(RuleSpec::Constant),
        (
            prop::collection::vec(2u32..=3, 1..=5),
            prop_oneof![
                Just(SequenceTail::Repeat),
                (2u32..=3).prop_map(SequenceTail::Constant)
            ]
        )
            .prop_map(|(t, tail)| RuleSpec::Sequence {
                source: SequenceSource::Inline(t),
                tail
            }),
        (rho(), any::<u64>()).prop_map(|(rho, label_seed)| RuleSpec::Random { rho, label_seed }),
    ];
    let q = prop_oneof![
        Just(WeightSpec::Uniform),
        prop::collection::vec(1i64..=9, 9).prop_map(|raw| {
            let row = |cells: &[i64]| {
                let total: i64 = cells.iter().sum();
                cells.iter().map(|&c| rat(c, total)).collect::<Vec<_>>()
            };
            WeightSpec::Rows(
                [(2, row(&raw[..3])), (3, row(&raw[3..]))]
                    .into_iter()
                    .collect(),
            )
        }),
    ];
    let run = prop::collection::btree_map(
        prop::sample::select(vec![
            "seed", "depth", "paths", "blocks", "trials", "l0", "l1", "k",
        ]),
        0u64..=1_000_000,
        0..=4,
    )
    .prop_map(|m| RunSection {
        values: m.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    });
    (rule, q, prop::option::of(boundary()), run, 12u32..=14).prop_map(
        |(rule, q, boundary, run, max_level)| RunConfig {
            levels: vec![2, 3],
            max_level,
            rule,
            q,
            boundary,
            run,
        },
    )
}

proptest! {
    #[test]
    fn config_round_trips(cfg in config()) {
        let text = cfg.serialize();
        let parsed = parse_config(&text, Path::new(".")).unwrap();
        prop_assert_eq!(parsed, cfg);
    }
}

#[test]
fn first_letter_frequencies_match_weights() {
    let rule = LabelRule::sequence(
        LevelSet::new([3]).unwrap(),
        LevelSequence::repeating(vec![3]),
    )
    .unwrap();
    let q = weights_for(&rule, &[1, 2, 3, 4, 5, 6, 1, 1, 1, 1]);
    let trials = 30_000u64;
    let mut counts = [0u64; 6];
    for seed in 0..trials {
        let w = sample_path(&rule, &q, 1, seed).unwrap();
        counts[w.letters()[0].cell() - 1] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        let p = (i as f64 + 1.0) / 21.0;
        let mean = p * trials as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (c as f64 - mean).abs() <= 3.0 * sigma,
            "cell {}: {c} vs {mean}",
            i + 1
        );
    }
}
