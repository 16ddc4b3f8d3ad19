use std::collections::BTreeSet;

use fragfold::fragdb::{class_tuple, parse_sequence, AminoAcid, TemplateId};
use fragfold::geometry::{bend_angle, torsion_angle};
use fragfold::io::{SsAnnotation, SsKind, SsRange};
use fragfold::model::{build_model, ModelParams};
use fragfold::search::{enumerate, lns, Move, Outcome, SearchConfig, SearchMode, SearchStatus};
use fragfold::synthetic::random_case;
use fragfold::validate::{check_chain, check_conformation, ValidationParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_helix(n: usize) -> SsAnnotation {
    SsAnnotation::new(vec![SsRange {
        start: 1,
        end: n,
        kind: SsKind::Helix,
    }])
}

#[test]
fn helix_needs_no_backtracking() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let case = random_case(&mut rng, 8, 20);
    let seq = parse_sequence("MEELLKKAEELLKRAEELLK").unwrap();
    let params = ModelParams {
        diameter: Some(40.0),
        ..Default::default()
    };
    let model = build_model(&seq, &all_helix(20), &case.db, &case.tables, params).unwrap();
    let res = enumerate(&model, &SearchConfig::default()).unwrap();
    assert_eq!(res.status, SearchStatus::LimitReached);
    assert_eq!(res.stats.backtracks, 0);
    assert_eq!(res.stats.failures, 0);
    // angles on the real shadow; the centi-Å rounding alone moves them by up to ~0.3°
    let ca = res.solutions[0].ca_real.clone();
    for w in ca.windows(3) {
        assert!((bend_angle(w[0], w[1], w[2]).unwrap() - 93.8).abs() < 0.2);
    }
    for w in ca.windows(4) {
        assert!((torsion_angle(w[0], w[1], w[2], w[3]).unwrap() - 52.3).abs() < 0.2);
    }
}

/// Every chain of per-window candidates that the independent validator
/// accepts.
fn brute_force(case: &fragfold::synthetic::SyntheticCase) -> BTreeSet<Vec<TemplateId>> {
    let seq = &case.sequence;
    let cands: Vec<Vec<TemplateId>> = seq
        .windows(4)
        .map(|w| {
            let g = class_tuple(w);
            case.db
                .templates()
                .iter()
                .filter(|t| t.classes == g)
                .map(|t| t.id)
                .collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; cands.len()];
    'outer: loop {
        let chain: Vec<TemplateId> = idx.iter().zip(&cands).map(|(&i, c)| c[i]).collect();
        let (report, _) = check_chain(
            &case.db,
            &case.tables,
            seq,
            &chain,
            &ValidationParams::default(),
        )
        .unwrap();
        if report.is_valid() {
            out.insert(chain);
        }
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < cands[k].len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    out
}

#[test]
fn enumerate_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut nonempty = 0;
    for _ in 0..40 {
        let n = rng.gen_range(6..=9);
        let case = random_case(&mut rng, n, 30);
        let oracle = brute_force(&case);
        let model = build_model(
            &case.sequence,
            &SsAnnotation::default(),
            &case.db,
            &case.tables,
            ModelParams::default(),
        )
        .unwrap();
        let cfg = SearchConfig {
            n_solutions: 0,
            ..Default::default()
        };
        let res = enumerate(&model, &cfg).unwrap();
        let got: Vec<Vec<TemplateId>> = res.solutions.iter().map(|c| c.chain.clone()).collect();
        let got_set: BTreeSet<Vec<TemplateId>> = got.iter().cloned().collect();
        assert_eq!(got.len(), got_set.len(), "duplicate solutions");
        assert_eq!(got_set, oracle);
        for c in &res.solutions {
            let r = check_conformation(&case.db, &case.tables, c, &ValidationParams::default())
                .unwrap();
            assert!(r.is_valid(), "{:?}", r.issues);
        }
        if oracle.is_empty() {
            assert_eq!(res.status, SearchStatus::Unsatisfiable);
        } else {
            nonempty += 1;
            assert_eq!(res.status, SearchStatus::Complete);
        }
    }
    assert!(nonempty >= 10, "only {nonempty} satisfiable cases");
}

#[test]
fn empty_domain_is_unsatisfiable() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let case = random_case(&mut rng, 7, 20);
    // a sequence whose first window has a class tuple the database lacks
    let seq: Vec<AminoAcid> = loop {
        let s = fragfold::synthetic::random_sequence(&mut rng, 7);
        if case.db.templates_for(&class_tuple(&s[0..4])).is_empty() {
            break s;
        }
    };
    let model = build_model(
        &seq,
        &SsAnnotation::default(),
        &case.db,
        &case.tables,
        ModelParams::default(),
    )
    .unwrap();
    assert!(model.is_unsatisfiable());
    let res = enumerate(&model, &SearchConfig::default()).unwrap();
    assert_eq!(res.status, SearchStatus::Unsatisfiable);
    assert_eq!(res.stats.nodes, 0);
    let res = lns(
        &model,
        &SearchConfig {
            mode: SearchMode::Lns,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(res.status, SearchStatus::Unsatisfiable);
    assert!(res.best.is_none());
}

/// A satisfiable synthetic case with many solutions.
fn rich_case(seed: u64, n: usize) -> (fragfold::synthetic::SyntheticCase, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let case = random_case(&mut rng, n, 30);
        let model = build_model(
            &case.sequence,
            &SsAnnotation::default(),
            &case.db,
            &case.tables,
            ModelParams::default(),
        )
        .unwrap();
        let cfg = SearchConfig {
            n_solutions: 0,
            total_timeout: 5.0,
            ..Default::default()
        };
        let count = enumerate(&model, &cfg).unwrap().solutions.len();
        if count >= 20 {
            return (case, count);
        }
    }
}

fn lns_config(seed: u64, p: f64, iters: u64) -> SearchConfig {
    SearchConfig {
        mode: SearchMode::Lns,
        seed,
        worsening_probability: p,
        max_iterations: Some(iters),
        total_timeout: 30.0,
        ..Default::default()
    }
}

#[test]
fn lns_without_worsening_strictly_improves() {
    let (case, _) = rich_case(23, 12);
    let model = build_model(
        &case.sequence,
        &SsAnnotation::default(),
        &case.db,
        &case.tables,
        ModelParams::default(),
    )
    .unwrap();
    for seed in 0..20 {
        let res = lns(&model, &lns_config(seed, 0.0, 60)).unwrap();
        let accepted: Vec<i64> = res
            .log
            .entries
            .iter()
            .filter(|e| e.outcome != Outcome::Rejected)
            .map(|e| e.energy)
            .collect();
        assert!(accepted.windows(2).all(|w| w[1] < w[0]), "{accepted:?}");
        assert!(res
            .log
            .entries
            .iter()
            .all(|e| e.outcome != Outcome::Worsening));
        assert_eq!(
            res.best.as_ref().unwrap().energy.total,
            *accepted.last().unwrap()
        );
    }
}

#[test]
fn lns_log_obeys_acceptance_rule() {
    let (case, _) = rich_case(29, 12);
    let model = build_model(
        &case.sequence,
        &SsAnnotation::default(),
        &case.db,
        &case.tables,
        ModelParams::default(),
    )
    .unwrap();
    let mut worsening = 0;
    for seed in 0..20 {
        let res = lns(&model, &lns_config(seed, 0.1, 80)).unwrap();
        assert_eq!(res.log.check_acceptance(5, 6), None);
        let trace = res.log.best_trace();
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(
            res.best.as_ref().unwrap().energy.total,
            *trace.last().unwrap()
        );
        worsening += res.stats.worsening;
        let v = check_conformation(
            &case.db,
            &case.tables,
            res.best.as_ref().unwrap(),
            &ValidationParams::default(),
        )
        .unwrap();
        assert!(v.is_valid());
    }
    assert!(worsening > 0);
}

#[test]
fn lns_is_reproducible() {
    let (case, _) = rich_case(31, 10);
    let model = build_model(
        &case.sequence,
        &SsAnnotation::default(),
        &case.db,
        &case.tables,
        ModelParams::default(),
    )
    .unwrap();
    let a = lns(&model, &lns_config(7, 0.1, 50)).unwrap();
    let b = lns(&model, &lns_config(7, 0.1, 50)).unwrap();
    assert_eq!(a.log.to_text(false), b.log.to_text(false));
    assert_eq!(a.best.unwrap().chain, b.best.unwrap().chain);
}

#[test]
fn lns_tiny_timeout_reports_no_first_solution() {
    let (case, _) = rich_case(37, 10);
    let model = build_model(
        &case.sequence,
        &SsAnnotation::default(),
        &case.db,
        &case.tables,
        ModelParams::default(),
    )
    .unwrap();
    let cfg = SearchConfig {
        total_timeout: 1e-9,
        ..lns_config(1, 0.1, 10)
    };
    let res = lns(&model, &cfg).unwrap();
    assert_eq!(res.status, SearchStatus::NoInitialSolution);
    assert_eq!(
        res.status.message(),
        "insufficient time for the first solution"
    );
}

#[test]
fn lns_reaches_enumerated_optimum() {
    let (case, _) = rich_case(41, 10);
    let model = build_model(
        &case.sequence,
        &SsAnnotation::default(),
        &case.db,
        &case.tables,
        ModelParams::default(),
    )
    .unwrap();
    let all = enumerate(
        &model,
        &SearchConfig {
            n_solutions: 0,
            ..Default::default()
        },
    )
    .unwrap();
    let optimum = all.solutions.iter().map(|c| c.energy.total).min().unwrap();
    let hits = (0..10)
        .filter(|&seed| {
            let res = lns(&model, &lns_config(seed, 0.1, 300)).unwrap();
            res.best.unwrap().energy.total == optimum
        })
        .count();
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn crankshaft_relaxes_only_its_ranges() {
    let m = Move::crankshaft((1, 3), (6, 8), 12).unwrap();
    let last: Vec<TemplateId> = (1..=12).collect();
    let doms: Vec<Vec<TemplateId>> = (1..=12).map(|k| vec![k, 100 + k]).collect();
    let relaxed = m.relaxed_domains(&last, &doms, &[false; 12]);
    let free: Vec<usize> = (0..12)
        .filter(|&k| relaxed[k].len() > 1)
        .map(|k| k + 1)
        .collect();
    assert_eq!(free, vec![2, 3, 7, 8]);
}
