//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Criterion 7 needs `FRAGFOLD_TOP500_MANIFEST` (and
//! optionally `FRAGFOLD_CACHE_DIR`) and is skipped otherwise.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use fragfold::energy::{evaluate, EnergyParams, EnergyTables, ENERGY_SCALE};
use fragfold::fragdb::{
    build_from_chains, class_tuple, load_corpus, save_database, AminoAcid, BuildParams,
    CentroidGeometry, DbFormat, TemplateId,
};
use fragfold::geometry::{bend_angle, rmsd, torsion_angle, Rot3, Vec3};
use fragfold::io::{read_emitted, Fetcher, Settings, SsAnnotation, SsKind, SsRange};
use fragfold::model::{build_model, ModelParams, PlacementState};
use fragfold::search::{enumerate, lns, Outcome, RunLog, SearchConfig, SearchMode, SearchStatus};
use fragfold::synthetic::{
    chain_to_pdb, planted_structure, random_case, random_sequence, random_tables, SyntheticCase,
};
use fragfold::validate::{
    check_chain, check_conformation, check_emitted, reference_placement, ValidationParams,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn fragfold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fragfold"))
        .args(args)
        .env_remove("FRAGFOLD_ENDPOINT")
        .output()
        .expect("run fragfold")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn seq_text(seq: &[AminoAcid]) -> String {
    seq.iter().map(|a| a.one_letter()).collect()
}

/// Writes a synthetic case as `<name>` plus its `.energy` sidecar.
fn write_case(dir: &Path, name: &str, case: &SyntheticCase) -> PathBuf {
    let db = dir.join(name);
    save_database(&case.db, &db, DbFormat::Text).unwrap();
    case.tables
        .save(&dir.join(format!("{name}.energy")))
        .unwrap();
    db
}

fn validator_suite() -> Verdict {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut models, mut no_solution, mut violations) = (0, 0, 0);
    let mut first_problem = None;
    for job in 0..200 {
        let n = rng.gen_range(8..=14);
        let case = random_case(&mut rng, n, 30);
        let db = write_case(dir.path(), &format!("job{job}.db"), &case);
        let out = dir.path().join(format!("job{job}.pdb"));
        let seq = seq_text(&case.sequence);
        let mut args = vec![
            "predict",
            "--db",
            p(&db),
            "--seq",
            &seq,
            "--out",
            p(&out),
            "--deterministic",
        ];
        let (seed, count) = (
            rng.gen::<u32>().to_string(),
            rng.gen_range(1..=5).to_string(),
        );
        if job % 2 == 0 {
            args.extend(["--mode", "enumerate", "--n", &count]);
        } else {
            args.extend(["--mode", "lns", "--seed", &seed, "--iters", "25"]);
        }
        let o = fragfold(&args);
        match o.status.code() {
            Some(0) => {}
            Some(1) => {
                no_solution += 1;
                continue;
            }
            c => {
                violations += 1;
                first_problem.get_or_insert(format!(
                    "job {job}: exit {c:?}: {}",
                    String::from_utf8_lossy(&o.stderr)
                ));
                continue;
            }
        }
        let text = std::fs::read_to_string(&out).unwrap();
        let tables = EnergyTables::load(&dir.path().join(format!("job{job}.db.energy"))).unwrap();
        for m in read_emitted(&text).unwrap() {
            models += 1;
            let report =
                check_emitted(&case.db, &tables, &m, &ValidationParams::default()).unwrap();
            if !report.is_valid() || report.max_link_rmsd > case.db.params().rmsd_thr {
                violations += 1;
                first_problem.get_or_insert(format!("job {job}: {}", report.issues[0]));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        violations == 0 && models > 0 && secs <= 300.0,
        format!(
            "200 jobs, {models} models validated, {no_solution} jobs without solution, {violations} violations, {secs:.1} s{}",
            first_problem.map(|s| format!("; first: {s}")).unwrap_or_default()
        ),
    )
}

fn helix_determinism() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let case = random_case(&mut rng, 8, 20);
    let start = Instant::now();
    let seq = fragfold::fragdb::parse_sequence("MEELLKKAEELLKRAEELLK").unwrap();
    let ss = SsAnnotation::new(vec![SsRange {
        start: 1,
        end: 20,
        kind: SsKind::Helix,
    }]);
    // a 20-residue helix spans about 28 Å, beyond the default 17.7 Å bound
    let params = ModelParams {
        diameter: Some(40.0),
        ..Default::default()
    };
    let model = build_model(&seq, &ss, &case.db, &case.tables, params).unwrap();
    let res = enumerate(&model, &SearchConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let Some(sol) = res.solutions.first() else {
        return Verdict::Fail(format!("no solution: {}", res.status.message()));
    };
    let dev = |ca: &[Vec3]| {
        let bend = ca
            .windows(3)
            .map(|w| (bend_angle(w[0], w[1], w[2]).unwrap() - 93.8).abs())
            .fold(0.0, f64::max);
        let tors = ca
            .windows(4)
            .map(|w| (torsion_angle(w[0], w[1], w[2], w[3]).unwrap() - 52.3).abs())
            .fold(0.0, f64::max);
        (bend, tors)
    };
    let (bend, tors) = dev(&sol.ca_real);
    let (ibend, itors) = dev(&sol.ca_angstrom());
    verdict(
        res.stats.backtracks == 0 && bend <= 0.2 && tors <= 0.2 && secs <= 1.0,
        format!(
            "backtracks {}, max bend dev {bend:.3}°, max torsion dev {tors:.3}° (centi-Å output: {ibend:.3}°, {itors:.3}°), {:.3} s",
            res.stats.backtracks, secs
        ),
    )
}

/// Every chain of per-window candidates that the validator accepts.
fn brute_force(case: &SyntheticCase) -> BTreeSet<Vec<TemplateId>> {
    let cands: Vec<Vec<TemplateId>> = case
        .sequence
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
            &case.sequence,
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

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut cases, mut mismatches, mut satisfiable, mut solutions) = (0, 0, 0, 0);
    while cases < 60 {
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
        let res = enumerate(
            &model,
            &SearchConfig {
                n_solutions: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let got: BTreeSet<Vec<TemplateId>> =
            res.solutions.iter().map(|c| c.chain.clone()).collect();
        let expected_status = if oracle.is_empty() {
            SearchStatus::Unsatisfiable
        } else {
            SearchStatus::Complete
        };
        if got != oracle || got.len() != res.solutions.len() || res.status != expected_status {
            mismatches += 1;
        }
        satisfiable += usize::from(!oracle.is_empty());
        solutions += oracle.len();
        cases += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatches == 0 && secs <= 120.0,
        format!("{cases} databases ({satisfiable} satisfiable, {solutions} solutions), {mismatches} mismatches, {secs:.1} s"),
    )
}

/// Dihedral from the textbook atan2 form, degrees.
fn dihedral(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    let (b1, b2, b3) = (b - a, c - b, d - c);
    let y = b2.norm() * b1.dot(b2.cross(b3));
    let x = b1.cross(b2).dot(b2.cross(b3));
    y.atan2(x).to_degrees()
}

/// Direct double loop over the published terms.
fn reference_energy(
    seq: &[AminoAcid],
    ca: &[Vec3],
    cen: &[Option<Vec3>],
    t: &EnergyTables,
    prm: &EnergyParams,
) -> i64 {
    use fragfold::energy::ContactType::{Backbone, Residue};
    let n = seq.len();
    let pair = |a, b, d: f64| {
        let e = t.contact.energy(a, b);
        let c = t.contact.radius(a) + t.contact.radius(b);
        if d >= prm.cutoff {
            0.0
        } else if d <= c {
            e
        } else {
            e * c * c / (d * d)
        }
    };
    let mut contact = 0.0;
    for i in 0..n {
        for j in i + 2..n {
            if i > 0 && j < n - 1 {
                let d = (cen[i].unwrap() - cen[j].unwrap()).norm();
                contact += pair(Residue(seq[i]), Residue(seq[j]), d);
            }
            contact += pair(Backbone, Backbone, (ca[i] - ca[j]).norm());
        }
    }
    let mut torsion = 0.0;
    let w = t.pmf.bin_deg();
    for i in 0..n - 3 {
        let table = t
            .pmf
            .class_tables()
            .get(&class_tuple(&seq[i..i + 4]))
            .map_or(t.pmf.pooled(), |v| v.as_slice());
        let mut a = dihedral(ca[i], ca[i + 1], ca[i + 2], ca[i + 3]);
        if a <= -180.0 {
            a += 360.0;
        }
        // bin k holds (−180 + k·w, −180 + (k+1)·w]
        let mut k = ((a + 180.0) / w).floor() as usize;
        if k > 0 && (-180.0 + k as f64 * w) == a {
            k -= 1;
        }
        torsion += table[k.min(table.len() - 1)];
    }
    (ENERGY_SCALE * (prm.contact_weight * contact + prm.torsion_weight * torsion)).round() as i64
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm() > 0.1 && v.norm() <= 1.0 {
            return v / v.norm();
        }
    }
}

fn random_conformation<R: Rng>(rng: &mut R) -> (Vec<AminoAcid>, Vec<Vec3>, Vec<Option<Vec3>>) {
    let n = rng.gen_range(4..40);
    let seq = random_sequence(rng, n);
    let mut ca = vec![Vec3::ZERO];
    while ca.len() < n {
        ca.push(*ca.last().unwrap() + random_unit(rng) * 3.8);
    }
    let cen = (0..n)
        .map(|i| (i > 0 && i + 1 < n).then(|| ca[i] + random_unit(rng) * rng.gen_range(0.0..3.0)))
        .collect();
    (seq, ca, cen)
}

fn energy_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let geometry = CentroidGeometry::default();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let tables = random_tables(&mut rng, &geometry);
        let prm = EnergyParams {
            contact_weight: rng.gen_range(0.5..2.0),
            torsion_weight: rng.gen_range(0.5..2.0),
            ..Default::default()
        };
        let (seq, ca, cen) = random_conformation(&mut rng);
        let got = evaluate(&seq, &ca, &cen, &tables, &prm).unwrap().total;
        if got != reference_energy(&seq, &ca, &cen, &tables, &prm) {
            mismatches += 1;
        }
    }
    let mut worst = 0;
    for _ in 0..100 {
        let tables = random_tables(&mut rng, &geometry);
        let prm = EnergyParams::default();
        let (seq, ca, cen) = random_conformation(&mut rng);
        let rot = Rot3::from_euler_zyz(
            rng.gen_range(0.0..360.0),
            rng.gen_range(0.0..180.0),
            rng.gen_range(0.0..360.0),
        );
        let shift = random_unit(&mut rng) * rng.gen_range(0.0..100.0);
        let moved: Vec<Vec3> = ca.iter().map(|&v| rot.apply(v) + shift).collect();
        let moved_cen: Vec<Option<Vec3>> = cen
            .iter()
            .map(|c| c.map(|v| rot.apply(v) + shift))
            .collect();
        let a = evaluate(&seq, &ca, &cen, &tables, &prm).unwrap().total;
        let b = evaluate(&seq, &moved, &moved_cen, &tables, &prm)
            .unwrap()
            .total;
        worst = worst.max((a - b).abs());
    }
    verdict(
        mismatches == 0 && worst <= 1,
        format!("1000 conformations, {mismatches} mismatches vs reference; rigid motions: max |ΔE| {worst}"),
    )
}

/// Satisfiable synthetic cases with at least 20 solutions.
fn rich_cases(seed: u64, count: usize) -> Vec<SyntheticCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let case = random_case(&mut rng, 12, 30);
        let model = build_model(
            &case.sequence,
            &SsAnnotation::default(),
            &case.db,
            &case.tables,
            ModelParams::default(),
        )
        .unwrap();
        let cfg = SearchConfig {
            n_solutions: 20,
            total_timeout: 5.0,
            ..Default::default()
        };
        if enumerate(&model, &cfg).unwrap().solutions.len() >= 20 {
            out.push(case);
        }
    }
    out
}

fn lns_behavior() -> Verdict {
    let cases = rich_cases(404, 5);
    let (mut strict_ok, mut rule_ok, mut best_ok, mut worsenings, mut invalid) = (0, 0, 0, 0, 0);
    for (k, case) in cases.iter().cycle().take(100).enumerate() {
        let model = build_model(
            &case.sequence,
            &SsAnnotation::default(),
            &case.db,
            &case.tables,
            ModelParams::default(),
        )
        .unwrap();
        let cfg = |p: f64| SearchConfig {
            mode: SearchMode::Lns,
            seed: k as u64,
            worsening_probability: p,
            max_iterations: Some(80),
            total_timeout: 30.0,
            ..Default::default()
        };
        // p = 0: accepted energies strictly decrease
        let run = lns(&model, &cfg(0.0)).unwrap();
        let log = RunLog::parse(&run.log.to_text(false)).unwrap();
        let accepted: Vec<i64> = log
            .entries
            .iter()
            .filter(|e| e.outcome != Outcome::Rejected)
            .map(|e| e.energy)
            .collect();
        if !accepted.is_empty() && accepted.windows(2).all(|w| w[1] < w[0]) {
            strict_ok += 1;
        }
        // p = 1/10: worsening bound and monotone best
        let run = lns(&model, &cfg(0.1)).unwrap();
        let log = RunLog::parse(&run.log.to_text(false)).unwrap();
        if log.check_acceptance(5, 6).is_none() {
            rule_ok += 1;
        }
        if log.best_trace().windows(2).all(|w| w[1] <= w[0]) {
            best_ok += 1;
        }
        worsenings += log
            .entries
            .iter()
            .filter(|e| e.outcome == Outcome::Worsening)
            .count();
        if let Some(best) = &run.best {
            if !check_conformation(&case.db, &case.tables, best, &ValidationParams::default())
                .unwrap()
                .is_valid()
            {
                invalid += 1;
            }
        }
    }
    verdict(
        strict_ok == 100 && rule_ok == 100 && best_ok == 100 && invalid == 0 && worsenings > 0,
        format!(
            "p=0 strictly decreasing {strict_ok}/100; p=0.1 bound respected {rule_ok}/100, best non-increasing {best_ok}/100, {worsenings} worsening moves, {invalid} invalid bests"
        ),
    )
}

fn planted_recovery() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let planted = planted_structure(&mut rng, 30);
    std::fs::write(dir.path().join("planted.pdb"), chain_to_pdb(&planted.chain)).unwrap();
    let manifest = dir.path().join("manifest.txt");
    std::fs::write(&manifest, "planted.pdb\n").unwrap();
    let db = dir.path().join("planted.db");
    let out = dir.path().join("pred.pdb");
    let start = Instant::now();
    let o = fragfold(&["build-db", "--corpus", p(&manifest), "--out", p(&db)]);
    if !o.status.success() {
        return Verdict::Fail(format!("build-db: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let seq = seq_text(&planted.sequence);
    let o = fragfold(&[
        "predict",
        "--db",
        p(&db),
        "--seq",
        &seq,
        "--out",
        p(&out),
        "--timeout",
        "10",
    ]);
    let secs = start.elapsed().as_secs_f64();
    if !o.status.success() {
        return Verdict::Fail(format!("predict: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let models = read_emitted(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let d = rmsd(&models[0].ca, &planted.ca).unwrap();
    verdict(
        d <= 1.0 && secs <= 10.0,
        format!("Cα RMSD {d:.3} Å to the planted structure, {secs:.2} s"),
    )
}

fn corpus_reproduction() -> Verdict {
    let Ok(manifest) = std::env::var("FRAGFOLD_TOP500_MANIFEST") else {
        return Verdict::Skip(
            "unavailable: set FRAGFOLD_TOP500_MANIFEST to a manifest of the top-500 corpus".into(),
        );
    };
    let mut settings = Settings::default();
    if let Err(e) = settings.apply_env(std::env::vars()) {
        return Verdict::Fail(e.to_string());
    }
    let fetcher = Fetcher::new(&settings.endpoint, settings.cache_dir.clone());
    let fetch = |id: &str| {
        fetcher
            .fetch(id)
            .map(|b| String::from_utf8_lossy(&b).into_owned())
    };
    let corpus = match load_corpus(Path::new(&manifest), Some(&fetch)) {
        Ok(c) => c,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let db = match build_from_chains(
        &corpus.chains,
        corpus.entries.clone(),
        &BuildParams::default(),
        corpus.report,
    ) {
        Ok(db) => db,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let r = db.report();
    let near = |got: usize, want: f64| (got as f64 - want).abs() <= 0.01 * want;
    verdict(
        near(r.residues, 107_138.0) && near(r.distinct_residue_tuples, 62_831.0) && near(r.class_tuples_covered, 5_830.0),
        format!(
            "residues {}, distinct residue 4-tuples {}, covered class 4-tuples {} (targets 107138 / 62831 / 5830 ± 1%)",
            r.residues, r.distinct_residue_tuples, r.class_tuples_covered
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let case = rich_cases(607, 1).remove(0);
    let db = write_case(dir.path(), "det.db", &case);
    let seq = seq_text(&case.sequence);
    let mut same = Vec::new();
    for (tag, extra) in [
        ("enumerate", vec!["--mode", "enumerate", "--n", "5"]),
        (
            "lns",
            vec![
                "--mode", "lns", "--seed", "7", "--iters", "60", "--runs", "3",
            ],
        ),
    ] {
        let run = |k: usize| {
            let out = dir.path().join(format!("{tag}{k}.pdb"));
            let log = dir.path().join(format!("{tag}{k}.log"));
            let mut args = vec![
                "predict",
                "--db",
                p(&db),
                "--seq",
                &seq,
                "--deterministic",
                "--out",
                p(&out),
                "--log",
                p(&log),
            ];
            args.extend(&extra);
            let o = fragfold(&args);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            (
                std::fs::read(&out).unwrap(),
                std::fs::read(&log).unwrap_or_default(),
            )
        };
        same.push((tag, run(1) == run(2)));
    }
    let mut manifest = String::new();
    for k in 0..3 {
        let planted = planted_structure(&mut rng, 20 + 5 * k);
        std::fs::write(
            dir.path().join(format!("s{k}.pdb")),
            chain_to_pdb(&planted.chain),
        )
        .unwrap();
        manifest.push_str(&format!("s{k}.pdb\n"));
    }
    let manifest_path = dir.path().join("manifest.txt");
    std::fs::write(&manifest_path, manifest).unwrap();
    let mut builds = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("build{k}.bin"));
        let o = fragfold(&["build-db", "--corpus", p(&manifest_path), "--out", p(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        builds.push((
            std::fs::read(&out).unwrap(),
            std::fs::read(dir.path().join(format!("build{k}.bin.energy"))).unwrap(),
        ));
    }
    same.push(("build-db", builds[0] == builds[1]));
    let detail: Vec<String> = same
        .iter()
        .map(|(t, s)| format!("{t} {}", if *s { "identical" } else { "differs" }))
        .collect();
    verdict(same.iter().all(|s| s.1), detail.join(", "))
}

fn quantization_bound() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (mut placements, mut worst) = (0, 0.0f64);
    while placements < 10_000 {
        let case = random_case(&mut rng, 8, 30);
        let db = &case.db;
        let len = rng.gen_range(4..80);
        let ids: Vec<TemplateId> = db.templates().iter().map(|t| t.id).collect();
        let mut chain = vec![*ids.choose(&mut rng).unwrap()];
        while chain.len() < len - 3 {
            match db.successors(*chain.last().unwrap()).choose(&mut rng) {
                Some(&next) => chain.push(next),
                None => break,
            }
        }
        let n = chain.len() + 3;
        let seq = random_sequence(&mut rng, n);
        let mut state = PlacementState::new(n, ModelParams::default().reortho_every);
        for &id in &chain {
            state.push(&seq, db, db.template(id).unwrap()).unwrap();
            placements += 1;
        }
        let reference = reference_placement(db, &seq, &chain).unwrap();
        for (i, r) in reference.ca.iter().enumerate() {
            for (k, v) in r.to_array().into_iter().enumerate() {
                worst = worst.max((state.ca()[i][k] as f64 - v * 100.0).abs());
            }
        }
    }
    verdict(
        worst <= 5.0,
        format!("{placements} placements, max deviation {worst:.2} centi-Å"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("validator suite", validator_suite),
        ("helix determinism", helix_determinism),
        ("oracle equivalence", oracle_equivalence),
        ("energy correctness", energy_correctness),
        ("LNS behavior", lns_behavior),
        ("planted recovery", planted_recovery),
        ("corpus reproduction", corpus_reproduction),
        ("determinism", determinism),
        ("quantization bound", quantization_bound),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let (tag, detail) = match run() {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("criterion {}: {tag} {name}: {detail}", k + 1);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
