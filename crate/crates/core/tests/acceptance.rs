//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (run with `--nocapture` to see them).

mod common;

use std::time::Instant;

use airq_core::evalkit::{error_metrics, round2, sample_indices, score_kb, OrdinalSeries};
use airq_core::fahp::{
    compute_weights, consistency, ComparisonMatrix, FahpError, WeightOptions,
};
use airq_core::inference::{
    km_type_reduce, ConsequentCentroid, Engine, EngineConfig, FiringInterval, PollutantVector,
    PollutantWeights,
};
use airq_core::ingest::{self, load_csv_str, median, preprocess, ImputeScope, RawRecord};
use airq_core::it2::{Category, ParameterTable, Pollutant, Variable};
use airq_core::kgraph::{
    dl_membership, execute_query, materialize, parse_dl_query, parse_query,
    parse_rules as parse_kg_rules, parse_triples, Iri, MaterializeOptions, Term, Triple,
    TripleProvenance, DEMO_KB, DEMO_RULES, QUERY_2, QUERY_3,
};
use airq_core::rulebase::generate_rules;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TABLE7: [(&str, f64); 7] = [
    ("PM2.5", 0.3597),
    ("PM10", 0.2894),
    ("CO", 0.1505),
    ("O3", 0.1022),
    ("NO2", 0.0441),
    ("SO2", 0.0335),
    ("NH3", 0.0205),
];

#[test]
fn c1_weight_reproduction() {
    let start = Instant::now();
    let matrix = ComparisonMatrix::default_matrix();
    let (weights, _) = compute_weights(&matrix, &WeightOptions::default()).unwrap();

    let sum: f64 = weights.values().sum();
    assert!((sum - 1.0).abs() < 1e-9, "weights must sum to 1, got {sum}");

    for (name, reference) in TABLE7 {
        let got = weights.get(name).unwrap();
        assert!(
            (got - reference).abs() <= 0.03,
            "{name}: {got:.4} deviates from published {reference:.4} by more than 0.03"
        );
    }
    // ranking must match the published dominance order exactly
    let names: Vec<&str> = weights.entries().iter().map(|(n, _)| n.as_str()).collect();
    let mut by_weight: Vec<(&str, f64)> =
        weights.entries().iter().map(|(n, w)| (n.as_str(), *w)).collect();
    by_weight.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let ranked: Vec<&str> = by_weight.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, ranked, "dominance order violated");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE C1 PASS weight reproduction: max deviation {:.4}, sum {:.1e}, runtime {elapsed:?}",
        weights
            .entries()
            .iter()
            .zip(TABLE7)
            .map(|((_, w), (_, r))| (w - r).abs())
            .fold(0.0, f64::max),
        (sum - 1.0).abs()
    );
}

#[test]
fn c2_consistency_gate() {
    let start = Instant::now();
    let matrix = ComparisonMatrix::default_matrix();
    let base = consistency(&matrix).unwrap();
    assert!(base.cr < 0.10, "base matrix CR {} must be below 0.10", base.cr);

    // flip every strict upper-triangle judgment to its reciprocal; each flip
    // must degrade consistency, and every flip that crosses the threshold
    // must be rejected by the weight computation
    let n = matrix.order();
    let mut rejected = 0;
    let mut accepted_flips = Vec::new();
    let mut all_flips = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let flipped = matrix.flip_to_reciprocal(i, j).unwrap();
            let c = consistency(&flipped).unwrap();
            all_flips.push(((i, j), c.cr));
            let result = compute_weights(&flipped, &WeightOptions::default());
            if c.cr >= 0.10 {
                assert!(
                    matches!(result, Err(FahpError::Inconsistent { .. })),
                    "flip ({i},{j}) with CR {} must be rejected",
                    c.cr
                );
                rejected += 1;
            } else {
                accepted_flips.push(((i, j), c.cr));
            }
        }
    }
    assert!(
        rejected >= 19,
        "at least 19 of 21 single flips must cross the consistency threshold, got {rejected}"
    );

    // one seeded random flip drawn from the threshold-crossing ones
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let crossing: Vec<(usize, usize)> =
        all_flips.iter().filter(|(_, cr)| *cr >= 0.10).map(|(c, _)| *c).collect();
    let (i, j) = crossing[rng.gen_range(0..crossing.len())];
    let flipped = matrix.flip_to_reciprocal(i, j).unwrap();
    assert!(matches!(
        compute_weights(&flipped, &WeightOptions::default()),
        Err(FahpError::Inconsistent { .. })
    ));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE C2 PASS consistency gate: base CR {:.4}; {rejected}/21 flips rejected{}; runtime {elapsed:?}",
        base.cr,
        if accepted_flips.is_empty() {
            String::new()
        } else {
            format!(
                " (mild flips staying consistent: {:?})",
                accepted_flips.iter().map(|(c, cr)| format!("{c:?} CR={cr:.3}")).collect::<Vec<_>>()
            )
        }
    );
}

#[test]
fn c3_km_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    for case in 0..200 {
        let rules = common::random_system(&mut rng);
        let (ol, or) = common::km_oracle(&rules);
        let reduced = km_type_reduce(&rules).unwrap();
        assert!((reduced.aqi_l - ol).abs() < 1e-9, "case {case} left");
        assert!((reduced.aqi_r - or).abs() < 1e-9, "case {case} right");
    }

    // single-rule degenerate case collapses to the centroid interval exactly
    let single = [(FiringInterval { lo: 0.3, hi: 0.7 }, ConsequentCentroid { cl: 100.0, cr: 200.0 })];
    let reduced = km_type_reduce(&single).unwrap();
    assert_eq!((reduced.aqi_l, reduced.aqi_r, reduced.aqi), (100.0, 200.0, 150.0));

    // crisp firings collapse to the weighted average exactly (dyadic values)
    let crisp = [
        (FiringInterval { lo: 0.25, hi: 0.25 }, ConsequentCentroid { cl: 100.0, cr: 150.0 }),
        (FiringInterval { lo: 0.5, hi: 0.5 }, ConsequentCentroid { cl: 200.0, cr: 250.0 }),
        (FiringInterval { lo: 0.25, hi: 0.25 }, ConsequentCentroid { cl: 300.0, cr: 350.0 }),
    ];
    let reduced = km_type_reduce(&crisp).unwrap();
    assert_eq!(reduced.aqi_l, 200.0);
    assert_eq!(reduced.aqi_r, 250.0);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("ACCEPTANCE C3 PASS KM correctness: 200 random systems at 1e-9, degenerate closed forms exact, runtime {elapsed:?}");
}

#[test]
fn c4_membership_fidelity() {
    let table = ParameterTable::default_table();
    let mut checked = 0;
    for variable in Variable::ALL {
        for (term, set) in table.terms(variable) {
            let (lo, hi) = set.umf.support();
            for i in 0..10_001 {
                let x = lo + (hi - lo) * i as f64 / 10_000.0;
                let l = set.lmf.eval(x);
                let u = set.umf.eval(x);
                assert!(
                    l <= u + 1e-12,
                    "{variable}/{term}: LMF({x}) = {l} exceeds UMF({x}) = {u}"
                );
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 48);

    let good = table.get(Variable::Pollutant(Pollutant::Pm25), Category::Good).unwrap();
    let m = good.membership(22.5).unwrap();
    assert!((m.lo - 0.24).abs() < 1e-12, "lo {}", m.lo);
    assert!((m.hi - 0.5).abs() < 1e-12, "hi {}", m.hi);
    let m = good.membership(10.0).unwrap();
    assert!((m.lo - 0.8).abs() < 1e-12);
    assert!((m.hi - 1.0).abs() < 1e-12);

    println!("ACCEPTANCE C4 PASS membership fidelity: 48 sets contained on 10,001-point grids; spot values exact at 1e-12");
}

/// Path of the full station-day export, when the user has supplied it.
fn dataset_path() -> Option<std::path::PathBuf> {
    if let Ok(p) = std::env::var("CPCB_DATASET") {
        let p = std::path::PathBuf::from(p);
        if p.exists() {
            return Some(p);
        }
    }
    let candidates = ["data/station_day.csv", "../data/station_day.csv", "../../data/station_day.csv"];
    candidates.iter().map(std::path::PathBuf::from).find(|p| p.exists())
}

#[test]
fn c5_preprocessing() {
    // count check against the public station-day export, when present
    match dataset_path() {
        Some(path) => {
            let loaded = ingest::load_csv(&path).unwrap();
            let (_, stats) = preprocess(&loaded.records, ImputeScope::Global).unwrap();
            assert_eq!(stats.rows_dropped_missing_label, 21_010);
            assert_eq!(stats.rows_kept, 87_025);
            println!(
                "ACCEPTANCE C5 PASS preprocessing: dataset counts 21010 dropped / 87025 kept reproduced from {}",
                path.display()
            );
        }
        None => {
            println!("ACCEPTANCE C5 SKIP dataset counts: station-day export not present (set CPCB_DATASET or place data/station_day.csv); property suite still enforced");
        }
    }

    // drop-then-impute order: the unlabeled outlier must not move the median
    let mk = |pm25: Option<f64>, bucket: Option<Category>| {
        let mut conc = [Some(1.0); 7];
        conc[Pollutant::Pm25.index()] = pm25;
        RawRecord {
            station: "S".into(),
            date: "d".into(),
            concentrations: conc,
            aqi: None,
            bucket,
        }
    };
    let records = vec![
        mk(Some(10.0), Some(Category::Good)),
        mk(Some(9000.0), None),
        mk(Some(30.0), Some(Category::Good)),
        mk(None, Some(Category::Good)),
    ];
    let (clean, stats) = preprocess(&records, ImputeScope::Global).unwrap();
    assert_eq!(stats.rows_in, stats.rows_dropped_missing_label + stats.rows_kept);
    assert_eq!(clean[2].get(Pollutant::Pm25), 20.0, "median must ignore dropped rows");

    // median against the rank-counting oracle on random columns with gaps
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..100 {
        let n = rng.gen_range(1..30);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0..1000) as f64 / 4.0).collect();
        let mut work = values.clone();
        assert!((median(&mut work) - common::median_oracle(&values)).abs() < 1e-12);
    }

    // idempotence
    let (clean2, stats2) = preprocess(
        &clean
            .iter()
            .map(|c| RawRecord {
                station: c.station.clone(),
                date: c.date.clone(),
                concentrations: c.concentrations.map(Some),
                aqi: c.aqi,
                bucket: Some(c.bucket),
            })
            .collect::<Vec<_>>(),
        ImputeScope::Global,
    )
    .unwrap();
    assert_eq!(clean, clean2);
    assert_eq!(stats2.rows_dropped_missing_label, 0);

    println!("ACCEPTANCE C5 PASS preprocessing properties: drop-then-impute order, median oracle, idempotence");
}

#[test]
fn c6_semantic_reasoning() {
    let start = Instant::now();
    let rules = parse_kg_rules(DEMO_RULES).unwrap();
    let mut store = parse_triples(DEMO_KB).unwrap();
    materialize(&mut store, &rules, MaterializeOptions::default()).unwrap();

    // the severe classification rule fires on the PM10-severe observation
    let severe = Triple::new(
        Iri::aq("Observation7"),
        Iri::aq("hasAQICategory"),
        Term::Iri(Iri::aq("AQISevere")),
    )
    .unwrap();
    let prov = store
        .entries()
        .find(|(t, _)| t == &severe)
        .map(|(_, p)| p.clone())
        .expect("severe category must be inferred");
    assert!(matches!(prov, TripleProvenance::Inferred { .. }));

    // the consequence rule adds the whole printed action chain
    for (p, o) in [
        ("hasImpact", "PrematureMortalityRisk"),
        ("hasImpact", "BreathingDifficulty"),
        ("affectsVulnerableGroup", "AsthmaPatients"),
        ("affectsVulnerableGroup", "CardiacPatients"),
        ("hasRecommendedAction", "IndustrialShutdown"),
        ("hasRecommendedAction", "EmergencyAlertAction"),
        ("determinesActuator", "IndustrialEmissionController_Instance"),
        ("executedBy", "StateAuthority"),
        ("appliesPenalty", "IndustrialClosure"),
    ] {
        let t = Triple::new(Iri::aq("Observation7"), Iri::aq(p), Term::Iri(Iri::aq(o))).unwrap();
        assert!(store.contains(&t), "missing consequence {p} {o}");
    }

    // wind escalation fires at speed 1.5 but not at 2.5
    let escalation = Triple::new(
        Iri::aq("Observation7"),
        Iri::aq("hasEscalationEvent"),
        Term::Iri(Iri::aq("AQIEscalation_Instance")),
    )
    .unwrap();
    assert!(store.contains(&escalation));
    let mut calm = parse_triples(&DEMO_KB.replace("\"1.5\"^^float", "\"2.5\"^^float")).unwrap();
    materialize(&mut calm, &rules, MaterializeOptions::default()).unwrap();
    assert!(!calm.contains(&escalation));

    // query 2 returns exactly the two construction-ban rows, ordered
    let q2 = parse_query(QUERY_2).unwrap();
    let result = execute_query(&store, &q2);
    let rendered: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|row| row.iter().map(|t| t.to_string()).collect())
        .collect();
    assert_eq!(
        rendered,
        vec![
            vec![
                "aq:Observation3".to_string(),
                "aq:AP001".to_string(),
                "\"310.0\"^^float".to_string(),
                "aq:AQIVeryPoor".to_string()
            ],
            vec![
                "aq:Observation10".to_string(),
                "aq:BR006".to_string(),
                "\"367.0\"^^float".to_string(),
                "aq:AQIVeryPoor".to_string()
            ],
        ]
    );

    // the instance query returns exactly the moderate CH001 observation
    let q3 = parse_dl_query(QUERY_3).unwrap();
    assert_eq!(dl_membership(&store, &q3), vec![Iri::aq("Observation4")]);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("ACCEPTANCE C6 PASS semantic reasoning: severe chain, wind gate, query rows and instance query all reproduced; runtime {elapsed:?}");
}

#[test]
fn c7_metrics_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    for _ in 0..1000 {
        let n = rng.gen_range(1..50);
        let actual: Vec<Category> =
            (0..n).map(|_| Category::from_code(rng.gen_range(0..6)).unwrap()).collect();
        let predicted: Vec<Category> =
            (0..n).map(|_| Category::from_code(rng.gen_range(0..6)).unwrap()).collect();
        let series = OrdinalSeries::new(&actual, &predicted).unwrap();
        let (mae, rmse) = error_metrics(&series).unwrap();
        let direct_mae = actual
            .iter()
            .zip(&predicted)
            .map(|(a, p)| (a.code() as f64 - p.code() as f64).abs())
            .sum::<f64>()
            / n as f64;
        assert!((mae - direct_mae).abs() < 1e-12);
        assert!(rmse >= mae - 1e-12);
    }
    assert_eq!(round2(score_kb(254, 247).unwrap()), 100.97);
    println!("ACCEPTANCE C7 PASS metrics identities: 1000 random series match direct counting; RMSE >= MAE; score_kb(254, 247) = 100.97");
}

#[test]
fn c8_desk_scale_evaluation() {
    // The published end-to-end row (accuracy 77.23%, MAE 0.242, RMSE 0.525)
    // is not exactly reproducible: its 58-sample test set is unspecified.
    // Substitute gate: mean metrics over 20 seeded 58-row samples of the
    // preprocessed data must stay within soft thresholds.
    let (clean, source) = match dataset_path() {
        Some(path) => {
            let loaded = ingest::load_csv(&path).unwrap();
            let (clean, _) = preprocess(&loaded.records, ImputeScope::Global).unwrap();
            (clean, format!("{}", path.display()))
        }
        None => {
            let loaded = load_csv_str(ingest::DEMO_SAMPLE_CSV).unwrap();
            let (clean, _) = preprocess(&loaded.records, ImputeScope::Global).unwrap();
            (clean, "bundled 50-row sample".to_string())
        }
    };

    let table = ParameterTable::default_table();
    let matrix = ComparisonMatrix::default_matrix();
    let (weight_vector, _) = compute_weights(&matrix, &WeightOptions::default()).unwrap();
    let weights = PollutantWeights::from_weight_vector(&weight_vector).unwrap();
    let ranges = ingest::observed_ranges(&clean).unwrap();
    let rulebase = generate_rules(&ranges, &table).unwrap();
    let engine = Engine::new(&table, &rulebase, weights, EngineConfig::default()).unwrap();

    let predicted: Vec<Category> = clean
        .iter()
        .map(|r| engine.assess(&PollutantVector(r.concentrations)).unwrap().1)
        .collect();
    let actual: Vec<Category> = clean.iter().map(|r| r.bucket).collect();

    let mut mean_acc = 0.0;
    let mut mean_mae = 0.0;
    let mut mean_rmse = 0.0;
    const SAMPLES: usize = 20;
    const SAMPLE_SIZE: usize = 58;
    for seed in 0..SAMPLES as u64 {
        let idx = sample_indices(clean.len(), SAMPLE_SIZE, seed);
        let a: Vec<Category> = idx.iter().map(|&i| actual[i]).collect();
        let p: Vec<Category> = idx.iter().map(|&i| predicted[i]).collect();
        let series = OrdinalSeries::new(&a, &p).unwrap();
        let (mae, rmse) = error_metrics(&series).unwrap();
        mean_acc += series.category_accuracy().unwrap();
        mean_mae += mae;
        mean_rmse += rmse;
    }
    mean_acc /= SAMPLES as f64;
    mean_mae /= SAMPLES as f64;
    mean_rmse /= SAMPLES as f64;

    println!(
        "ACCEPTANCE C8 evaluation over {SAMPLES} seeded {SAMPLE_SIZE}-row samples of {source}: \
         mean accuracy {:.2}%, mean MAE {:.3}, mean RMSE {:.3} \
         (published reference row: accuracy 77.23%, MAE 0.242, RMSE 0.525; soft gate: accuracy >= 60%, MAE <= 0.6)",
        mean_acc * 100.0,
        mean_mae,
        mean_rmse
    );
    assert!(mean_mae <= 0.6, "mean MAE {mean_mae:.3} above the soft gate 0.6");
    assert!(mean_acc >= 0.60, "mean accuracy {:.2}% below the soft gate 60%", mean_acc * 100.0);
    println!("ACCEPTANCE C8 PASS desk-scale evaluation");
}
