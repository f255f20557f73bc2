use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taglab::experiments::{
    census_word, entropy_rate, exp1_census, exp3_sensitivity, exp5_entropy, read_census_csv,
    resolution_deciles, write_census_csv, write_survival_csv, Exp1Config, StreamMode,
};
use taglab::{OutcomeKind, RunBudget, TagSystem, Word};

fn swap_system(t: &TagSystem) -> TagSystem {
    let a = t.appendants();
    let flip = |w: &Vec<u8>| w.iter().map(|&s| 1 - s).collect::<Vec<u8>>();
    TagSystem::new(t.v(), vec![flip(&a[1]), flip(&a[0])]).unwrap()
}

#[test]
fn entropy_is_invariant_under_relabeling() {
    let t = TagSystem::post();
    let swapped = swap_system(&t);
    let w = census_word(2, 300, 4, 0);
    let w_swapped = Word::from_symbols(w.as_slice().iter().map(|&s| 1 - s).collect());
    let budget = RunBudget::default();
    for order in 0..3 {
        let a = exp5_entropy::<f64>(&t, &w, budget, 20_000, order, StreamMode::Scanned).unwrap();
        let b = exp5_entropy::<f64>(
            &swapped,
            &w_swapped,
            budget,
            20_000,
            order,
            StreamMode::Scanned,
        )
        .unwrap();
        assert!((a.entropy_rate - b.entropy_rate).abs() < 1e-12);
    }
}

#[test]
fn fair_coin_entropy_near_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bits: Vec<u8> = (0..200_000).map(|_| rng.random_range(0..2)).collect();
    let r = entropy_rate::<f64>(&bits, 2, 1).unwrap();
    assert!((r.entropy_rate - 1.0).abs() < 0.01);
    assert!(r.entropy_rate <= 1.0);
}

#[test]
fn post_sensitivity_is_positive_and_repeatable() {
    let t = TagSystem::post();
    let base = census_word(2, 300, 1, 0);
    let budget = RunBudget::new(200_000, 15_000).unwrap();
    let a = exp3_sensitivity::<f64>(&t, &base, budget).unwrap();
    let b = exp3_sensitivity::<f64>(&t, &base, budget).unwrap();
    assert_eq!(a, b);
    assert!(a.score > 0.0, "score {}", a.score);
    assert_eq!(a.rows.len(), 300);
}

#[test]
fn post_census_regression() {
    let t = TagSystem::post();
    let cfg = Exp1Config {
        n_words: 200,
        word_length: 100,
        budget: RunBudget::new(100_000, 15_000).unwrap(),
        seed: 5,
    };
    let c = exp1_census(&t, "post", &cfg);
    let (first, last) = resolution_deciles(&c.records, cfg.budget.max_steps);
    assert_eq!(c.histogram.values().sum::<u64>(), 200);
    assert!(c
        .survival
        .windows(2)
        .all(|w| w[0].unresolved_count >= w[1].unresolved_count));
    assert!(first > last);
    // Frozen from the calibrating run of this exact configuration.
    let frozen = [
        (OutcomeKind::Halted, 40),
        (OutcomeKind::Periodic, 146),
        (OutcomeKind::LengthBoundExceeded, 0),
        (OutcomeKind::BudgetExhausted, 14),
    ];
    for (kind, count) in frozen {
        assert_eq!(c.histogram[&kind], count, "{kind}");
    }
    assert!((first - 0.805).abs() < 1e-12 && last == 0.0);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("census.csv");
    write_census_csv(&p, &c.records).unwrap();
    assert_eq!(read_census_csv(&p).unwrap(), c.records);
    let again = dir.path().join("census2.csv");
    write_census_csv(&again, &exp1_census(&t, "post", &cfg).records).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&again).unwrap());
    let s = dir.path().join("survival.csv");
    write_survival_csv(&s, &c.survival).unwrap();
    let text = std::fs::read_to_string(&s).unwrap();
    assert!(text.starts_with("step_threshold,unresolved_count\n0,200\n"));
}
