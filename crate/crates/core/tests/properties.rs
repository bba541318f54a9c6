use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng as _;

use polaris::estimation::{alpha, alpha_table};
use polaris::io::{dataset_from_csv, dataset_to_csv, network_from_json, network_to_json};
use polaris::model::{row_assignment, row_index};
use polaris::rng::substream;
use polaris::scoring::{local_score, network_score, ScoreKind};
use polaris::search::{
    build_cache, exact_search, mask_of, parents_of, CacheEntry, LocalScoreCache, LearnOptions,
};
use polaris::synthesis::{generate_network, random_dag, sample, SynthesisConfig};
use polaris::{learn, Dataset, MpnType};

const TYPES: [MpnType; 3] = [MpnType::Cmpn, MpnType::Dmpn, MpnType::Xmpn];

fn is_acyclic(masks: &[u64]) -> bool {
    let n = masks.len();
    let mut placed = 0u64;
    for _ in 0..n {
        let Some(v) = (0..n).find(|&v| placed >> v & 1 == 0 && masks[v] & !placed == 0) else {
            return false;
        };
        placed |= 1 << v;
    }
    true
}

/// Best total over every combination of cache entries that forms a DAG.
fn brute_force(cache: &LocalScoreCache) -> f64 {
    fn go(cache: &LocalScoreCache, v: usize, masks: &mut Vec<u64>, acc: f64, best: &mut f64) {
        if v == cache.n() {
            if is_acyclic(masks) && acc > *best {
                *best = acc;
            }
            return;
        }
        for e in cache.entries(v) {
            masks.push(e.mask);
            go(cache, v + 1, masks, acc + e.score, best);
            masks.pop();
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(cache, 0, &mut Vec::new(), 0.0, &mut best);
    best
}

fn random_cache(n: usize, k: usize, seed: u64) -> LocalScoreCache {
    let mut rng = substream(seed, "cache", &[]);
    let entries = (0..n)
        .map(|v| {
            (0u64..1 << n)
                .filter(|m| m >> v & 1 == 0 && (m.count_ones() as usize) <= k)
                .filter(|&mask| mask == 0 || rng.gen_bool(0.7))
                .collect::<Vec<_>>()
                .into_iter()
                .map(|mask| CacheEntry {
                    mask,
                    score: -rng.gen_range(0.0..10.0f64).round() / 2.0,
                })
                .collect()
        })
        .collect();
    LocalScoreCache::new(n, k, None, entries).unwrap()
}

fn dataset(n: usize, m: usize, seed: u64, mpn: MpnType) -> Dataset {
    let mut config = SynthesisConfig::new(n, mpn, 0.1);
    config.max_parents = 2;
    config.seed = seed;
    let net = generate_network(&config).unwrap();
    sample(&net, m, &mut substream(seed, "sample", &[])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn search_matches_brute_force(n in 2usize..=4, k in 1usize..=3, seed in any::<u64>()) {
        let cache = random_cache(n, k.min(n - 1), seed);
        let found = exact_search(&cache).unwrap();
        prop_assert!(is_acyclic(&found.masks));
        prop_assert!((found.score - brute_force(&cache)).abs() < 1e-9);
        let sum: f64 = found.masks.iter().enumerate().map(|(v, &m)| cache.score_of(v, m).unwrap()).sum();
        prop_assert!((sum - found.score).abs() < 1e-9);
    }

    #[test]
    fn search_beats_random_dags(seed in any::<u64>()) {
        let cache = random_cache(5, 2, seed);
        let best = exact_search(&cache).unwrap().score;
        let mut rng = substream(seed, "orders", &[]);
        for _ in 0..200 {
            let mut order: Vec<usize> = (0..5).collect();
            order.shuffle(&mut rng);
            let mut placed = 0u64;
            let mut total = 0.0;
            for &v in &order {
                let ok: Vec<&CacheEntry> =
                    cache.entries(v).iter().filter(|e| e.mask & !placed == 0).collect();
                total += ok[rng.gen_range(0..ok.len())].score;
                placed |= 1 << v;
            }
            prop_assert!(best >= total - 1e-9);
        }
    }

    #[test]
    fn random_dags_respect_in_degree(n in 1usize..=12, k in 1usize..=4, seed in any::<u64>(), t in any::<bool>()) {
        let mut config = SynthesisConfig::new(n, MpnType::Cmpn, 0.1);
        config.max_parents = k;
        config.forbid_transitive_edges = t;
        let dag = random_dag(&config, &mut substream(seed, "dag", &[])).unwrap();
        prop_assert!(dag.topological_order().len() == n);
        prop_assert!((0..n).all(|v| dag.parents(v).len() <= k));
        if t {
            prop_assert!(dag.transitive_edges().is_empty());
        }
    }

    #[test]
    fn alpha_is_bounded_and_monotone(p in 0.0f64..=1.0, q in 0.0f64..=1.0, d in 0.0f64..=0.5) {
        prop_assume!(p + q > 0.0);
        let a = alpha(p, q);
        prop_assert!((-1.0..=1.0).contains(&a));
        let up = alpha((p + d).min(1.0), q);
        prop_assert!(up >= a - 1e-12);
        let down = alpha(p, (q + d).min(1.0));
        prop_assert!(down <= a + 1e-12);
    }

    #[test]
    fn row_index_roundtrips(k in 0usize..=5, r in 0usize..32) {
        let r = r % (1 << k);
        prop_assert_eq!(row_index(&row_assignment(r, k)), r);
    }

    #[test]
    fn alpha_tables_stay_in_range(seed in 0u64..200, ti in 0usize..3, child in 0usize..5) {
        let mpn = TYPES[ti];
        let ds = dataset(5, 200, seed, mpn);
        let others: Vec<usize> = (0..5).filter(|&v| v != child).take(2).collect();
        let table = alpha_table(mpn, &ds, child, &others, 1.0);
        prop_assert!(table.alpha.iter().all(|a| (-1.0..=1.0).contains(a)));
        prop_assert!(table.theta_hat.iter().all(|t| (0.0..=1.0).contains(t)));
        prop_assert_eq!(table.support.iter().sum::<f64>(), 200.0);
    }

    #[test]
    fn cache_entries_are_sorted_and_bounded(seed in 0u64..100, ti in 0usize..3, k in 1usize..=3) {
        let mpn = TYPES[ti];
        let ds = dataset(5, 150, seed, mpn);
        let cache = build_cache(mpn, &ds, k, ScoreKind::Polaris, 1.0, Some(0.0)).unwrap();
        for v in 0..5 {
            let entries = cache.entries(v);
            prop_assert!(entries.iter().any(|e| e.mask == 0));
            for e in entries {
                prop_assert!(e.mask >> v & 1 == 0 && e.mask.count_ones() as usize <= k);
                prop_assert!(e.score.is_finite());
            }
            for w in entries.windows(2) {
                prop_assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].mask < w[1].mask));
            }
        }
    }

    #[test]
    fn learned_graphs_are_valid_and_decompose(seed in 0u64..100, ti in 0usize..3, k in 1usize..=3) {
        let mpn = TYPES[ti];
        let ds = dataset(6, 300, seed, mpn);
        for kind in [ScoreKind::Bic, ScoreKind::Polaris, ScoreKind::diprog(0.1).unwrap()] {
            let mut opts = LearnOptions::new(mpn, kind);
            opts.max_parents = k;
            let out = learn(&ds, &opts).unwrap();
            prop_assert_eq!(out.dag.topological_order().len(), 6);
            prop_assert!((0..6).all(|v| out.dag.parents(v).len() <= k));
            let total = network_score(&ds, &out.dag, mpn, kind, 1.0).unwrap();
            prop_assert!((total - out.diagnostics.score).abs() < 1e-9 * total.abs().max(1.0));
            let locals: f64 = (0..6)
                .map(|v| local_score(kind, mpn, &ds, v, out.dag.parents(v), 1.0).unwrap().total)
                .sum();
            prop_assert!((locals - total).abs() < 1e-9 * total.abs().max(1.0));
            let masks: Vec<u64> = (0..6).map(|v| mask_of(out.dag.parents(v))).collect();
            prop_assert!(masks.iter().all(|&m| parents_of(m).len() == m.count_ones() as usize));
        }
    }

    #[test]
    fn serialization_roundtrips(seed in any::<u64>(), ti in 0usize..3, n in 1usize..=8) {
        let mut config = SynthesisConfig::new(n, TYPES[ti], 0.2);
        config.seed = seed;
        let net = generate_network(&config).unwrap();
        let json = network_to_json(&net);
        prop_assert_eq!(network_to_json(&network_from_json(&json).unwrap()), json);
        let ds = sample(&net, 20, &mut substream(seed, "sample", &[])).unwrap();
        let csv = dataset_to_csv(&ds);
        prop_assert_eq!(dataset_from_csv(&csv).unwrap(), ds);
    }
}

#[test]
fn sampling_is_seed_deterministic() {
    let net = generate_network(&SynthesisConfig::new(7, MpnType::Xmpn, 0.1)).unwrap();
    let a = sample(&net, 500, &mut substream(9, "sample", &[])).unwrap();
    let b = sample(&net, 500, &mut substream(9, "sample", &[])).unwrap();
    let c = sample(&net, 500, &mut substream(10, "sample", &[])).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn learning_is_deterministic_across_thread_counts() {
    let ds = dataset(7, 400, 3, MpnType::Cmpn);
    let opts = LearnOptions::new(MpnType::Cmpn, ScoreKind::Polaris);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = one.install(|| learn(&ds, &opts).unwrap());
    let b = learn(&ds, &opts).unwrap();
    assert_eq!(a.dag, b.dag);
    assert_eq!(a.diagnostics.score.to_bits(), b.diagnostics.score.to_bits());
}
