//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p polaris --test acceptance`.
//! Criteria can be selected by id (`C4 C8`). Failures are reported but only
//! fail the process when `POLARIS_ACCEPTANCE_STRICT` is set.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use polaris::estimation::AlphaTable;
use polaris::evaluation::{run_experiment, ExperimentConfig};
use polaris::filtering::{filter_all, filter_table, DEFAULT_ALPHA_THRESHOLD};
use polaris::io;
use polaris::rng::substream;
use polaris::scoring::{local_scores, network_score};
use polaris::search::{build_cache, exact_search, CacheEntry, LocalScoreCache};
use polaris::synthesis::{exact_marginals, generate_network_with, sample, ExactJoint, SynthesisConfig};
use polaris::{Dag, Dataset, LearnOptions, MpnType, Network, ScoreKind};
use rand::Rng as _;

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn network(config: &SynthesisConfig, label: &str, ids: &[u64]) -> Network {
    let mut rng = substream(SEED, label, ids);
    generate_network_with(config, &mut rng).expect("network synthesis")
}

fn dataset(net: &Network, m: usize, label: &str, ids: &[u64]) -> Dataset {
    let mut rng = substream(SEED, label, ids);
    sample(net, m, &mut rng).expect("sampling")
}

fn is_acyclic(masks: &[u64]) -> bool {
    let parents: Vec<Vec<usize>> = masks
        .iter()
        .map(|&m| (0..64).filter(|i| (m >> i) & 1 == 1).collect())
        .collect();
    polaris::model::validate_dag(&parents).is_ok()
}

/// Best acyclic combination of cache entries by exhaustive product search.
fn brute_force(cache: &LocalScoreCache) -> f64 {
    let n = cache.n();
    let mut best = f64::NEG_INFINITY;
    let mut choice = vec![0usize; n];
    loop {
        let masks: Vec<u64> = (0..n).map(|v| cache.entries(v)[choice[v]].mask).collect();
        if is_acyclic(&masks) {
            let s: f64 = (0..n).map(|v| cache.entries(v)[choice[v]].score).sum();
            best = best.max(s);
        }
        let mut v = 0;
        loop {
            if v == n {
                return best;
            }
            choice[v] += 1;
            if choice[v] < cache.entries(v).len() {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let n = 3 + (i % 3) as usize;
        let cache = if i % 2 == 0 {
            // random scores over every parent set, a random subset kept
            let mut rng = substream(SEED, "c1-cache", &[i]);
            let entries = (0..n)
                .map(|v| {
                    (0u64..1 << n)
                        .filter(|m| (m >> v) & 1 == 0)
                        .filter_map(|mask| {
                            let keep = mask == 0 || rng.gen_bool(0.7);
                            let score = -rng.gen_range(0.0..100.0);
                            keep.then_some(CacheEntry { mask, score })
                        })
                        .collect()
                })
                .collect();
            LocalScoreCache::new(n, n - 1, None, entries).unwrap()
        } else {
            let mpn = MpnType::ALL[(i / 2 % 3) as usize];
            let config = SynthesisConfig::new(n, mpn, 0.1);
            let net = network(&config, "c1-net", &[i]);
            let ds = dataset(&net, 300, "c1-data", &[i]);
            build_cache(mpn, &ds, n - 1, ScoreKind::Polaris, 1.0, Some(0.0)).unwrap()
        };
        let dp = exact_search(&cache).unwrap();
        let bf = brute_force(&cache);
        worst = worst.max((dp.score - bf).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(60),
        format!("50 caches, max |dp - brute| = {worst:.2e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let mut exact_rejections = 0;
    for (ti, &mpn) in MpnType::ALL.iter().enumerate() {
        for i in 0..100u64 {
            let config = SynthesisConfig::new(10, mpn, 0.1);
            let net = network(&config, "c2-exact", &[ti as u64, i]);
            assert!(net.is_conformant());
            let joint = ExactJoint::new(&net).unwrap();
            for v in 0..net.n() {
                let parents = net.dag().parents(v);
                if parents.is_empty() {
                    continue;
                }
                let (w, j) = joint.row_masses(v, parents);
                let table = AlphaTable::from_masses(mpn, v, parents, &w, &j);
                if !filter_table(&table, DEFAULT_ALPHA_THRESHOLD).is_accept() {
                    exact_rejections += 1;
                }
            }
        }
    }
    let mut means = Vec::new();
    for (ti, &mpn) in MpnType::ALL.iter().enumerate() {
        let mut total = 0usize;
        for i in 0..50u64 {
            let config = SynthesisConfig::new(10, mpn, 0.1);
            let net = network(&config, "c2-net", &[ti as u64, i]);
            let ds = dataset(&net, 2000, "c2-data", &[ti as u64, i]);
            let sets = filter_all(mpn, &ds, 3, 1.0, DEFAULT_ALPHA_THRESHOLD);
            total += sets
                .iter()
                .flat_map(|s| s.rejected.iter().map(move |r| (s.child, &r.parents)))
                .filter(|(c, p)| net.dag().parents(*c) == p.as_slice())
                .count();
        }
        means.push((mpn, total as f64 / 50.0));
    }
    let pass = exact_rejections == 0 && means.iter().all(|&(_, m)| m < 0.1);
    let detail = means
        .iter()
        .map(|(t, m)| format!("{t} {m:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        pass,
        format!("exact rejections {exact_rejections}/300 networks; empirical true rejections per network: {detail}"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let (mut recall, mut precision) = (0.0, 0.0);
    let reps = 20;
    for i in 0..reps {
        let mut config = SynthesisConfig::new(8, MpnType::Cmpn, 0.1);
        config.max_parents = 2;
        config.forbid_transitive_edges = true;
        config.require_faithful = true;
        let net = network(&config, "c3-net", &[i]);
        let ds = dataset(&net, 2000, "c3-data", &[i]);
        let mut opts = LearnOptions::new(MpnType::Cmpn, ScoreKind::Polaris);
        opts.max_parents = 2;
        let learned = polaris::learn(&ds, &opts).unwrap();
        let (p, r) = polaris::evaluation::precision_recall(net.dag(), &learned.dag).unwrap();
        recall += r;
        precision += p;
    }
    recall /= reps as f64;
    precision /= reps as f64;
    let elapsed = start.elapsed();
    outcome(
        recall >= 0.95 && precision >= 0.95 && elapsed < Duration::from_secs(600),
        format!(
            "mean recall {recall:.4}, precision {precision:.4} over {reps} replicates, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Outcome {
    let config = ExperimentConfig {
        require_faithful: true,
        seed: SEED,
        ..ExperimentConfig::default()
    };
    let rows = run_experiment(&config, &HashSet::new(), |_| Ok(())).unwrap();
    let aupr = |label: &str| {
        rows.iter()
            .find(|r| r.score == label)
            .map(|r| r.aupr_mean)
            .unwrap()
    };
    let (bic, pol, dtrue, drand) = (
        aupr("bic"),
        aupr("polaris"),
        aupr("diprog-true"),
        aupr("diprog-random"),
    );
    let pass = dtrue >= pol && pol > bic && pol - bic > 0.05 && pol > drand;
    outcome(
        pass,
        format!(
            "mean AUPR: diprog-true {dtrue:.4}, polaris {pol:.4}, bic {bic:.4}, diprog-random {drand:.4} (worst draw {:.4})",
            aupr("diprog-random-worst")
        ),
    )
}

fn criterion_5() -> Outcome {
    let bands = [
        (MpnType::Xmpn, 600.0, 1200.0),
        (MpnType::Cmpn, 350.0, 1100.0),
        (MpnType::Dmpn, 100.0, 450.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (ti, &(mpn, lo, hi)) in bands.iter().enumerate() {
        let mut total = 0usize;
        for i in 0..50u64 {
            let config = SynthesisConfig::new(10, mpn, 0.15);
            let net = network(&config, "c5-net", &[ti as u64, i]);
            let ds = dataset(&net, 200, "c5-data", &[ti as u64, i]);
            let sets = filter_all(mpn, &ds, 3, 1.0, DEFAULT_ALPHA_THRESHOLD);
            total += sets.iter().map(|s| s.rejected.len()).sum::<usize>();
        }
        let mean = total as f64 / 50.0;
        pass &= (lo..=hi).contains(&mean);
        parts.push(format!("{mpn} {mean:.1} in [{lo}, {hi}]"));
    }
    outcome(pass, format!("mean rejections of 1300: {}", parts.join(", ")))
}

fn criterion_6() -> Outcome {
    let grid: Vec<f64> = (0..20).map(|i| (i as f64 + 0.5) / 20.0).collect();
    let (mut checked, mut mismatches, mut ties) = (0, 0, 0);
    for &p in &grid {
        for &pos in &grid {
            for &neg in grid.iter().filter(|&&t| t < pos) {
                let dag = Dag::from_parents(vec![vec![], vec![0]]).unwrap();
                let cpds = vec![
                    polaris::Cpd::new(0, vec![], vec![p]).unwrap(),
                    polaris::Cpd::new(1, vec![0], vec![neg, pos]).unwrap(),
                ];
                let net = Network::new(dag, cpds, MpnType::Cmpn, 0.0).unwrap();
                let joint = ExactJoint::new(&net).unwrap();
                let alpha = |child: usize, parent: usize| {
                    let (w, j) = joint.row_masses(child, &[parent]);
                    AlphaTable::from_masses(MpnType::Cmpn, child, &[parent], &w, &j).alpha[0]
                };
                let forward = alpha(1, 0);
                let backward = alpha(0, 1);
                let q = p * pos + (1.0 - p) * neg;
                let (d_alpha, d_marg) = (forward - backward, p - q);
                if d_alpha.abs() < 1e-12 || d_marg.abs() < 1e-12 {
                    ties += 1;
                    continue;
                }
                checked += 1;
                if d_alpha.signum() != d_marg.signum() {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{checked} grid points, {mismatches} sign mismatches, {ties} ties excluded"),
    )
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();

    // decomposability: network score is the sum of local scores, and
    // changing one node's parents changes only that node's term
    let mut decomp_err: f64 = 0.0;
    for i in 0..100u64 {
        let mpn = MpnType::ALL[(i % 3) as usize];
        let config = SynthesisConfig::new(6, mpn, 0.1);
        let truth = network(&config, "c7-truth", &[i]);
        let ds = dataset(&truth, 500, "c7-data", &[i]);
        let mut rng = substream(SEED, "c7-graph", &[i]);
        let mut graph_config = config.clone();
        graph_config.max_parents = 2;
        let g = polaris::synthesis::random_dag(&graph_config, &mut rng).unwrap();
        for kind in [ScoreKind::Bic, ScoreKind::diprog(0.2).unwrap()] {
            let locals = local_scores(&ds, &g, mpn, kind, 1.0).unwrap();
            let total = network_score(&ds, &g, mpn, kind, 1.0).unwrap();
            let sum: f64 = locals.iter().map(|l| l.total).sum();
            decomp_err = decomp_err.max((total - sum).abs());
            if let Some((a, b)) = g.edges().first().copied() {
                let h = g.without_edge(a, b).unwrap();
                let other = local_scores(&ds, &h, mpn, kind, 1.0).unwrap();
                for v in (0..g.n()).filter(|&v| v != b) {
                    decomp_err = decomp_err.max((other[v].total - locals[v].total).abs());
                }
            }
        }
    }
    if decomp_err > 1e-9 {
        failures.push(format!("decomposability error {decomp_err:.2e}"));
    }

    // sampling determinism
    let config = SynthesisConfig::new(10, MpnType::Dmpn, 0.1);
    let net = network(&config, "c7-det", &[]);
    if dataset(&net, 1000, "c7-det-data", &[]) != dataset(&net, 1000, "c7-det-data", &[]) {
        failures.push("sampling not deterministic".into());
    }

    // exact marginals against empirical frequencies at 3 sigma
    let m = 1_000_000;
    let mut worst_z: f64 = 0.0;
    let (mut chi2, mut tests) = (0.0, 0);
    for i in 0..10u64 {
        let config = SynthesisConfig::new(10, MpnType::ALL[(i % 3) as usize], 0.1);
        let net = network(&config, "c7-marg", &[i]);
        let exact = exact_marginals(&net).unwrap();
        let ds = dataset(&net, m, "c7-marg-data", &[i]);
        for (v, &p) in exact.iter().enumerate() {
            let sd = (p * (1.0 - p) / m as f64).sqrt();
            let z = if sd > 0.0 { (ds.frequency(v) - p).abs() / sd } else { 0.0 };
            worst_z = worst_z.max(z);
            chi2 += z * z;
            tests += 1;
        }
    }
    if worst_z > 3.0 {
        failures.push(format!("marginal deviation {worst_z:.2} sigma"));
    }

    // round trips
    let json = io::network_to_json(&net);
    let back = io::network_to_json(&io::network_from_json(&json).unwrap());
    let ds = dataset(&net, 200, "c7-csv", &[]);
    let csv = io::dataset_to_csv(&ds);
    let csv_back = io::dataset_to_csv(&io::dataset_from_csv(&csv).unwrap());
    if json != back || csv != csv_back {
        failures.push("round trip not byte-identical".into());
    }

    let summary = format!(
        "decomposition error {decomp_err:.1e}, max marginal z {worst_z:.2} \
         (chi-square {chi2:.1} on {tests} marginals), round trips and sampling checked"
    );
    if failures.is_empty() {
        outcome(true, summary)
    } else {
        outcome(false, format!("{summary}; failures: {}", failures.join("; ")))
    }
}

fn cache_build_time(ds: &Dataset) -> Duration {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut times: Vec<Duration> = (0..7)
        .map(|_| {
            let start = Instant::now();
            pool.install(|| build_cache(MpnType::Cmpn, ds, 3, ScoreKind::Polaris, 1.0, None))
                .unwrap();
            start.elapsed()
        })
        .collect();
    times.sort();
    times[times.len() / 2]
}

fn criterion_8() -> Outcome {
    let config = SynthesisConfig::new(10, MpnType::Cmpn, 0.1);
    let net = network(&config, "c8-net", &[]);
    let small = cache_build_time(&dataset(&net, 100, "c8-data", &[100]));
    let large = cache_build_time(&dataset(&net, 1000, "c8-data", &[1000]));
    let ratio = large.as_secs_f64() / small.as_secs_f64();
    outcome(
        (5.0..=20.0).contains(&ratio),
        format!(
            "median cache build {:.2} ms (m=100), {:.2} ms (m=1000), ratio {ratio:.2}",
            small.as_secs_f64() * 1e3,
            large.as_secs_f64() * 1e3
        ),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.starts_with('C') || a.starts_with('c'))
        .map(|a| a.to_ascii_uppercase())
        .collect();
    let criteria: [Criterion; 8] = [
        ("C1", "exact search matches exhaustive enumeration", criterion_1),
        ("C2", "alpha filter keeps true parent sets", criterion_2),
        ("C3", "convergence on faithful transitive-free CMPNs", criterion_3),
        ("C4", "AUPR ordering at n=10, eps=0.15, m=200", criterion_4),
        ("C5", "filter rejection bands", criterion_5),
        ("C6", "two-node alpha orientation identity", criterion_6),
        ("C7", "numerical and structural invariants", criterion_7),
        ("C8", "cache build time scales with m", criterion_8),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {id} {name}: {} [{:.1}s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 && std::env::var_os("POLARIS_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
