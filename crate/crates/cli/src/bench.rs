//! Benchmark harness: synthetic corpora with planted match counts, timed
//! search sweeps, exact operation counters, CSV output.
//!
//! For every requested match count `m` the corpus generator plants a
//! dedicated probe keyword with exactly `m` occurrences spread over the
//! hidden structures; the rest of the corpus is filler drawn from a
//! configurable keyword distribution. Each probe then times a full
//! structured-search sweep (all structures) against a linear PEKS scan of
//! the same logical corpus. Everything except wall time is deterministic
//! under the configured seed.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Zipf};

use spchs_core::generic::StdGenericSpchs;
use spchs_core::group::PairingCtx;
use spchs_core::peks;
use spchs_core::scratch;
use spchs_core::store::{BackendId, TagIndexedStore};
use spchs_core::wire::WireCodec;

/// How filler keywords are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KeywordDistribution {
    Uniform,
    /// Zipf with the given exponent.
    Zipf(f64),
}

impl fmt::Display for KeywordDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeywordDistribution::Uniform => write!(f, "uniform"),
            KeywordDistribution::Zipf(s) => write!(f, "zipf({s})"),
        }
    }
}

/// Which structured backend the benchmark exercises (PEKS always runs).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchBackend {
    Scratch,
    Generic,
}

impl BenchBackend {
    pub fn name(&self) -> &'static str {
        match self {
            BenchBackend::Scratch => "scratch",
            BenchBackend::Generic => "generic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub total_ciphertexts: usize,
    pub structures: usize,
    pub keyword_universe: usize,
    pub distribution: KeywordDistribution,
    pub match_counts: Vec<usize>,
    pub backend: BenchBackend,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error("benchmark internals disagree: {0}")]
    Internal(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |msg: String| Err(BenchError::InvalidConfig(msg));
        if self.structures == 0 {
            return fail("structure count must be at least 1".into());
        }
        if self.total_ciphertexts < self.structures {
            return fail(format!(
                "total ciphertexts ({}) must be at least the structure count ({})",
                self.total_ciphertexts, self.structures
            ));
        }
        if self.keyword_universe == 0 {
            return fail("keyword universe must be nonempty".into());
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1".into());
        }
        if self.match_counts.is_empty() {
            return fail("match-count list must be nonempty".into());
        }
        if let KeywordDistribution::Zipf(s) = self.distribution {
            if s.is_nan() || s <= 0.0 {
                return fail(format!("zipf exponent must be positive, got {s}"));
            }
        }
        for &m in &self.match_counts {
            if m > self.total_ciphertexts {
                return fail(format!(
                    "match count {m} exceeds the corpus size {}",
                    self.total_ciphertexts
                ));
            }
        }
        let planted: usize = distinct_sorted(&self.match_counts).into_iter().sum();
        if planted > self.total_ciphertexts {
            return fail(format!(
                "planted match counts sum to {planted}, more than the corpus size {}",
                self.total_ciphertexts
            ));
        }
        Ok(())
    }
}

/// One probe: a backend row of the result table.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub backend: String,
    pub n: usize,
    pub structures: usize,
    pub m: usize,
    pub median_ms: f64,
    pub pairings: u64,
    pub comparisons: u64,
    pub repetitions: usize,
}

#[derive(Clone, Debug, Default)]
pub struct BenchResult {
    pub rows: Vec<ProbeRow>,
}

fn distinct_sorted(values: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = values.to_vec();
    out.sort_unstable();
    out.dedup();
    out
}

fn probe_keyword(m: usize) -> Vec<u8> {
    format!("probe:{m}").into_bytes()
}

/// The planned encryption order: `(structure, keyword bytes)` per event.
struct CorpusPlan {
    events: Vec<(usize, Vec<u8>)>,
}

impl CorpusPlan {
    fn build(cfg: &BenchConfig, rng: &mut ChaCha20Rng) -> Result<Self, BenchError> {
        let mut events = Vec::with_capacity(cfg.total_ciphertexts);
        for m in distinct_sorted(&cfg.match_counts) {
            let keyword = probe_keyword(m);
            for i in 0..m {
                events.push((i % cfg.structures, keyword.clone()));
            }
        }
        let universe: Vec<Vec<u8>> = (0..cfg.keyword_universe)
            .map(|i| format!("kw:{i}").into_bytes())
            .collect();
        let zipf = match cfg.distribution {
            KeywordDistribution::Uniform => None,
            KeywordDistribution::Zipf(s) => Some(
                Zipf::new(cfg.keyword_universe as u64, s)
                    .map_err(|e| BenchError::InvalidConfig(format!("zipf: {e}")))?,
            ),
        };
        while events.len() < cfg.total_ciphertexts {
            let keyword = match &zipf {
                None => rng.gen_range(0..cfg.keyword_universe),
                Some(z) => z.sample(rng) as usize - 1,
            };
            events.push((rng.gen_range(0..cfg.structures), universe[keyword].clone()));
        }
        use rand::seq::SliceRandom;
        events.shuffle(rng);
        Ok(CorpusPlan { events })
    }
}

fn median_ms(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("durations are finite"));
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// Builds the corpus, probes every requested match count, and reports one
/// structured row plus one PEKS row per probe.
pub fn bench_corpus(cfg: &BenchConfig) -> Result<BenchResult, BenchError> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let plan = CorpusPlan::build(cfg, &mut rng)?;
    let ctx = PairingCtx::new();

    // PEKS side: same logical corpus, shared-key baseline.
    let (peks_mpk, peks_msk) = scratch::system_setup(&ctx, 128, "bytes", &mut rng)
        .map_err(|e| BenchError::Internal(e.to_string()))?;
    let mut peks_store = TagIndexedStore::new(BackendId::Peks);
    for (_, keyword) in &plan.events {
        let ct = peks::peks_encrypt(&ctx, &peks_mpk, keyword, &mut rng);
        peks_store
            .insert(ct.tag_bytes(), ct.payload_bytes(), Vec::new())
            .map_err(|e| BenchError::Internal(e.to_string()))?;
    }

    let mut rows = Vec::new();
    match cfg.backend {
        BenchBackend::Scratch => {
            let (mpk, msk) = scratch::system_setup(&ctx, 128, "bytes", &mut rng)
                .map_err(|e| BenchError::Internal(e.to_string()))?;
            let mut store = TagIndexedStore::new(BackendId::Scratch);
            let mut states = Vec::with_capacity(cfg.structures);
            for _ in 0..cfg.structures {
                states.push(scratch::structure_init(&ctx, &mpk, &mut rng));
            }
            for (structure, keyword) in &plan.events {
                let (pri, public) = &mut states[*structure];
                let ct = scratch::structured_encrypt(&ctx, &mpk, keyword, pri, &mut rng);
                store
                    .insert(ct.tag_bytes(), ct.payload_bytes(), public.to_wire())
                    .map_err(|e| BenchError::Internal(e.to_string()))?;
            }
            let publics: Vec<_> = states.iter().map(|(_, public)| *public).collect();

            for &m in &cfg.match_counts {
                let trap = scratch::trapdoor(&ctx, &msk, &probe_keyword(m));
                let mut samples = Vec::with_capacity(cfg.repetitions);
                let mut pairings = 0;
                let mut comparisons = 0;
                for _ in 0..cfg.repetitions {
                    ctx.reset_counters();
                    store.reset_comparisons();
                    let start = Instant::now();
                    let mut matched = 0usize;
                    for public in &publics {
                        matched += scratch::structured_search(&ctx, &mpk, public, &store, &trap)
                            .map_err(|e| BenchError::Internal(e.to_string()))?
                            .len();
                    }
                    samples.push(start.elapsed().as_secs_f64() * 1e3);
                    if matched != m {
                        return Err(BenchError::Internal(format!(
                            "probe for m={m} matched {matched} ciphertexts"
                        )));
                    }
                    pairings = ctx.counters().pairings;
                    comparisons = store.comparisons();
                }
                rows.push(ProbeRow {
                    backend: cfg.backend.name().to_string(),
                    n: cfg.total_ciphertexts,
                    structures: cfg.structures,
                    m,
                    median_ms: median_ms(&mut samples),
                    pairings,
                    comparisons,
                    repetitions: cfg.repetitions,
                });
                rows.push(peks_probe(
                    cfg,
                    &ctx,
                    &peks_store,
                    &scratch::trapdoor(&ctx, &peks_msk, &probe_keyword(m)),
                    m,
                )?);
            }
        }
        BenchBackend::Generic => {
            let (mpk, msk) = StdGenericSpchs::system_setup(&ctx, &mut rng);
            let mut store = TagIndexedStore::new(BackendId::Generic);
            let mut states = Vec::with_capacity(cfg.structures);
            for _ in 0..cfg.structures {
                states.push(StdGenericSpchs::structure_init(&ctx, &mpk, &mut rng));
            }
            for (structure, keyword) in &plan.events {
                let (pri, public) = &mut states[*structure];
                let ct =
                    StdGenericSpchs::structured_encrypt(&ctx, &mpk, keyword, pri, &mut rng);
                store
                    .insert(ct.tag_bytes(), ct.payload_bytes(), public.to_wire())
                    .map_err(|e| BenchError::Internal(e.to_string()))?;
            }
            let publics: Vec<_> = states.into_iter().map(|(_, public)| public).collect();

            for &m in &cfg.match_counts {
                let trap = StdGenericSpchs::trapdoor(&ctx, &msk, &probe_keyword(m));
                let mut samples = Vec::with_capacity(cfg.repetitions);
                let mut pairings = 0;
                let mut comparisons = 0;
                for _ in 0..cfg.repetitions {
                    ctx.reset_counters();
                    store.reset_comparisons();
                    let start = Instant::now();
                    let mut matched = 0usize;
                    for public in &publics {
                        matched +=
                            StdGenericSpchs::structured_search(&ctx, &mpk, public, &store, &trap)
                                .map_err(|e| BenchError::Internal(e.to_string()))?
                                .ordinals
                                .len();
                    }
                    samples.push(start.elapsed().as_secs_f64() * 1e3);
                    if matched != m {
                        return Err(BenchError::Internal(format!(
                            "probe for m={m} matched {matched} ciphertexts"
                        )));
                    }
                    pairings = ctx.counters().pairings;
                    comparisons = store.comparisons();
                }
                rows.push(ProbeRow {
                    backend: cfg.backend.name().to_string(),
                    n: cfg.total_ciphertexts,
                    structures: cfg.structures,
                    m,
                    median_ms: median_ms(&mut samples),
                    pairings,
                    comparisons,
                    repetitions: cfg.repetitions,
                });
                rows.push(peks_probe(
                    cfg,
                    &ctx,
                    &peks_store,
                    &scratch::trapdoor(&ctx, &peks_msk, &probe_keyword(m)),
                    m,
                )?);
            }
        }
    }
    Ok(BenchResult { rows })
}

fn peks_probe(
    cfg: &BenchConfig,
    ctx: &PairingCtx,
    store: &TagIndexedStore,
    trap: &scratch::SearchTrapdoor,
    m: usize,
) -> Result<ProbeRow, BenchError> {
    let mut samples = Vec::with_capacity(cfg.repetitions);
    let mut pairings = 0;
    for _ in 0..cfg.repetitions {
        ctx.reset_counters();
        store.reset_comparisons();
        let start = Instant::now();
        let hits = peks::peks_search(ctx, store, trap)
            .map_err(|e| BenchError::Internal(e.to_string()))?;
        samples.push(start.elapsed().as_secs_f64() * 1e3);
        if hits.len() != m {
            return Err(BenchError::Internal(format!(
                "linear scan for m={m} matched {} ciphertexts",
                hits.len()
            )));
        }
        pairings = ctx.counters().pairings;
    }
    Ok(ProbeRow {
        backend: "peks".to_string(),
        n: cfg.total_ciphertexts,
        structures: cfg.structures,
        m,
        median_ms: median_ms(&mut samples),
        pairings,
        comparisons: store.comparisons(),
        repetitions: cfg.repetitions,
    })
}

pub const CSV_HEADER: &str = "backend,n,n_structures,m,median_ms,pairings,comparisons,reps";

pub fn format_csv(result: &BenchResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{:.3},{},{},{}\n",
            row.backend,
            row.n,
            row.structures,
            row.m,
            row.median_ms,
            row.pairings,
            row.comparisons,
            row.repetitions
        ));
    }
    out
}

/// Writes the result table as CSV.
pub fn emit_results(result: &BenchResult, path: &Path) -> Result<(), BenchError> {
    std::fs::write(path, format_csv(result)).map_err(|source| BenchError::Output {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> BenchConfig {
        BenchConfig {
            total_ciphertexts: 50,
            structures: 3,
            keyword_universe: 10,
            distribution: KeywordDistribution::Uniform,
            match_counts: vec![0, 3, 7],
            backend: BenchBackend::Scratch,
            repetitions: 2,
            seed: 9,
        }
    }

    #[test]
    fn invalid_configs_are_rejected_before_any_work() {
        let mut cfg = small_cfg();
        cfg.match_counts = vec![51];
        assert!(matches!(
            bench_corpus(&cfg),
            Err(BenchError::InvalidConfig(_))
        ));

        let mut cfg = small_cfg();
        cfg.match_counts = vec![20, 31];
        assert!(matches!(
            bench_corpus(&cfg),
            Err(BenchError::InvalidConfig(_))
        ));

        let mut cfg = small_cfg();
        cfg.structures = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = small_cfg();
        cfg.repetitions = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = small_cfg();
        cfg.distribution = KeywordDistribution::Zipf(0.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rows_carry_the_exact_pairing_counts() {
        let cfg = small_cfg();
        let result = bench_corpus(&cfg).unwrap();
        assert_eq!(result.rows.len(), 2 * cfg.match_counts.len());
        for pair in result.rows.chunks(2) {
            let (spchs, peks) = (&pair[0], &pair[1]);
            assert_eq!(spchs.backend, "scratch");
            assert_eq!(peks.backend, "peks");
            assert_eq!(spchs.m, peks.m);
            assert_eq!(spchs.pairings, (cfg.structures + spchs.m) as u64);
            assert_eq!(peks.pairings, cfg.total_ciphertexts as u64);
        }
    }

    #[test]
    fn generic_backend_rows_obey_the_same_counter_law() {
        let mut cfg = small_cfg();
        cfg.backend = BenchBackend::Generic;
        cfg.match_counts = vec![0, 4];
        let result = bench_corpus(&cfg).unwrap();
        for pair in result.rows.chunks(2) {
            assert_eq!(pair[0].backend, "generic");
            assert_eq!(pair[0].pairings, (cfg.structures + pair[0].m) as u64);
            assert_eq!(pair[1].pairings, cfg.total_ciphertexts as u64);
        }
    }

    #[test]
    fn full_match_corpus_is_allowed() {
        let mut cfg = small_cfg();
        cfg.match_counts = vec![0, 50];
        let result = bench_corpus(&cfg).unwrap();
        let full = result.rows.iter().find(|r| r.m == 50).unwrap();
        assert_eq!(full.pairings, (cfg.structures + 50) as u64);
    }

    #[test]
    fn zipf_filler_works_and_stays_deterministic() {
        let mut cfg = small_cfg();
        cfg.distribution = KeywordDistribution::Zipf(1.1);
        let a = bench_corpus(&cfg).unwrap();
        let b = bench_corpus(&cfg).unwrap();
        assert_eq!(strip_times(&a), strip_times(&b));
    }

    fn strip_times(result: &BenchResult) -> Vec<(String, usize, usize, usize, u64, u64, usize)> {
        result
            .rows
            .iter()
            .map(|r| {
                (
                    r.backend.clone(),
                    r.n,
                    r.structures,
                    r.m,
                    r.pairings,
                    r.comparisons,
                    r.repetitions,
                )
            })
            .collect()
    }

    #[test]
    fn identical_seeds_reproduce_everything_but_wall_time() {
        let cfg = small_cfg();
        let a = bench_corpus(&cfg).unwrap();
        let b = bench_corpus(&cfg).unwrap();
        assert_eq!(strip_times(&a), strip_times(&b));
    }

    #[test]
    fn csv_round_trips_the_recorded_values() {
        let cfg = small_cfg();
        let result = bench_corpus(&cfg).unwrap();
        let csv = format_csv(&result);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        for (line, row) in lines.zip(&result.rows) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 8);
            assert_eq!(fields[0], row.backend);
            assert_eq!(fields[1].parse::<usize>().unwrap(), row.n);
            assert_eq!(fields[2].parse::<usize>().unwrap(), row.structures);
            assert_eq!(fields[3].parse::<usize>().unwrap(), row.m);
            assert!((fields[4].parse::<f64>().unwrap() - row.median_ms).abs() < 0.001);
            assert_eq!(fields[5].parse::<u64>().unwrap(), row.pairings);
            assert_eq!(fields[6].parse::<u64>().unwrap(), row.comparisons);
            assert_eq!(fields[7].parse::<usize>().unwrap(), row.repetitions);
        }
    }

    #[test]
    fn one_probe_gives_a_two_line_csv_per_backend() {
        let mut cfg = small_cfg();
        cfg.match_counts = vec![3];
        let result = bench_corpus(&cfg).unwrap();
        let csv = format_csv(&result);
        // Header, one structured row, one baseline row.
        assert_eq!(csv.lines().count(), 3);

        // A single-row result is exactly header plus row.
        let single = BenchResult {
            rows: vec![result.rows[0].clone()],
        };
        assert_eq!(format_csv(&single).lines().count(), 2);
    }

    #[test]
    fn emit_writes_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let mut cfg = small_cfg();
        cfg.match_counts = vec![1];
        let result = bench_corpus(&cfg).unwrap();
        emit_results(&result, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format_csv(&result));

        let bad = dir.path().join("missing").join("out.csv");
        assert!(matches!(
            emit_results(&result, &bad),
            Err(BenchError::Output { .. })
        ));
    }
}
