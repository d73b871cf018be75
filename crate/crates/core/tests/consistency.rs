//! Cross-module consistency: randomized corpora, both backends, exact
//! agreement between search output and the encryption-time log.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use spchs_core::generic::{GenericSpchs, StdGenericSpchs};
use spchs_core::group::PairingCtx;
use spchs_core::ibe::HashMaskIbe;
use spchs_core::ibkem::RoIbkem;
use spchs_core::scratch;
use spchs_core::store::TagIndexedStore;
use spchs_testkit::{build_generic_corpus, build_scratch_corpus, CorpusScript};

#[test]
fn scratch_search_agrees_with_the_encryption_log() {
    let ctx = PairingCtx::new();
    let mut rng = ChaCha20Rng::seed_from_u64(401);
    let (mpk, msk) = scratch::system_setup(&ctx, 128, "bytes", &mut rng).unwrap();

    for round in 0..6 {
        let script = CorpusScript::random(&mut rng, 5, 50, 300);
        let corpus = build_scratch_corpus(&ctx, &mpk, &script, &mut rng);
        for (structure, public) in corpus.publics.iter().enumerate() {
            for keyword in 0..script.keywords.len() {
                let trap = scratch::trapdoor(&ctx, &msk, &script.keywords[keyword]);
                let hits =
                    scratch::structured_search(&ctx, &mpk, public, &corpus.store, &trap)
                        .unwrap();
                assert_eq!(
                    hits,
                    corpus.truth.expected(structure, keyword),
                    "round {round}, structure {structure}, keyword {keyword}"
                );
            }
        }
    }
}

#[test]
fn generic_search_agrees_with_the_encryption_log() {
    let ctx = PairingCtx::new();
    let mut rng = ChaCha20Rng::seed_from_u64(402);
    let (mpk, msk) = StdGenericSpchs::system_setup(&ctx, &mut rng);

    // Five structures, ten keywords, up to eight ciphertexts per chain.
    let keywords: Vec<Vec<u8>> = (0..10).map(|i| format!("kw-{i}").into_bytes()).collect();
    let mut events = Vec::new();
    for structure in 0..5 {
        for keyword in 0..keywords.len() {
            let count = rng.gen_range(0..=8);
            for _ in 0..count {
                events.push((structure, keyword));
            }
        }
    }
    use rand::seq::SliceRandom;
    events.shuffle(&mut rng);
    let script = CorpusScript {
        structures: 5,
        keywords,
        events,
    };

    let corpus = build_generic_corpus::<RoIbkem, HashMaskIbe, _>(&ctx, &mpk, &script, &mut rng);
    for (structure, public) in corpus.publics.iter().enumerate() {
        for keyword in 0..script.keywords.len() {
            let trap = StdGenericSpchs::trapdoor(&ctx, &msk, &script.keywords[keyword]);
            let outcome =
                StdGenericSpchs::structured_search(&ctx, &mpk, public, &corpus.store, &trap)
                    .unwrap();
            let expected = corpus.truth.expected(structure, keyword);
            assert_eq!(outcome.ordinals, expected);
            assert_eq!(outcome.decapsulations, 1);
            assert_eq!(outcome.ibe_decryptions, expected.len() as u64);
        }
    }
}

#[test]
fn both_backends_retrieve_identically_labelled_results() {
    let ctx = PairingCtx::new();
    let mut rng = ChaCha20Rng::seed_from_u64(403);
    let (scratch_mpk, scratch_msk) = scratch::system_setup(&ctx, 128, "bytes", &mut rng).unwrap();
    let (generic_mpk, generic_msk) = StdGenericSpchs::system_setup(&ctx, &mut rng);

    for _ in 0..3 {
        let script = CorpusScript::random(&mut rng, 4, 20, 120);
        let scratch_corpus = build_scratch_corpus(&ctx, &scratch_mpk, &script, &mut rng);
        let generic_corpus =
            build_generic_corpus::<RoIbkem, HashMaskIbe, _>(&ctx, &generic_mpk, &script, &mut rng);

        for structure in 0..script.structures {
            for keyword in 0..script.keywords.len() {
                let trap = scratch::trapdoor(&ctx, &scratch_msk, &script.keywords[keyword]);
                let scratch_hits = scratch::structured_search(
                    &ctx,
                    &scratch_mpk,
                    &scratch_corpus.publics[structure],
                    &scratch_corpus.store,
                    &trap,
                )
                .unwrap();

                let trap = GenericSpchs::<RoIbkem, HashMaskIbe>::trapdoor(
                    &ctx,
                    &generic_msk,
                    &script.keywords[keyword],
                );
                let generic_hits = StdGenericSpchs::structured_search(
                    &ctx,
                    &generic_mpk,
                    &generic_corpus.publics[structure],
                    &generic_corpus.store,
                    &trap,
                )
                .unwrap()
                .ordinals;

                // Ordinals differ across the two stores; the
                // (structure, keyword, position) labels must not.
                let scratch_labels: Vec<_> = scratch_hits
                    .iter()
                    .map(|&o| scratch_corpus.truth.label_of(o).unwrap())
                    .collect();
                let generic_labels: Vec<_> = generic_hits
                    .iter()
                    .map(|&o| generic_corpus.truth.label_of(o).unwrap())
                    .collect();
                assert_eq!(scratch_labels, generic_labels);
                assert_eq!(scratch_hits.len(), script.chain_length(structure, keyword));
            }
        }
    }
}

#[test]
fn search_is_unaffected_by_a_store_file_round_trip() {
    let ctx = PairingCtx::new();
    let mut rng = ChaCha20Rng::seed_from_u64(404);
    let (mpk, msk) = scratch::system_setup(&ctx, 128, "bytes", &mut rng).unwrap();
    let script = CorpusScript::random(&mut rng, 3, 10, 80);
    let corpus = build_scratch_corpus(&ctx, &mpk, &script, &mut rng);

    let reloaded = TagIndexedStore::from_bytes(&corpus.store.to_bytes()).unwrap();
    for (structure, public) in corpus.publics.iter().enumerate() {
        for keyword in 0..script.keywords.len() {
            let trap = scratch::trapdoor(&ctx, &msk, &script.keywords[keyword]);
            let hits = scratch::structured_search(&ctx, &mpk, public, &reloaded, &trap).unwrap();
            assert_eq!(hits, corpus.truth.expected(structure, keyword));
        }
    }
}
