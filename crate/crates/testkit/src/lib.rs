//! Randomized corpus scripts and encryption-time ground truth for the
//! scheme test suites.
//!
//! A [`CorpusScript`] is a backend-agnostic description of who encrypts
//! what in which order. Builders replay a script against a backend, filling
//! a store and recording, at encryption time, which ordinal belongs to
//! which `(structure, keyword)` chain. Search results are then checked for
//! exact set-and-order equality against that log — the log is written by
//! the encryptor, never derived from the search path under test.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use spchs_core::generic::{GenericMasterPublicKey, GenericSpchs, GenericStructurePublic};
use spchs_core::group::PairingCtx;
use spchs_core::ibe::IbeScheme;
use spchs_core::ibkem::IbkemScheme;
use spchs_core::scratch::{self, MasterPublicKey, StructurePublic};
use spchs_core::store::{BackendId, TagIndexedStore};
use spchs_core::wire::WireCodec;

/// Backend-agnostic corpus description: the keyword universe and the
/// ordered list of `(structure, keyword)` encryption events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusScript {
    pub structures: usize,
    pub keywords: Vec<Vec<u8>>,
    pub events: Vec<(usize, usize)>,
}

impl CorpusScript {
    /// Draws a random script with interleaved chains. Keywords include the
    /// empty string and raw non-UTF-8 bytes, not just printable names.
    pub fn random<R: Rng>(
        rng: &mut R,
        max_structures: usize,
        max_keywords: usize,
        max_ciphertexts: usize,
    ) -> Self {
        let structures = rng.gen_range(1..=max_structures);
        let keyword_count = rng.gen_range(1..=max_keywords);
        let mut seen = std::collections::HashSet::new();
        let mut keywords = Vec::with_capacity(keyword_count);
        while keywords.len() < keyword_count {
            let i = keywords.len();
            let keyword: Vec<u8> = match i % 5 {
                0 if i == 0 => Vec::new(),
                1 => {
                    let len = rng.gen_range(1..=12);
                    (0..len).map(|_| rng.gen::<u8>()).collect()
                }
                _ => format!("kw-{i}").into_bytes(),
            };
            if seen.insert(keyword.clone()) {
                keywords.push(keyword);
            }
        }

        let event_count = rng.gen_range(0..=max_ciphertexts);
        let mut events = Vec::with_capacity(event_count);
        for _ in 0..event_count {
            events.push((
                rng.gen_range(0..structures),
                rng.gen_range(0..keywords.len()),
            ));
        }
        events.shuffle(rng);

        CorpusScript {
            structures,
            keywords,
            events,
        }
    }

    /// How many ciphertexts of `(structure, keyword)` the script produces.
    pub fn chain_length(&self, structure: usize, keyword: usize) -> usize {
        self.events
            .iter()
            .filter(|&&(s, k)| s == structure && k == keyword)
            .count()
    }
}

/// Encryption-time log: ordinals per `(structure, keyword)` chain, in
/// insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundTruth {
    chains: BTreeMap<(usize, usize), Vec<u64>>,
}

impl GroundTruth {
    fn record(&mut self, structure: usize, keyword: usize, ordinal: u64) {
        self.chains
            .entry((structure, keyword))
            .or_default()
            .push(ordinal);
    }

    /// The exact expected search output for one `(structure, keyword)`.
    pub fn expected(&self, structure: usize, keyword: usize) -> &[u64] {
        self.chains
            .get(&(structure, keyword))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Maps an ordinal back to `(structure, keyword, position-in-chain)`.
    pub fn label_of(&self, ordinal: u64) -> Option<(usize, usize, usize)> {
        for (&(structure, keyword), ordinals) in &self.chains {
            if let Some(position) = ordinals.iter().position(|&o| o == ordinal) {
                return Some((structure, keyword, position));
            }
        }
        None
    }

    pub fn total_ciphertexts(&self) -> usize {
        self.chains.values().map(Vec::len).sum()
    }
}

/// A script replayed against the direct construction.
pub struct ScratchCorpus {
    pub store: TagIndexedStore,
    pub publics: Vec<StructurePublic>,
    pub truth: GroundTruth,
}

pub fn build_scratch_corpus<R: Rng>(
    ctx: &PairingCtx,
    mpk: &MasterPublicKey,
    script: &CorpusScript,
    rng: &mut R,
) -> ScratchCorpus {
    let mut store = TagIndexedStore::new(BackendId::Scratch);
    let mut states = Vec::with_capacity(script.structures);
    for _ in 0..script.structures {
        states.push(scratch::structure_init(ctx, mpk, rng));
    }
    let mut truth = GroundTruth::default();
    for &(structure, keyword) in &script.events {
        let (pri, public) = &mut states[structure];
        let ct = scratch::structured_encrypt(ctx, mpk, &script.keywords[keyword], pri, rng);
        let ordinal = store
            .insert(ct.tag_bytes(), ct.payload_bytes(), public.to_wire())
            .expect("fresh tags cannot collide");
        truth.record(structure, keyword, ordinal);
    }
    ScratchCorpus {
        store,
        publics: states.into_iter().map(|(_, public)| public).collect(),
        truth,
    }
}

/// A script replayed against the IBKEM+IBE construction.
pub struct GenericCorpus<K: IbkemScheme> {
    pub store: TagIndexedStore,
    pub publics: Vec<GenericStructurePublic<K>>,
    pub truth: GroundTruth,
}

pub fn build_generic_corpus<K: IbkemScheme, E: IbeScheme, R: Rng>(
    ctx: &PairingCtx,
    mpk: &GenericMasterPublicKey<K, E>,
    script: &CorpusScript,
    rng: &mut R,
) -> GenericCorpus<K> {
    let mut store = TagIndexedStore::new(BackendId::Generic);
    let mut states = Vec::with_capacity(script.structures);
    for _ in 0..script.structures {
        states.push(GenericSpchs::<K, E>::structure_init(ctx, mpk, rng));
    }
    let mut truth = GroundTruth::default();
    for &(structure, keyword) in &script.events {
        let (pri, public) = &mut states[structure];
        let ct = GenericSpchs::<K, E>::structured_encrypt(
            ctx,
            mpk,
            &script.keywords[keyword],
            pri,
            rng,
        );
        let ordinal = store
            .insert(ct.tag_bytes(), ct.payload_bytes(), public.to_wire())
            .expect("fresh tags cannot collide");
        truth.record(structure, keyword, ordinal);
    }
    GenericCorpus {
        store,
        publics: states.into_iter().map(|(_, public)| public).collect(),
        truth,
    }
}
