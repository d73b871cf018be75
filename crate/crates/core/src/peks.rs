//! Linear-scan PEKS baseline sharing the scheme's master keys.
//!
//! The classic hash-then-compare construction: a ciphertext is
//! `(g^r, KDF(e(P, H(W))^r))` and the server tests it against a trapdoor by
//! recomputing the digest through one pairing. Searching always tests every
//! stored ciphertext, which is exactly the `O(n)` behavior the structured
//! scheme is benchmarked against. Keys and trapdoors are the ones from
//! [`crate::scratch`], so both sides of the comparison price the same
//! delegation.

use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{G1Elem, GtElem, PairingCtx, Scalar};
use crate::scratch::{MasterPublicKey, SearchTrapdoor};
use crate::store::{BackendId, TagIndexedStore};
use crate::wire::{Reader, WireCodec, WireError};

/// Fixed KDF digest length.
pub const PEKS_DIGEST_BYTES: usize = 32;

const PEKS_KDF_TAG: &[u8] = b"SPCHS-PEKS-KDF-v1";

fn kdf(value: &GtElem) -> [u8; PEKS_DIGEST_BYTES] {
    let mut hasher = Sha256::new();
    hasher.update(PEKS_KDF_TAG);
    hasher.update(value.to_bytes());
    hasher.finalize().into()
}

/// Keyword ciphertext `(a, b) = (g^r, KDF(e(P, H(W))^r))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeksCiphertext {
    a: G1Elem,
    b: [u8; PEKS_DIGEST_BYTES],
}

impl PeksCiphertext {
    pub fn a(&self) -> &G1Elem {
        &self.a
    }

    pub fn digest(&self) -> &[u8; PEKS_DIGEST_BYTES] {
        &self.b
    }

    /// Store lookup key; PEKS never looks records up by tag, but the store
    /// format wants a unique one and `a` is unique per encryption.
    pub fn tag_bytes(&self) -> Vec<u8> {
        self.a.to_bytes().to_vec()
    }

    pub fn payload_bytes(&self) -> Vec<u8> {
        self.b.to_vec()
    }

    pub fn from_store_parts(tag: &[u8], payload: &[u8]) -> Result<Self, WireError> {
        let a = G1Elem::from_bytes(tag)?;
        let mut reader = Reader::new(payload);
        let b = reader.take(PEKS_DIGEST_BYTES)?;
        reader.expect_end()?;
        Ok(PeksCiphertext {
            a,
            b: b.try_into().expect("digest length checked"),
        })
    }
}

impl WireCodec for PeksCiphertext {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.a.write_wire(out);
        out.extend_from_slice(&self.b);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let a = G1Elem::read_wire(reader)?;
        let b = reader.take(PEKS_DIGEST_BYTES)?;
        Ok(PeksCiphertext {
            a,
            b: b.try_into().expect("digest length checked"),
        })
    }
}

/// Encrypts a keyword under the shared master public key.
pub fn peks_encrypt(
    ctx: &PairingCtx,
    mpk: &MasterPublicKey,
    keyword: &[u8],
    rng: &mut impl RngCore,
) -> PeksCiphertext {
    let r = Scalar::random_nonzero(rng);
    let a = ctx.g1_mul(&G1Elem::generator(), &r);
    let hashed = ctx.hash_to_g2(keyword);
    let sealed = ctx.gt_exp(&ctx.pair(mpk.p(), &hashed), &r);
    PeksCiphertext { a, b: kdf(&sealed) }
}

/// Tests one ciphertext against a trapdoor; exactly one pairing.
pub fn peks_test(ctx: &PairingCtx, ct: &PeksCiphertext, trap: &SearchTrapdoor) -> bool {
    kdf(&ctx.pair(&ct.a, trap.element())) == ct.b
}

#[derive(Debug, Error)]
pub enum PeksSearchError {
    #[error("store backend is {} but this search needs {}", found.name(), BackendId::Peks.name())]
    WrongBackend { found: BackendId },
    #[error("malformed record {ordinal}: {source}")]
    MalformedRecord { ordinal: u64, source: WireError },
}

/// Tests every record in the store; `n` records cost `n` pairings no matter
/// how many match. Matching ordinals come back in insertion order.
pub fn peks_search(
    ctx: &PairingCtx,
    store: &TagIndexedStore,
    trap: &SearchTrapdoor,
) -> Result<Vec<u64>, PeksSearchError> {
    if store.backend() != BackendId::Peks {
        return Err(PeksSearchError::WrongBackend {
            found: store.backend(),
        });
    }
    let mut hits = Vec::new();
    for record in store.records() {
        let ct = PeksCiphertext::from_store_parts(&record.tag, &record.payload).map_err(
            |source| PeksSearchError::MalformedRecord {
                ordinal: record.ordinal,
                source,
            },
        )?;
        if peks_test(ctx, &ct, trap) {
            hits.push(record.ordinal);
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scratch::{system_setup, trapdoor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0x9e45)
    }

    #[test]
    fn matching_trapdoor_tests_true() {
        let ctx = PairingCtx::new();
        let mut rng = rng();
        let (mpk, msk) = system_setup(&ctx, 128, "bytes", &mut rng).unwrap();
        let ct = peks_encrypt(&ctx, &mpk, b"w", &mut rng);
        assert!(peks_test(&ctx, &ct, &trapdoor(&ctx, &msk, b"w")));
        assert!(!peks_test(&ctx, &ct, &trapdoor(&ctx, &msk, b"v")));
    }

    #[test]
    fn encryption_is_randomized() {
        let ctx = PairingCtx::new();
        let mut rng = rng();
        let (mpk, _) = system_setup(&ctx, 128, "bytes", &mut rng).unwrap();
        let ct1 = peks_encrypt(&ctx, &mpk, b"w", &mut rng);
        let ct2 = peks_encrypt(&ctx, &mpk, b"w", &mut rng);
        assert_ne!(ct1, ct2);
        assert_ne!(ct1.a, ct2.a);
    }

    #[test]
    fn one_test_is_one_pairing() {
        let ctx = PairingCtx::new();
        let mut rng = rng();
        let (mpk, msk) = system_setup(&ctx, 128, "bytes", &mut rng).unwrap();
        let ct = peks_encrypt(&ctx, &mpk, b"w", &mut rng);
        let trap = trapdoor(&ctx, &msk, b"w");
        ctx.reset_counters();
        peks_test(&ctx, &ct, &trap);
        assert_eq!(ctx.counters().pairings, 1);
    }

    #[test]
    fn empty_store_searches_for_free() {
        let ctx = PairingCtx::new();
        let mut rng = rng();
        let (_, msk) = system_setup(&ctx, 128, "bytes", &mut rng).unwrap();
        let store = TagIndexedStore::new(BackendId::Peks);
        let trap = trapdoor(&ctx, &msk, b"w");
        ctx.reset_counters();
        assert!(peks_search(&ctx, &store, &trap).unwrap().is_empty());
        assert_eq!(ctx.counters().pairings, 0);
    }

    #[test]
    fn search_scans_the_whole_store() {
        let ctx = PairingCtx::new();
        let mut rng = rng();
        let (mpk, msk) = system_setup(&ctx, 128, "bytes", &mut rng).unwrap();
        let mut store = TagIndexedStore::new(BackendId::Peks);
        let mut expected = Vec::new();
        for i in 0..100 {
            let keyword = if i % 14 == 3 { b"hit".as_slice() } else { b"miss" };
            let ct = peks_encrypt(&ctx, &mpk, keyword, &mut rng);
            let ordinal = store
                .insert(ct.tag_bytes(), ct.payload_bytes(), Vec::new())
                .unwrap();
            if keyword == b"hit" {
                expected.push(ordinal);
            }
        }
        assert_eq!(expected.len(), 7);

        let trap = trapdoor(&ctx, &msk, b"hit");
        ctx.reset_counters();
        let hits = peks_search(&ctx, &store, &trap).unwrap();
        assert_eq!(hits, expected);
        assert_eq!(ctx.counters().pairings, 100);
    }

    #[test]
    fn all_match_corpus_still_costs_n_pairings() {
        let ctx = PairingCtx::new();
        let mut rng = rng();
        let (mpk, msk) = system_setup(&ctx, 128, "bytes", &mut rng).unwrap();
        let mut store = TagIndexedStore::new(BackendId::Peks);
        for _ in 0..20 {
            let ct = peks_encrypt(&ctx, &mpk, b"w", &mut rng);
            store
                .insert(ct.tag_bytes(), ct.payload_bytes(), Vec::new())
                .unwrap();
        }
        let trap = trapdoor(&ctx, &msk, b"w");
        ctx.reset_counters();
        let hits = peks_search(&ctx, &store, &trap).unwrap();
        assert_eq!(hits.len(), 20);
        assert_eq!(ctx.counters().pairings, 20);
    }

    #[test]
    fn search_rejects_other_backends() {
        let ctx = PairingCtx::new();
        let mut rng = rng();
        let (_, msk) = system_setup(&ctx, 128, "bytes", &mut rng).unwrap();
        let store = TagIndexedStore::new(BackendId::Scratch);
        assert!(matches!(
            peks_search(&ctx, &store, &trapdoor(&ctx, &msk, b"w")),
            Err(PeksSearchError::WrongBackend { .. })
        ));
    }
}
