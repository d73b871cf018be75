//! The scheme rebuilt from an IBKEM and an IBE.
//!
//! Any collision-free full-identity malleable [`IbkemScheme`] combined with
//! an anonymous [`IbeScheme`] yields the same five-algorithm surface as
//! [`crate::scratch`]. A ciphertext is `(tag, body)`: the first ciphertext
//! of keyword `W` under a structure with randomness `u` is tagged
//! `FIM(W, u)`, later ones are tagged with the pointer hidden by their
//! predecessor, and the body always IBE-encrypts the next pointer under
//! identity `W`. Search decapsulates the structure head once to recover the
//! anchor tag, then follows pointers by IBE decryption.
//!
//! [`backend_conformance`] checks a candidate backend pair against the
//! interface laws the construction relies on; the shipped instantiation
//! ([`StdGenericSpchs`]) passes all of them.

use std::collections::{BTreeMap, HashSet};
use std::marker::PhantomData;

use rand::RngCore;
use thiserror::Error;

use crate::group::PairingCtx;
use crate::ibe::{HashMaskIbe, IbeMessage, IbeScheme, IBE_MSG_BYTES};
use crate::ibkem::{IbkemScheme, RoIbkem, ENCAP_KEY_BYTES};
use crate::store::{BackendId, TagIndexedStore};
use crate::wire::{put_bytes, Reader, WireCodec, WireError};

// Tags are IBE-encrypted as pointers, so the two spaces must be one space.
const _: () = assert!(ENCAP_KEY_BYTES == IBE_MSG_BYTES);

/// Keyword consumed by structure initialization. Full-identity
/// malleability makes the choice immaterial; a reserved out-of-band value
/// keeps it out of the user keyword space.
pub const RESERVED_INIT_KEYWORD: &[u8] = b"\x00SPCHS-INIT";

/// The construction, instantiated by an IBKEM and an IBE backend.
pub struct GenericSpchs<K: IbkemScheme, E: IbeScheme> {
    _backends: PhantomData<(K, E)>,
}

/// The shipped instantiation.
pub type StdGenericSpchs = GenericSpchs<RoIbkem, HashMaskIbe>;

#[derive(Clone, Debug, PartialEq)]
pub struct GenericMasterPublicKey<K: IbkemScheme, E: IbeScheme> {
    kem: K::MasterPublic,
    ibe: E::MasterPublic,
}

impl<K: IbkemScheme, E: IbeScheme> GenericMasterPublicKey<K, E> {
    pub fn kem(&self) -> &K::MasterPublic {
        &self.kem
    }

    pub fn ibe(&self) -> &E::MasterPublic {
        &self.ibe
    }
}

impl<K: IbkemScheme, E: IbeScheme> WireCodec for GenericMasterPublicKey<K, E> {
    fn write_wire(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.kem.to_wire());
        put_bytes(out, &self.ibe.to_wire());
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let kem = K::MasterPublic::from_wire(reader.bytes()?)?;
        let ibe = E::MasterPublic::from_wire(reader.bytes()?)?;
        Ok(GenericMasterPublicKey { kem, ibe })
    }
}

#[derive(Debug)]
pub struct GenericMasterSecretKey<K: IbkemScheme, E: IbeScheme> {
    kem: K::MasterSecret,
    ibe: E::MasterSecret,
}

impl<K: IbkemScheme, E: IbeScheme> WireCodec for GenericMasterSecretKey<K, E> {
    fn write_wire(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.kem.to_wire());
        put_bytes(out, &self.ibe.to_wire());
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let kem = K::MasterSecret::from_wire(reader.bytes()?)?;
        let ibe = E::MasterSecret::from_wire(reader.bytes()?)?;
        Ok(GenericMasterSecretKey { kem, ibe })
    }
}

/// Private half of a hidden structure: the encapsulation randomness (opaque
/// to this module) plus the current pointer of every keyword encrypted so
/// far.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericStructurePrivate<K: IbkemScheme> {
    u: K::Randomness,
    pointers: BTreeMap<Vec<u8>, IbeMessage>,
}

impl<K: IbkemScheme> GenericStructurePrivate<K> {
    pub fn anchor_emitted(&self, keyword: &[u8]) -> bool {
        self.pointers.contains_key(keyword)
    }

    pub fn keyword_count(&self) -> usize {
        self.pointers.len()
    }
}

impl<K: IbkemScheme> WireCodec for GenericStructurePrivate<K> {
    fn write_wire(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.u.to_wire());
        crate::wire::put_u32(out, self.pointers.len() as u32);
        for (keyword, pointer) in &self.pointers {
            put_bytes(out, keyword);
            pointer.write_wire(out);
        }
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let u = K::Randomness::from_wire(reader.bytes()?)?;
        let count = reader.u32()?;
        let mut pointers = BTreeMap::new();
        for _ in 0..count {
            let keyword = reader.bytes()?.to_vec();
            let pointer = IbeMessage::read_wire(reader)?;
            pointers.insert(keyword, pointer);
        }
        Ok(GenericStructurePrivate { u, pointers })
    }
}

/// Public half of a hidden structure: the IBKEM encapsulation.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericStructurePublic<K: IbkemScheme> {
    enc: K::Encapsulation,
}

impl<K: IbkemScheme> GenericStructurePublic<K> {
    pub fn encapsulation(&self) -> &K::Encapsulation {
        &self.enc
    }
}

impl<K: IbkemScheme> WireCodec for GenericStructurePublic<K> {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.enc.write_wire(out);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(GenericStructurePublic {
            enc: K::Encapsulation::read_wire(reader)?,
        })
    }
}

/// Keyword trapdoor: the IBKEM and IBE keys extracted for the keyword.
#[derive(Clone, Debug)]
pub struct GenericTrapdoor<K: IbkemScheme, E: IbeScheme> {
    kem_key: K::DecapsKey,
    ibe_key: E::DecKey,
}

impl<K: IbkemScheme, E: IbeScheme> GenericTrapdoor<K, E> {
    pub fn kem_key(&self) -> &K::DecapsKey {
        &self.kem_key
    }

    pub fn ibe_key(&self) -> &E::DecKey {
        &self.ibe_key
    }
}

impl<K: IbkemScheme, E: IbeScheme> WireCodec for GenericTrapdoor<K, E> {
    fn write_wire(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.kem_key.to_wire());
        put_bytes(out, &self.ibe_key.to_wire());
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let kem_key = K::DecapsKey::from_wire(reader.bytes()?)?;
        let ibe_key = E::DecKey::from_wire(reader.bytes()?)?;
        Ok(GenericTrapdoor { kem_key, ibe_key })
    }
}

/// Ciphertext `(tag, body)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericCiphertext<E: IbeScheme> {
    tag: [u8; ENCAP_KEY_BYTES],
    body: E::Ciphertext,
}

impl<E: IbeScheme> GenericCiphertext<E> {
    pub fn tag_bytes(&self) -> Vec<u8> {
        self.tag.to_vec()
    }

    pub fn payload_bytes(&self) -> Vec<u8> {
        self.body.to_wire()
    }

    pub fn from_store_parts(tag: &[u8], payload: &[u8]) -> Result<Self, WireError> {
        let tag: [u8; ENCAP_KEY_BYTES] =
            tag.try_into()
                .map_err(|_| crate::group::CodecError::InvalidLength {
                    expected: ENCAP_KEY_BYTES,
                    actual: tag.len(),
                })?;
        Ok(GenericCiphertext {
            tag,
            body: E::Ciphertext::from_wire(payload)?,
        })
    }
}

#[derive(Debug, Error)]
pub enum GenericSearchError {
    #[error("store backend is {} but this search needs {}", found.name(), expected.name())]
    WrongBackend { expected: BackendId, found: BackendId },
    #[error("structure head does not decapsulate")]
    InvalidStructureHead,
    #[error("malformed store: chain revisits record {ordinal}")]
    CycleDetected { ordinal: u64 },
    #[error("malformed store: chain longer than the store itself")]
    IterationLimitExceeded,
    #[error("malformed record {ordinal}")]
    MalformedRecord { ordinal: u64 },
}

/// What one structured search did: the matches in chain order plus the
/// backend operations it spent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenericSearchOutcome {
    pub ordinals: Vec<u64>,
    pub decapsulations: u64,
    pub ibe_decryptions: u64,
}

impl<K: IbkemScheme, E: IbeScheme> GenericSpchs<K, E> {
    /// Runs both backend setups and glues the key material together.
    pub fn system_setup<R: RngCore>(
        ctx: &PairingCtx,
        rng: &mut R,
    ) -> (GenericMasterPublicKey<K, E>, GenericMasterSecretKey<K, E>) {
        let (kem_public, kem_secret) = K::setup(ctx, rng);
        let (ibe_public, ibe_secret) = E::setup(ctx, rng);
        (
            GenericMasterPublicKey {
                kem: kem_public,
                ibe: ibe_public,
            },
            GenericMasterSecretKey {
                kem: kem_secret,
                ibe: ibe_secret,
            },
        )
    }

    /// Initializes a hidden structure under the reserved keyword.
    pub fn structure_init<R: RngCore>(
        ctx: &PairingCtx,
        mpk: &GenericMasterPublicKey<K, E>,
        rng: &mut R,
    ) -> (GenericStructurePrivate<K>, GenericStructurePublic<K>) {
        Self::structure_init_with_keyword(ctx, mpk, RESERVED_INIT_KEYWORD, rng)
    }

    /// Initializes a hidden structure under an arbitrary keyword; the
    /// choice does not affect which ciphertexts any trapdoor retrieves.
    pub fn structure_init_with_keyword<R: RngCore>(
        ctx: &PairingCtx,
        mpk: &GenericMasterPublicKey<K, E>,
        keyword: &[u8],
        rng: &mut R,
    ) -> (GenericStructurePrivate<K>, GenericStructurePublic<K>) {
        let u = K::sample_randomness(rng);
        let (_, enc) = K::encaps(ctx, &mpk.kem, keyword, &u);
        (
            GenericStructurePrivate {
                u,
                pointers: BTreeMap::new(),
            },
            GenericStructurePublic { enc },
        )
    }

    /// Encrypts one keyword under a hidden structure and advances its chain.
    pub fn structured_encrypt<R: RngCore>(
        ctx: &PairingCtx,
        mpk: &GenericMasterPublicKey<K, E>,
        keyword: &[u8],
        pri: &mut GenericStructurePrivate<K>,
        rng: &mut R,
    ) -> GenericCiphertext<E> {
        match pri.pointers.get_mut(keyword) {
            None => {
                let pointer = IbeMessage::random(rng);
                pri.pointers.insert(keyword.to_vec(), pointer);
                GenericCiphertext {
                    tag: K::fim(ctx, &mpk.kem, keyword, &pri.u).0,
                    body: E::encrypt(ctx, &mpk.ibe, keyword, &pointer, rng),
                }
            }
            Some(pointer) => {
                let next = IbeMessage::random(rng);
                let tag = pointer.0;
                *pointer = next;
                GenericCiphertext {
                    tag,
                    body: E::encrypt(ctx, &mpk.ibe, keyword, &next, rng),
                }
            }
        }
    }

    /// Extracts the keyword's IBKEM and IBE keys.
    pub fn trapdoor(
        ctx: &PairingCtx,
        msk: &GenericMasterSecretKey<K, E>,
        keyword: &[u8],
    ) -> GenericTrapdoor<K, E> {
        GenericTrapdoor {
            kem_key: K::extract(ctx, &msk.kem, keyword),
            ibe_key: E::extract(ctx, &msk.ibe, keyword),
        }
    }

    /// Walks the chain of the trapdoor's keyword under one structure head.
    ///
    /// One decapsulation recovers the anchor tag; each match costs one IBE
    /// decryption to disclose the next tag. Cycles in an adversarial store
    /// abort with an error.
    pub fn structured_search(
        ctx: &PairingCtx,
        _mpk: &GenericMasterPublicKey<K, E>,
        public: &GenericStructurePublic<K>,
        store: &TagIndexedStore,
        trap: &GenericTrapdoor<K, E>,
    ) -> Result<GenericSearchOutcome, GenericSearchError> {
        if store.backend() != BackendId::Generic {
            return Err(GenericSearchError::WrongBackend {
                expected: BackendId::Generic,
                found: store.backend(),
            });
        }
        let mut outcome = GenericSearchOutcome::default();
        let mut visited = HashSet::new();
        outcome.decapsulations = 1;
        let mut tag = K::decaps(ctx, &trap.kem_key, &public.enc)
            .map_err(|_| GenericSearchError::InvalidStructureHead)?
            .0;
        loop {
            let record = match store.find_by_tag(&tag) {
                None => return Ok(outcome),
                Some(record) => record,
            };
            if !visited.insert(record.ordinal) {
                return Err(GenericSearchError::CycleDetected {
                    ordinal: record.ordinal,
                });
            }
            if outcome.ordinals.len() >= store.len() {
                return Err(GenericSearchError::IterationLimitExceeded);
            }
            outcome.ordinals.push(record.ordinal);
            let ct = GenericCiphertext::<E>::from_store_parts(&record.tag, &record.payload)
                .map_err(|_| GenericSearchError::MalformedRecord {
                    ordinal: record.ordinal,
                })?;
            outcome.ibe_decryptions += 1;
            tag = E::decrypt(ctx, &trap.ibe_key, &ct.body)
                .map_err(|_| GenericSearchError::MalformedRecord {
                    ordinal: record.ordinal,
                })?
                .0;
        }
    }
}

/// One interface law a backend pair failed, with the inputs that broke it.
#[derive(Clone, Debug)]
pub struct LawFailure {
    pub law: &'static str,
    pub counterexample: String,
}

/// Result of running the backend laws.
#[derive(Clone, Debug, Default)]
pub struct ConformanceReport {
    pub failures: Vec<LawFailure>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const CONSISTENCY_TRIALS: usize = 100;
const MALLEABILITY_TRIALS: usize = 100;
const COLLISION_TRIALS: usize = 1000;
const IBE_TRIALS: usize = 100;

/// Checks the laws the construction needs from its backends: IBKEM
/// consistency, full-identity malleability, sampled collision-freeness, and
/// IBE round-trip consistency with fresh ciphertexts.
pub fn backend_conformance<K: IbkemScheme, E: IbeScheme, R: RngCore>(
    ctx: &PairingCtx,
    rng: &mut R,
) -> ConformanceReport {
    let mut report = ConformanceReport::default();
    let (kem_public, kem_secret) = K::setup(ctx, rng);

    for i in 0..CONSISTENCY_TRIALS {
        let id = format!("conf-id-{i}");
        let r = K::sample_randomness(rng);
        let (key, enc) = K::encaps(ctx, &kem_public, id.as_bytes(), &r);
        let dk = K::extract(ctx, &kem_secret, id.as_bytes());
        if K::decaps(ctx, &dk, &enc).ok() != Some(key) {
            report.failures.push(LawFailure {
                law: "ibkem-consistency",
                counterexample: format!("identity {id:?}"),
            });
            break;
        }
    }

    for i in 0..MALLEABILITY_TRIALS {
        let id = format!("conf-src-{i}");
        let other = format!("conf-dst-{i}");
        let r = K::sample_randomness(rng);
        let (_, enc) = K::encaps(ctx, &kem_public, id.as_bytes(), &r);
        let dk = K::extract(ctx, &kem_secret, other.as_bytes());
        let forecast = K::fim(ctx, &kem_public, other.as_bytes(), &r);
        if K::decaps(ctx, &dk, &enc).ok() != Some(forecast) {
            report.failures.push(LawFailure {
                law: "ibkem-full-identity-malleability",
                counterexample: format!("encapsulated for {id:?}, decapsulated by {other:?}"),
            });
            break;
        }
    }

    let mut seen = HashSet::with_capacity(COLLISION_TRIALS);
    for i in 0..COLLISION_TRIALS {
        // Reuse identities across trials so collision-freeness leans on the
        // randomness as well, never on distinct identities alone.
        let id = format!("conf-col-{}", i % 37);
        let r = K::sample_randomness(rng);
        if !seen.insert(K::fim(ctx, &kem_public, id.as_bytes(), &r)) {
            report.failures.push(LawFailure {
                law: "ibkem-collision-freeness",
                counterexample: format!("duplicate forecast at trial {i}, identity {id:?}"),
            });
            break;
        }
    }

    let (ibe_public, ibe_secret) = E::setup(ctx, rng);
    for i in 0..IBE_TRIALS {
        let id = format!("conf-ibe-{i}");
        let message = IbeMessage::random(rng);
        let ct = E::encrypt(ctx, &ibe_public, id.as_bytes(), &message, rng);
        let dk = E::extract(ctx, &ibe_secret, id.as_bytes());
        if E::decrypt(ctx, &dk, &ct).ok() != Some(message) {
            report.failures.push(LawFailure {
                law: "ibe-consistency",
                counterexample: format!("identity {id:?}"),
            });
            break;
        }
    }

    let probe = IbeMessage::random(rng);
    let ct_a = E::encrypt(ctx, &ibe_public, b"conf-fresh", &probe, rng);
    let ct_b = E::encrypt(ctx, &ibe_public, b"conf-fresh", &probe, rng);
    if ct_a == ct_b {
        report.failures.push(LawFailure {
            law: "ibe-freshness",
            counterexample: "two encryptions of one message coincide".to_string(),
        });
    }

    report
}
