//! The direct pairing construction of keyword-searchable ciphertexts with
//! hidden star-like structures.
//!
//! A receiver publishes `P = g^s` and keeps `s`. A sender initializes a
//! hidden structure `(u, g^u)` and encrypts keywords under it; the first
//! ciphertext of a keyword `W` is anchored at `e(P, H(W))^u` and every
//! ciphertext hides a fresh random pointer that becomes the tag of the next
//! one, forming an invisible per-keyword chain. Given the trapdoor
//! `T_W = H(W)^s`, a server recomputes the anchor from the public head alone
//! and walks the chain, spending one pairing for the anchor and one per
//! matching ciphertext.

use std::collections::{BTreeMap, HashSet};

use chacha20poly1305::aead::{Aead, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, KeyInit, Nonce};
use rand::RngCore;
use thiserror::Error;

use crate::group::{G1Elem, G2Elem, GtElem, PairingCtx, Scalar, G1_BYTES, GT_BYTES};
use crate::keyfile::{KeyRole, KEY_MAGIC};
use crate::store::{BackendId, TagIndexedStore};
use crate::wire::{put_bytes, Reader, WireCodec, WireError};

/// Name of the pairing instantiation carried inside master public keys.
pub const GROUP_TAG: &str = "BLS12-381";
/// Shape of the ciphertext space carried inside master public keys.
pub const CIPHERTEXT_SPACE_TAG: &str = "GTxG1xGT";
/// The only supported security level, in bits.
pub const SECURITY_BITS: u32 = 128;

/// Symmetric key bytes for sealed structure-state export.
pub const PRI_SEAL_KEY_BYTES: usize = 32;
const PRI_SEAL_NONCE_BYTES: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SetupError {
    #[error("unsupported security level: {0} bits (only {SECURITY_BITS} is available)")]
    UnsupportedSecurityLevel(u32),
}

/// Receiver's public material: the group descriptor, `P = g^s`, and the
/// space tags fixed at setup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterPublicKey {
    group_tag: String,
    p: G1Elem,
    keyword_space_tag: String,
    ciphertext_space_tag: String,
}

impl MasterPublicKey {
    pub fn p(&self) -> &G1Elem {
        &self.p
    }

    pub fn group_tag(&self) -> &str {
        &self.group_tag
    }

    pub fn keyword_space_tag(&self) -> &str {
        &self.keyword_space_tag
    }

    pub fn ciphertext_space_tag(&self) -> &str {
        &self.ciphertext_space_tag
    }
}

impl WireCodec for MasterPublicKey {
    fn write_wire(&self, out: &mut Vec<u8>) {
        put_bytes(out, self.group_tag.as_bytes());
        put_bytes(out, self.keyword_space_tag.as_bytes());
        put_bytes(out, self.ciphertext_space_tag.as_bytes());
        self.p.write_wire(out);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let mut tag = |reader: &mut Reader<'_>| -> Result<String, WireError> {
            String::from_utf8(reader.bytes()?.to_vec()).map_err(|_| {
                WireError::Codec(crate::group::CodecError::InvalidElement {
                    group: "space tag",
                })
            })
        };
        let group_tag = tag(reader)?;
        let keyword_space_tag = tag(reader)?;
        let ciphertext_space_tag = tag(reader)?;
        let p = G1Elem::read_wire(reader)?;
        Ok(MasterPublicKey {
            group_tag,
            p,
            keyword_space_tag,
            ciphertext_space_tag,
        })
    }
}

/// Receiver's master secret exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterSecretKey {
    s: Scalar,
}

impl MasterSecretKey {
    pub fn exponent(&self) -> &Scalar {
        &self.s
    }
}

impl WireCodec for MasterSecretKey {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.s.write_wire(out);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(MasterSecretKey {
            s: Scalar::read_wire(reader)?,
        })
    }
}

/// Sender-local private half of a hidden structure: the exponent `u` plus
/// the current chain pointer of every keyword encrypted so far.
///
/// A keyword appears in the pointer table exactly when its first ciphertext
/// under this structure has been produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructurePrivate {
    u: Scalar,
    pointers: BTreeMap<Vec<u8>, GtElem>,
}

impl StructurePrivate {
    pub fn pointer(&self, keyword: &[u8]) -> Option<&GtElem> {
        self.pointers.get(keyword)
    }

    /// Whether the first ciphertext of `keyword` exists under this structure.
    pub fn anchor_emitted(&self, keyword: &[u8]) -> bool {
        self.pointers.contains_key(keyword)
    }

    pub fn keyword_count(&self) -> usize {
        self.pointers.len()
    }

    pub fn keywords(&self) -> impl Iterator<Item = &[u8]> {
        self.pointers.keys().map(|k| k.as_slice())
    }
}

impl WireCodec for StructurePrivate {
    /// Canonical form: `u`, then the pointer table sorted by keyword bytes.
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.u.write_wire(out);
        crate::wire::put_u32(out, self.pointers.len() as u32);
        for (keyword, pointer) in &self.pointers {
            put_bytes(out, keyword);
            pointer.write_wire(out);
        }
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let u = Scalar::read_wire(reader)?;
        let count = reader.u32()?;
        let mut pointers = BTreeMap::new();
        for _ in 0..count {
            let keyword = reader.bytes()?.to_vec();
            let pointer = GtElem::read_wire(reader)?;
            pointers.insert(keyword, pointer);
        }
        Ok(StructurePrivate { u, pointers })
    }
}

/// Public head of a hidden structure (`g^u`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructurePublic {
    head: G1Elem,
}

impl StructurePublic {
    pub fn head(&self) -> &G1Elem {
        &self.head
    }
}

impl WireCodec for StructurePublic {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.head.write_wire(out);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(StructurePublic {
            head: G1Elem::read_wire(reader)?,
        })
    }
}

/// Keyword-searchable ciphertext `(c1, c2, c3)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpchsCiphertext {
    c1: GtElem,
    c2: G1Elem,
    c3: GtElem,
}

impl SpchsCiphertext {
    pub fn c1(&self) -> &GtElem {
        &self.c1
    }

    pub fn c2(&self) -> &G1Elem {
        &self.c2
    }

    pub fn c3(&self) -> &GtElem {
        &self.c3
    }

    /// Store lookup key: the canonical bytes of the first component.
    pub fn tag_bytes(&self) -> Vec<u8> {
        self.c1.to_bytes().to_vec()
    }

    /// Remaining components as a store payload.
    pub fn payload_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(G1_BYTES + GT_BYTES);
        self.c2.write_wire(&mut out);
        self.c3.write_wire(&mut out);
        out
    }

    pub fn from_store_parts(tag: &[u8], payload: &[u8]) -> Result<Self, WireError> {
        let c1 = GtElem::from_bytes(tag)?;
        let mut reader = Reader::new(payload);
        let c2 = G1Elem::read_wire(&mut reader)?;
        let c3 = GtElem::read_wire(&mut reader)?;
        reader.expect_end()?;
        Ok(SpchsCiphertext { c1, c2, c3 })
    }
}

/// Per-keyword search delegation token `T_W = H(W)^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchTrapdoor {
    t: G2Elem,
}

impl SearchTrapdoor {
    pub fn element(&self) -> &G2Elem {
        &self.t
    }
}

impl WireCodec for SearchTrapdoor {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.t.write_wire(out);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(SearchTrapdoor {
            t: G2Elem::read_wire(reader)?,
        })
    }
}

/// Picks the master key pair: `s` uniform nonzero, `P = g^s`.
pub fn system_setup(
    ctx: &PairingCtx,
    security_bits: u32,
    keyword_space_tag: &str,
    rng: &mut impl RngCore,
) -> Result<(MasterPublicKey, MasterSecretKey), SetupError> {
    if security_bits != SECURITY_BITS {
        return Err(SetupError::UnsupportedSecurityLevel(security_bits));
    }
    let s = Scalar::random_nonzero(rng);
    let p = ctx.g1_mul(&G1Elem::generator(), &s);
    let mpk = MasterPublicKey {
        group_tag: GROUP_TAG.to_string(),
        p,
        keyword_space_tag: keyword_space_tag.to_string(),
        ciphertext_space_tag: CIPHERTEXT_SPACE_TAG.to_string(),
    };
    Ok((mpk, MasterSecretKey { s }))
}

/// Initializes a hidden structure: `u` uniform nonzero, head `g^u`, empty
/// pointer table.
pub fn structure_init(
    ctx: &PairingCtx,
    _mpk: &MasterPublicKey,
    rng: &mut impl RngCore,
) -> (StructurePrivate, StructurePublic) {
    let u = Scalar::random_nonzero(rng);
    let head = ctx.g1_mul(&G1Elem::generator(), &u);
    (
        StructurePrivate {
            u,
            pointers: BTreeMap::new(),
        },
        StructurePublic { head },
    )
}

/// Starts a fresh structure for subsequent encryptions.
///
/// The old private part can be destroyed; ciphertexts already uploaded stay
/// reachable through the old public head, and nothing links the new chain to
/// it.
pub fn rotate_structure(
    ctx: &PairingCtx,
    mpk: &MasterPublicKey,
    rng: &mut impl RngCore,
) -> (StructurePrivate, StructurePublic) {
    structure_init(ctx, mpk, rng)
}

/// Encrypts one keyword under a hidden structure and advances its chain.
///
/// The first ciphertext of a keyword is tagged with the anchor
/// `e(P, H(W))^u` and hides a fresh random pointer; every later one is
/// tagged with the pointer hidden by its predecessor.
pub fn structured_encrypt(
    ctx: &PairingCtx,
    mpk: &MasterPublicKey,
    keyword: &[u8],
    pri: &mut StructurePrivate,
    rng: &mut impl RngCore,
) -> SpchsCiphertext {
    let r = Scalar::random_nonzero(rng);
    let hashed = ctx.hash_to_g2(keyword);
    let base = ctx.pair(&mpk.p, &hashed);
    let c2 = ctx.g1_mul(&G1Elem::generator(), &r);
    let mask = ctx.gt_exp(&base, &r);

    match pri.pointers.get_mut(keyword) {
        None => {
            let pointer = GtElem::random(rng);
            pri.pointers.insert(keyword.to_vec(), pointer);
            SpchsCiphertext {
                c1: ctx.gt_exp(&base, &pri.u),
                c2,
                c3: mask.combine(&pointer),
            }
        }
        Some(pointer) => {
            let next = GtElem::random(rng);
            let c1 = *pointer;
            *pointer = next;
            SpchsCiphertext {
                c1,
                c2,
                c3: mask.combine(&next),
            }
        }
    }
}

/// Derives the search trapdoor `T_W = H(W)^s`; deterministic in its inputs.
pub fn trapdoor(ctx: &PairingCtx, msk: &MasterSecretKey, keyword: &[u8]) -> SearchTrapdoor {
    let hashed = ctx.hash_to_g2(keyword);
    SearchTrapdoor {
        t: ctx.g2_mul(&hashed, &msk.s),
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("store backend is {} but this search needs {}", found.name(), expected.name())]
    WrongBackend { expected: BackendId, found: BackendId },
    #[error("malformed store: chain revisits record {ordinal}")]
    CycleDetected { ordinal: u64 },
    #[error("malformed store: chain longer than the store itself")]
    IterationLimitExceeded,
    #[error("malformed record {ordinal}: {source}")]
    MalformedRecord { ordinal: u64, source: WireError },
}

/// Walks the chain of the trapdoor's keyword under one structure head.
///
/// Returns the matching record ordinals in chain (insertion) order. Costs
/// exactly `m + 1` pairings for `m` matches: one anchor disclosure plus one
/// pointer disclosure per match. Stops with a malformed-store error if the
/// disclosed pointers ever revisit a record, so adversarial stores cannot
/// make it loop.
pub fn structured_search(
    ctx: &PairingCtx,
    _mpk: &MasterPublicKey,
    public: &StructurePublic,
    store: &TagIndexedStore,
    trap: &SearchTrapdoor,
) -> Result<Vec<u64>, SearchError> {
    if store.backend() != BackendId::Scratch {
        return Err(SearchError::WrongBackend {
            expected: BackendId::Scratch,
            found: store.backend(),
        });
    }
    let mut found = Vec::new();
    let mut visited = HashSet::new();
    // Anchor disclosure: e(Pub, T_W) = e(P, H(W))^u.
    let mut pointer = ctx.pair(&public.head, &trap.t);
    loop {
        let record = match store.find_by_tag(&pointer.to_bytes()) {
            None => return Ok(found),
            Some(record) => record,
        };
        if !visited.insert(record.ordinal) {
            return Err(SearchError::CycleDetected {
                ordinal: record.ordinal,
            });
        }
        if found.len() >= store.len() {
            return Err(SearchError::IterationLimitExceeded);
        }
        found.push(record.ordinal);
        let ct = SpchsCiphertext::from_store_parts(&record.tag, &record.payload).map_err(
            |source| SearchError::MalformedRecord {
                ordinal: record.ordinal,
                source,
            },
        )?;
        // Pointer disclosure: e(c2, T_W)^{-1} * c3.
        pointer = ctx.pair(&ct.c2, &trap.t).invert().combine(&ct.c3);
    }
}

#[derive(Debug, Error)]
pub enum PriSealError {
    #[error("sealed structure state has a bad header")]
    BadHeader,
    #[error("authentication failed: wrong key or tampered bytes")]
    Authentication,
    #[error(transparent)]
    Wire(#[from] WireError),
}

fn pri_seal_header() -> [u8; 8] {
    let mut header = [0u8; 8];
    header[..6].copy_from_slice(KEY_MAGIC);
    header[6] = KeyRole::SealedStructurePrivate as u8;
    header[7] = BackendId::Scratch as u8;
    header
}

/// Seals a structure's private state under a symmetric key so a stateless
/// sender can park it on untrusted storage between encryptions.
pub fn pri_export(
    pri: &StructurePrivate,
    key: &[u8; PRI_SEAL_KEY_BYTES],
    rng: &mut impl RngCore,
) -> Vec<u8> {
    let header = pri_seal_header();
    let mut nonce = [0u8; PRI_SEAL_NONCE_BYTES];
    rng.fill_bytes(&mut nonce);
    let cipher = ChaCha20Poly1305::new(&Key::from(*key));
    let sealed = cipher
        .encrypt(
            &Nonce::from(nonce),
            Payload {
                msg: &pri.to_wire(),
                aad: &header,
            },
        )
        .expect("in-memory encryption cannot fail");
    let mut out = Vec::with_capacity(header.len() + nonce.len() + sealed.len());
    out.extend_from_slice(&header);
    out.extend_from_slice(&nonce);
    out.extend_from_slice(&sealed);
    out
}

/// Opens a sealed structure state. Any tampering or a wrong key fails
/// authentication; a garbled state is never returned.
pub fn pri_import(
    bytes: &[u8],
    key: &[u8; PRI_SEAL_KEY_BYTES],
) -> Result<StructurePrivate, PriSealError> {
    let header = pri_seal_header();
    if bytes.len() < header.len() + PRI_SEAL_NONCE_BYTES || bytes[..header.len()] != header {
        return Err(PriSealError::BadHeader);
    }
    let nonce: [u8; PRI_SEAL_NONCE_BYTES] = bytes
        [header.len()..header.len() + PRI_SEAL_NONCE_BYTES]
        .try_into()
        .expect("nonce length checked");
    let sealed = &bytes[header.len() + PRI_SEAL_NONCE_BYTES..];
    let cipher = ChaCha20Poly1305::new(&Key::from(*key));
    let plain = cipher
        .decrypt(
            &Nonce::from(nonce),
            Payload {
                msg: sealed,
                aad: &header,
            },
        )
        .map_err(|_| PriSealError::Authentication)?;
    Ok(StructurePrivate::from_wire(&plain)?)
}
