//! Identity-based key encapsulation with full-identity malleability.
//!
//! The [`IbkemScheme`] interface adds two things on top of an ordinary
//! identity-based KEM. Encapsulation takes its randomness as an explicit
//! input, so the encapsulator can reproduce it; and [`IbkemScheme::fim`]
//! lets the encapsulator compute, from that randomness alone, the key that
//! ANY identity's decryption key would decapsulate from the encapsulation.
//! Collision-freeness asks that distinct `(identity, randomness)` pairs
//! yield distinct keys except with negligible probability.
//!
//! [`RoIbkem`] is the concrete pairing instance: decryption keys are
//! `H(ID)^s`, an encapsulation is `g^r`, and the key for identity `ID` is
//! `e(P, H(ID))^r` pushed through a fixed-output KDF so the key space is
//! flat 256-bit strings.

use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{G1Elem, G2Elem, GtElem, PairingCtx, Scalar};
use crate::wire::{Reader, WireCodec, WireError};

/// Encapsulated keys are fixed-length byte strings.
pub const ENCAP_KEY_BYTES: usize = 32;

const IBKEM_HASH_DST: &[u8] = b"SPCHS-IBKEM-H-v1";
const IBKEM_KDF_TAG: &[u8] = b"SPCHS-IBKEM-KDF-v1";

/// A decapsulated (or forecast) key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EncapsulatedKey(pub [u8; ENCAP_KEY_BYTES]);

impl EncapsulatedKey {
    pub fn as_bytes(&self) -> &[u8; ENCAP_KEY_BYTES] {
        &self.0
    }
}

impl WireCodec for EncapsulatedKey {
    fn write_wire(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.0);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let raw = reader.take(ENCAP_KEY_BYTES)?;
        Ok(EncapsulatedKey(raw.try_into().expect("length checked")))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecapsError {
    #[error("invalid encapsulation")]
    InvalidEncapsulation,
}

/// Identity-based KEM whose encapsulator can forecast every identity's
/// decapsulation result.
pub trait IbkemScheme {
    type MasterPublic: WireCodec + Clone;
    type MasterSecret: WireCodec;
    type DecapsKey: WireCodec + Clone;
    type Encapsulation: WireCodec + Clone + PartialEq;
    /// The explicit encapsulation randomness; opaque to callers.
    type Randomness: WireCodec + Clone;

    fn setup<R: RngCore>(ctx: &PairingCtx, rng: &mut R)
        -> (Self::MasterPublic, Self::MasterSecret);

    fn extract(ctx: &PairingCtx, msk: &Self::MasterSecret, id: &[u8]) -> Self::DecapsKey;

    /// Deterministic given `(id, r)`.
    fn encaps(
        ctx: &PairingCtx,
        mpk: &Self::MasterPublic,
        id: &[u8],
        r: &Self::Randomness,
    ) -> (EncapsulatedKey, Self::Encapsulation);

    fn decaps(
        ctx: &PairingCtx,
        key: &Self::DecapsKey,
        enc: &Self::Encapsulation,
    ) -> Result<EncapsulatedKey, DecapsError>;

    /// Forecasts what `id`'s decryption key decapsulates from the
    /// encapsulation built with randomness `r`, without the decryption key.
    fn fim(
        ctx: &PairingCtx,
        mpk: &Self::MasterPublic,
        id: &[u8],
        r: &Self::Randomness,
    ) -> EncapsulatedKey;

    fn sample_randomness<R: RngCore>(rng: &mut R) -> Self::Randomness;
}

fn kdf(value: &GtElem) -> EncapsulatedKey {
    let mut hasher = Sha256::new();
    hasher.update(IBKEM_KDF_TAG);
    hasher.update(value.to_bytes());
    EncapsulatedKey(hasher.finalize().into())
}

/// Pairing IBKEM in the random-oracle model; see the module doc.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoIbkem;

/// Master public part of [`RoIbkem`]: `P = g^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoIbkemPublic {
    p: G1Elem,
}

impl RoIbkemPublic {
    pub fn p(&self) -> &G1Elem {
        &self.p
    }
}

impl WireCodec for RoIbkemPublic {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.p.write_wire(out);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(RoIbkemPublic {
            p: G1Elem::read_wire(reader)?,
        })
    }
}

/// Master secret of [`RoIbkem`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoIbkemSecret {
    s: Scalar,
}

impl WireCodec for RoIbkemSecret {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.s.write_wire(out);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(RoIbkemSecret {
            s: Scalar::read_wire(reader)?,
        })
    }
}

impl RoIbkem {
    fn hash_identity(ctx: &PairingCtx, id: &[u8]) -> G2Elem {
        ctx.hash_to_g2_tagged(IBKEM_HASH_DST, id)
    }
}

impl IbkemScheme for RoIbkem {
    type MasterPublic = RoIbkemPublic;
    type MasterSecret = RoIbkemSecret;
    /// `H(ID)^s`.
    type DecapsKey = G2Elem;
    /// `g^r`.
    type Encapsulation = G1Elem;
    type Randomness = Scalar;

    fn setup<R: RngCore>(
        ctx: &PairingCtx,
        rng: &mut R,
    ) -> (Self::MasterPublic, Self::MasterSecret) {
        let s = Scalar::random_nonzero(rng);
        let p = ctx.g1_mul(&G1Elem::generator(), &s);
        (RoIbkemPublic { p }, RoIbkemSecret { s })
    }

    fn extract(ctx: &PairingCtx, msk: &Self::MasterSecret, id: &[u8]) -> Self::DecapsKey {
        ctx.g2_mul(&Self::hash_identity(ctx, id), &msk.s)
    }

    fn encaps(
        ctx: &PairingCtx,
        mpk: &Self::MasterPublic,
        id: &[u8],
        r: &Self::Randomness,
    ) -> (EncapsulatedKey, Self::Encapsulation) {
        let key = Self::fim(ctx, mpk, id, r);
        let enc = ctx.g1_mul(&G1Elem::generator(), r);
        (key, enc)
    }

    fn decaps(
        ctx: &PairingCtx,
        key: &Self::DecapsKey,
        enc: &Self::Encapsulation,
    ) -> Result<EncapsulatedKey, DecapsError> {
        if enc.is_identity() {
            return Err(DecapsError::InvalidEncapsulation);
        }
        Ok(kdf(&ctx.pair(enc, key)))
    }

    fn fim(
        ctx: &PairingCtx,
        mpk: &Self::MasterPublic,
        id: &[u8],
        r: &Self::Randomness,
    ) -> EncapsulatedKey {
        let base = ctx.pair(&mpk.p, &Self::hash_identity(ctx, id));
        kdf(&ctx.gt_exp(&base, r))
    }

    fn sample_randomness<R: RngCore>(rng: &mut R) -> Self::Randomness {
        Scalar::random_nonzero(rng)
    }
}
