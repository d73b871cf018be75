//! Anonymous identity-based encryption over 256-bit messages.
//!
//! The [`IbeScheme`] interface is the usual four-algorithm one. The
//! concrete [`HashMaskIbe`] instance is a hash-mask scheme: a ciphertext is
//! `(g^t, M xor KDF(e(P', H'(ID))^t))`. Nothing in the ciphertext names the
//! identity and there is deliberately no integrity: decrypting under the
//! wrong identity yields an unrelated-looking message, not an error.

use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{G1Elem, G2Elem, GtElem, PairingCtx, Scalar};
use crate::wire::{Reader, WireCodec, WireError};

/// Message space: fixed-length bit strings.
pub const IBE_MSG_BYTES: usize = 32;

const IBE_HASH_DST: &[u8] = b"SPCHS-IBE-H-v1";
const IBE_KDF_TAG: &[u8] = b"SPCHS-IBE-KDF-v1";

/// A plaintext block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IbeMessage(pub [u8; IBE_MSG_BYTES]);

impl IbeMessage {
    pub fn random<R: RngCore>(rng: &mut R) -> Self {
        let mut bytes = [0u8; IBE_MSG_BYTES];
        rng.fill_bytes(&mut bytes);
        IbeMessage(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; IBE_MSG_BYTES] {
        &self.0
    }
}

impl WireCodec for IbeMessage {
    fn write_wire(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.0);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let raw = reader.take(IBE_MSG_BYTES)?;
        Ok(IbeMessage(raw.try_into().expect("length checked")))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IbeDecryptError {
    #[error("invalid ciphertext")]
    InvalidCiphertext,
}

/// Identity-based encryption over [`IbeMessage`] blocks.
pub trait IbeScheme {
    type MasterPublic: WireCodec + Clone;
    type MasterSecret: WireCodec;
    type DecKey: WireCodec + Clone;
    type Ciphertext: WireCodec + Clone + PartialEq;

    fn setup<R: RngCore>(ctx: &PairingCtx, rng: &mut R)
        -> (Self::MasterPublic, Self::MasterSecret);

    fn extract(ctx: &PairingCtx, msk: &Self::MasterSecret, id: &[u8]) -> Self::DecKey;

    fn encrypt<R: RngCore>(
        ctx: &PairingCtx,
        mpk: &Self::MasterPublic,
        id: &[u8],
        message: &IbeMessage,
        rng: &mut R,
    ) -> Self::Ciphertext;

    fn decrypt(
        ctx: &PairingCtx,
        key: &Self::DecKey,
        ct: &Self::Ciphertext,
    ) -> Result<IbeMessage, IbeDecryptError>;
}

fn kdf(value: &GtElem) -> [u8; IBE_MSG_BYTES] {
    let mut hasher = Sha256::new();
    hasher.update(IBE_KDF_TAG);
    hasher.update(value.to_bytes());
    hasher.finalize().into()
}

/// The hash-mask instance; see the module doc.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashMaskIbe;

/// Master public part of [`HashMaskIbe`]: `P' = g^{s'}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashMaskIbePublic {
    p: G1Elem,
}

impl WireCodec for HashMaskIbePublic {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.p.write_wire(out);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(HashMaskIbePublic {
            p: G1Elem::read_wire(reader)?,
        })
    }
}

/// Master secret of [`HashMaskIbe`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashMaskIbeSecret {
    s: Scalar,
}

impl WireCodec for HashMaskIbeSecret {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.s.write_wire(out);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        Ok(HashMaskIbeSecret {
            s: Scalar::read_wire(reader)?,
        })
    }
}

/// `(g^t, M xor pad)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashMaskIbeCiphertext {
    a: G1Elem,
    mask: [u8; IBE_MSG_BYTES],
}

impl WireCodec for HashMaskIbeCiphertext {
    fn write_wire(&self, out: &mut Vec<u8>) {
        self.a.write_wire(out);
        out.extend_from_slice(&self.mask);
    }

    fn read_wire(reader: &mut Reader<'_>) -> Result<Self, WireError> {
        let a = G1Elem::read_wire(reader)?;
        let raw = reader.take(IBE_MSG_BYTES)?;
        Ok(HashMaskIbeCiphertext {
            a,
            mask: raw.try_into().expect("length checked"),
        })
    }
}

impl HashMaskIbe {
    fn hash_identity(ctx: &PairingCtx, id: &[u8]) -> G2Elem {
        ctx.hash_to_g2_tagged(IBE_HASH_DST, id)
    }
}

impl IbeScheme for HashMaskIbe {
    type MasterPublic = HashMaskIbePublic;
    type MasterSecret = HashMaskIbeSecret;
    /// `H'(ID)^{s'}`.
    type DecKey = G2Elem;
    type Ciphertext = HashMaskIbeCiphertext;

    fn setup<R: RngCore>(
        ctx: &PairingCtx,
        rng: &mut R,
    ) -> (Self::MasterPublic, Self::MasterSecret) {
        let s = Scalar::random_nonzero(rng);
        let p = ctx.g1_mul(&G1Elem::generator(), &s);
        (HashMaskIbePublic { p }, HashMaskIbeSecret { s })
    }

    fn extract(ctx: &PairingCtx, msk: &Self::MasterSecret, id: &[u8]) -> Self::DecKey {
        ctx.g2_mul(&Self::hash_identity(ctx, id), &msk.s)
    }

    fn encrypt<R: RngCore>(
        ctx: &PairingCtx,
        mpk: &Self::MasterPublic,
        id: &[u8],
        message: &IbeMessage,
        rng: &mut R,
    ) -> Self::Ciphertext {
        let t = Scalar::random_nonzero(rng);
        let a = ctx.g1_mul(&G1Elem::generator(), &t);
        let sealed = ctx.gt_exp(&ctx.pair(&mpk.p, &Self::hash_identity(ctx, id)), &t);
        let mut mask = kdf(&sealed);
        for (m, b) in mask.iter_mut().zip(message.0.iter()) {
            *m ^= b;
        }
        HashMaskIbeCiphertext { a, mask }
    }

    fn decrypt(
        ctx: &PairingCtx,
        key: &Self::DecKey,
        ct: &Self::Ciphertext,
    ) -> Result<IbeMessage, IbeDecryptError> {
        if ct.a.is_identity() {
            return Err(IbeDecryptError::InvalidCiphertext);
        }
        let mut message = kdf(&ctx.pair(&ct.a, key));
        for (m, b) in message.iter_mut().zip(ct.mask.iter()) {
            *m ^= b;
        }
        Ok(IbeMessage(message))
    }
}
