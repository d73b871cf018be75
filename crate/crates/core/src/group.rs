//! Pairing-group backend over BLS12-381.
//!
//! Everything above this module is agnostic of the concrete curve: scheme
//! code only sees [`Scalar`], [`G1Elem`], [`G2Elem`], [`GtElem`] and performs
//! its arithmetic through a [`PairingCtx`], which meters pairings, scalar
//! multiplications, exponentiations and hash-to-curve calls per context.
//!
//! The original construction is written for a symmetric pairing; here the
//! left pairing slot (generator, master public key, structure heads, `g^r`)
//! lives in G1 and the right slot (hashed keywords, trapdoors) lives in G2.

use std::cell::Cell;

use blstrs::{pairing, Compress, G1Affine, G1Projective, G2Affine, G2Projective, Gt};
use ff::Field;
use group::Group;
use rand::RngCore;
use thiserror::Error;

/// Canonical big-endian scalar encoding length.
pub const SCALAR_BYTES: usize = 32;
/// Compressed G1 point encoding length.
pub const G1_BYTES: usize = 48;
/// Compressed G2 point encoding length.
pub const G2_BYTES: usize = 96;
/// Canonical GT encoding length (torus-compressed).
pub const GT_BYTES: usize = 288;

/// Domain separation tag for hashing keywords into G2.
pub const KEYWORD_HASH_DST: &[u8] = b"SPCHS-H-v1";

/// Rejection of a byte string that does not decode to a group element.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("invalid encoding length: expected {expected} bytes, got {actual}")]
    InvalidLength { expected: usize, actual: usize },
    #[error("invalid {group} encoding: not a canonical subgroup element")]
    InvalidElement { group: &'static str },
}

fn fixed<const N: usize>(bytes: &[u8]) -> Result<[u8; N], CodecError> {
    bytes.try_into().map_err(|_| CodecError::InvalidLength {
        expected: N,
        actual: bytes.len(),
    })
}

/// An exponent modulo the group order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scalar(pub(crate) blstrs::Scalar);

impl Scalar {
    /// Samples a uniform nonzero scalar.
    pub fn random_nonzero(rng: &mut impl RngCore) -> Self {
        loop {
            let s = blstrs::Scalar::random(&mut *rng);
            if !bool::from(s.is_zero()) {
                return Scalar(s);
            }
        }
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(blstrs::Scalar::from(v))
    }

    pub fn is_zero(&self) -> bool {
        bool::from(self.0.is_zero())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 * other.0)
    }

    /// Canonical fixed-length big-endian encoding.
    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        self.0.to_bytes_be()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let arr = fixed::<SCALAR_BYTES>(bytes)?;
        Option::from(blstrs::Scalar::from_bytes_be(&arr))
            .map(Scalar)
            .ok_or(CodecError::InvalidElement { group: "scalar" })
    }
}

/// Element of the first pairing source group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct G1Elem(pub(crate) G1Projective);

impl G1Elem {
    pub fn generator() -> Self {
        G1Elem(G1Projective::generator())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    /// Compressed canonical encoding.
    pub fn to_bytes(&self) -> [u8; G1_BYTES] {
        G1Affine::from(self.0).to_compressed()
    }

    /// Decodes and validates subgroup membership.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let arr = fixed::<G1_BYTES>(bytes)?;
        Option::from(G1Affine::from_compressed(&arr))
            .map(|p: G1Affine| G1Elem(p.into()))
            .ok_or(CodecError::InvalidElement { group: "G1" })
    }
}

/// Element of the second pairing source group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct G2Elem(pub(crate) G2Projective);

impl G2Elem {
    pub fn generator() -> Self {
        G2Elem(G2Projective::generator())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn to_bytes(&self) -> [u8; G2_BYTES] {
        G2Affine::from(self.0).to_compressed()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let arr = fixed::<G2_BYTES>(bytes)?;
        Option::from(G2Affine::from_compressed(&arr))
            .map(|p: G2Affine| G2Elem(p.into()))
            .ok_or(CodecError::InvalidElement { group: "G2" })
    }
}

/// Element of the pairing target group, written multiplicatively in the
/// scheme algebra: [`GtElem::combine`] is the group law and
/// [`GtElem::invert`] the inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GtElem(pub(crate) Gt);

impl GtElem {
    pub fn identity() -> Self {
        GtElem(Gt::identity())
    }

    pub fn generator() -> Self {
        GtElem(Gt::generator())
    }

    /// Samples a uniform target-group element.
    pub fn random(rng: &mut impl RngCore) -> Self {
        GtElem(Gt::random(rng))
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    /// Group law (the product of the two elements).
    pub fn combine(&self, other: &GtElem) -> GtElem {
        GtElem(self.0 + other.0)
    }

    pub fn invert(&self) -> GtElem {
        GtElem(-self.0)
    }

    /// Canonical fixed-length encoding.
    ///
    /// The identity is the unique subgroup element without a torus
    /// compression; it is mapped to the all-zero string, which no other
    /// element can produce.
    pub fn to_bytes(&self) -> [u8; GT_BYTES] {
        let mut out = [0u8; GT_BYTES];
        if !self.is_identity() {
            self.0
                .write_compressed(&mut out[..])
                .expect("compressed GT fits the fixed buffer");
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let arr = fixed::<GT_BYTES>(bytes)?;
        if arr.iter().all(|&b| b == 0) {
            return Ok(GtElem::identity());
        }
        Gt::read_compressed(&mut &arr[..])
            .map(GtElem)
            .map_err(|_| CodecError::InvalidElement { group: "GT" })
    }
}

/// Snapshot of the operation meters of one [`PairingCtx`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub pairings: u64,
    pub g1_muls: u64,
    pub g2_muls: u64,
    pub gt_exps: u64,
    pub hashes: u64,
}

/// Instrumented entry point for every pairing-group operation.
///
/// Counters belong to the context: independent benchmark runs use
/// independent contexts and never observe each other. A context is
/// single-owner; it is not meant to be shared across threads.
#[derive(Debug, Default)]
pub struct PairingCtx {
    counters: Cell<OpCounters>,
}

impl PairingCtx {
    pub fn new() -> Self {
        Self::default()
    }

    fn bump(&self, f: impl FnOnce(&mut OpCounters)) {
        let mut c = self.counters.get();
        f(&mut c);
        self.counters.set(c);
    }

    /// Bilinear map; one pairing on the meter.
    pub fn pair(&self, a: &G1Elem, b: &G2Elem) -> GtElem {
        self.bump(|c| c.pairings += 1);
        GtElem(pairing(&G1Affine::from(a.0), &G2Affine::from(b.0)))
    }

    pub fn g1_mul(&self, p: &G1Elem, k: &Scalar) -> G1Elem {
        self.bump(|c| c.g1_muls += 1);
        G1Elem(p.0 * k.0)
    }

    pub fn g2_mul(&self, p: &G2Elem, k: &Scalar) -> G2Elem {
        self.bump(|c| c.g2_muls += 1);
        G2Elem(p.0 * k.0)
    }

    pub fn gt_exp(&self, x: &GtElem, k: &Scalar) -> GtElem {
        self.bump(|c| c.gt_exps += 1);
        GtElem(x.0 * k.0)
    }

    /// Hashes an arbitrary byte string into G2 under [`KEYWORD_HASH_DST`].
    pub fn hash_to_g2(&self, keyword: &[u8]) -> G2Elem {
        self.hash_to_g2_tagged(KEYWORD_HASH_DST, keyword)
    }

    /// Hash-to-curve with an explicit domain separation tag.
    pub fn hash_to_g2_tagged(&self, dst: &[u8], msg: &[u8]) -> G2Elem {
        self.bump(|c| c.hashes += 1);
        G2Elem(G2Projective::hash_to_curve(msg, dst, &[]))
    }

    /// Snapshot of the meters since the last reset.
    pub fn counters(&self) -> OpCounters {
        self.counters.get()
    }

    pub fn reset_counters(&self) {
        self.counters.set(OpCounters::default());
    }
}
