//! Framed files for key material.
//!
//! Every key file starts with the magic `SPCHS1`, one role byte and one
//! backend byte, followed by the canonical encoding of the value. Readers
//! state which role and backend they expect, so a trapdoor can never be fed
//! where a master key belongs and scratch material never mixes with the
//! generic backend's.

use std::path::Path;

use thiserror::Error;

use crate::store::BackendId;
use crate::wire::{Reader, WireCodec, WireError};

pub const KEY_MAGIC: &[u8; 6] = b"SPCHS1";

/// What a key file holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyRole {
    MasterPublic = 1,
    MasterSecret = 2,
    StructurePublic = 3,
    Trapdoor = 4,
    StructurePrivate = 5,
    SealedStructurePrivate = 6,
}

impl KeyRole {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(KeyRole::MasterPublic),
            2 => Some(KeyRole::MasterSecret),
            3 => Some(KeyRole::StructurePublic),
            4 => Some(KeyRole::Trapdoor),
            5 => Some(KeyRole::StructurePrivate),
            6 => Some(KeyRole::SealedStructurePrivate),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KeyRole::MasterPublic => "master public key",
            KeyRole::MasterSecret => "master secret key",
            KeyRole::StructurePublic => "structure public part",
            KeyRole::Trapdoor => "search trapdoor",
            KeyRole::StructurePrivate => "structure private part",
            KeyRole::SealedStructurePrivate => "sealed structure private part",
        }
    }
}

#[derive(Debug, Error)]
pub enum KeyFileError {
    #[error("bad key file magic")]
    BadMagic,
    #[error("key file holds a {} (byte {found_byte}), expected a {}", found.map(|r| r.name()).unwrap_or("unknown role"), expected.name())]
    RoleMismatch {
        expected: KeyRole,
        found: Option<KeyRole>,
        found_byte: u8,
    },
    #[error("key file belongs to the {} backend, expected {}", found.map(|b| b.name()).unwrap_or("unknown"), expected.name())]
    BackendMismatch {
        expected: BackendId,
        found: Option<BackendId>,
    },
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Frames a value into key-file bytes.
pub fn encode_key<T: WireCodec>(role: KeyRole, backend: BackendId, value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(KEY_MAGIC);
    out.push(role as u8);
    out.push(backend as u8);
    value.write_wire(&mut out);
    out
}

/// Parses key-file bytes, insisting on the expected role and backend.
pub fn decode_key<T: WireCodec>(
    role: KeyRole,
    backend: BackendId,
    bytes: &[u8],
) -> Result<T, KeyFileError> {
    let mut reader = Reader::new(bytes);
    if reader.take(KEY_MAGIC.len())? != KEY_MAGIC {
        return Err(KeyFileError::BadMagic);
    }
    let role_byte = reader.u8()?;
    if role_byte != role as u8 {
        return Err(KeyFileError::RoleMismatch {
            expected: role,
            found: KeyRole::from_byte(role_byte),
            found_byte: role_byte,
        });
    }
    let backend_byte = reader.u8()?;
    if backend_byte != backend as u8 {
        return Err(KeyFileError::BackendMismatch {
            expected: backend,
            found: BackendId::from_byte(backend_byte),
        });
    }
    let value = T::read_wire(&mut reader)?;
    reader.expect_end()?;
    Ok(value)
}

pub fn write_key_file<T: WireCodec>(
    path: &Path,
    role: KeyRole,
    backend: BackendId,
    value: &T,
) -> Result<(), KeyFileError> {
    Ok(std::fs::write(path, encode_key(role, backend, value))?)
}

pub fn read_key_file<T: WireCodec>(
    path: &Path,
    role: KeyRole,
    backend: BackendId,
) -> Result<T, KeyFileError> {
    decode_key(role, backend, &std::fs::read(path)?)
}
