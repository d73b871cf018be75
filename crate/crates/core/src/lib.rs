//! Searchable public-key encryption with hidden ciphertext structures.
//!
//! Keyword-searchable ciphertexts produced by one sender are invisibly
//! chained into per-keyword lists hanging off a hidden structure head, so a
//! server holding a keyword trapdoor walks exactly the matching ciphertexts
//! instead of testing the whole store. The crate provides:
//!
//! - [`group`]: the instrumented BLS12-381 pairing backend;
//! - [`scratch`]: the direct pairing construction of the scheme;
//! - [`peks`]: a classic linear-scan PEKS baseline sharing the same keys;
//! - [`ibkem`] / [`ibe`]: identity-based KEM and encryption interfaces with
//!   concrete instances;
//! - [`generic`]: the scheme rebuilt from any collision-free full-identity
//!   malleable IBKEM plus an anonymous IBE;
//! - [`store`]: the ordered tag-indexed ciphertext store and its file format;
//! - [`keyfile`]: framed key-material files.

pub mod generic;
pub mod group;
pub mod ibe;
pub mod ibkem;
pub mod keyfile;
pub mod peks;
pub mod scratch;
pub mod store;
pub mod wire;

pub use store::BackendId;
