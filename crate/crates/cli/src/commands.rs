//! The `spchs` command line: key generation, structure management,
//! encryption, trapdoors, search and the benchmark.
//!
//! Every subcommand works on framed key files and the tag-indexed store
//! format. With `--seed` all randomness comes from a seeded generator, so
//! runs are reproducible; without it the OS entropy source is used.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use spchs_core::generic::{
    GenericMasterPublicKey, GenericMasterSecretKey, GenericStructurePrivate,
    GenericStructurePublic, GenericTrapdoor, StdGenericSpchs,
};
use spchs_core::group::PairingCtx;
use spchs_core::ibe::HashMaskIbe;
use spchs_core::ibkem::RoIbkem;
use spchs_core::keyfile::{read_key_file, write_key_file, KeyRole};
use spchs_core::scratch::{
    self, MasterPublicKey, MasterSecretKey, SearchTrapdoor, StructurePrivate, StructurePublic,
};
use spchs_core::store::{BackendId, TagIndexedStore};
use spchs_core::wire::WireCodec;

use crate::bench::{
    bench_corpus, emit_results, format_csv, BenchBackend, BenchConfig, KeywordDistribution,
};

#[derive(Parser)]
#[command(
    name = "spchs",
    about = "Keyword-searchable encryption with hidden ciphertext structures",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    Scratch,
    Generic,
}

impl Backend {
    fn id(self) -> BackendId {
        match self {
            Backend::Scratch => BackendId::Scratch,
            Backend::Generic => BackendId::Generic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Distribution {
    Uniform,
    Zipf,
}

#[derive(Args)]
struct SeedArg {
    /// Seed for deterministic randomness; omit for OS entropy.
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    fn rng(&self) -> ChaCha20Rng {
        match self.seed {
            Some(seed) => ChaCha20Rng::seed_from_u64(seed),
            None => ChaCha20Rng::from_entropy(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a master key pair and write the key files.
    Setup {
        /// Output path for the master public key.
        #[arg(long)]
        mpk: PathBuf,
        /// Output path for the master secret key.
        #[arg(long)]
        msk: PathBuf,
        #[arg(long, value_enum, default_value_t = Backend::Scratch)]
        backend: Backend,
        /// Keyword-space tag recorded in the master public key.
        #[arg(long, default_value = "bytes")]
        keyword_space: String,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Initialize a hidden structure and write its private and public parts.
    StructInit {
        #[arg(long)]
        mpk: PathBuf,
        /// Output path for the structure's private part.
        #[arg(long)]
        pri: PathBuf,
        /// Output path for the structure's public part.
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long, value_enum, default_value_t = Backend::Scratch)]
        backend: Backend,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Encrypt keywords (one per line) under a structure, appending to a store.
    Encrypt {
        #[arg(long)]
        mpk: PathBuf,
        /// Structure private part; updated in place.
        #[arg(long)]
        pri: PathBuf,
        /// Structure public part (labels the store records).
        #[arg(long = "pub")]
        public: PathBuf,
        /// Ciphertext store; created when missing.
        #[arg(long)]
        store: PathBuf,
        /// File with one keyword per line.
        #[arg(long)]
        keywords: PathBuf,
        #[arg(long, value_enum, default_value_t = Backend::Scratch)]
        backend: Backend,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Derive the search trapdoor of a keyword.
    Trapdoor {
        #[arg(long)]
        msk: PathBuf,
        #[arg(long)]
        keyword: String,
        /// Output path for the trapdoor file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Backend::Scratch)]
        backend: Backend,
    },
    /// Search a store with a trapdoor; prints matches per structure.
    Search {
        #[arg(long)]
        mpk: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Trapdoor file produced by the trapdoor subcommand.
        #[arg(long)]
        trapdoor: PathBuf,
        /// Restrict the search to one structure public part.
        #[arg(long = "pub")]
        public: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Backend::Scratch)]
        backend: Backend,
    },
    /// Build a synthetic corpus and benchmark search against a linear scan.
    Bench {
        /// Total ciphertexts in the corpus.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// Number of hidden structures.
        #[arg(long, default_value_t = 4)]
        structures: usize,
        /// Size of the filler keyword universe.
        #[arg(long, default_value_t = 200)]
        keyword_universe: usize,
        #[arg(long, value_enum, default_value_t = Distribution::Uniform)]
        distribution: Distribution,
        /// Zipf exponent (used with --distribution zipf).
        #[arg(long, default_value_t = 1.1)]
        zipf_exponent: f64,
        /// Comma-separated match counts to probe.
        #[arg(long, default_value = "0,100,200,300,400,500,600,700,800,900,1000", value_delimiter = ',')]
        m_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Backend::Scratch)]
        backend: Backend,
        /// Timing repetitions per probe (medians are reported).
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs the CLI against the real stdout.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut stdout = std::io::stdout();
    run_with_output(argv, &mut stdout)
}

/// Runs the CLI, writing report output to the given writer. Errors go to
/// stderr; the return value is the process exit code.
pub fn run_with_output<I, S>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

fn flagged<T, E: std::fmt::Display>(flag: &str, path: &Path, result: Result<T, E>) -> Result<T, String> {
    result.map_err(|e| format!("{flag} ({}): {e}", path.display()))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), String> {
    let ctx = PairingCtx::new();
    match command {
        Command::Setup {
            mpk,
            msk,
            backend,
            keyword_space,
            seed,
        } => {
            let mut rng = seed.rng();
            match backend {
                Backend::Scratch => {
                    let (public, secret) =
                        scratch::system_setup(&ctx, 128, &keyword_space, &mut rng)
                            .map_err(|e| e.to_string())?;
                    flagged(
                        "--mpk",
                        &mpk,
                        write_key_file(&mpk, KeyRole::MasterPublic, backend.id(), &public),
                    )?;
                    flagged(
                        "--msk",
                        &msk,
                        write_key_file(&msk, KeyRole::MasterSecret, backend.id(), &secret),
                    )?;
                }
                Backend::Generic => {
                    let (public, secret) = StdGenericSpchs::system_setup(&ctx, &mut rng);
                    flagged(
                        "--mpk",
                        &mpk,
                        write_key_file(&mpk, KeyRole::MasterPublic, backend.id(), &public),
                    )?;
                    flagged(
                        "--msk",
                        &msk,
                        write_key_file(&msk, KeyRole::MasterSecret, backend.id(), &secret),
                    )?;
                }
            }
            writeln!(out, "wrote {} and {}", mpk.display(), msk.display())
                .map_err(|e| e.to_string())?;
            Ok(())
        }

        Command::StructInit {
            mpk,
            pri,
            public,
            backend,
            seed,
        } => {
            let mut rng = seed.rng();
            match backend {
                Backend::Scratch => {
                    let master: MasterPublicKey = flagged(
                        "--mpk",
                        &mpk,
                        read_key_file(&mpk, KeyRole::MasterPublic, backend.id()),
                    )?;
                    let (pri_part, pub_part) = scratch::structure_init(&ctx, &master, &mut rng);
                    flagged(
                        "--pri",
                        &pri,
                        write_key_file(&pri, KeyRole::StructurePrivate, backend.id(), &pri_part),
                    )?;
                    flagged(
                        "--pub",
                        &public,
                        write_key_file(&public, KeyRole::StructurePublic, backend.id(), &pub_part),
                    )?;
                }
                Backend::Generic => {
                    let master: GenericMasterPublicKey<RoIbkem, HashMaskIbe> = flagged(
                        "--mpk",
                        &mpk,
                        read_key_file(&mpk, KeyRole::MasterPublic, backend.id()),
                    )?;
                    let (pri_part, pub_part) =
                        StdGenericSpchs::structure_init(&ctx, &master, &mut rng);
                    flagged(
                        "--pri",
                        &pri,
                        write_key_file(&pri, KeyRole::StructurePrivate, backend.id(), &pri_part),
                    )?;
                    flagged(
                        "--pub",
                        &public,
                        write_key_file(&public, KeyRole::StructurePublic, backend.id(), &pub_part),
                    )?;
                }
            }
            writeln!(out, "wrote {} and {}", pri.display(), public.display())
                .map_err(|e| e.to_string())?;
            Ok(())
        }

        Command::Encrypt {
            mpk,
            pri,
            public,
            store,
            keywords,
            backend,
            seed,
        } => {
            let mut rng = seed.rng();
            let keyword_text = flagged("--keywords", &keywords, std::fs::read_to_string(&keywords))?;
            let keyword_list: Vec<&str> = keyword_text.lines().collect();

            let mut db = if store.exists() {
                flagged("--store", &store, TagIndexedStore::load(&store))?
            } else {
                TagIndexedStore::new(backend.id())
            };
            if db.backend() != backend.id() {
                return Err(format!(
                    "--store ({}): store belongs to the {} backend, expected {}",
                    store.display(),
                    db.backend().name(),
                    backend.id().name()
                ));
            }

            let appended = match backend {
                Backend::Scratch => {
                    let master: MasterPublicKey = flagged(
                        "--mpk",
                        &mpk,
                        read_key_file(&mpk, KeyRole::MasterPublic, backend.id()),
                    )?;
                    let mut pri_part: StructurePrivate = flagged(
                        "--pri",
                        &pri,
                        read_key_file(&pri, KeyRole::StructurePrivate, backend.id()),
                    )?;
                    let pub_part: StructurePublic = flagged(
                        "--pub",
                        &public,
                        read_key_file(&public, KeyRole::StructurePublic, backend.id()),
                    )?;
                    let label = pub_part.to_wire();
                    let mut ordinals = Vec::new();
                    for keyword in &keyword_list {
                        let ct = scratch::structured_encrypt(
                            &ctx,
                            &master,
                            keyword.as_bytes(),
                            &mut pri_part,
                            &mut rng,
                        );
                        let ordinal = flagged(
                            "--store",
                            &store,
                            db.insert(ct.tag_bytes(), ct.payload_bytes(), label.clone()),
                        )?;
                        ordinals.push(ordinal);
                    }
                    flagged(
                        "--pri",
                        &pri,
                        write_key_file(&pri, KeyRole::StructurePrivate, backend.id(), &pri_part),
                    )?;
                    ordinals
                }
                Backend::Generic => {
                    let master: GenericMasterPublicKey<RoIbkem, HashMaskIbe> = flagged(
                        "--mpk",
                        &mpk,
                        read_key_file(&mpk, KeyRole::MasterPublic, backend.id()),
                    )?;
                    let mut pri_part: GenericStructurePrivate<RoIbkem> = flagged(
                        "--pri",
                        &pri,
                        read_key_file(&pri, KeyRole::StructurePrivate, backend.id()),
                    )?;
                    let pub_part: GenericStructurePublic<RoIbkem> = flagged(
                        "--pub",
                        &public,
                        read_key_file(&public, KeyRole::StructurePublic, backend.id()),
                    )?;
                    let label = pub_part.to_wire();
                    let mut ordinals = Vec::new();
                    for keyword in &keyword_list {
                        let ct = StdGenericSpchs::structured_encrypt(
                            &ctx,
                            &master,
                            keyword.as_bytes(),
                            &mut pri_part,
                            &mut rng,
                        );
                        let ordinal = flagged(
                            "--store",
                            &store,
                            db.insert(ct.tag_bytes(), ct.payload_bytes(), label.clone()),
                        )?;
                        ordinals.push(ordinal);
                    }
                    flagged(
                        "--pri",
                        &pri,
                        write_key_file(&pri, KeyRole::StructurePrivate, backend.id(), &pri_part),
                    )?;
                    ordinals
                }
            };
            flagged("--store", &store, db.persist(&store))?;
            writeln!(
                out,
                "appended {} ciphertexts (ordinals {}..{})",
                appended.len(),
                appended.first().copied().unwrap_or(0),
                appended.last().copied().unwrap_or(0)
            )
            .map_err(|e| e.to_string())?;
            Ok(())
        }

        Command::Trapdoor {
            msk,
            keyword,
            out: out_path,
            backend,
        } => {
            match backend {
                Backend::Scratch => {
                    let secret: MasterSecretKey = flagged(
                        "--msk",
                        &msk,
                        read_key_file(&msk, KeyRole::MasterSecret, backend.id()),
                    )?;
                    let trap = scratch::trapdoor(&ctx, &secret, keyword.as_bytes());
                    flagged(
                        "--out",
                        &out_path,
                        write_key_file(&out_path, KeyRole::Trapdoor, backend.id(), &trap),
                    )?;
                }
                Backend::Generic => {
                    let secret: GenericMasterSecretKey<RoIbkem, HashMaskIbe> = flagged(
                        "--msk",
                        &msk,
                        read_key_file(&msk, KeyRole::MasterSecret, backend.id()),
                    )?;
                    let trap = StdGenericSpchs::trapdoor(&ctx, &secret, keyword.as_bytes());
                    flagged(
                        "--out",
                        &out_path,
                        write_key_file(&out_path, KeyRole::Trapdoor, backend.id(), &trap),
                    )?;
                }
            }
            writeln!(out, "wrote {}", out_path.display()).map_err(|e| e.to_string())?;
            Ok(())
        }

        Command::Search {
            mpk,
            store,
            trapdoor,
            public,
            backend,
        } => {
            let db = flagged("--store", &store, TagIndexedStore::load(&store))?;
            if db.backend() != backend.id() {
                return Err(format!(
                    "--store ({}): store belongs to the {} backend, expected {}",
                    store.display(),
                    db.backend().name(),
                    backend.id().name()
                ));
            }
            match backend {
                Backend::Scratch => {
                    let master: MasterPublicKey = flagged(
                        "--mpk",
                        &mpk,
                        read_key_file(&mpk, KeyRole::MasterPublic, backend.id()),
                    )?;
                    let trap: SearchTrapdoor = flagged(
                        "--trapdoor",
                        &trapdoor,
                        read_key_file(&trapdoor, KeyRole::Trapdoor, backend.id()),
                    )?;
                    let heads: Vec<StructurePublic> = match &public {
                        Some(path) => vec![flagged(
                            "--pub",
                            path,
                            read_key_file(path, KeyRole::StructurePublic, backend.id()),
                        )?],
                        None => decode_labels(&db)?,
                    };
                    for head in heads {
                        let hits = scratch::structured_search(&ctx, &master, &head, &db, &trap)
                            .map_err(|e| e.to_string())?;
                        print_matches(out, &head.to_wire(), &hits)?;
                    }
                }
                Backend::Generic => {
                    let master: GenericMasterPublicKey<RoIbkem, HashMaskIbe> = flagged(
                        "--mpk",
                        &mpk,
                        read_key_file(&mpk, KeyRole::MasterPublic, backend.id()),
                    )?;
                    let trap: GenericTrapdoor<RoIbkem, HashMaskIbe> = flagged(
                        "--trapdoor",
                        &trapdoor,
                        read_key_file(&trapdoor, KeyRole::Trapdoor, backend.id()),
                    )?;
                    let heads: Vec<GenericStructurePublic<RoIbkem>> = match &public {
                        Some(path) => vec![flagged(
                            "--pub",
                            path,
                            read_key_file(path, KeyRole::StructurePublic, backend.id()),
                        )?],
                        None => decode_labels(&db)?,
                    };
                    for head in heads {
                        let outcome =
                            StdGenericSpchs::structured_search(&ctx, &master, &head, &db, &trap)
                                .map_err(|e| e.to_string())?;
                        print_matches(out, &head.to_wire(), &outcome.ordinals)?;
                    }
                }
            }
            Ok(())
        }

        Command::Bench {
            n,
            structures,
            keyword_universe,
            distribution,
            zipf_exponent,
            m_list,
            backend,
            reps,
            seed,
            out: out_path,
        } => {
            let cfg = BenchConfig {
                total_ciphertexts: n,
                structures,
                keyword_universe,
                distribution: match distribution {
                    Distribution::Uniform => KeywordDistribution::Uniform,
                    Distribution::Zipf => KeywordDistribution::Zipf(zipf_exponent),
                },
                match_counts: m_list,
                backend: match backend {
                    Backend::Scratch => BenchBackend::Scratch,
                    Backend::Generic => BenchBackend::Generic,
                },
                repetitions: reps,
                seed,
            };
            let result = bench_corpus(&cfg).map_err(|e| e.to_string())?;
            flagged("--out", &out_path, emit_results(&result, &out_path))?;
            write!(out, "{}", format_csv(&result)).map_err(|e| e.to_string())?;
            Ok(())
        }
    }
}

/// Recovers every structure public part recorded as a label in the store.
fn decode_labels<T: WireCodec>(db: &TagIndexedStore) -> Result<Vec<T>, String> {
    db.structure_labels()
        .iter()
        .map(|label| {
            T::from_wire(label).map_err(|e| format!("--store: undecodable structure label: {e}"))
        })
        .collect()
}

fn print_matches(out: &mut dyn Write, label: &[u8], ordinals: &[u64]) -> Result<(), String> {
    writeln!(out, "structure {}", hex::encode(label)).map_err(|e| e.to_string())?;
    let rendered: Vec<String> = ordinals.iter().map(u64::to_string).collect();
    writeln!(out, "  matches: {}", rendered.join(" ")).map_err(|e| e.to_string())?;
    Ok(())
}
