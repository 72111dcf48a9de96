//! Exact engines for bounded versions of undecidable problems.
//!
//! The crate models a family of decision problems that are undecidable in
//! their unbounded form but become NP- or coNP-flavoured once a unary step
//! budget `n` is attached to every instance. Each problem module ships the
//! exact bounded solver, an independent certificate verifier, and the
//! instance maps that translate one problem into the next:
//!
//! * [`turing`]: nondeterministic machines with existential and universal
//!   bounded halting oracles; the root of both reduction branches.
//! * [`pcp`]: Post correspondence instances, the bounded match solver and
//!   the machine-to-domino reduction.
//! * [`matsem`]: integer matrix semigroups: corner-zero and mortality
//!   solvers plus the word-to-matrix encodings.
//! * [`mpo`]: diagonal matrix product operators: bounded trace-negativity
//!   search and the onward maps to polynomial grids and positive maps.
//! * [`tiling`]: Wang tilings with a pinned origin tile and the derived
//!   spin models with exact ground-state search.
//! * [`framework`]: the bounded-instance algebra: threshold polynomials,
//!   reduction arrows, lifting, composition and the problem registry.
//! * [`files`]: schema-versioned JSON envelopes for every instance,
//!   certificate and report format the command line understands.
//!
//! All arithmetic is exact (arbitrary-precision integers and rationals);
//! none of the solvers approximate. Bounds are stored as binary integers
//! but interpreted with unary size semantics: complexity statements about
//! the bounded problems refer to the unary encoding of `n`.

pub mod files;
pub mod framework;
pub mod matsem;
pub mod mpo;
pub mod pcp;
pub mod tiling;
pub mod turing;
