//! Exact-arithmetic toolkit for integral quadratic lattices: genus symbols,
//! p-adic normal forms, maximal overlattices, local modification, and the
//! combinatorics of symbol counting. All arithmetic is exact (big integers
//! and rationals); there is no floating point anywhere in the core.

pub mod arith;
pub mod count;
pub mod construct;
pub mod error;
pub mod exactla;
pub mod genus;
pub mod lattice;
pub mod padic;

pub use error::{Error, Result};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
