//! Compile Sparks programs into time-indexed linear programs.
//!
//! A Sparks program is lowered to a small register-style assembly language,
//! and every assembly line is turned into a family of controlled 0/1
//! constraint gadgets, one copy per time step. Fixing the program inputs in
//! the resulting polytope leaves exactly one feasible point: the full
//! execution trace of the program on that input.
//!
//! The crate is `no_std` (it needs `alloc`). File IO, the command line and
//! the external solver bridge live in the `sparks` crate.
#![no_std]

extern crate alloc;

pub mod compiler;
pub mod corpus;
pub mod frontend;
pub mod harness;
pub mod interpreter;
pub mod lpgen;
pub mod oracles;
pub mod traceviz;

mod error;
pub mod rational;

pub use error::{Error, Pos};
pub use rational::Rational;

pub(crate) mod prelude {
    pub use alloc::boxed::Box;
    pub use alloc::collections::{BTreeMap, BTreeSet};
    pub use alloc::format;
    pub use alloc::string::{String, ToString};
    pub use alloc::vec;
    pub use alloc::vec::Vec;
}
