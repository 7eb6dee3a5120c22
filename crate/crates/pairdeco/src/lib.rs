pub mod config;
pub mod constants;
pub mod deco;
pub mod echo;
pub mod eigdist;
pub mod error;
pub mod fock;
pub mod pair;
pub mod phonon;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/decoherence.md")]
    mod decoherence {}
    #[doc = include_str!("../../../book/src/fock_oracle.md")]
    mod fock_oracle {}
    #[doc = include_str!("../../../book/src/pair_phonon.md")]
    mod pair_phonon {}
    #[doc = include_str!("../../../book/src/eigdist.md")]
    mod eigdist {}
    #[doc = include_str!("../../../book/src/magic_echo.md")]
    mod magic_echo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
