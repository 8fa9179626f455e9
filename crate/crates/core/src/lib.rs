pub mod cayley;
pub mod covers;
pub mod ends;
pub mod error;
pub mod geodesics;
pub mod models;
pub mod presentation;
pub mod refuter;
pub mod vankampen;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/balls.md")]
    mod balls {}
    #[doc = include_str!("../../../book/src/ends.md")]
    mod ends {}
    #[doc = include_str!("../../../book/src/geodesics.md")]
    mod geodesics {}
    #[doc = include_str!("../../../book/src/covers.md")]
    mod covers {}
    #[doc = include_str!("../../../book/src/vankampen.md")]
    mod vankampen {}
    #[doc = include_str!("../../../book/src/refuter.md")]
    mod refuter {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
