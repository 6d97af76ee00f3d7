pub mod channel;
pub mod corrigibility;
pub mod error;
pub mod io;
pub mod linalg;
pub mod recovery;
pub mod search;
pub mod zoo;

pub use error::{Error, Result};
