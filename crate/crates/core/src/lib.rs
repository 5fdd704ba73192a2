pub mod cayley;
pub mod cli;
pub mod colligation;
pub mod error;
pub mod fixtures;
pub mod function;
pub mod membership;
pub mod numkit;
pub mod pencil;
pub mod realstruct;
pub mod report;
