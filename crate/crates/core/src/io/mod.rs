//! Instance files, generators and exports.

pub mod export;
pub mod format;
pub mod generate;

pub use format::{parse_instance, Instance, InstanceFile};
pub use generate::{generate, GeneratorConfig, Mode};
