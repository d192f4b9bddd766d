pub mod codec;
pub mod constructions;
pub mod experiments;
pub mod format;
pub mod gf2;
pub mod linalg;
pub mod subsets;
pub mod topology;
pub mod verification;
