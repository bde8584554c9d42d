//! Executable engine for the KO7 operator-only rewrite calculus.

pub mod confluence;
pub mod measure;
pub mod nogo;
pub mod normalize;
pub mod rewrite;
pub mod term;
