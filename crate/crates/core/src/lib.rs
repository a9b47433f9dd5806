pub mod algebra;
pub mod constructions;
pub mod group;
pub mod irrational;
pub mod quasivar;
pub mod term;
