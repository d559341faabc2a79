pub mod eval;
pub mod fit;
pub mod generate;
pub mod reproduce;
