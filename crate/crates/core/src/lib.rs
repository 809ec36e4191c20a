pub mod engine;
pub mod formula;
pub mod interface;
pub mod metalogic;
pub mod proofspace;
pub mod pruning;
pub mod resolution;
pub mod rules;
