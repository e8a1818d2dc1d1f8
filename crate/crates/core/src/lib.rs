pub mod constructions;
pub mod dimension;
pub mod error;
pub mod field;
pub mod fp;
pub mod graph;
pub mod linalg;
pub mod matrix;
pub mod par;
pub mod quantum;
pub mod report;
pub mod rng;
pub mod subspace;
pub mod tuple;
pub mod verify;
