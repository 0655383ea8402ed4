pub mod corpus;
pub mod harness;
pub mod models;
pub mod neural;
pub mod planner;
pub mod semantics;
pub mod world;
