pub mod arith;
pub mod basis;
pub mod categorical;
pub mod census;
pub mod cli;
pub mod poly;
pub mod presentation;
pub mod tower;
