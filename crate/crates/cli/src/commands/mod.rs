pub mod analyze;
pub mod graph;
pub mod lab;
pub mod run;
pub mod toy;
pub mod transfer;
