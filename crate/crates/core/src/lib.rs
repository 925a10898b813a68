pub mod cli;
pub mod dwa;
pub mod feasibility;
pub mod figures;
pub mod flight_log;
pub mod geometry;
pub mod global;
pub mod map;
pub mod scenario;
pub mod sim;
