pub mod error;
pub mod spectral;
pub mod tolerances;
pub mod dynamics;
pub mod initial_data;
pub mod diagnostics;
pub mod tracking;
pub mod simulation;
pub mod certificates;
pub mod scenario;
pub mod io;
pub mod config;
pub mod suite;
pub mod run;
