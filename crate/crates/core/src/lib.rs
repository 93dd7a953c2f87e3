pub mod classifier;
pub mod feasibility;
pub mod gauss_bonnet;
pub mod rational;
pub mod tangle;
