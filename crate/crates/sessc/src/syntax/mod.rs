pub mod process;
pub mod prop;
pub mod session;
pub mod term;
