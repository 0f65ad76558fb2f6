pub mod cp;
pub mod engine;
pub mod gen;
pub mod hgv;
pub mod names;
pub mod parse;
pub mod print;
pub mod syntax;
pub mod translate;
pub mod verify;
