#![no_std]
extern crate alloc;

pub mod abduction;
pub mod driver;
pub mod linarith;
pub mod model;
pub mod nonterm;
pub mod oracle;
pub mod ranking;
pub mod stats;
