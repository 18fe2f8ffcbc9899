#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adjoint;
pub mod carrier;
pub mod check;
pub mod conn;
pub mod error;
pub mod forms;
pub mod ring;
pub mod superlin;
