//! Modelling and verification toolkit for UML state machines.

pub mod datalogic;
pub mod edhml;
pub mod eds;
pub mod folgen;
pub mod frontend;
pub mod gen;
pub mod par;
pub mod toolchain;
