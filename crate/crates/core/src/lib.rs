//! Empathic interview, personality categorization and painterly portrait
//! rendering.
//!
//! The crate is organized as a pipeline: [`sentiment`] scores what the sitter
//! says, [`dialogue`] runs the five-question interview, [`persona`] turns the
//! answers into a Big-Five profile, an AB5C cell and a [`persona::StyleSpec`],
//! and [`render`] paints the portrait in that style. [`service`] exposes the
//! whole flow over HTTP with file-backed persistence.

pub mod assessment;
pub mod dialogue;
pub mod persona;
pub mod render;
pub mod sentiment;
pub mod service;
