#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod fiber;
pub mod map_factory;
pub mod poly;
pub mod quadric;
pub mod reference;
pub mod report;
pub mod roots;
pub mod scalar;
pub mod suites;
