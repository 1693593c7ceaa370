//! Upper and lower bounds for the box-counting and Hausdorff dimensions of
//! attractors of non-conformal affine iterated function systems on the unit
//! cube, computed from topological pressure and a shifted Bowen equation.
//!
//! The pipeline runs [`ifs::validate`] and [`ifs::derivative_stats`], then
//! the scale and rate constants of [`bounds`], the Bowen roots of [`bowen`]
//! and finally the bound formulas. [`attractor`] supplies empirical
//! estimates used to check the bounds, and [`pipeline::analyze`] ties
//! everything into one serializable report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod attractor;
pub mod bounds;
pub mod bowen;
pub mod ifs;
pub mod pipeline;
pub mod thermo;
