//! River-referenced vessel trajectories.
//!
//! Positions are referenced to a waterway by kilometer and fairway offset
//! ([`kilometer`], [`fairway`]), direction-specific typical routes and speeds
//! are extracted from traffic ([`navstats`]), and trajectories are turned into
//! per-minute dislocation features in three reference systems and back
//! ([`features`]). [`baseline`] extrapolates with those statistics,
//! [`metrics`] scores predictions and their ensemble uncertainty, and
//! [`synthetic`] generates rivers with an exact chainage for testing.
//! [`pipeline`] ties the steps to files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod geom;
pub mod io;
pub mod kdtree;
pub mod kilometer;
pub mod projection;
pub mod fairway;
pub mod savgol;
pub mod spline;
pub mod preprocess;
pub mod navstats;
pub mod synthetic;
pub mod features;
pub mod metrics;
pub mod baseline;
pub mod config;
pub mod pipeline;
