//! Coordinated multi-drone, multi-parcel last-mile delivery.
//!
//! Demand is split into service areas around depots; every time window each
//! drone picks a flight range, the planner enumerates payload-feasible parcel
//! combinations inside those ranges, routes and costs them with a rotorcraft
//! energy model, and selects one plan per drone by exact set partitioning.
//! Flight-range choice is learned with PPO.

pub mod energy;
pub mod env;
pub mod error;
pub mod experiments;
pub mod learning;
pub mod model;
pub mod planner;
pub mod segmentation;

pub use error::{Error, Result};
