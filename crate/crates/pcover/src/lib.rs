//! Constructive machinery for covering large-supremum events of positive
//! selector and empirical processes.
//!
//! The crate certifies p-smallness of weighted set families with an exact
//! branch-and-bound oracle, builds fragment-based covers with full cost
//! accounting, generalizes both to multisets under the multinomial sampling
//! law with Poissonized cover costs, and discretizes finite positive
//! empirical processes into multiset instances whose cover elements induce
//! checkable witness events. Everything that certifies runs on exact
//! rationals (with `e` handled symbolically where it enters costs); floats
//! appear only in Monte Carlo estimates and reports.

pub mod bitset;
pub mod bridge;
pub mod ecost;
pub mod error;
pub mod exec;
pub mod family;
pub mod formats;
pub mod fragment;
pub mod logfloat;
pub mod mfragment;
pub mod multiset;
pub mod rational;
pub mod rng;
pub mod selector;

pub use bitset::{GroundSet, Subset};
pub use error::Error;
pub use exec::ExecPolicy;
pub use rational::Rat;
