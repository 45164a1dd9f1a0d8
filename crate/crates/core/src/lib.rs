//! Moment-SOS relaxations with the constant trace property.
//!
//! The pipeline is: a [`popmodel::PopInstance`] is certified by
//! [`ctpcert`] (trace constant `a` and diagonal scaling `P`), converted by
//! [`sdpbuild`] into a block-diagonal SDP whose feasible matrices all have
//! trace `a`, and solved by the first-order methods in [`solvers`].

pub mod cspattern;
pub mod ctpcert;
pub mod numerics;
pub mod par;
pub mod polycore;
pub mod popmodel;
pub mod sdpbuild;
pub mod solvers;
