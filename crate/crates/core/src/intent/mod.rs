//! Selection intent: dwell over a cell, two-hand clasp, or a clenched fist.

mod clasp;
mod dwell;
mod solidity;

pub use clasp::{clasp_detect, world_position, ClaspParams, WorldPoint};
pub use dwell::DwellState;
pub use solidity::{convex_hull, fist_detect, hull_lattice_points, mask_solidity, HandMask, MaskError};
