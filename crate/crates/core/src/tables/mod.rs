//! Exact probability-table arithmetic over categorical variables.

mod adjust;
mod cpt;
mod joint;

pub use adjust::{
    adjust_backdoor, adjust_frontdoor, required_sample_size, tian_pearl_bounds, tian_pearl_from_table, Event, Interval,
    SAMPLES_PER_STATE,
};
pub use cpt::{
    cpt_from_joint, cpts_from_joint, generate_cpts, generate_cpts_with, joint_from_cpts, sample_row, Cpt, CptSet,
    Sampler,
};
pub use joint::JointTable;
pub(crate) use joint::{next_assignment, strides};
