#![allow(dead_code)]

pub mod dock_oracle;
pub mod mcs_oracle;
pub mod sched_oracle;
