pub mod agents;
pub mod analysis;
pub mod dataset;
pub mod evalharness;
pub mod lora;
pub mod par;
pub mod scot;
pub mod sig_ir;
