pub mod explorer;
pub mod harness;
pub mod interp;
pub mod lang;
pub mod meta;
pub mod par;
pub mod patch;
pub mod repair;
pub mod strategy;
pub mod template_repair;
pub mod templates;
