pub mod defaults;
pub mod ground;
pub mod logical;
pub mod oracle;
pub mod par;
pub mod ratlp;
pub mod samples;
pub mod syntax;
pub mod worlds;
