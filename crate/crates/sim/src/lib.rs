//! Filesystem, network and CLI side of the grid-world engine: scenario
//! loading, CSV exports, the remote model backend, session storage, the
//! line-delimited JSON session server and the study pipelines.

pub mod backend;
pub mod export;
pub mod load;
pub mod pipeline;
pub mod remote;
pub mod scaling;
pub mod server;
pub mod store;
