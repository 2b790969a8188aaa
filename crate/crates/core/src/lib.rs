//! Phoenixmap: a closed outline around a point set whose local stroke width
//! shows how dense the points are just inside it.
//!
//! The stages are exposed separately ([`geometry`], [`curve`], [`density`],
//! [`legend`], [`render`]) and chained by [`pipeline::run_pipeline`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod density;
pub mod geometry;
pub mod io;
pub mod legend;
pub mod pipeline;
pub mod render;
pub mod synth;

use thiserror::Error;

pub use io::InputError;
pub use pipeline::{run_pipeline, Config, PipelineError, Sidecar};

/// Any failure a command-line run can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("cannot write '{path}': {source}")]
    Output {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status: 1 for bad input or configuration, 2 when the
    /// geometry of a group cannot be built.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(InputError::Outline(_)) => 2,
            Error::Pipeline(PipelineError::Group { .. }) => 2,
            _ => 1,
        }
    }
}
