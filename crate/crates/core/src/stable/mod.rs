//! Symmetric α-stable sampling and series simulation of fields generated by
//! a kernel on `W × H`, with partial maxima.

pub mod field;
pub mod kernel;
pub mod tail;

pub use field::{
    maxima_csv, maxima_experiment, partial_maxima, partial_maxima_within, sample_field, sample_field_replicate,
    sample_prm, FieldLayout, FieldSample, MaximaRow, MaximaRun, PrmPoint, PrmSample, SimDiagnostics,
};
pub use kernel::{CompiledKernel, KernelEntry, KernelModel, Mark, MarkId};
pub use tail::{sample_standard_sas, stable_tail_constant, ALPHA_MAX};
