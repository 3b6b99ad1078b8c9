//! Genetic-algorithm retrieval of sample morphology from a trace.

mod evolve;
mod search;

pub use evolve::{
    evolve, fitness, model_select, GaConfig, ModelSelectConfig, NamedParameter, RetrievalResult,
    WORST_FITNESS,
};
pub use search::{
    Chromosome, ParamKind, ParamSpec, SearchSpace, DEFAULT_BITS, DEFAULT_DISTANCE_UM,
    DEFAULT_KAPPA, DEFAULT_REFLECTANCE,
};
