//! Coherence measures, cohering and de-cohering powers of quantum channels,
//! and free-operation class checks (MIO, DIO, incoherent Kraus form).

pub mod channels;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod measures;
mod optimize;
pub mod powers;
pub mod random;
pub mod repro;
pub mod states;

pub use channels::{
    classify, dephase, has_incoherent_kraus, is_dio, is_mio, unitary_channel, ChannelClassReport, ClassCheck,
    KrausChannel,
};
pub use error::{Error, Result};
pub use io::{
    channel_to_json, parse_channel_file, parse_channel_str, parse_state_file, parse_state_str, state_to_json,
    write_channel_file, write_state_file, ChannelFile, StateFile,
};
pub use linalg::{
    adjoint, hermitian_eigenvalues, is_unitary, mat_product, one_to_one_norm, ComplexMatrix, ComplexScalar, Tolerance,
};
pub use measures::{
    binary_entropy, c_l1, c_rel_ent, coherence, shannon_entropy, von_neumann_entropy, CoherenceMeasure,
    ProbabilityVector,
};
pub use powers::{
    cohering_power, decohering_power, generalized_cohering_power, generalized_decohering_power, OptimizerConfig,
    PowerKind, PowerReport,
};
pub use repro::{reproduce, reproduce_all, Check, Relation, ReproConfig, ReproReport, PROP_IDS};
pub use states::{
    basis_state, bloch_to_density, density_from_factor, max_coherent_state, tensor_state, DensityMatrix, PhaseVector,
    PureState, StateFactor,
};
