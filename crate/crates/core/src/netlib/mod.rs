//! Classical and hybrid PINN architectures.

mod checkpoint;
mod model;
mod spec;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use model::{dense_forward, hybrid_stages, init_params, ModelHandle};
pub use spec::{
    count_params, plan_cpinn, plan_qpinn, DenseSpec, HybridSpec, ModelKind, ModelSpec, CPINN_DEPTHS,
    HYBRID_HIDDEN_WIDTH, HYBRID_QUBITS,
};
