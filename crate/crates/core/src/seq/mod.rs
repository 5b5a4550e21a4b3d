//! Global sequence layers: linear state-space recurrences, softmax attention
//! and the hybrid block that stacks them, plus exact constructions and
//! Jacobian tooling.

mod attention;
mod constructions;
mod model;
mod sensitivity;
mod ssm;

pub use attention::AttentionLayer;
pub use constructions::{
    color_count_construction, count_via_attention_sum, final_output, find_undercount_witness,
    one_hot_colors, undercount_layer, UndercountWitness,
};
pub use model::{HybridBlock, Layer, ModelSpec};
pub use sensitivity::{
    finite_difference_jacobian, random_hippo_stack, relative_error, scalar_hippo_stack,
    sensitivity_profile, ssm_jacobian, stack_forward, surrogate, SensitivityRow, FD_STEP,
};
pub use ssm::{legs_matrix, LinearSsmLayer, SsmMode};

/// Block `(out_pos, in_pos)` (1-based) of a full sequence Jacobian.
pub fn jacobian_block(
    full: &nalgebra::DMatrix<f64>,
    out_pos: usize,
    in_pos: usize,
    d_out: usize,
    d_in: usize,
) -> nalgebra::DMatrix<f64> {
    full.view(((out_pos - 1) * d_out, (in_pos - 1) * d_in), (d_out, d_in)).into_owned()
}
