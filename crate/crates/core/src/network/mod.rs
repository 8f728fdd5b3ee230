//! Fully connected networks: configuration, initialization, forward traces,
//! input Jacobians and least-squares backpropagation.

mod activation;
mod backprop;
mod forward;
mod params;

pub use activation::Activation;
pub use backprop::{batch_loss, loss_and_gradient, loss_and_gradient_batch, stack_batch};
pub use forward::{
    evaluate_point, forward, forward_batch, input_jacobian, predict_batch, BatchTrace,
    ForwardTrace,
};
pub use params::{
    init_params, sample_layer, Init, InitScheme, IoDims, Layer, NetworkConfig, ParameterSet,
};
