//! Feedforward networks: the generic MLP and its training, handcrafted tanh emulators of
//! Legendre polynomials, and the interpolating construction built from them.

pub mod emulator;
pub mod minimizer;
pub mod mlp;
pub mod train;

pub use emulator::{
    assemble_family_network, build_feature_network, build_legendre_emulator, build_legendre_emulator_on, build_product_tree, build_square_emulator, EmulatorSpec,
    FamilyNetwork, FeatureNetwork, LegendreEmulator,
};
pub use minimizer::{build_interpolating_minimizer, null_space, InterpolatingMinimizer, MinimizerOptions};
pub use mlp::{Activation, Layer, Mlp};
pub use train::{gradient_check, train, Objective, TrainConfig, TrainOutcome};
