//! Numerical experiments probing product estimates, their sharpness, and derivative mappings.

pub mod bilinear;
pub mod config;
pub mod counterexample;
pub mod derivative;
pub mod families;
pub mod paraproduct;
pub mod report;

pub use bilinear::{
    bilinear_ratio, odd_multiplicity_contrast, ratio_sweep, trilinear_ratio, trilinear_sweep,
    BilinearConfig, ContrastReport, SweepSettings, TrilinearConfig,
};
pub use config::{CounterexampleConfig, ExperimentFile};
pub use counterexample::{
    besov_block_floor, counterexample_fields, layer_growth, singularity_profile, BlockFloorReport,
    LayerGrowth, SingularityOptions, SingularityProfile,
};
pub use derivative::{derivative_mapping_sweep, derivative_ratio, DerivativeConfig, Mapping};
pub use families::{FamilyKind, FamilySpec, Member, Profile};
pub use paraproduct::{leibniz_decomposition, paraproduct_split, LeibnizDecomposition, ParaproductSplit};
pub use report::{RatioReport, Verdict};
