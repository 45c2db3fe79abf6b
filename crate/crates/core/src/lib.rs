pub mod eval;
pub mod features;
pub mod flow;
pub mod imgcore;
pub mod learn;
pub mod nav;
pub mod pipeline;
pub mod reduce;
pub mod scalar;
pub mod sim;

pub use scalar::Scalar;

pub type GrayImageF32 = imgcore::GrayImage<f32>;
pub type GrayImageF64 = imgcore::GrayImage<f64>;
pub type FlowFieldF32 = flow::FlowField<f32>;
pub type FlowFieldF64 = flow::FlowField<f64>;
pub type FeatureVectorF32 = features::FeatureVector<f32>;
pub type FeatureVectorF64 = features::FeatureVector<f64>;
pub type PcaModelF32 = reduce::PcaModel<f32>;
pub type PcaModelF64 = reduce::PcaModel<f64>;
pub type SvmModelF32 = learn::SvmModel<f32>;
pub type SvmModelF64 = learn::SvmModel<f64>;
