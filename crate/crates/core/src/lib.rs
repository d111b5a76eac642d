pub mod cfr;
pub mod dncfr;
pub mod error;
pub mod experiment;
pub mod game;
pub mod neural;
pub mod sampling;

pub type Network64 = neural::Network<f64>;
pub type Network32 = neural::Network<f32>;
pub type DoubleNeural64<'t> = dncfr::DoubleNeural<'t, f64>;
pub type DoubleNeural32<'t> = dncfr::DoubleNeural<'t, f32>;
