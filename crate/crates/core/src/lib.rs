//! Learning an optimal leader commitment in a bimatrix Stackelberg game from
//! best-response queries alone, with exact rational arithmetic throughout.

pub mod baseline;
pub mod finder;
pub mod geometry;
pub mod learner;
pub mod oracle;
pub mod rational;
pub mod sampler;
pub mod search;

pub use rational::{BitComplexity, Rational};
