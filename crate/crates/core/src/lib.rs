pub mod algebraic;
pub mod cli;
pub mod complex;
pub mod embed;
pub mod floation2;
pub mod floation3;
pub mod hyperbolic;
pub mod orders;
pub mod render;
pub mod straighten;
pub mod words;
