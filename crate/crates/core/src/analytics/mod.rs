pub mod claims;
pub mod lambda;
pub mod quadrature;
pub mod tilt;
