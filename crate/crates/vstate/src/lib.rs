pub mod branch;
pub mod contour;
pub mod error;
pub mod exactnum;
pub mod linearization;
pub mod reduction;
pub mod spectral;
