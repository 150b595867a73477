//! Automated segmentation and multi-parametric analysis of infrared meibography images.

pub mod error;
pub mod evalseg;
pub mod glands;
pub mod imgproc;
pub mod io;
pub mod metrics;
pub mod phantom;
pub mod raster;
pub mod report;
pub mod roi;

pub use error::{MeiboError, Result};
pub use raster::{BinaryMask, GrayImage};
