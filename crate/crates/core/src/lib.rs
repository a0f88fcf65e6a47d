//! Power Iteration Clustering with two interchangeable backends.
//!
//! [`pic::pic_cluster`] is the single-threaded reference pipeline and
//! [`kernels::gpic_cluster`] runs the same computation as six data-parallel
//! kernels over `p` workers. Both end in [`kmeans::kmeans_1d`] on the
//! one-dimensional embedding, and both return a [`pic::PicResult`].
//!
//! ```
//! use gpic::{datasets, kernels, pic, validation, SimilarityKind};
//!
//! let spec = datasets::GeneratorSpec::new(
//!     datasets::GeneratorKind::GaussianBlobs { components: 2 }, 200, 7);
//! let data = datasets::generate(&spec)?;
//! let sim = SimilarityKind::GaussianRbf { sigma: 1.0 };
//! let params = pic::PicParams::new(2).with_seed(1);
//!
//! let serial = pic::pic_cluster(&data, sim, &params)?;
//! let parallel = kernels::gpic_cluster(&data, sim, &params, &kernels::KernelConfig::new(4))?;
//! assert_eq!(serial.assignment, parallel.assignment);
//!
//! let (ari, _) = validation::ari_and_jaccard(data.labels().unwrap(), serial.assignment.labels())?;
//! assert_eq!(ari, 1.0);
//! # Ok::<(), gpic::Error>(())
//! ```

pub mod affinity;
pub mod bench;
pub mod datasets;
pub mod error;
pub mod kernels;
pub mod kmeans;
pub mod pic;
pub mod types;
pub mod validation;

pub use affinity::{AffinityMatrix, DegreeVector, RowStochasticMatrix, SimilarityKind};
pub use error::{Error, Result};
pub use kernels::{gpic_cluster, KernelConfig};
pub use kmeans::{ClusterAssignment, KMeansParams};
pub use pic::{pic_cluster, EmbeddingVector, PicParams, PicResult, PicTrace};
pub use types::{DataSet, DenseMatrix, DenseVector};

// The guide's code listings run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/power-iteration.md")]
    mod power_iteration {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/kmeans.md")]
    mod kmeans {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
