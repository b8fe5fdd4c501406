//! Graph contrastive learning with importance-driven augmentation, a
//! dual-domain (convolution + Gaussian-masked attention) encoder and
//! persistent-homology descriptors.

pub mod augment;
pub mod autodiff;
pub mod centrality;
pub mod graph;
pub mod harness;
pub mod model;
pub mod seed;
pub mod topology;
