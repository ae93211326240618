//! Building blocks for the employee-attrition experiment: typed tables and
//! descriptive statistics, the preprocessing pipeline, SMOTE oversampling,
//! seven binary classifiers and weighted classification metrics.

pub mod learners;
pub mod matrix;
pub mod metrics;
pub mod preprocess;
pub mod resample;
pub mod seed;
pub mod tabular;

pub use matrix::Matrix;
