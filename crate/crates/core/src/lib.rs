//! Numerical laboratory for para-hypercomplex, para-hyperhermitian and
//! para-hyperkähler structures on four-dimensional charts.
//!
//! The crate is organized bottom-up:
//!
//! - [`scalar`], [`jet`], [`linalg`]: generic scalars, dual numbers and
//!   second-order jets, and small dense matrices over any of them;
//! - [`expr`]: a chart-function expression language with exact symbolic
//!   derivatives and jet evaluation;
//! - [`splitquat`]: the split quaternions and the pointwise linear
//!   algebra of anticommuting product-structure triples;
//! - [`field`], [`forms`]: scalar, vector, endomorphism, metric and
//!   differential-form fields on a chart, with wedge, exterior
//!   derivative, Hodge star, Lie bracket and Nijenhuis tensors;
//! - [`structures`]: almost para-hyperhermitian structure bundles,
//!   fundamental forms, Lee forms and reconstruction from form triples;
//! - [`walker`], [`curvature`]: Walker metrics with their canonical
//!   triples, and Levi-Civita connection, curvature, Ricci and Weyl
//!   decomposition from metric jets;
//! - [`surfaces`]: explicit chart models of Inoue and Kamada-type
//!   surfaces carrying the structures above;
//! - [`sampling`], [`report`]: deterministic low-discrepancy sampling
//!   and machine-readable verification reports.
//!
//! Scalar-generic layers work over any [`scalar::Scalar`]; charts are
//! concrete over `f64` with complex coefficients where needed, and the
//! common concrete types are re-exported at the crate root.

pub mod curvature;
pub mod error;
pub mod expr;
pub mod field;
pub mod forms;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod splitquat;
pub mod structures;
pub mod surfaces;
pub mod tol;
pub mod walker;

pub use curvature::{christoffel, curvature_at, curvature_report, ricci, weyl_split, CurvatureAtPoint, WeylSplit};
pub use num_complex::Complex64;
pub use error::{Error, Result};
pub use field::CField;
pub use forms::{
    hodge_star, lie_bracket, AffineMap4, EndomorphismField, FormField, MetricField,
    NijenhuisOperator, VectorFieldOnChart,
};
pub use expr::{parse, Expression, VarSet, COMPLEX_VARS, WALKER_VARS};
pub use jet::{Dual, Dual2, Dual64, CJet, Jet};
pub use linalg::Mat4;
pub use report::{CheckRecord, Residual, VerificationReport};
pub use sampling::{random_points, sample_points, DomainBox};
pub use splitquat::{
    averaged_form, canonical_triple, compatibility_residual, conformal_factor, eigenbasis,
    metric_from_plus_form, plus_form_from_metric, verify_triple, AveragedForm,
    ParaHypercomplexTriple, PlusForm, SplitQuat,
};
pub use structures::{
    check_phc_algebra, fundamental_forms, hypersymplectic_check, integrability_report,
    lee_form, phk_volume, structure_from_forms, AlmostPHStructure, FormTriple,
};
pub use surfaces::inoue::{
    inoue_domain, inoue_forms, inoue_generators, inoue_invariance_report, inoue_structure,
    inoue_structure_report, sigma_map, sigma_obstruction_report, InoueParams, InoueSurface,
};
pub use surfaces::kamada::{
    del_dbar, kamada_kodaira_forms, kamada_torus_forms, kodaira_generator, kodaira_lattice_check,
    monge_ampere_residual, periodicity_residual, KodairaLattice, MongeAmpereKind,
};
pub use walker::{
    hk_check, pc_family, pc_form_check, proper_structure, walker_metric, PCFamily,
    WalkerData,
};

/// 4x4 real matrix.
pub type Mat4f = Mat4<f64>;
/// 4x4 matrix of second-order real jets.
pub type Mat4j = Mat4<Jet>;
