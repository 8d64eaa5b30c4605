//! Opetopes and opetopic sets as finite presented categories.
//!
//! An opetopic set is stored as a degree-graded set of cells, a set of
//! polarized one-step generator arrows, and a set of diamonds identifying
//! heterogeneous with homogeneous two-step factorizations. Everything else
//! (hom-sets, slices, boundaries, fills, pasting calculus, tree codecs,
//! enumeration) is computed from that presentation.
//!
//! Modules follow the pipeline: [`graph`] holds the data model, [`normalize`]
//! the diamond rewriting engine, [`axioms`] the axiom checkers, [`construct`]
//! the slice/boundary/fill/pushout constructions, [`calculus`] substitution
//! and grafting, [`codec`] tree encodings and canonical codes, [`enumerate`]
//! the two enumeration strategies, and [`document`] the on-disk format.

pub mod axioms;
pub mod calculus;
pub mod codec;
pub mod construct;
pub mod document;
pub mod enumerate;
pub mod fixtures;
pub mod graph;
pub mod normalize;
pub mod render;

pub use axioms::{check_opetopic, is_opetope, AxiomLabel, AxiomReport};
pub use codec::{Codec, DecoratedTree, DiamondFamily, OpetopeCode, TreeInput};
pub use construct::{Boundary, PastingDiagram};
pub use graph::{ArrowId, CellId, Diamond, GenArrow, Morphism, OpetopicGraph, Polarity};
pub use normalize::NormalForm;

use thiserror::Error;

/// Errors surfaced by the kernel operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A path handed to the rewriting engine is not composable in the graph.
    #[error("path is not composable at position {position}")]
    NotComposable { position: usize },

    /// Diamond rewriting exceeded the termination bound computed from the
    /// graph; the input violates the opetopic-set axioms.
    #[error("rewriting fuel exhausted (bound {bound}) while normalizing a tuple ending at {at}")]
    FuelExhausted { bound: u64, at: String },

    /// Two distinct rewrites applied to the same tuple; the diamond matching
    /// is not a partial bijection.
    #[error("ambiguous rewrite at tuple position {position}: {detail}")]
    AmbiguousRewrite { position: usize, detail: String },

    /// A non-normal tuple has no applicable rewrite; some composable pair is
    /// missing its diamond.
    #[error("no applicable rewrite for non-normal tuple at position {position}: pair ({outer}, {inner}) is unmatched")]
    MissingRewrite {
        position: usize,
        outer: String,
        inner: String,
    },

    /// Isomorphism search refused an input larger than the configured bound.
    #[error("isomorphism search limit exceeded: {cells} cells > {limit}")]
    SizeLimit { cells: usize, limit: usize },

    /// `fill` could not find the forced diamond matching; the marked graph is
    /// not a boundary.
    #[error("fill matching failure at cell {cell}: {detail}")]
    MatchingFailure { cell: String, detail: String },

    /// A substitution argument has the wrong boundary code.
    #[error("boundary mismatch at {cell}: expected {expected}, got {got}")]
    BoundaryMismatch {
        cell: String,
        expected: String,
        got: String,
    },

    /// A grafting argument has the wrong target code.
    #[error("target mismatch at leaf {cell}: expected {expected}, got {got}")]
    TargetMismatch {
        cell: String,
        expected: String,
        got: String,
    },

    /// A pushout was requested over invalid morphisms.
    #[error("ill-formed span: {detail}")]
    IllformedSpan { detail: String },

    /// A decorated tree attaches a subtree whose target shape disagrees with
    /// its address.
    #[error("shape mismatch at address {address}: expected {expected}, got {got}")]
    ShapeMismatch {
        address: usize,
        expected: String,
        got: String,
    },

    /// Textual input (document or opetope code) failed to parse.
    #[error("parse error: {0}")]
    ParseError(String),

    /// A document carries an unsupported format version.
    #[error("unsupported format version {0:?}")]
    VersionError(String),

    /// Enumeration output exceeded the soft cap.
    #[error("enumeration budget exceeded: more than {cap} results")]
    BudgetExceeded { cap: usize },

    /// A brute-force profile is too large to enumerate.
    #[error("profile too large: {cells} cells > {cap}")]
    ProfileTooLarge { cells: usize, cap: usize },

    /// An operation was handed a graph that fails a precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
