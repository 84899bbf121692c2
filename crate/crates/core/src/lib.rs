//! Block diagonal matching field ideals `M_a`, their powers, the order
//! `<_a^l` on generators, linear quotients and cellular resolutions.

pub mod cli;
pub mod complex;
pub mod decomposition;
pub mod error;
pub mod io;
pub mod linalg;
pub mod matching_field;
pub mod monomial;
pub mod oracle;
pub mod power;
pub mod sweep;
pub mod tableau;

pub use error::{Error, Result};
pub use matching_field::{column_for_subset, generators, is_valid_column, type_of, Column, ColumnType};
pub use monomial::{Family, Monomial, Packed, Partition, Variable};
pub use power::{betti_from_sets, power_generators, verify_linear_quotients, BettiTable, LqCertificate, LqFailure};
pub use tableau::{
    canonical_rep, compare_generators, compare_tableaux, representations, simplify, simplify_pairwise, GeneratorOrder,
    Tableau, TypeTableau,
};
