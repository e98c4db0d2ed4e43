//! Mixed finite element spaces: discontinuous vector velocity paired with a
//! continuous Lagrange enthalpy of one order higher.

pub mod assembly;
pub mod condensed;
pub mod element;
pub mod quadrature;
pub mod space;
pub mod sparse;

pub use assembly::{assemble_div_coupling, assemble_mass_h, assemble_mass_v, assemble_stiffness_h, Operators};
pub use condensed::BlockCondensedLu;
pub use element::LagrangeElement;
pub use quadrature::Quadrature;
pub use space::{FieldKind, MixedSpace};
pub use sparse::{Factorization, SparseLu, SparseOperator};
