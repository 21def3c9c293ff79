pub mod classify;
pub mod diagram;
pub mod equiv;
pub mod fock;
pub mod lattice;
pub mod linalg;
pub mod mobius;
pub mod perm;
pub mod scalar;
pub mod semigroup;
pub mod sparse;
