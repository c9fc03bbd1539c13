//! The soliton, the Darboux chain and the discrete spectrum of `L_0`.

pub mod darboux;
pub mod eigen;
pub mod oracle;
pub mod soliton;

pub use darboux::{
    apply_chain, apply_chain_adjoint, apply_l, check_intertwining, check_repulsivity, darboux_apply,
    Repulsivity, TanhPoly,
};
pub use eigen::{apply_jl0, darboux_eigenfunction, eigenbasis, EigenBasis};
pub use oracle::{discrete_spectrum_oracle, OracleSpectrum};
pub use soliton::{soliton, SolitonProfile};
