//! Finite algebra behind the rigidity arguments: exceptional returns,
//! eigenvalue perturbation, shearing and the entropy formula.

mod eigen;
mod entropy;
mod exceptional;
pub mod poly;
mod shear;

pub use eigen::{
    eig_lemma_trials, perturbed_eigs_check, random_near_identity, EigCheck, EigTrials, IMAG_TOL,
};
pub use entropy::{entropy_formula, EntropyData};
pub use exceptional::{
    exceptional_check, exceptional_scan, ExceptionalDiagnostics, ExceptionalFailure,
    ExceptionalScan, IntegerMatrix, SCAN_BUDGET,
};
pub use shear::{
    find_shear_time, flow_conjugate_shear, kappa, Kappa, Scalar, ShearChoice, ShearSearch,
    ShearState, ShearTime, ACCEPT_C,
};
