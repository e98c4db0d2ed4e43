//! Energy bookkeeping, decay fits, analytic references and convergence studies.

pub mod convergence;
pub mod energy;
pub mod fit;
pub mod modal;
pub mod peaks;
pub mod reference;

pub use convergence::{
    convergence_study, l2_error_h, ConvergenceKind, ConvergenceRow, ConvergenceSetup, ConvergenceTable,
    ManufacturedSolution,
};
pub use energy::{energy_step_band, record_energy, EnergyAudit, EnergyRecord, EnergyRecorder, NewtonStats};
pub use fit::{default_window, fit_decay, DecayFit};
pub use modal::{expm2, modal_pde_residual, modal_reference, ModalOracle};
pub use peaks::{peak_1d, radial_peak_2d};
pub use reference::SemiDiscreteReference;
