//! Spectral properties of a left-handed superlattice joined to a
//! right-handed transmission line, and the adiabatic renormalization of a
//! qubit coupled to its modes.

pub mod circuit;
pub mod dispersion;
pub mod dom;
pub mod error;
pub mod modes;
pub mod spinboson;

pub use circuit::{defaults, single_cell_abcd, supercell_abcd, Cell, RightHandedSpec, SuperlatticeSpec, TwoPortMatrix};
pub use dispersion::{band_edges, bandwidth_curve, sl_dispersion, BandEdges, Branch, BranchFrequency};
pub use dom::{
    dom_analytical, dom_analytical_curve, dom_numerical, dom_numerical_modes, fit_piecewise_dom, spectral_density,
    DomCurve, DomMethod, DomSample, PiecewiseDom,
};
pub use error::{Error, Result};
pub use modes::{
    find_all_modes, find_modes, mode_profile, self_consistency_residual, Band, HybridLineSpec, ModeProfile, ModeScan,
    ModeSolution, ScanOptions, Segment,
};
pub use spinboson::{
    classify_phase, invert_g_band2, invert_g_gap, invert_g_numeric, phase_diagram, phase_diagram_from_modes,
    renormalize_continuum, renormalize_discrete, Jump, PhaseCell, PhaseDiagram, PhaseDiagramOptions, PhaseLabel,
    QubitSpec, RenormOptions, RenormalizationResult,
};
