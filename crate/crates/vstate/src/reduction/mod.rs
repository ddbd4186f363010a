//! Lyapunov–Schmidt reduction: the correction `φ(λ, g)`, the reduced
//! functional `F₂(λ, t; a)` and its Taylor jet, exact and numerical.

pub mod jet;
pub mod numeric;
pub mod series;
pub mod verify;

pub use jet::{jet_symbolic, jet_symbolic_a0, phi_derivatives, AMode, ExactJet2, Jet2, PhiDerivatives};
pub use numeric::{
    coker_coords, f2_closed_form_t0, f2_eval, jet_numeric, lambda_radius, ls_solve, ls_solve_from,
    ls_solve_newton, FdConfig, LsConfig, LsResult, RangeJacobian,
};
pub use series::{series_jet, AParam, APoly, SeriesJet};
pub use verify::{anchors, entry_name, verify, Status, VerifyMode, VerifyReport, VerifyRow, VerifyTolerances};
