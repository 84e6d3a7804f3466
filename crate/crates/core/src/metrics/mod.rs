//! Predictive metrics, explanation faithfulness, oversmoothing measures and
//! numerical checks of the stability and energy bounds.

mod faithfulness;
mod linalg;
mod predictive;
mod record;
mod smoothing;
mod theory;

pub use faithfulness::{gef, gef_protocol};
pub(crate) use faithfulness::argmax;
pub use linalg::{spectral_norm, symmetric_eigen, Eigen};
pub use predictive::{auroc, f1, f1_for_class, f1_macro, f1_score, F1Average};
pub use record::{RunRecord, SplitTag};
pub use smoothing::{dirichlet_energy, gdr};
pub use theory::{energy_bound_check, theorem1_check, EnergyBound, Theorem1Report};
