//! Exact symbolic layer: Laurent polynomials over the jet alphabet, the
//! certified identities, and the expression language for user fields.

pub mod certify;
pub mod expr;
pub mod jet;
pub mod poly;

pub use certify::{
    certify_all, certify_det_g, certify_domination_lemma, certify_fiber_geodesic,
    certify_gauss_map, certify_metric_entries, certify_unit_structure, certify_volume_integrand,
    ordering_dictionary, Certificate, Check, Identity, OrderingDictionary,
};
pub use expr::{parse, Expr};
pub use jet::{jet_symbols, q_form_sym, JetSymbols};
pub use poly::{Assignment, GaussRat, LaurentPoly, Symbol};
