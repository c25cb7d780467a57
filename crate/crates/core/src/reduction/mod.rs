//! Beta and eta rewriting, permutation equivalence and parallel reduction.

mod checks;
mod normalize;
mod parallel;
mod perm;
mod redex;

pub use checks::{
    beta_preserves_run, equal_beta_eta_perm, equal_beta_perm, joinable, one_step_reducts,
    reachable, spine_diamond_check,
};
pub use normalize::{
    next_step, normalize, normalize_with, print_marked, redex_actions, render_reduction,
    Contracted, Normalization, Reduction, ReductionStep,
};
pub use parallel::{
    parallel_diamond_check, parallel_step, MarkError, MarkedTerm, ALL_MARKS, CIRCLE, DOT,
};
pub use perm::{perm_canonical, perm_eq};
pub use redex::{
    beta_step, eta_step, find_eta_sites, find_redexes, is_normal, redex_at_head, EtaSite,
    RedexError, RedexKind, RedexSite, Strategy,
};
