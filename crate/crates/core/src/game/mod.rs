//! Finite discounted Markov games and their exact evaluation.

mod eval;
mod joint;
mod policy;
mod spec;

pub(crate) use eval::dot;
pub use eval::{
    advantage, bellman_operator, discounted_visitation, induced_mdp, performance_difference,
    policy_chain, policy_gradient, q_function, value_at_dist, value_function, InducedMdp,
    PerformanceDifference, ValueVector, VisitationDist,
};
pub use joint::JointActionSpace;
pub use policy::{argmax_first, DeterministicProfiles, PolicyProfile, QTable, StateActionTable};
pub use spec::{
    is_irreducible_aperiodic, validate_game, GameError, GameSpec, RawGame, MAX_JOINT_ACTIONS,
};
