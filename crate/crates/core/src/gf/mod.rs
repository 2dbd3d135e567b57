//! Generalized functions as ε-nets: ladders, nets of sampled smooth functions,
//! moderateness and negligibility estimators, pairings with test functions
//! and (local) association with distributions.
//!
//! Distributions are embedded by mollification, `u_ε = T ∗ ψ_ε`; every net
//! built this way records the kernel in [`Net::embedding`].

mod embed;
mod estimate;
mod ladder;
mod net;
mod pairing;

pub use embed::{embed_by_mollification, embed_smooth, embed_smooth_1d, EmbedTarget};
pub use estimate::{
    estimate_moderateness, sup_norms, test_negligibility, test_negligibility_with, Moderation,
    ModerationReport, NegligibilityOptions, NegligibilityReport, DEFAULT_NOISE_FLOOR,
};
pub use ladder::{make_ladder, EpsilonLadder};
pub use net::Net;
pub use pairing::{
    check_association, check_local_association, extrapolate, local_bumps, pair, AssociationVerdict,
    Extrapolation, PairingEntry, PairingResult, Target, TestFunction,
};
