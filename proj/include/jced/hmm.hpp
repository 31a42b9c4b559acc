#pragma once

#include <span>
#include <vector>

#include "jced/prior.hpp"

namespace jced {

// One sum-product forward-backward pass over the tap-state chain.
//
// state_llr[j] = log p(evidence_j | d_j = 1) - log p(evidence_j | d_j = 0),
// the extrinsic likelihood ratios handed over by the equalizer. Lag 0 uses
// prior.lambda[0] as the initial distribution; transitions come from
// prior.p01/p10. Returns per-lag probabilities Pr{d_j = 1}: extrinsic chain
// beliefs (local evidence at j excluded) by default, full posteriors when
// posterior_feedback is set.
std::vector<double> forward_backward(std::span<const double> state_llr,
                                     const Gm2HmmPrior& prior,
                                     bool posterior_feedback = false);

}  // namespace jced
