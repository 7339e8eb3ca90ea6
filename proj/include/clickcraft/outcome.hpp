#ifndef CLICKCRAFT_OUTCOME_HPP
#define CLICKCRAFT_OUTCOME_HPP

namespace clickcraft {

/// Unnormalized conditional state together with its trace, the probability
/// of the conditioning event.
template <class State>
struct ProcessOutcome {
    State state;
    double probability = 0.0;
};

} // namespace clickcraft

#endif
