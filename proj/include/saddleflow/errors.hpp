#pragma once

#include <stdexcept>
#include <string>

#include "saddleflow/types.hpp"

namespace saddleflow {

/// Thrown when the step budget is exhausted before reaching t_end.
/// Carries the last accepted time and state so callers can report partial runs.
class DivergenceError : public std::runtime_error {
  public:
    DivergenceError(std::string msg, double t, Vec last_state)
        : std::runtime_error(std::move(msg)), t_last(t), state_last(std::move(last_state)) {}

    double t_last;
    Vec state_last;
};

/// Thrown when the state stops being finite during integration.
class BlowUpError : public std::runtime_error {
  public:
    BlowUpError(std::string msg, double t) : std::runtime_error(std::move(msg)), t_blowup(t) {}

    double t_blowup;
};

}  // namespace saddleflow
