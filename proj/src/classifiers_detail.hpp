#pragma once

#include "ovkit/core.hpp"

#include <span>

namespace ovkit::detail {

void count_fit_call();

/// Shared precondition checks: non-empty X, matching label length, labels in
/// {-1,+1}, both classes present.
void check_binary_problem(const Matrix& X, std::span<const int> y);

} // namespace ovkit::detail
