#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "mshedge/hedge_engine.hpp"

namespace mshedge {

/// Probability of each grid period being the optimal one.
using ProbVector = std::array<double, PeriodGrid::kSize>;

ProbVector uniform_probs();
ProbVector one_hot(std::size_t index);

/// Nonnegative, finite, sums to 1 within tol.
bool is_valid(const ProbVector& p, double tol = 1e-9);

/// Arithmetic mean of valid vectors; throws InputError when empty.
ProbVector mean_probs(std::span<const ProbVector> members);

/// p_k = n_k / sum(n): the maximum-likelihood multinomial parameters.
ProbVector multinomial_mle(std::span<const std::size_t> labels);

}  // namespace mshedge
