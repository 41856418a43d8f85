#pragma once

#include "afcomb/types.hpp"

#include <cstdint>
#include <string_view>

namespace afc {

enum class TransferKind { none, gradual, copy, feedback };

std::string_view to_string(TransferKind kind);
TransferKind parse_transfer_kind(std::string_view name);

// Inter-filter communication for a fast (filter 1) / slow (filter 2) pair.
struct TransferPolicy {
  TransferKind kind = TransferKind::none;
  double leak = 0.9;         // gradual: w2 <- leak*w2 + (1-leak)*w1
  double threshold = 0.982;  // lambda_0 (gradual, copy)
  std::int64_t period = 2;   // N_0 (copy, feedback)
};

// Throws std::invalid_argument on out-of-range parameters.
void validate(const TransferPolicy& policy);

// Applies the policy at global sample n with the current mixing parameter.
// Returns true when weights were modified.
bool maybe_transfer(const TransferPolicy& policy, std::int64_t n, double lambda, Vector& w1, Vector& w2);

}  // namespace afc
