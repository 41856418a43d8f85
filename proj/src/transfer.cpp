#include "afcomb/transfer.hpp"

#include "afcomb/combo2.hpp"

#include <string>

namespace afc {

std::string_view to_string(TransferKind kind) {
  switch (kind) {
    case TransferKind::none: return "none";
    case TransferKind::gradual: return "gradual";
    case TransferKind::copy: return "copy";
    case TransferKind::feedback: return "feedback";
  }
  return "?";
}

TransferKind parse_transfer_kind(std::string_view name) {
  for (TransferKind k : {TransferKind::none, TransferKind::gradual, TransferKind::copy, TransferKind::feedback}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown transfer policy '" + std::string(name) + "'");
}

void validate(const TransferPolicy& policy) {
  switch (policy.kind) {
    case TransferKind::none:
      return;
    case TransferKind::gradual:
      if (!(policy.leak > 0.0 && policy.leak < 1.0)) throw std::invalid_argument("leak must lie in (0, 1)");
      [[fallthrough]];
    case TransferKind::copy:
      if (!(policy.threshold > 0.0 && policy.threshold < 1.0)) {
        throw std::invalid_argument("transfer threshold lambda_0 must lie in (0, 1)");
      }
      if (policy.kind == TransferKind::gradual) return;
      [[fallthrough]];
    case TransferKind::feedback:
      if (policy.period < 2) throw std::invalid_argument("transfer period N_0 must be >= 2");
      return;
  }
}

bool maybe_transfer(const TransferPolicy& policy, std::int64_t n, double lambda, Vector& w1, Vector& w2) {
  if (policy.kind == TransferKind::none) return false;
  if (w1.size() != w2.size()) throw DimensionError("transfer requires equal-length filters");
  switch (policy.kind) {
    case TransferKind::gradual:
      if (lambda < policy.threshold) return false;
      w2 = policy.leak * w2 + (1.0 - policy.leak) * w1;
      return true;
    case TransferKind::copy:
      if (lambda < policy.threshold || n % policy.period != 0) return false;
      w2 = w1;
      return true;
    case TransferKind::feedback: {
      if (n % policy.period != 0) return false;
      Vector w = combine_weights(lambda, w1, w2);
      w1 = w;
      w2 = std::move(w);
      return true;
    }
    case TransferKind::none:
      break;
  }
  return false;
}

}  // namespace afc
