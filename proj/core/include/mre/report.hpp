#pragma once

#include <string>

#include "mre/measured_channels.hpp"
#include "mre/measured_states.hpp"
#include "mre/problem.hpp"

namespace mre {

/// JSON text with sorted keys and every number printed to 17 significant
/// digits, so equal values always serialize to equal bytes.
std::string canonical_dump(const Json& j);

/// FNV-1a 64-bit digest of the canonical serialization.
std::string digest(const Json& j);

Json report_for_states(const ProblemFile& problem, const DivergenceResult& result,
                       double wall_seconds);
Json report_for_channel(const ProblemFile& problem, const ChannelDivergenceResult& result,
                        double wall_seconds);
Json report_for_oracle(const ProblemFile& problem, double value, const Measurement& measurement,
                       double wall_seconds);

void write_text(const std::string& path, const std::string& text);

struct VerifyOutcome {
  bool ok = true;
  std::vector<std::string> failures;
};

/// Re-derives the reported value from the stored optimizers and re-scores the
/// stored measurement through the classical divergence; collects mismatches.
VerifyOutcome verify_report(const Json& report);

}  // namespace mre
