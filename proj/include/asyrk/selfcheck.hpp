#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace asyrk {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;  // counts/extremes on pass, first failure otherwise
};

struct SelfCheckReport {
    std::vector<CheckResult> checks;
    bool all_passed() const;
    std::string to_text() const;
    std::string to_json() const;
};

/// Randomized internal consistency audit: structural bounds the statistics
/// must satisfy on generated instances, ordering of the step-size bounds over
/// the feasible region, projection identities of the serial solver, delay
/// bounds on simulator event logs, atomicity of the shared-memory solver,
/// spectral scaling of dense Gaussian instances, stream determinism, and
/// instance round-trip through the on-disk format. quick shrinks the sample
/// counts for use as a smoke test.
SelfCheckReport run_selfcheck(std::uint64_t seed, bool quick);

} // namespace asyrk
