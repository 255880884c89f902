#pragma once

#include <optional>
#include <string>
#include <vector>

#include "asyrk/csr.hpp"

namespace asyrk {

struct EpochRecord {
    index_t epoch_index = 0;
    double r_sq = 0.0;
    double grad_sq = 0.0;
    std::optional<double> dist_sq;
    double wall_seconds = 0.0;
    index_t updates_applied = 0;
};

/// Convergence log of one solver run. epoch_index is strictly increasing and
/// updates_applied nondecreasing; record 0 is the state before any update.
struct Trace {
    std::vector<EpochRecord> epochs;
    std::string config_echo;     // JSON object describing the run
    std::vector<double> final_x;

    /// Throws InvalidArgument on a violated record invariant.
    void validate() const;

    /// One JSON object per line, each carrying "schema": 1. First line echoes
    /// the config, then one line per epoch, last line holds final_x.
    std::string to_jsonl() const;
    static Trace from_jsonl(const std::string& text);

    /// Epoch records only; empty dist_sq cell when it was not measured.
    std::string to_csv() const;
};

} // namespace asyrk
