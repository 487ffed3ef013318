#pragma once

// Command-line front end: train, predict, evaluate, generate, cv.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hipad/hipad.hpp"
#include "hipad/io.hpp"

namespace hipad {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_io = 3,
    exit_solver = 4,
};

/// One training or evaluation run, as written to a metrics file.
struct RunMetrics {
    /// Percent in [0, 100]; absent when no labeled data was scored.
    std::optional<double> accuracy;
    /// "train" or "test": which data the accuracy refers to.
    std::string accuracy_on;
    std::size_t support_size = 0;
    int phase1_iterations = 0;
    int phase2_iterations = 0;
    double phase1_seconds = 0.0;
    double phase2_seconds = 0.0;
    double total_seconds = 0.0;
    std::string origin;
    std::string phase1_reason;
    /// Flags and effective settings, in a stable order.
    KeyValues config;

    /// Times are rounded to milliseconds; everything else is exact.
    KeyValues to_key_values() const;
    static RunMetrics from_key_values(const KeyValues& kv);
};

/// Keys of a metrics record that depend on wall-clock time.
bool is_timing_key(const std::string& key);

/// Runs the CLI. Diagnostics go to `err`, tables and labels to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hipad
