#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "kronrev/kronrev.hpp"

namespace kronrev::cli {

enum ExitCode { kOk = 0, kRoundTripFailure = 1, kInfeasible = 2, kSingular = 3, kPipelineError = 4 };

struct RunConfig {
    Tolerances tol;
    uint64_t seed = 0;
    std::string input;
    std::string output;  // empty or "-" means stdout
    bool emit_trace = false;
    bool emit_dot = false;
};

struct RoundTripOutcome {
    uint64_t seed = 0;
    bool pass = false;
    double error = 0.0;
    std::string failure;
};

struct RoundTripReport {
    std::vector<RoundTripOutcome> outcomes;  // seed order
    double max_error = 0.0;
    int failures = 0;
    double seconds = 0.0;
};

using InstanceFactory = std::function<RadialNetwork(uint64_t seed)>;

RoundTripOutcome round_trip_one(const RadialNetwork& net, const Tolerances& tol);
RoundTripReport run_round_trip(const InstanceFactory& make, const std::vector<uint64_t>& seeds, const Tolerances& tol,
                               int workers = 0);

// "a..b" (inclusive) or a single value.
std::vector<uint64_t> parse_seed_range(const std::string& text);

// Maps a library error to the documented exit code.
int exit_code_for(const Error& e);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace kronrev::cli
