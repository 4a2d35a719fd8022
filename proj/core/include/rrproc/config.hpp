#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrproc/montecarlo.hpp"

namespace rrproc {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { Eta, Mgf, Renewal, Blackwell, Dri, Mdp, IdentityCheck };

const char* command_name(Command c);

// Raised by parse_config with every violated field collected, not just the first.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

  private:
    std::vector<std::string> problems_;
};

struct RunConfig {
    Command command = Command::Eta;
    std::string law_path;
    std::optional<uint64_t> seed;  // mandatory for commands that draw randomness
    unsigned threads = 1;

    std::vector<double> lambda_grid;
    double tol = 1e-12;
    size_t t_max_steps = 200;   // mgf / identity-check
    size_t n_max = 200;         // renewal / blackwell tables
    uint64_t inequality_trials = 0;
    size_t v_steps = 1;         // blackwell interval length
    size_t u_min_steps = 0;     // blackwell burn-in for the pass verdict
    double threshold = 0.0;     // identity-check / blackwell pass threshold
    std::vector<double> delta_grid;  // dri
    std::vector<double> n_grid;      // dri tail checkpoints
    double t_max = 0.0;              // dri evaluation horizon
    std::vector<SchedulePoint> schedule;  // mdp
    TailMethod method = TailMethod::Tilted;
    bool run_both_methods = false;

    std::string raw_text;  // full config echo for provenance
};

// Parses and validates a UTF-8 JSON config. Unknown commands, malformed
// rationals in the law file path contents, and missing fields are reported
// together in one ConfigError.
RunConfig parse_config(const std::string& text);

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> files_written;
    std::string summary_path;
};

// Executes the configured command, writing <out_dir>/<command>.csv and
// <out_dir>/<command>_summary.json. Exit code 0 iff every configured
// threshold passed; module errors yield a JSON error report and nonzero exit.
RunResult run(const RunConfig& config, const std::string& out_dir);

}  // namespace rrproc
