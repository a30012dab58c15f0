#pragma once

#include "commands.hpp"
#include "config.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace thinshield::cli {

/// Regression corpus description. Text form (key:value with sections):
///
///   n: 1
///   level: 5
///   baseline: baseline_level{level}.txt      (relative to the manifest)
///   audits: signorini coincidence monotonicity identity
///   budget_seconds: 900
///   [experiments]
///   name: <datum>
///   [pairs]
///   name: above <datum>   or   name: below <datum>
///   [tolerances]
///   metric: relative drift tolerance
///
/// A pair compares experiment `name` with a second datum lying above or below it.
struct Manifest {
    struct Experiment {
        std::string name;
        BoundaryDatum datum;
    };
    struct Pair {
        std::string name;
        BoundaryDatum lower;
        BoundaryDatum upper;
    };

    int n = 1;
    int level = 5;
    std::filesystem::path baseline;
    std::vector<std::string> audits;
    double budget_seconds = 900.0;
    std::vector<Experiment> experiments;
    std::vector<Pair> pairs;
    std::vector<std::pair<std::string, double>> tolerances;

    /// `level` overrides the manifest level (and the {level} placeholder of the baseline).
    static Manifest load(const std::filesystem::path& path, std::optional<int> level = {});
};

struct CorpusOptions {
    std::optional<int> level;
    bool update_baseline = false;
    /// Replaces the Newton tolerance of every solve (used to check that drift is caught).
    std::optional<double> newton_tolerance;
    int threads = 0;                 ///< 0: hardware concurrency; THINSHIELD_THREADS caps it
    std::filesystem::path out_dir;   ///< optional: fields, provenance and audit reports
};

/// Worker count after applying the THINSHIELD_THREADS cap.
int worker_count(int requested, int jobs);

struct ExperimentResult {
    std::string name;
    SolveOutcome solve;
    AuditOutcome audit;
    /// Tracked metrics of this experiment (solve summary, audit report, pair comparison).
    Record metrics;
};

struct PairResult {
    std::string name;
    ComparisonReport report;
};

struct CorpusResult {
    std::vector<ExperimentResult> experiments;
    std::vector<PairResult> pairs;
    double seconds = 0.0;
};

/// Solves every distinct datum of the manifest in parallel and audits the experiments.
CorpusResult run_corpus(const Manifest& manifest, const CorpusOptions& opts);

/// Runs, compares against (or rewrites) the baseline and prints a report.
int cmd_corpus(const std::filesystem::path& manifest, const CorpusOptions& opts, std::ostream& os,
               const std::string& command_line);

} // namespace thinshield::cli
