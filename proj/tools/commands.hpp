#pragma once

#include "config.hpp"

#include "thinshield/freeboundary.hpp"
#include "thinshield/io.hpp"
#include "thinshield/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace thinshield::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kNumerical = 2, kAuditFailure = 3 };

/// Library version written into every provenance record.
inline constexpr const char* kVersion = "1.0.0";

/// FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// "<path>.prov"
std::filesystem::path provenance_path(const std::filesystem::path& field_path);

/// A field file plus whatever its provenance sidecar records.
struct LoadedSolution {
    ScalarField field;
    double lipschitz = 0.0;    ///< sidecar value, else the default rule applied to the field
    double epsilon_final = 0.0; ///< NaN when there is no sidecar
    bool has_config = false;
    ExperimentConfig config;
};

LoadedSolution load_solution(const std::filesystem::path& path);

struct SolveOutcome {
    ExperimentConfig config;
    Solution solution;
    CoincidenceSet lambda;
    FreeBoundary gamma;
    int thin_vertices = 0;
    double seconds = 0.0;
    /// [result] section of the provenance record.
    Record summary;
};

/// Continuation solve of a validated config; gamma uses the coincidence tolerance 10 eps_final.
SolveOutcome solve_experiment(const ExperimentConfig& cfg);

struct AuditOutcome {
    Record report;
    std::vector<std::string> failed;
    bool pass() const { return failed.empty(); }
};

/// Runs the selected audits of `cfg` over a solution. epsilon_final may be NaN, in which case
/// the trace bound is reported but not enforced.
AuditOutcome run_audits(const ScalarField& u, double lipschitz, double epsilon_final,
                        const AuditConfig& cfg);

/// Centers of the frequency audits: the origin plus (a subsample of) gamma points whose
/// ball of radius 0.4 stays in B_1.
std::vector<Point> frequency_centers(const FreeBoundary& gamma, int max_points = 6);

/// Dyadic radii 0.4 * 2^{-k} down to the trusted radius.
std::vector<double> dyadic_radii(const Mesh& mesh);

/// Writes <out>, <out>.prov and <out>.gamma; prints a key:value summary.
int cmd_solve(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& os,
              const std::string& command_line);

struct FrequencyRequest {
    std::filesystem::path field;
    /// Each entry is "x1[,x2]" or "gamma" (every free-boundary point).
    std::vector<std::string> centers;
    std::vector<double> radii;
    bool unit_weight = false;
};

/// Prints a numeric table: x0 coordinates, r, D, H, E, D_alt, I.
int cmd_frequency(const FrequencyRequest& req, std::ostream& os, const std::string& command_line);

struct BlowupRequest {
    std::filesystem::path field;
    std::string center = "0";
    std::vector<double> radii;
    int target_level = -1;          ///< negative: the level of the field
    std::filesystem::path out_prefix; ///< empty: no rescaled fields written
};

int cmd_blowup(const BlowupRequest& req, std::ostream& os, const std::string& command_line);

struct AuditRequest {
    std::filesystem::path field;
    /// Overrides the selection stored in the sidecar.
    std::vector<std::string> select;
    std::filesystem::path config;   ///< optional thresholds
};

int cmd_audit(const AuditRequest& req, std::ostream& os, const std::string& command_line);

/// Parses "x1[,x2]" into a point of the thin plane of R^{n+1}.
Point parse_center(const std::string& text, int n);

} // namespace thinshield::cli
