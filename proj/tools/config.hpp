#pragma once

#include "thinshield/datum.hpp"
#include "thinshield/io.hpp"
#include "thinshield/solver.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace thinshield::cli {

/// Names accepted in the audit selection.
const std::vector<std::string>& audit_names();

/// Pass thresholds of `thinshield audit`.
struct AuditConfig {
    std::vector<std::string> select; ///< empty means every audit
    double trace_factor = 10.0;      ///< max(-u) <= trace_factor * eps_final
    double normal_derivative = 0.05;
    double product = 1e-3;
    double gamma_factor = 10.0;      ///< gamma located at gamma_factor * (max negative trace)
    double c_fit = 2.0;
    double monotonicity = 1e-3;
    double identity = 1e-3;
    double alpha_min = 0.4;
    double stationarity = 1e-2;
    double minkowski_factor = 2.0;   ///< ratio <= factor * pi * (points in K)
    double minkowski_radius = 0.75;  ///< K = closed ball of this radius about the origin

    bool selected(const std::string& name) const;
    bool operator==(const AuditConfig&) const = default;
};

struct ExperimentConfig {
    int n = 1;
    int level = 4;
    BoundaryDatum datum = BoundaryDatum::make_barrier(1.0, 1e-3);
    ContinuationOptions penalty;
    AuditConfig audit;

    /// Throws InvalidArgument on out-of-range values; every tolerance must be positive.
    void validate() const;

    Record to_record() const;
    std::string emit() const { return to_record().to_text(); }

    /// Unknown keys are errors, except in the [run] and [result] sections written into
    /// provenance records, so a provenance file is itself a valid config.
    static ExperimentConfig from_record(const Record& rec);
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);

    bool operator==(const ExperimentConfig& other) const;
};

} // namespace thinshield::cli
