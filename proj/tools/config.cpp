#include "config.hpp"

#include "thinshield/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace thinshield::cli {

const std::vector<std::string>& audit_names()
{
    static const std::vector<std::string> names = {
        "signorini", "coincidence", "monotonicity", "identity",  "doubling",
        "lower_bound", "poincare",  "oscillation",  "degiorgi",  "regularity",
        "w22",       "theta",       "blowup",       "flatness",  "minkowski",
        "stationarity"};
    return names;
}

bool AuditConfig::selected(const std::string& name) const
{
    return select.empty() || std::find(select.begin(), select.end(), name) != select.end();
}

namespace {

void require_positive(double v, const std::string& key)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidArgument("config: '" + key + "' must be positive, got " + format_number(v));
}

std::string optional_text(const std::optional<double>& v)
{
    return v ? format_number(*v) : "auto";
}

int integer(const Record& rec, const std::string& key, int fallback)
{
    if (!rec.has(key))
        return fallback;
    const double v = rec.number(key);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw FormatError("config: '" + key + "' must be an integer");
    return static_cast<int>(v);
}

} // namespace

void ExperimentConfig::validate() const
{
    if (n != 1 && n != 2)
        throw InvalidArgument("config: n must be 1 or 2");
    if (level < 0 || level > (n == 1 ? 9 : 6))
        throw InvalidArgument("config: level out of range");
    require_positive(penalty.epsilon0, "penalty.epsilon0");
    require_positive(penalty.epsilon_min, "penalty.epsilon_min");
    if (!(penalty.ratio > 0.0 && penalty.ratio < 1.0))
        throw InvalidArgument("config: penalty.ratio must lie in (0, 1)");
    if (penalty.epsilon_min > penalty.epsilon0)
        throw InvalidArgument("config: penalty.epsilon_min exceeds penalty.epsilon0");
    if (penalty.cauchy_tolerance >= 0.0 || !std::isfinite(penalty.cauchy_tolerance))
        require_positive(penalty.cauchy_tolerance, "penalty.cauchy_tolerance");
    if (penalty.lipschitz)
        require_positive(*penalty.lipschitz, "penalty.lipschitz");
    const NewtonOptions& nw = penalty.newton;
    require_positive(nw.tolerance, "newton.tolerance");
    require_positive(nw.cg_tolerance, "newton.cg_tolerance");
    require_positive(nw.roundoff_fraction, "newton.roundoff_fraction");
    if (!(nw.armijo > 0.0 && nw.armijo < 0.5))
        throw InvalidArgument("config: newton.armijo must lie in (0, 1/2)");
    if (nw.max_iterations < 1)
        throw InvalidArgument("config: newton.max_iterations must be positive");
    for (const auto& name : audit.select)
        if (std::find(audit_names().begin(), audit_names().end(), name) == audit_names().end())
            throw InvalidArgument("config: unknown audit '" + name + "'");
    require_positive(audit.trace_factor, "audit.trace_factor");
    require_positive(audit.normal_derivative, "audit.normal_derivative");
    require_positive(audit.product, "audit.product");
    require_positive(audit.gamma_factor, "audit.gamma_factor");
    require_positive(audit.c_fit, "audit.c_fit");
    require_positive(audit.monotonicity, "audit.monotonicity");
    require_positive(audit.identity, "audit.identity");
    require_positive(audit.alpha_min, "audit.alpha_min");
    require_positive(audit.stationarity, "audit.stationarity");
    require_positive(audit.minkowski_factor, "audit.minkowski_factor");
    require_positive(audit.minkowski_radius, "audit.minkowski_radius");
    if (audit.minkowski_radius > 1.0)
        throw InvalidArgument("config: audit.minkowski_radius must not exceed 1");
}

Record ExperimentConfig::to_record() const
{
    Record rec;
    rec.set("n", static_cast<long long>(n));
    rec.set("level", static_cast<long long>(level));
    rec.set("datum", datum.emit());

    rec.set("penalty.epsilon0", penalty.epsilon0);
    rec.set("penalty.ratio", penalty.ratio);
    rec.set("penalty.epsilon_min", penalty.epsilon_min);
    rec.set("penalty.cauchy_tolerance",
            penalty.cauchy_tolerance < 0.0 ? std::string("auto")
                                           : format_number(penalty.cauchy_tolerance));
    rec.set("penalty.lipschitz", optional_text(penalty.lipschitz));

    const NewtonOptions& nw = penalty.newton;
    rec.set("newton.tolerance", nw.tolerance);
    rec.set("newton.max_iterations", static_cast<long long>(nw.max_iterations));
    rec.set("newton.armijo", nw.armijo);
    rec.set("newton.cg_tolerance", nw.cg_tolerance);
    rec.set("newton.roundoff_fraction", nw.roundoff_fraction);

    std::string sel;
    for (const auto& s : audit.select)
        sel += (sel.empty() ? "" : " ") + s;
    rec.set("audit.select", sel.empty() ? std::string("all") : sel);
    rec.set("audit.trace_factor", audit.trace_factor);
    rec.set("audit.normal_derivative", audit.normal_derivative);
    rec.set("audit.product", audit.product);
    rec.set("audit.gamma_factor", audit.gamma_factor);
    rec.set("audit.c_fit", audit.c_fit);
    rec.set("audit.monotonicity", audit.monotonicity);
    rec.set("audit.identity", audit.identity);
    rec.set("audit.alpha_min", audit.alpha_min);
    rec.set("audit.stationarity", audit.stationarity);
    rec.set("audit.minkowski_factor", audit.minkowski_factor);
    rec.set("audit.minkowski_radius", audit.minkowski_radius);
    return rec;
}

ExperimentConfig ExperimentConfig::from_record(const Record& rec)
{
    static const std::set<std::string> known = [] {
        std::set<std::string> k = {"n", "level", "datum"};
        const Record defaults = ExperimentConfig{}.to_record();
        for (const auto& key : defaults.entries())
            k.insert(key.first);
        return k;
    }();
    for (const auto& [key, value] : rec.entries()) {
        if (key.rfind("run.", 0) == 0 || key.rfind("result.", 0) == 0)
            continue;
        if (!known.count(key))
            throw FormatError("config: unknown key '" + key + "'");
    }

    ExperimentConfig c;
    c.n = integer(rec, "n", c.n);
    c.level = integer(rec, "level", c.level);
    if (rec.has("datum"))
        c.datum = BoundaryDatum::parse(rec.get("datum"));

    ContinuationOptions& p = c.penalty;
    p.epsilon0 = rec.number_or("penalty.epsilon0", p.epsilon0);
    p.ratio = rec.number_or("penalty.ratio", p.ratio);
    p.epsilon_min = rec.number_or("penalty.epsilon_min", p.epsilon_min);
    if (const auto ct = rec.get_or("penalty.cauchy_tolerance", "auto"); ct != "auto") {
        p.cauchy_tolerance = rec.number("penalty.cauchy_tolerance");
        require_positive(p.cauchy_tolerance, "penalty.cauchy_tolerance");
    }
    if (const auto lip = rec.get_or("penalty.lipschitz", "auto"); lip != "auto")
        p.lipschitz = rec.number("penalty.lipschitz");

    NewtonOptions& nw = p.newton;
    nw.tolerance = rec.number_or("newton.tolerance", nw.tolerance);
    nw.max_iterations = integer(rec, "newton.max_iterations", nw.max_iterations);
    nw.armijo = rec.number_or("newton.armijo", nw.armijo);
    nw.cg_tolerance = rec.number_or("newton.cg_tolerance", nw.cg_tolerance);
    nw.roundoff_fraction = rec.number_or("newton.roundoff_fraction", nw.roundoff_fraction);

    AuditConfig& a = c.audit;
    if (const auto sel = rec.get_or("audit.select", "all"); sel != "all") {
        std::istringstream is(sel);
        std::string tok;
        while (is >> tok)
            a.select.push_back(tok);
    }
    a.trace_factor = rec.number_or("audit.trace_factor", a.trace_factor);
    a.normal_derivative = rec.number_or("audit.normal_derivative", a.normal_derivative);
    a.product = rec.number_or("audit.product", a.product);
    a.gamma_factor = rec.number_or("audit.gamma_factor", a.gamma_factor);
    a.c_fit = rec.number_or("audit.c_fit", a.c_fit);
    a.monotonicity = rec.number_or("audit.monotonicity", a.monotonicity);
    a.identity = rec.number_or("audit.identity", a.identity);
    a.alpha_min = rec.number_or("audit.alpha_min", a.alpha_min);
    a.stationarity = rec.number_or("audit.stationarity", a.stationarity);
    a.minkowski_factor = rec.number_or("audit.minkowski_factor", a.minkowski_factor);
    a.minkowski_radius = rec.number_or("audit.minkowski_radius", a.minkowski_radius);

    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text)
{
    return from_record(Record::parse(text));
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path)
{
    return from_record(Record::load(path));
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const
{
    const NewtonOptions& a = penalty.newton;
    const NewtonOptions& b = o.penalty.newton;
    return n == o.n && level == o.level && datum == o.datum &&
           penalty.epsilon0 == o.penalty.epsilon0 && penalty.ratio == o.penalty.ratio &&
           penalty.epsilon_min == o.penalty.epsilon_min &&
           penalty.cauchy_tolerance == o.penalty.cauchy_tolerance &&
           penalty.lipschitz == o.penalty.lipschitz && a.tolerance == b.tolerance &&
           a.max_iterations == b.max_iterations && a.armijo == b.armijo &&
           a.cg_tolerance == b.cg_tolerance && a.roundoff_fraction == b.roundoff_fraction &&
           audit == o.audit;
}

} // namespace thinshield::cli
