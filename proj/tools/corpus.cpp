#include "corpus.hpp"

#include "thinshield/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace thinshield::cli {

namespace {

std::string substitute_level(std::string s, int level)
{
    const std::string tag = "{level}";
    for (auto pos = s.find(tag); pos != std::string::npos; pos = s.find(tag))
        s.replace(pos, tag.size(), std::to_string(level));
    return s;
}

std::string leaf(const std::string& key, const std::string& section)
{
    return key.substr(section.size() + 1);
}

bool in_section(const std::string& key, const std::string& section)
{
    return key.size() > section.size() + 1 && key.compare(0, section.size(), section) == 0 &&
           key[section.size()] == '.';
}

/// Runs fn(k) for k < count on a small pool; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn fn)
{
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                fn(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < worker_count(threads, static_cast<int>(count)); ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace

Manifest Manifest::load(const std::filesystem::path& path, std::optional<int> level)
{
    const Record rec = Record::load(path);
    Manifest m;
    m.n = static_cast<int>(rec.number_or("n", m.n));
    m.level = level ? *level : static_cast<int>(rec.number_or("level", m.level));
    m.budget_seconds = rec.number_or("budget_seconds", m.budget_seconds);
    const std::string base = substitute_level(rec.get_or("baseline", "baseline_level{level}.txt"),
                                              m.level);
    m.baseline = path.parent_path() / base;
    {
        std::istringstream is(rec.get_or("audits", "signorini coincidence monotonicity identity"));
        std::string tok;
        while (is >> tok)
            m.audits.push_back(tok);
    }
    std::map<std::string, BoundaryDatum> by_name;
    for (const auto& [key, value] : rec.entries()) {
        if (in_section(key, "experiments")) {
            const std::string name = leaf(key, "experiments");
            if (name.find('.') != std::string::npos)
                throw FormatError("manifest: experiment names may not contain '.'");
            m.experiments.push_back({name, BoundaryDatum::parse(value)});
            by_name[name] = m.experiments.back().datum;
        }
    }
    for (const auto& [key, value] : rec.entries()) {
        if (in_section(key, "pairs")) {
            const std::string name = leaf(key, "pairs");
            auto it = by_name.find(name);
            if (it == by_name.end())
                throw FormatError("manifest: pair '" + name + "' names no experiment");
            std::istringstream is(value);
            std::string side;
            is >> side;
            std::string rest;
            std::getline(is, rest);
            const BoundaryDatum other = BoundaryDatum::parse(rest);
            if (side == "above")
                m.pairs.push_back({name, it->second, other});
            else if (side == "below")
                m.pairs.push_back({name, other, it->second});
            else
                throw FormatError("manifest: pair '" + name + "' must start with above or below");
        } else if (in_section(key, "tolerances")) {
            const double tol = rec.number(key);
            if (!(tol >= 0.0))
                throw FormatError("manifest: negative tolerance for '" + key + "'");
            m.tolerances.emplace_back(leaf(key, "tolerances"), tol);
        } else if (!in_section(key, "experiments") &&
                   (key.find('.') != std::string::npos ||
                    !(key == "n" || key == "level" || key == "baseline" || key == "audits" ||
                      key == "budget_seconds"))) {
            throw FormatError("manifest: unknown key '" + key + "'");
        }
    }
    if (m.experiments.empty())
        throw FormatError("manifest: no experiments");
    ExperimentConfig probe;
    probe.n = m.n;
    probe.level = m.level;
    probe.audit.select = m.audits;
    probe.validate();
    return m;
}

int worker_count(int requested, int jobs)
{
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("THINSHIELD_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0)
            n = std::min(n, cap);
    }
    return std::clamp(n, 1, std::max(1, jobs));
}

CorpusResult run_corpus(const Manifest& manifest, const CorpusOptions& opts)
{
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentConfig base;
    base.n = manifest.n;
    base.level = manifest.level;
    base.audit.select = manifest.audits;
    if (opts.newton_tolerance)
        base.penalty.newton.tolerance = *opts.newton_tolerance;
    base.validate();

    // Distinct data: experiments first, then pair partners not already present.
    std::vector<BoundaryDatum> data;
    std::map<std::string, std::size_t> index;
    auto add = [&](const BoundaryDatum& d) {
        const std::string key = d.emit();
        if (!index.count(key)) {
            index[key] = data.size();
            data.push_back(d);
        }
    };
    for (const auto& e : manifest.experiments)
        add(e.datum);
    for (const auto& p : manifest.pairs) {
        add(p.lower);
        add(p.upper);
    }

    std::vector<SolveOutcome> solves(data.size());
    parallel_for(data.size(), opts.threads, [&](std::size_t k) {
        ExperimentConfig cfg = base;
        cfg.datum = data[k];
        solves[k] = solve_experiment(cfg);
    });

    CorpusResult res;
    res.experiments.resize(manifest.experiments.size());
    parallel_for(res.experiments.size(), opts.threads, [&](std::size_t k) {
        ExperimentResult& r = res.experiments[k];
        r.name = manifest.experiments[k].name;
        r.solve = solves[index.at(manifest.experiments[k].datum.emit())];
        const Solution& s = r.solve.solution;
        r.audit = run_audits(s.field, s.lipschitz, s.epsilon_final(), base.audit);
    });

    // The two members of a pair are compared at a common penalty scale: the member that
    // stopped at the larger eps is continued down to the other's eps_final.
    std::vector<ScalarField> lower(manifest.pairs.size()), upper(manifest.pairs.size());
    parallel_for(manifest.pairs.size(), opts.threads, [&](std::size_t k) {
        const auto& p = manifest.pairs[k];
        const Solution& a = solves[index.at(p.lower.emit())].solution;
        const Solution& b = solves[index.at(p.upper.emit())].solution;
        const double common = std::min(a.epsilon_final(), b.epsilon_final());
        auto at_common = [&](const BoundaryDatum& d, const Solution& s) {
            if (s.epsilon_final() == common)
                return s.field;
            ContinuationOptions o = base.penalty;
            o.epsilon_min = common;
            o.cauchy_tolerance = std::numeric_limits<double>::min();
            return continuation_solve(d.sample(s.field.mesh_ptr()), o).field;
        };
        lower[k] = at_common(p.lower, a);
        upper[k] = at_common(p.upper, b);
    });
    for (std::size_t k = 0; k < manifest.pairs.size(); ++k)
        res.pairs.push_back({manifest.pairs[k].name, comparison_check(lower[k], upper[k])});

    for (auto& r : res.experiments) {
        for (const auto& [k, v] : r.solve.summary.entries())
            r.metrics.set(k, v);
        for (const auto& [k, v] : r.audit.report.entries())
            r.metrics.set(k, v);
        for (const auto& p : res.pairs)
            if (p.name == r.name)
                r.metrics.set("comparison.max_violation", p.report.max_violation);
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

int cmd_corpus(const std::filesystem::path& manifest_path, const CorpusOptions& opts,
               std::ostream& os, const std::string& command_line)
{
    const Manifest manifest = Manifest::load(manifest_path, opts.level);
    if (!opts.update_baseline && !std::filesystem::exists(manifest.baseline))
        throw InvalidArgument("no baseline at '" + manifest.baseline.string() +
                              "'; run with --update-baseline first");
    const CorpusResult res = run_corpus(manifest, opts);

    Record rep;
    rep.set("run.version", std::string(kVersion));
    rep.set("run.command", command_line);
    rep.set("run.manifest", manifest_path.string());
    rep.set("run.level", static_cast<long long>(manifest.level));
    rep.set("run.workers", static_cast<long long>(
                               worker_count(opts.threads, static_cast<int>(
                                                              manifest.experiments.size()))));
    rep.set("run.seconds", res.seconds);
    rep.set("run.within_budget", std::string(res.seconds <= manifest.budget_seconds ? "yes" : "no"));

    std::vector<std::string> problems;

    if (!opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        for (const auto& r : res.experiments) {
            const auto field = opts.out_dir / (r.name + ".toff");
            write_field(field, r.solve.solution.field);
            Record prov = r.solve.config.to_record();
            prov.set("run.version", std::string(kVersion));
            prov.set("run.command", command_line);
            prov.set("run.field", field.filename().string());
            prov.set("run.digest", file_digest(field));
            for (const auto& [k, v] : r.solve.summary.entries())
                prov.set(k, v);
            prov.save(provenance_path(field));
            r.audit.report.save(opts.out_dir / (r.name + ".audit"));
        }
    }

    Record current;
    for (const auto& r : res.experiments) {
        for (const auto& [metric, tol] : manifest.tolerances)
            if (r.metrics.has(metric))
                current.set(r.name + "." + metric, r.metrics.get(metric));
        if (!r.audit.pass())
            for (const auto& f : r.audit.failed)
                problems.push_back(r.name + ": audit " + f + " failed");
        rep.set("audit." + r.name, r.audit.pass() ? std::string("pass")
                                                  : "fail " + r.audit.report.get("verdict.failed"));
    }
    for (const auto& p : res.pairs) {
        rep.set("comparison." + p.name, p.report.max_violation);
        if (!p.report.pass)
            problems.push_back(p.name + ": comparison violated by " +
                               format_number(p.report.max_violation));
    }

    if (opts.update_baseline) {
        current.save(manifest.baseline);
        rep.set("baseline.written", manifest.baseline.string());
    } else {
        const Record baseline = Record::load(manifest.baseline);
        double worst = 0.0;
        for (const auto& r : res.experiments) {
            for (const auto& [metric, tol] : manifest.tolerances) {
                const std::string key = r.name + "." + metric;
                const bool have = current.has(key), had = baseline.has(key);
                if (!have && !had)
                    continue;
                if (have != had) {
                    problems.push_back(key + ": present in only one of run and baseline");
                    continue;
                }
                const double a = current.number(key), b = baseline.number(key);
                const double drift = std::abs(a - b) / std::max(std::abs(b), 1e-12);
                worst = std::max(worst, drift);
                if (!(drift <= tol)) {
                    problems.push_back(key + ": " + format_number(a) + " vs baseline " +
                                       format_number(b));
                    rep.set("drift." + r.name + "." + metric, drift);
                }
            }
        }
        rep.set("baseline.file", manifest.baseline.string());
        rep.set("baseline.worst_relative_drift", worst);
    }

    for (const auto& [k, v] : current.entries())
        rep.set("metrics." + k, v);
    rep.set("verdict.pass", std::string(problems.empty() ? "yes" : "no"));
    for (std::size_t k = 0; k < problems.size(); ++k)
        rep.set("verdict.problem_" + std::to_string(k), problems[k]);
    os << rep.to_text();
    return problems.empty() ? kSuccess : kAuditFailure;
}

} // namespace thinshield::cli
