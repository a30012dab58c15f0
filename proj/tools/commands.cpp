#include "commands.hpp"

#include "thinshield/blowup.hpp"
#include "thinshield/error.hpp"
#include "thinshield/frequency.hpp"
#include "thinshield/geometry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

namespace thinshield::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int count_thin(const Mesh& mesh)
{
    int k = 0;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
        k += mesh.tag(i) == VertexTag::Thin;
    return k;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& x : v)
        s += (s.empty() ? "" : " ") + x;
    return s;
}

void add_run(Record& rec, const std::string& command_line)
{
    rec.set("run.version", std::string(kVersion));
    rec.set("run.command", command_line);
}

} // namespace

std::string file_digest(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("cannot open '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (is) {
        is.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

std::filesystem::path provenance_path(const std::filesystem::path& field_path)
{
    return std::filesystem::path(field_path.string() + ".prov");
}

LoadedSolution load_solution(const std::filesystem::path& path)
{
    LoadedSolution s;
    s.field = read_field(path);
    s.epsilon_final = kNaN;
    const auto prov = provenance_path(path);
    if (std::filesystem::exists(prov)) {
        const Record rec = Record::load(prov);
        if (rec.has("run.digest") && rec.get("run.digest") != file_digest(path))
            throw FormatError("'" + prov.string() + "' does not describe '" + path.string() + "'");
        s.config = ExperimentConfig::from_record(rec);
        s.has_config = true;
        s.lipschitz = rec.number_or("result.lipschitz", 0.0);
        s.epsilon_final = rec.number_or("result.epsilon_final", kNaN);
    }
    if (!(s.lipschitz > 0.0))
        s.lipschitz = default_lipschitz(s.field);
    return s;
}

SolveOutcome solve_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    SolveOutcome out;
    out.config = cfg;
    auto mesh = Mesh::half_ball(cfg.n, cfg.level);
    const ScalarField g = cfg.datum.sample(mesh);
    out.solution = continuation_solve(g, cfg.penalty);
    const Solution& s = out.solution;
    out.lambda = coincidence_set(s.field, 10.0 * s.epsilon_final());
    out.gamma = free_boundary(s.field, out.lambda);
    out.thin_vertices = count_thin(*mesh);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Record& r = out.summary;
    int its = 0;
    for (int k : s.newton_iterations)
        its += k;
    r.set("result.epsilon_final", s.epsilon_final());
    r.set("result.stages", static_cast<long long>(s.epsilons.size()));
    r.set("result.newton_iterations", static_cast<long long>(its));
    r.set("result.cauchy_h1", s.cauchy_h1.empty() ? 0.0 : s.cauchy_h1.back());
    r.set("result.lipschitz", s.lipschitz);
    r.set("result.max_gradient", s.max_gradient);
    r.set("result.chi_inactive", s.chi_inactive);
    r.set("result.h1_norm", h1_distance(s.field, ScalarField(mesh, 0.0)));
    r.set("result.coincidence_vertices", static_cast<long long>(out.lambda.vertices.size()));
    r.set("result.coincidence_fraction",
          out.thin_vertices ? static_cast<double>(out.lambda.vertices.size()) / out.thin_vertices
                            : 0.0);
    r.set("result.gamma_points", static_cast<long long>(out.gamma.points.size()));
    r.set("result.max_negative_trace", s.complementarity.max_negative_trace);
    r.set("result.max_positive_normal_derivative",
          s.complementarity.max_positive_normal_derivative);
    r.set("result.max_product", s.complementarity.max_product);
    return out;
}

std::vector<Point> frequency_centers(const FreeBoundary& gamma, int max_points)
{
    std::vector<Point> inside;
    for (const auto& p : gamma.points)
        if (p.norm() <= 0.6)
            inside.push_back(p);
    std::vector<Point> centers = {Point::Zero()};
    const int m = static_cast<int>(inside.size());
    const int take = std::min(m, max_points);
    for (int k = 0; k < take; ++k)
        centers.push_back(inside[static_cast<std::size_t>(k) * m / take]);
    return centers;
}

std::vector<double> dyadic_radii(const Mesh& mesh)
{
    std::vector<double> radii;
    const double lo = trusted_radius(mesh);
    for (double r = 0.4; r >= lo; r *= 0.5)
        radii.push_back(r);
    return radii;
}

AuditOutcome run_audits(const ScalarField& u, double lipschitz, double epsilon_final,
                        const AuditConfig& cfg)
{
    const Mesh& mesh = u.mesh();
    const int n = mesh.n();
    AuditOutcome out;
    Record& rep = out.report;
    auto fail = [&](const std::string& name) { out.failed.push_back(name); };

    rep.set("field.n", static_cast<long long>(n));
    rep.set("field.level", static_cast<long long>(mesh.level()));
    rep.set("field.vertices", static_cast<long long>(mesh.num_vertices()));
    rep.set("field.h", mesh.h());
    rep.set("field.lipschitz", lipschitz);
    rep.set("field.epsilon_final", epsilon_final);

    const double tol_g = penetration_tolerance(u, cfg.gamma_factor);
    const FreeBoundary gamma = free_boundary(u, coincidence_set(u, tol_g));
    const WeightField weight = theta_weight(u, lipschitz);
    const std::vector<Point> centers = frequency_centers(gamma);
    const std::vector<double> radii = dyadic_radii(mesh);

    if (cfg.selected("signorini")) {
        const auto c = complementarity_residuals(u);
        rep.set("signorini.max_negative_trace", c.max_negative_trace);
        rep.set("signorini.max_positive_normal_derivative", c.max_positive_normal_derivative);
        rep.set("signorini.max_product", c.max_product);
        rep.set("signorini.vertices_checked", static_cast<long long>(c.vertices_checked));
        bool ok = c.max_positive_normal_derivative <= cfg.normal_derivative &&
                  c.max_product <= cfg.product;
        if (std::isfinite(epsilon_final)) {
            rep.set("signorini.trace_limit", cfg.trace_factor * epsilon_final);
            ok = ok && c.max_negative_trace <= cfg.trace_factor * epsilon_final;
        } else {
            rep.set("signorini.trace_limit", std::string("unknown"));
        }
        rep.set("signorini.pass", std::string(yes_no(ok)));
        if (!ok)
            fail("signorini");
    }

    if (cfg.selected("coincidence")) {
        const double tol_c =
            std::isfinite(epsilon_final) ? 10.0 * epsilon_final : tol_g;
        const auto lambda = coincidence_set(u, tol_c);
        const int thin = count_thin(mesh);
        rep.set("coincidence.tolerance", tol_c);
        rep.set("coincidence.vertices", static_cast<long long>(lambda.vertices.size()));
        rep.set("coincidence.fraction",
                thin ? static_cast<double>(lambda.vertices.size()) / thin : 0.0);
        rep.set("coincidence.band", static_cast<long long>(lambda.band));
        rep.set("coincidence.gamma_tolerance", tol_g);
        rep.set("coincidence.gamma_points", static_cast<long long>(gamma.points.size()));
    }

    if (cfg.selected("monotonicity")) {
        double worst = 0.0, min_c = 0.0, min_c_add = 0.0;
        int evaluated = 0, skipped = 0;
        if (radii.size() >= 2) {
            for (const auto& c : centers) {
                try {
                    const auto m = monotonicity_audit(u, weight, c, radii, cfg.c_fit,
                                                      cfg.monotonicity);
                    worst = std::max(worst, m.worst_violation);
                    min_c = std::max(min_c, m.minimal_c);
                    min_c_add = std::max(min_c_add, m.minimal_c_additive);
                    ++evaluated;
                } catch (const Degenerate&) {
                    ++skipped;
                }
            }
        }
        rep.set("monotonicity.radii", radii);
        rep.set("monotonicity.centers", static_cast<long long>(evaluated));
        rep.set("monotonicity.skipped", static_cast<long long>(skipped));
        rep.set("monotonicity.c_fit", cfg.c_fit);
        rep.set("monotonicity.worst_violation", worst);
        rep.set("monotonicity.minimal_c", min_c);
        rep.set("monotonicity.minimal_c_additive", min_c_add);
        const bool ok = evaluated == 0 || (worst <= cfg.monotonicity && min_c <= cfg.c_fit);
        rep.set("monotonicity.pass", std::string(yes_no(ok)));
        if (!ok)
            fail("monotonicity");
    }

    if (cfg.selected("identity")) {
        double worst = 0.0, eps_d = 0.0, eps_h = 0.0;
        int evaluated = 0;
        for (const auto& c : centers) {
            // The derivative stencil reaches out to r q^2 with q <= 1.05.
            std::vector<double> rc;
            for (double r : radii)
                if (c.norm() + 1.1025 * r <= 1.0)
                    rc.push_back(r);
            if (rc.empty())
                continue;
            try {
                const auto v = variation_identity_audit(u, weight, c, rc);
                worst = std::max(worst, v.worst_identity);
                eps_d = std::max(eps_d, v.worst_eps_D);
                eps_h = std::max(eps_h, v.worst_eps_H);
                ++evaluated;
            } catch (const Degenerate&) {
            }
        }
        rep.set("identity.centers", static_cast<long long>(evaluated));
        rep.set("identity.worst", worst);
        rep.set("identity.worst_eps_D", eps_d);
        rep.set("identity.worst_eps_H", eps_h);
        const bool ok = worst <= cfg.identity;
        rep.set("identity.pass", std::string(yes_no(ok)));
        if (!ok)
            fail("identity");
    }

    // Report-only audits of the frequency calculus.
    const Point probe = centers.size() > 1 ? centers[1] : Point::Zero();

    if (cfg.selected("doubling") && radii.size() >= 2) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        bool degenerate = false;
        for (double r : radii) {
            const auto rec = compute_DHE(u, weight, probe, r);
            degenerate = degenerate || rec.degenerate;
            lo = std::min(lo, rec.I);
            hi = std::max(hi, rec.I);
        }
        if (!degenerate) {
            const auto d = doubling_audit(u, weight, probe, radii, lo, hi, cfg.c_fit, lipschitz);
            rep.set("doubling.A1", lo);
            rep.set("doubling.A2", hi);
            rep.set("doubling.upper_violation", d.upper_violation);
            rep.set("doubling.lower_violation", d.lower_violation);
            rep.set("doubling.sandwich_slack", d.sandwich_slack);
            rep.set("doubling.holds", std::string(yes_no(d.pass)));
        } else {
            rep.set("doubling.skipped", std::string("H vanishes at a radius"));
        }
    } else if (cfg.selected("doubling")) {
        rep.set("doubling.skipped", std::string("fewer than two radii above 10h"));
    }

    if (cfg.selected("lower_bound") && centers.size() > 1) {
        std::vector<double> lr;
        for (double r = 0.2; r >= std::max(0.05, trusted_radius(mesh)); r *= 0.5)
            lr.push_back(r);
        if (!lr.empty()) {
            const std::vector<Point> pts(centers.begin() + 1, centers.end());
            const auto lb = frequency_lower_bound_audit(u, weight, pts, lr);
            rep.set("lower_bound.min_frequency", lb.min_frequency);
            rep.set("lower_bound.argmin_radius", lb.argmin_radius);
            rep.set("lower_bound.evaluated", static_cast<long long>(lb.evaluated));
            rep.set("lower_bound.skipped", static_cast<long long>(lb.skipped));
        } else {
            rep.set("lower_bound.radii", std::string("none in [max(10h, 0.05), 0.2]"));
        }
    }

    if (cfg.selected("poincare") && centers.size() > 1) {
        const double r = std::min(0.2, 1.0 - probe.norm());
        const auto pc = poincare_audit(u, probe, r);
        rep.set("poincare.radius", r);
        rep.set("poincare.sphere_l2", pc.sphere_l2);
        rep.set("poincare.constant", pc.constant);
    }

    if (cfg.selected("oscillation") && centers.size() > 1) {
        const double R = 10.0;
        const double rho = (1.0 - probe.norm()) / (4.0 * R);
        Point x1 = probe, x2 = probe;
        x1[0] -= 0.5 * rho;
        x2[0] += 0.5 * rho;
        try {
            const auto osc = spatial_oscillation_audit(u, weight, probe, x1, x2, rho, R, cfg.c_fit);
            rep.set("oscillation.rho", rho);
            rep.set("oscillation.lhs", osc.lhs);
            rep.set("oscillation.constant", osc.constant);
        } catch (const Degenerate&) {
            rep.set("oscillation.skipped", std::string("H vanishes in a window"));
        }
    }

    if (cfg.selected("degiorgi")) {
        const double r = std::min(0.125, (1.0 - probe.norm()) / 2.0);
        double worst = 0.0;
        for (int i = 0; i <= n; ++i) {
            for (int sign : {1, -1}) {
                for (double k : {0.0, 0.1, 0.25}) {
                    const auto dg = degiorgi_class_audit(u, probe, r, k, i, sign);
                    if (dg.rhs > 0.0)
                        worst = std::max(worst, dg.ratio);
                }
            }
        }
        rep.set("degiorgi.radius", r);
        rep.set("degiorgi.max_ratio", worst);
    }

    if (cfg.selected("regularity")) {
        // The Holder estimates are interior: gamma points hugging the sphere see the datum.
        const RegularityFitOptions fit_opts;
        FreeBoundary interior;
        for (std::size_t k = 0; k < gamma.points.size(); ++k) {
            if (1.0 - gamma.points[k].norm() >= fit_opts.max_distance) {
                interior.points.push_back(gamma.points[k]);
                interior.edges.push_back(gamma.edges[k]);
            }
        }
        bool done = false;
        if (interior.empty() && !gamma.empty()) {
            rep.set("regularity.skipped", std::string("gamma lies within 1/8 of the sphere"));
            done = true;
        } else if (!interior.empty()) {
            try {
                const auto fit = regularity_exponent_fit(u, interior, fit_opts);
                rep.set("regularity.alpha_grad", fit.alpha_grad);
                rep.set("regularity.alpha_val", fit.alpha_val);
                rep.set("regularity.c_grad", fit.c_grad);
                rep.set("regularity.c_val", fit.c_val);
                rep.set("regularity.shells", static_cast<long long>(fit.shell_distance.size()));
                rep.set("regularity.gamma_points", static_cast<long long>(interior.points.size()));
                const bool ok = fit.alpha_grad >= cfg.alpha_min;
                rep.set("regularity.pass", std::string(yes_no(ok)));
                if (!ok)
                    fail("regularity");
                done = true;
            } catch (const Degenerate&) {
            }
        }
        if (!done)
            rep.set("regularity.skipped", std::string("fewer than three shells near gamma"));
    }

    if (cfg.selected("w22")) {
        std::vector<Point> where = {Point::Zero()};
        if (centers.size() > 1)
            where.push_back(centers[1]);
        for (std::size_t k = 0; k < where.size(); ++k) {
            const double r = std::min(0.125, (1.0 - where[k].norm()) / 2.0);
            const auto w = w22_audit(u, where[k], r);
            const std::string key = "w22." + std::string(k ? "gamma" : "origin");
            rep.set(key + "_radius", r);
            rep.set(key + "_ratio", w.ratio);
        }
    }

    if (cfg.selected("theta"))
        rep.set("theta.lipschitz", theta_lipschitz_audit(u));

    if (cfg.selected("blowup")) {
        const Point x0 = centers.size() > 1 ? centers[1] : Point::Zero();
        const double r = std::min(trusted_radius(mesh), 1.0 - x0.norm());
        rep.set("blowup.center", std::vector<double>(x0.data(), x0.data() + n));
        rep.set("blowup.radius", r);
        try {
            const auto v = rescale(u, x0, r, u.mesh_ptr());
            const auto match = classify_blowup(v);
            rep.set("blowup.frequency", match.measured_frequency);
            rep.set("blowup.nearest_admissible", match.nearest_admissible);
            rep.set("blowup.classified", std::string(yes_no(match.classified)));
            rep.set("blowup.profile", std::string(to_string(match.profile.family)) + " m=" +
                                          std::to_string(match.profile.m));
            rep.set("blowup.distance", match.distance);
        } catch (const Degenerate&) {
            rep.set("blowup.skipped", std::string("H vanishes at the center"));
        }
        if (!gamma.empty()) {
            const auto reg = detect_regular_points(u, WeightField::unit(u.mesh_ptr()), gamma);
            rep.set("blowup.regular_points", static_cast<long long>(reg.marked.size()));
            rep.set("blowup.curve_residual", reg.curve_residual);
        }
    }

    if (cfg.selected("flatness")) {
        const auto mu = WeightedPointCloud::from_gamma(gamma);
        double beta_max = 0.0, constant = 0.0;
        int evaluated = 0;
        for (std::size_t k = 1; k < centers.size(); ++k) {
            const Point& p = centers[k];
            const double R = 7.0;
            const double r = (1.0 - p.norm()) / (2.0 * R + 5.0);
            try {
                const auto f = flatness_vs_pinching_audit(u, weight, mu, p, r, R, cfg.c_fit);
                beta_max = std::max(beta_max, f.beta2);
                constant = std::max(constant, f.constant);
                ++evaluated;
            } catch (const Degenerate&) {
            }
        }
        rep.set("flatness.points", static_cast<long long>(evaluated));
        rep.set("flatness.max_beta2", beta_max);
        rep.set("flatness.constant", constant);
    }

    if (cfg.selected("minkowski")) {
        if (gamma.empty()) {
            rep.set("minkowski.skipped", std::string("empty free boundary"));
        } else {
            std::vector<double> mr;
            for (double r = 0.2; r >= trusted_radius(mesh); r /= std::sqrt(2.0))
                mr.push_back(r);
            const auto m = minkowski_audit(gamma, mesh, Point::Zero(), cfg.minkowski_radius, mr);
            rep.set("minkowski.radii", m.radii);
            rep.set("minkowski.ratio", m.ratio);
            rep.set("minkowski.max_ratio", m.max_ratio);
            rep.set("minkowski.points", static_cast<long long>(m.points));
            if (m.points == 0 || m.ratio.empty()) {
                rep.set("minkowski.skipped", std::string(m.points == 0
                                                             ? "no free-boundary point inside K"
                                                             : "no radius above 10h"));
            } else {
                // n = 1: isolated points, the disc value pi per point; n = 2: the ratio at the
                // largest radius sets the scale of the curve.
                const double bound = n == 1
                                         ? cfg.minkowski_factor * std::numbers::pi * m.points
                                         : cfg.minkowski_factor * m.ratio.front();
                rep.set("minkowski.bound", bound);
                const bool ok = m.max_ratio <= bound;
                rep.set("minkowski.pass", std::string(yes_no(ok)));
                if (!ok)
                    fail("minkowski");
            }
        }
    }

    if (cfg.selected("stationarity")) {
        std::vector<Point> near;
        for (const auto& p : gamma.points)
            if (p.norm() <= 0.8)
                near.push_back(p);
        const Point c1 = near.empty() ? Point(0.3, 0.0, 0.0) : near.front();
        const Point c2 = near.size() > 1 ? near.back() : Point(-0.3, 0.0, 0.0);
        double worst = 0.0;
        std::vector<double> rel;
        for (const auto& Y : standard_test_fields(n, c1, c2)) {
            const double r = std::abs(two_valued_first_variation(u, Y)) / c1_norm(Y, n);
            rel.push_back(r);
            worst = std::max(worst, r);
        }
        rep.set("stationarity.relative", rel);
        rep.set("stationarity.worst", worst);
        const bool ok = worst <= cfg.stationarity;
        rep.set("stationarity.pass", std::string(yes_no(ok)));
        if (!ok)
            fail("stationarity");
    }

    rep.set("verdict.pass", std::string(yes_no(out.pass())));
    rep.set("verdict.failed", out.failed.empty() ? std::string("none") : join(out.failed));
    return out;
}

int cmd_solve(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& os,
              const std::string& command_line)
{
    SolveOutcome res = solve_experiment(cfg);
    write_field(out, res.solution.field);

    Record prov = cfg.to_record();
    add_run(prov, command_line);
    prov.set("run.field", out.filename().string());
    prov.set("run.digest", file_digest(out));
    for (const auto& [k, v] : res.summary.entries())
        prov.set(k, v);
    prov.save(provenance_path(out));

    const auto gamma_path = std::filesystem::path(out.string() + ".gamma");
    {
        std::ofstream gs(gamma_path);
        if (!gs)
            throw Error("cannot open '" + gamma_path.string() + "' for writing");
        write_points(gs, res.gamma.points, cfg.n);
    }

    Record summary;
    summary.set("field", out.string());
    summary.set("provenance", provenance_path(out).string());
    summary.set("gamma", gamma_path.string());
    summary.set("seconds", res.seconds);
    for (const auto& [k, v] : res.summary.entries())
        summary.set(k, v);
    os << summary.to_text();
    return kSuccess;
}

Point parse_center(const std::string& text, int n)
{
    Point x = Point::Zero();
    std::string t = text;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream is(t);
    int k = 0;
    double v = 0.0;
    while (is >> v) {
        if (k >= n)
            throw InvalidArgument("center '" + text + "' has too many coordinates");
        x[k++] = v;
    }
    if (!is.eof() || k == 0)
        throw InvalidArgument("bad center '" + text + "'");
    return x;
}

int cmd_frequency(const FrequencyRequest& req, std::ostream& os, const std::string& command_line)
{
    const LoadedSolution sol = load_solution(req.field);
    const ScalarField& u = sol.field;
    const int n = u.mesh().n();
    const WeightField weight =
        req.unit_weight ? WeightField::unit(u.mesh_ptr()) : theta_weight(u, sol.lipschitz);

    std::vector<Point> centers;
    for (const auto& c : req.centers) {
        if (c == "gamma") {
            const auto g = free_boundary(u, coincidence_set(u, penetration_tolerance(u)));
            centers.insert(centers.end(), g.points.begin(), g.points.end());
        } else {
            centers.push_back(parse_center(c, n));
        }
    }
    if (centers.empty())
        centers.push_back(Point::Zero());
    std::vector<double> radii = req.radii;
    if (radii.empty())
        radii = dyadic_radii(u.mesh());

    os << "# version " << kVersion << "\n# command " << command_line << "\n# field "
       << req.field.string() << " digest " << file_digest(req.field) << "\n# weight "
       << (req.unit_weight ? "unit" : "theta L=" + format_number(sol.lipschitz)) << "\n#";
    for (int k = 0; k < n; ++k)
        os << " x" << k + 1;
    os << " r D H E D_alt I\n";
    for (const auto& c : centers) {
        for (double r : radii) {
            if (c.norm() + r > 1.0)
                continue;
            const auto rec = compute_DHE(u, weight, c, r);
            for (int k = 0; k < n; ++k)
                os << format_number(c[k]) << ' ';
            os << format_number(r) << ' ' << format_number(rec.D) << ' ' << format_number(rec.H)
               << ' ' << format_number(rec.E) << ' ' << format_number(rec.D_alt) << ' '
               << (rec.degenerate ? std::string("nan") : format_number(rec.I)) << '\n';
        }
    }
    return kSuccess;
}

int cmd_blowup(const BlowupRequest& req, std::ostream& os, const std::string& command_line)
{
    const LoadedSolution sol = load_solution(req.field);
    const ScalarField& u = sol.field;
    const int n = u.mesh().n();
    const Point x0 = parse_center(req.center, n);
    std::vector<double> radii = req.radii;
    if (radii.empty())
        for (double r : dyadic_radii(u.mesh()))
            if (x0.norm() + r <= 1.0)
                radii.push_back(r);
    if (radii.empty())
        throw InvalidArgument("blowup: no admissible radius at this center");
    const int level = req.target_level < 0 ? u.mesh().level() : req.target_level;
    auto target = Mesh::half_ball(n, level);

    Record rep;
    add_run(rep, command_line);
    rep.set("run.field", req.field.string());
    rep.set("run.digest", file_digest(req.field));
    rep.set("run.center", std::vector<double>(x0.data(), x0.data() + n));
    rep.set("run.target_level", static_cast<long long>(level));
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const std::string sec = "radius_" + std::to_string(k) + ".";
        const ScalarField v = rescale(u, x0, radii[k], target);
        const auto match = classify_blowup(v);
        rep.set(sec + "r", radii[k]);
        rep.set(sec + "frequency", match.measured_frequency);
        rep.set(sec + "nearest_admissible", match.nearest_admissible);
        rep.set(sec + "classified", std::string(yes_no(match.classified)));
        rep.set(sec + "profile", std::string(to_string(match.profile.family)) + " m=" +
                                     std::to_string(match.profile.m));
        rep.set(sec + "homogeneity", match.homogeneity);
        rep.set(sec + "distance", match.distance);
        rep.set(sec + "scale", match.scale);
        if (!req.out_prefix.empty()) {
            const auto path =
                std::filesystem::path(req.out_prefix.string() + "_" + std::to_string(k) + ".toff");
            write_field(path, v);
            rep.set(sec + "field", path.string());
        }
    }
    os << rep.to_text();
    return kSuccess;
}

int cmd_audit(const AuditRequest& req, std::ostream& os, const std::string& command_line)
{
    const LoadedSolution sol = load_solution(req.field);
    AuditConfig cfg = sol.has_config ? sol.config.audit : AuditConfig{};
    if (!req.config.empty())
        cfg = ExperimentConfig::load(req.config).audit;
    if (!req.select.empty()) {
        cfg.select = req.select;
        ExperimentConfig probe;
        probe.audit = cfg;
        probe.validate();
    }
    AuditOutcome out = run_audits(sol.field, sol.lipschitz, sol.epsilon_final, cfg);
    Record rep;
    add_run(rep, command_line);
    rep.set("run.field", req.field.string());
    rep.set("run.digest", file_digest(req.field));
    for (const auto& [k, v] : out.report.entries())
        rep.set(k, v);
    os << rep.to_text();
    return out.pass() ? kSuccess : kAuditFailure;
}

} // namespace thinshield::cli
