#include "thinshield/datum.hpp"

#include "thinshield/error.hpp"
#include "thinshield/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace thinshield {

BoundaryDatum BoundaryDatum::make_constant(double c)
{
    BoundaryDatum d;
    d.kind = Kind::Constant;
    d.constant = c;
    return d;
}

BoundaryDatum BoundaryDatum::make_barrier(double a, double lift)
{
    BoundaryDatum d;
    d.kind = Kind::Barrier;
    d.slope_a = a;
    d.lift = lift;
    return d;
}

BoundaryDatum BoundaryDatum::make_tilted(double a, double lift, double tilt)
{
    BoundaryDatum d = make_barrier(a, lift);
    d.kind = Kind::Tilted;
    d.tilt = tilt;
    return d;
}

BoundaryDatum BoundaryDatum::make_profile(HomogeneousProfile p, double scale, double lift)
{
    BoundaryDatum d;
    d.kind = Kind::Profile;
    d.profile = p;
    d.scale = scale;
    d.lift = lift;
    return d;
}

double BoundaryDatum::operator()(const Point& x, int n) const
{
    switch (kind) {
    case Kind::Constant:
        return constant;
    case Kind::Barrier:
        return -slope_a * std::abs(x[n]) + lift;
    case Kind::Tilted:
        return -slope_a * std::abs(x[n]) + lift + tilt * x[0];
    case Kind::Profile:
        return scale * profile_value(profile, x, n) + lift;
    case Kind::Nodal:
        break;
    }
    throw InvalidArgument("nodal boundary datum has no closed form");
}

ScalarField BoundaryDatum::sample(MeshPtr mesh) const
{
    if (kind == Kind::Nodal) {
        ScalarField f = read_field(path);
        if (f.mesh().n() != mesh->n() || f.mesh().level() != mesh->level())
            throw InvalidArgument("nodal datum '" + path + "' lives on a different mesh");
        return f;
    }
    const int n = mesh->n();
    return ScalarField::interpolate(mesh, [&](const Point& x) { return (*this)(x, n); });
}

std::string BoundaryDatum::emit() const
{
    std::ostringstream os;
    switch (kind) {
    case Kind::Constant:
        os << "constant c=" << format_number(constant);
        break;
    case Kind::Barrier:
        os << "barrier a=" << format_number(slope_a) << " lift=" << format_number(lift);
        break;
    case Kind::Tilted:
        os << "tilted a=" << format_number(slope_a) << " lift=" << format_number(lift)
           << " tilt=" << format_number(tilt);
        break;
    case Kind::Profile:
        os << "profile family=" << to_string(profile.family) << " m=" << profile.m
           << " scale=" << format_number(scale) << " lift=" << format_number(lift);
        break;
    case Kind::Nodal:
        os << "nodal path=" << path;
        break;
    }
    return os.str();
}

namespace {

double to_number(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
        throw FormatError("datum: bad number for '" + key + "': '" + text + "'");
    return v;
}

} // namespace

BoundaryDatum BoundaryDatum::parse(const std::string& text)
{
    std::istringstream is(text);
    std::string name;
    if (!(is >> name))
        throw FormatError("datum: empty specification");

    if (name == "nodal") {
        std::string rest;
        std::getline(is, rest);
        const auto pos = rest.find("path=");
        if (pos == std::string::npos)
            throw FormatError("datum: nodal needs path=");
        BoundaryDatum d;
        d.kind = Kind::Nodal;
        d.path = rest.substr(pos + 5);
        while (!d.path.empty() && std::isspace(static_cast<unsigned char>(d.path.back())))
            d.path.pop_back();
        if (d.path.empty())
            throw FormatError("datum: empty nodal path");
        return d;
    }

    std::map<std::string, std::string> kv;
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0)
            throw FormatError("datum: expected key=value, got '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto take = [&](const std::string& key, double fallback) {
        auto it = kv.find(key);
        if (it == kv.end())
            return fallback;
        const double v = to_number(key, it->second);
        kv.erase(it);
        return v;
    };

    BoundaryDatum d;
    if (name == "constant") {
        d = make_constant(take("c", 1.0));
    } else if (name == "barrier") {
        const double a = take("a", 1.0);
        d = make_barrier(a, take("lift", 1e-3));
    } else if (name == "tilted") {
        const double a = take("a", 1.0);
        const double lift = take("lift", 1e-3);
        d = make_tilted(a, lift, take("tilt", 0.0));
    } else if (name == "profile") {
        HomogeneousProfile p;
        if (auto it = kv.find("family"); it != kv.end()) {
            p.family = parse_profile_family(it->second);
            kv.erase(it);
        }
        const double m = take("m", 1.0);
        if (m < 1.0 || m != std::floor(m))
            throw FormatError("datum: profile index m must be a positive integer");
        p.m = static_cast<int>(m);
        const double scale = take("scale", 1.0);
        d = make_profile(p, scale, take("lift", 0.0));
    } else {
        throw FormatError("datum: unknown family '" + name + "'");
    }
    if (!kv.empty())
        throw FormatError("datum: unknown key '" + kv.begin()->first + "' for " + name);
    if (d.kind != Kind::Constant && d.kind != Kind::Profile && !(d.slope_a >= 0.0))
        throw FormatError("datum: slope a must be nonnegative");
    return d;
}

double discrete_lipschitz(const ScalarField& f)
{
    double lip = 0.0;
    for (std::size_t c = 0; c < f.mesh().num_cells(); ++c)
        lip = std::max(lip, f.cell_gradient(c).norm());
    return lip;
}

} // namespace thinshield
