#include "thinshield/io.hpp"

#include "thinshield/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace thinshield {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::ostream& os, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is)
{
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        throw FormatError("TOFF1: truncated file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

void write_field(std::ostream& os, const ScalarField& field)
{
    os.write("TOFF", 4);
    put_le<std::uint32_t>(os, kToffVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.mesh().n()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.mesh().level()));
    put_le<std::uint64_t>(os, field.values().size());
    for (double v : field.values())
        put_le<double>(os, v);
    if (!os)
        throw Error("TOFF1: write failed");
}

void write_field(const std::filesystem::path& path, const ScalarField& field)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot open '" + path.string() + "' for writing");
    write_field(os, field);
}

ScalarField read_field(std::istream& is)
{
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "TOFF", 4) != 0)
        throw FormatError("TOFF1: bad magic");
    const auto version = get_le<std::uint32_t>(is);
    if (version != kToffVersion)
        throw FormatError("TOFF1: unsupported version " + std::to_string(version));
    const auto n = get_le<std::uint32_t>(is);
    const auto level = get_le<std::uint32_t>(is);
    const auto count = get_le<std::uint64_t>(is);
    if (n < 1 || n > 2 || level > 12)
        throw FormatError("TOFF1: implausible header");
    MeshPtr mesh = Mesh::half_ball(static_cast<int>(n), static_cast<int>(level));
    if (count != mesh->num_vertices())
        throw FormatError("TOFF1: vertex count does not match the rebuilt mesh");
    std::vector<double> values(count);
    for (auto& v : values)
        v = get_le<double>(is);
    return ScalarField(std::move(mesh), std::move(values));
}

ScalarField read_field(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("cannot open '" + path.string() + "'");
    return read_field(is);
}

std::string format_number(double x)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc())
        return "nan";
    return std::string(buf, end);
}

void Record::set(const std::string& key, const std::string& value)
{
    if (key.empty() || key.find(':') != std::string::npos || value.find('\n') != std::string::npos)
        throw InvalidArgument("Record: invalid key or value for '" + key + "'");
    if (auto it = index_.find(key); it != index_.end()) {
        entries_[it->second].second = value;
        return;
    }
    index_[key] = entries_.size();
    entries_.emplace_back(key, value);
}

void Record::set(const std::string& key, double value) { set(key, format_number(value)); }

void Record::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

void Record::set(const std::string& key, const std::vector<double>& values)
{
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            s += ' ';
        s += format_number(values[i]);
    }
    set(key, s);
}

bool Record::has(const std::string& key) const { return index_.count(key) != 0; }

const std::string& Record::get(const std::string& key) const
{
    auto it = index_.find(key);
    if (it == index_.end())
        throw FormatError("missing key '" + key + "'");
    return entries_[it->second].second;
}

std::string Record::get_or(const std::string& key, const std::string& fallback) const
{
    return has(key) ? get(key) : fallback;
}

double Record::number(const std::string& key) const
{
    const std::string& s = get(key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw FormatError("key '" + key + "': not a number: '" + s + "'");
    return v;
}

double Record::number_or(const std::string& key, double fallback) const
{
    return has(key) ? number(key) : fallback;
}

std::vector<double> Record::numbers(const std::string& key) const
{
    std::vector<double> out;
    std::istringstream is(get(key));
    std::string tok;
    while (is >> tok) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw FormatError("key '" + key + "': not a number list");
        out.push_back(v);
    }
    return out;
}

std::string Record::to_text() const
{
    std::ostringstream os;
    std::string section;
    for (const auto& [key, value] : entries_) {
        const auto dot = key.find('.');
        const std::string sec = dot == std::string::npos ? std::string() : key.substr(0, dot);
        const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
        if (sec != section) {
            if (sec.empty())
                throw InvalidArgument("Record: plain key '" + key + "' after a section");
            os << "\n[" << sec << "]\n";
            section = sec;
        }
        os << leaf << ": " << value << '\n';
    }
    return os.str();
}

Record Record::parse(const std::string& text)
{
    Record rec;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw FormatError("line " + std::to_string(lineno) + ": bad section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto colon = t.find(':');
        if (colon == std::string::npos || colon == 0)
            throw FormatError("line " + std::to_string(lineno) + ": expected 'key: value'");
        const std::string key = trim(t.substr(0, colon));
        const std::string value = trim(t.substr(colon + 1));
        const std::string full = section.empty() ? key : section + "." + key;
        if (rec.has(full))
            throw FormatError("line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
        rec.set(full, value);
    }
    return rec;
}

Record Record::load(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

void Record::save(const std::filesystem::path& path) const
{
    std::ofstream os(path);
    if (!os)
        throw Error("cannot open '" + path.string() + "' for writing");
    os << to_text();
}

void write_points(std::ostream& os, const std::vector<Point>& points, int dim)
{
    for (const auto& p : points) {
        for (int k = 0; k < dim; ++k)
            os << (k ? " " : "") << format_number(p[k]);
        os << '\n';
    }
}

std::vector<Point> read_points(std::istream& is, int dim)
{
    std::vector<Point> out;
    std::string line;
    while (std::getline(is, line)) {
        if (trim(line).empty())
            continue;
        std::istringstream ls(line);
        Point p = Point::Zero();
        for (int k = 0; k < dim; ++k)
            if (!(ls >> p[k]))
                throw FormatError("point list: expected " + std::to_string(dim) + " coordinates");
        out.push_back(p);
    }
    return out;
}

} // namespace thinshield
