#pragma once

#include "thinshield/field.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace thinshield {

/// TOFF1 field file, all integers and floats little-endian:
///
///   "TOFF"            4 bytes magic
///   version           u32 (= 1)
///   n                 u32
///   refinement level  u32
///   vertex count      u64
///   values            vertex count x f64
///
/// The mesh is never stored; it is rebuilt from (n, level).
inline constexpr std::uint32_t kToffVersion = 1;

void write_field(std::ostream& os, const ScalarField& field);
void write_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_field(std::istream& is);
ScalarField read_field(const std::filesystem::path& path);

/// Ordered key:value record. Text form is one "key: value" pair per line, with optional
/// "[section]" headers; keys inside a section are stored as "section.key".
class Record {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    void set(const std::string& key, const std::vector<double>& values);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::vector<double> numbers(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    /// Emits sections for dotted keys in order of first appearance.
    std::string to_text() const;
    static Record parse(const std::string& text);
    static Record load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

/// Full-precision formatting used by every text export.
std::string format_number(double x);

/// One point per line, coordinates separated by spaces, 17 significant digits.
void write_points(std::ostream& os, const std::vector<Point>& points, int dim);
std::vector<Point> read_points(std::istream& is, int dim);

} // namespace thinshield
