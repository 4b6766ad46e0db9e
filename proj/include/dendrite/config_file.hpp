#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dendrite/model_config.hpp"

namespace dendrite {

/// Flat `key = value` configuration with `#` comments.
///
/// Every getter records the key as used and stores the value it resolved to
/// (the default when the key is absent), so `resolved_text()` reproduces the
/// exact inputs of a run.
class ConfigFile {
public:
    ConfigFile() = default;

    /// Throws std::invalid_argument with the offending line number.
    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void set_number(const std::string& key, double value);

    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    FunctionSpec get_function(const std::string& key, const std::string& fallback);
    /// Comma-separated list of numbers.
    std::vector<double> get_list(const std::string& key, const std::string& fallback);

    /// Keys present in the file but never read.
    std::vector<std::string> unused_keys() const;

    /// One `key = value` line per key in lexicographic order, numbers at full precision.
    std::string resolved_text() const;

private:
    std::string fetch(const std::string& key, const std::string& fallback);

    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

/// Format with 17 significant digits (round-trips doubles).
std::string format_number(double x);

/// f0 from the keys `f0` and `f0_support` ("lo, hi"), or `f0 = atoms(v:w, ...)`.
Law read_law(ConfigFile& cfg, const std::string& key, double default_lo, double default_hi,
             const std::string& fallback);

SoftParams read_soft_params(ConfigFile& cfg);
HardParams read_hard_params(ConfigFile& cfg);
NetworkParams read_network_params(ConfigFile& cfg);

}  // namespace dendrite
