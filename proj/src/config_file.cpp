#include "dendrite/config_file.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dendrite {

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text)
{
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (trim(text.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

}  // namespace

std::string format_number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ConfigFile ConfigFile::parse(const std::string& text)
{
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing '='");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (cfg.values_.count(key))
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void ConfigFile::set_number(const std::string& key, double value) { values_[key] = format_number(value); }

std::string ConfigFile::fetch(const std::string& key, const std::string& fallback)
{
    used_.insert(key);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    values_[key] = fallback;
    return fallback;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) { return fetch(key, fallback); }

double ConfigFile::get_double(const std::string& key, double fallback)
{
    double v = parse_double(key, fetch(key, format_number(fallback)));
    set_number(key, v);
    return v;
}

std::int64_t ConfigFile::get_int(const std::string& key, std::int64_t fallback)
{
    std::string text = fetch(key, std::to_string(fallback));
    try {
        std::size_t pos = 0;
        long long v = std::stoll(text, &pos);
        if (trim(text.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    // accept integral values written in float notation, e.g. 1e4
    double d = parse_double(key, text);
    if (d != static_cast<double>(static_cast<std::int64_t>(d)))
        throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + text + "'");
    values_[key] = std::to_string(static_cast<std::int64_t>(d));
    return static_cast<std::int64_t>(d);
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback)
{
    std::string text = fetch(key, std::to_string(fallback));
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(text, &pos);
        if (trim(text.substr(pos)).empty() && text.find('-') == std::string::npos) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config key '" + key + "': expected an unsigned integer, got '" + text + "'");
}

bool ConfigFile::get_bool(const std::string& key, bool fallback)
{
    std::string text = fetch(key, fallback ? "true" : "false");
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + text + "'");
}

FunctionSpec ConfigFile::get_function(const std::string& key, const std::string& fallback)
{
    std::string text = fetch(key, fallback);
    FunctionSpec f;
    try {
        f = parse_function_spec(text);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
    values_[key] = f.to_string();
    return f;
}

std::vector<double> ConfigFile::get_list(const std::string& key, const std::string& fallback)
{
    auto v = parse_list(key, fetch(key, fallback));
    std::string canon;
    for (std::size_t i = 0; i < v.size(); ++i) canon += (i ? ", " : "") + format_number(v[i]);
    values_[key] = canon;
    return v;
}

std::vector<std::string> ConfigFile::unused_keys() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!used_.count(k)) out.push_back(k);
    return out;
}

std::string ConfigFile::resolved_text() const
{
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

Law read_law(ConfigFile& cfg, const std::string& key, double default_lo, double default_hi, const std::string& fallback)
{
    std::string text = cfg.get_string(key, fallback);
    std::string head = text.substr(0, text.find('('));
    while (!head.empty() && head.back() == ' ') head.pop_back();
    if (head == "atoms") {
        auto open = text.find('(');
        auto close = text.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            throw std::invalid_argument("config key '" + key + "': malformed atoms(...)");
        std::vector<double> values, weights;
        std::stringstream ss(text.substr(open + 1, close - open - 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("config key '" + key + "': atom '" + trim(item) + "' lacks ':'");
            values.push_back(parse_double(key, trim(item.substr(0, colon))));
            weights.push_back(parse_double(key, trim(item.substr(colon + 1))));
        }
        Law law = Law::atoms(values, weights);
        cfg.set(key, law.to_string());
        return law;
    }
    FunctionSpec f = cfg.get_function(key, fallback);
    auto support = cfg.get_list(key + "_support", format_number(default_lo) + ", " + format_number(default_hi));
    if (support.size() != 2 || !(support[0] < support[1]))
        throw std::invalid_argument("config key '" + key + "_support': expected 'lo, hi' with lo < hi");
    return Law::density(f, support[0], support[1]);
}

SoftParams read_soft_params(ConfigFile& cfg)
{
    SoftParams p;
    p.v_min = cfg.get_double("v_min", 0.0);
    p.L = cfg.get_double("L", 1.0);
    p.rho = cfg.get_double("rho", 1.0);
    p.theta = cfg.get_double("theta", 0.0);
    p.w = cfg.get_double("w", 1.0);
    p.lambda = cfg.get_function("lambda", "shifted_power(alpha=0.2, p=8)");
    p.F = cfg.get_function("F", "affine(c0=1, c1=-0.1)");
    p.H = cfg.get_function("H", "affine(c0=2, c1=-2)");
    p.f0 = read_law(cfg, "f0", p.v_min, p.v_min + 1.0, "constant(c=1)");
    p.growth_C = cfg.get_double("growth_C", 1.0);
    p.growth_p = static_cast<int>(cfg.get_int("growth_p", 0));
    return p;
}

HardParams read_hard_params(ConfigFile& cfg)
{
    HardParams p;
    p.v_min = cfg.get_double("v_min", 0.0);
    p.v_max = cfg.get_double("v_max", 1.2);
    p.L = cfg.get_double("L", 1.0);
    p.rho = cfg.get_double("rho", 1.0);
    p.theta = cfg.get_double("theta", 0.0);
    p.w = cfg.get_double("w", 1.0);
    p.I = cfg.get_double("I", 0.5);
    p.H = cfg.get_function("H", "affine(c0=2, c1=-2)");
    p.f0 = read_law(cfg, "f0", p.v_min, p.v_max,
                    "sine_bump(lo=" + format_number(p.v_min) + ", hi=" + format_number(p.v_max) + ")");
    return p;
}

NetworkParams read_network_params(ConfigFile& cfg)
{
    NetworkParams p;
    p.n = cfg.get_int("n", 1000);
    p.p_n = cfg.get_double("p_n", 1.0);
    p.w = cfg.get_double("w", 1.0);
    p.T = cfg.get_double("T", 2.0);
    p.seed = cfg.get_u64("seed", 1);
    p.self_edges = cfg.get_bool("self_edges", true);
    return p;
}

}  // namespace dendrite
