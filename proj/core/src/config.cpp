// SPDX-License-Identifier: Apache-2.0

#include "rme/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <fmt/format.h>

namespace rme {

namespace pt = boost::property_tree;

namespace {

pt::ptree::path_type key_path(const std::string& key) { return {key, '.'}; }

template <typename T>
T convert(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    T value{};
    in >> value;
    if (in.fail() || !(in >> std::ws).eof())
        throw std::invalid_argument(fmt::format("config key '{}': cannot parse '{}'", key, text));
    return value;
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open config file '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse(buffer.str());
    } catch (const pt::ini_parser_error& e) {
        throw std::runtime_error(fmt::format("{}: {}", path.string(), e.message()));
    }
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    pt::read_ini(in, cfg.tree_);
    return cfg;
}

void Config::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << to_string();
    if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

std::string Config::to_string() const {
    std::ostringstream out;
    pt::write_ini(out, tree_);
    return out.str();
}

bool Config::has(const std::string& key) const {
    return static_cast<bool>(tree_.get_optional<std::string>(key_path(key)));
}

std::string Config::get_string(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(key_path(key));
    if (!v) throw std::invalid_argument(fmt::format("missing config key '{}'", key));
    return boost::trim_copy(*v);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
    return convert<double>(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long Config::get_int(const std::string& key) const {
    return convert<long long>(key, get_string(key));
}

long long Config::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = boost::to_lower_copy(get_string(key));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::vector<std::string> parts;
    const auto text = get_string(key);
    boost::split(parts, text, boost::is_any_of(","));
    std::vector<double> out;
    for (auto& p : parts) {
        boost::trim(p);
        if (!p.empty()) out.push_back(convert<double>(key, p));
    }
    return out;
}

std::vector<double> Config::get_list(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? get_list(key) : fallback;
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
    std::vector<std::string> parts;
    const auto text = get_string(key);
    boost::split(parts, text, boost::is_any_of(","));
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key,
                                                 std::vector<std::string> fallback) const {
    return has(key) ? get_string_list(key) : fallback;
}

void Config::set(const std::string& key, const std::string& value) {
    tree_.put(key_path(key), value);
}

void Config::set(const std::string& key, double value) { set(key, format_exact(value)); }

void Config::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

void Config::set_list(const std::string& key, const std::vector<double>& values) {
    std::string text;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) text += ", ";
        text += format_exact(values[i]);
    }
    set(key, text);
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    for (const auto& [name, child] : tree_) {
        if (child.empty())
            out.push_back(name);
        else
            for (const auto& [sub, _] : child) out.push_back(name + "." + sub);
    }
    return out;
}

std::string format_exact(double v) { return fmt::format("{}", v); }

}  // namespace rme
