// SPDX-License-Identifier: Apache-2.0
//
// Structured-text configuration: flat `key = value` lines grouped under
// optional `[section]` headers. Keys inside a section are addressed as
// "section.key".

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace rme {

class Config {
public:
    Config() = default;

    static Config load(const std::filesystem::path& path);
    static Config parse(const std::string& text);

    void save(const std::filesystem::path& path) const;
    std::string to_string() const;

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Comma-separated list of numbers.
    std::vector<double> get_list(const std::string& key) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;

    /// Comma-separated list of trimmed, non-empty strings.
    std::vector<std::string> get_string_list(const std::string& key) const;
    std::vector<std::string> get_string_list(const std::string& key, std::vector<std::string> fallback) const;

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    void set_list(const std::string& key, const std::vector<double>& values);

    /// Keys of the top level plus "section.key" for every sectioned key.
    std::vector<std::string> keys() const;

private:
    boost::property_tree::ptree tree_;
};

/// Shortest decimal text that round-trips `v`.
std::string format_exact(double v);

}  // namespace rme
