#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mcl/train.hpp"

namespace mcl {

// Minimal TOML-style reader covering what the config files use: [section]
// headers, key = value lines with strings, integers, floats, booleans, and
// flat arrays, plus # comments. Keys are exposed as "section.key".
struct TomlValue {
    std::variant<std::string, std::int64_t, double, bool, std::vector<TomlValue>> v;

    std::string as_string() const;
    std::int64_t as_int() const;
    double as_double() const;
    bool as_bool() const;
    std::vector<std::int64_t> as_int_array() const;
};

class TomlTable {
  public:
    static TomlTable parse(const std::string& text);
    static TomlTable parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::int64_t> get_int_array(const std::string& key,
                                            std::vector<std::int64_t> fallback) const;

    const std::map<std::string, TomlValue>& values() const { return values_; }

  private:
    std::map<std::string, TomlValue> values_;
};

// Everything the CLI needs from one config file. The MCLKIT_SEED environment
// variable, when set, overrides the configured seed.
struct HarnessConfig {
    SyntheticSpec synthetic;
    TrainConfig train;
    EvalMode eval_mode = EvalMode::plain;
    Aggregation eval_agg = Aggregation::w_avg;
    int ablate_seeds = 5;
    EvalMode ablate_sei_mode = EvalMode::sei4;
    Aggregation ablate_agg = Aggregation::w_avg;
    double validate_expected_pos = 0.0;  // 0 = derive from the config
};

HarnessConfig load_config(const std::string& path);
HarnessConfig config_from_toml(const TomlTable& table);

}  // namespace mcl
