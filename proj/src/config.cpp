#include "mcl/config.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "mcl/errors.hpp"
#include "mcl/io.hpp"

namespace mcl {

std::string TomlValue::as_string() const {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ValidationError("config value is not a string");
}

std::int64_t TomlValue::as_int() const {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw ValidationError("config value is not an integer");
}

double TomlValue::as_double() const {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw ValidationError("config value is not a number");
}

bool TomlValue::as_bool() const {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw ValidationError("config value is not a boolean");
}

std::vector<std::int64_t> TomlValue::as_int_array() const {
    const auto* arr = std::get_if<std::vector<TomlValue>>(&v);
    if (!arr) throw ValidationError("config value is not an array");
    std::vector<std::int64_t> out;
    for (const TomlValue& e : *arr) out.push_back(e.as_int());
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

TomlValue parse_scalar(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) throw ValidationError("empty config value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw ValidationError("unterminated string: " + s);
        return {s.substr(1, s.size() - 2)};
    }
    if (s == "true") return {true};
    if (s == "false") return {false};
    // Integer when it parses cleanly without a decimal point or exponent.
    if (s.find_first_of(".eE") == std::string::npos ||
        (s.size() > 1 && (s[0] == '0') && (s[1] == 'x'))) {
        try {
            std::size_t pos = 0;
            const std::int64_t i = std::stoll(s, &pos, 0);
            if (pos == s.size()) return {i};
        } catch (const std::exception&) {
        }
    }
    try {
        std::size_t pos = 0;
        const double d = std::stod(s, &pos);
        if (pos == s.size()) return {d};
    } catch (const std::exception&) {
    }
    throw ValidationError("cannot parse config value '" + s + "'");
}

TomlValue parse_value(const std::string& raw) {
    const std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw ValidationError("unterminated array: " + s);
        std::vector<TomlValue> items;
        std::string inner = s.substr(1, s.size() - 2);
        std::stringstream ss(inner);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (!trim(part).empty()) items.push_back(parse_scalar(part));
        }
        return {items};
    }
    return parse_scalar(s);
}

}  // namespace

TomlTable TomlTable::parse(const std::string& text) {
    TomlTable table;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ValidationError("config line " + std::to_string(lineno) + ": bad section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        table.values_[full] = parse_value(line.substr(eq + 1));
    }
    return table;
}

TomlTable TomlTable::parse_file(const std::string& path) {
    return parse(read_text_file(path));
}

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second.as_string();
}

std::int64_t TomlTable::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second.as_int();
}

double TomlTable::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second.as_double();
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second.as_bool();
}

std::vector<std::int64_t> TomlTable::get_int_array(const std::string& key,
                                                   std::vector<std::int64_t> fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second.as_int_array();
}

HarnessConfig config_from_toml(const TomlTable& t) {
    HarnessConfig c;

    c.synthetic.c_main = static_cast<int>(t.get_int("synthetic.c_main", c.synthetic.c_main));
    c.synthetic.samples_per_class =
        static_cast<int>(t.get_int("synthetic.samples_per_class", c.synthetic.samples_per_class));
    c.synthetic.test_samples_per_class = static_cast<int>(
        t.get_int("synthetic.test_samples_per_class", c.synthetic.test_samples_per_class));
    c.synthetic.d_in = static_cast<int>(t.get_int("synthetic.d_in", c.synthetic.d_in));
    c.synthetic.spread = t.get_double("synthetic.spread", c.synthetic.spread);
    c.synthetic.center_scale = t.get_double("synthetic.center_scale", c.synthetic.center_scale);
    {
        std::vector<std::int64_t> fallback(c.synthetic.anomaly_classes.begin(),
                                           c.synthetic.anomaly_classes.end());
        c.synthetic.anomaly_classes.clear();
        for (std::int64_t v : t.get_int_array("synthetic.anomaly_classes", fallback)) {
            c.synthetic.anomaly_classes.push_back(static_cast<int>(v));
        }
    }

    c.train.mcl.tau = t.get_double("mcl.tau", c.train.mcl.tau);
    c.train.mcl.alpha = t.get_double("mcl.alpha", c.train.mcl.alpha);
    c.train.mcl.beta = t.get_double("mcl.beta", c.train.mcl.beta);
    c.train.mcl.lambda = t.get_double("mcl.lambda", c.train.mcl.lambda);
    c.train.mcl.c_aux = static_cast<int>(t.get_int("mcl.c_aux", 4));

    {
        std::vector<std::int64_t> fallback(c.train.encoder.hidden.begin(),
                                           c.train.encoder.hidden.end());
        c.train.encoder.hidden.clear();
        for (std::int64_t v : t.get_int_array("encoder.hidden", fallback)) {
            c.train.encoder.hidden.push_back(static_cast<int>(v));
        }
    }
    c.train.encoder.embed_dim =
        static_cast<int>(t.get_int("encoder.embed_dim", c.train.encoder.embed_dim));
    c.train.encoder.activation = t.get_string("encoder.activation", c.train.encoder.activation);

    c.train.epochs = static_cast<int>(t.get_int("train.epochs", c.train.epochs));
    c.train.batch_n = static_cast<int>(t.get_int("train.batch_size", c.train.batch_n));
    c.train.base_lr = t.get_double("train.base_lr", c.train.base_lr);
    c.train.momentum = t.get_double("train.momentum", c.train.momentum);
    c.train.weight_decay = t.get_double("train.weight_decay", c.train.weight_decay);
    c.train.cosine_annealing = t.get_bool("train.cosine_annealing", c.train.cosine_annealing);
    c.train.loss = loss_selector_from_string(t.get_string("train.loss", "mcl"));
    c.train.joint_lambda = t.get_double("train.joint_lambda", c.train.joint_lambda);
    c.train.allow_invalid_hparams =
        t.get_bool("train.allow_invalid_hparams", c.train.allow_invalid_hparams);
    c.train.noise_scale = t.get_double("augment.noise_scale", c.train.noise_scale);
    c.train.dropout_rate = t.get_double("augment.dropout_rate", c.train.dropout_rate);
    c.train.score_on_features = t.get_bool("train.score_on_features", c.train.score_on_features);

    const std::string aux_mode = t.get_string("train.aux_mode", "labeled");
    if (aux_mode == "none") {
        c.train.aux_mode = AuxMode::none;
    } else if (aux_mode == "labeled") {
        c.train.aux_mode = AuxMode::labeled;
    } else if (aux_mode == "unlabeled") {
        c.train.aux_mode = AuxMode::unlabeled;
    } else {
        throw ValidationError("unknown aux_mode '" + aux_mode + "'");
    }

    c.eval_mode = eval_mode_from_string(t.get_string("eval.mode", "plain"));
    c.eval_agg = aggregation_from_string(t.get_string("eval.agg", "w_avg"));

    c.ablate_seeds = static_cast<int>(t.get_int("ablate.seeds", c.ablate_seeds));
    c.ablate_sei_mode = eval_mode_from_string(t.get_string("ablate.sei_mode", "sei4"));
    c.ablate_agg = aggregation_from_string(t.get_string("ablate.agg", "w_avg"));
    c.validate_expected_pos = t.get_double("validate.expected_pos", 0.0);

    c.train.seed = static_cast<std::uint64_t>(t.get_int("seed", 1));
    c.synthetic.seed = c.train.seed;
    if (const char* env = std::getenv("MCLKIT_SEED")) {
        c.train.seed = std::strtoull(env, nullptr, 10);
        c.synthetic.seed = c.train.seed;
    }
    return c;
}

HarnessConfig load_config(const std::string& path) {
    return config_from_toml(TomlTable::parse_file(path));
}

}  // namespace mcl
