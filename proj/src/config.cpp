#include "topowave/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace topowave {

std::string to_string(Pooling p) {
    switch (p) {
        case Pooling::mean: return "mean";
        case Pooling::sum: return "sum";
        case Pooling::mean_max: return "mean+max";
    }
    return "mean";
}

Pooling parse_pooling(const std::string& s) {
    if (s == "mean") return Pooling::mean;
    if (s == "sum") return Pooling::sum;
    if (s == "mean+max" || s == "mean_max") return Pooling::mean_max;
    throw ConfigError("unknown pooling '" + s + "' (expected mean|sum|mean+max)");
}

int pooling_stats(Pooling p) { return p == Pooling::mean_max ? 2 : 1; }

void RunConfig::validate() const {
    if (num_views < 1) throw ConfigError("num_views must be a positive integer");
    if (!(bandwidth > 0) || !std::isfinite(bandwidth)) throw ConfigError("bandwidth must be > 0");
    if (!(vr_threshold > 0 && vr_threshold < 1))
        throw ConfigError("vr_threshold must lie in (0, 1)");
    if (max_order < 0) throw ConfigError("max_order must be >= 0");
    if (num_scales < 1) throw ConfigError("num_scales must be a positive integer");
    if (num_scales > 20) throw ConfigError("num_scales above 20 needs more than 2^20 diffusion steps");
    if (!(learning_rate >= 0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be non-negative");
    if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be non-negative");
    if (epochs < 1) throw ConfigError("epochs must be a positive integer");
    if (batch_size < 1) throw ConfigError("batch_size must be a positive integer");
    if (hidden_width < 1) throw ConfigError("hidden_width must be a positive integer");
    if (!(train_fraction > 0 && train_fraction < 1))
        throw ConfigError("train_fraction must lie in (0, 1)");
    if (!(val_fraction >= 0 && val_fraction < 1)) throw ConfigError("val_fraction must lie in [0, 1)");
    if (simplex_budget == 0) throw ConfigError("simplex_budget must be positive");
}

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    std::string out = s.substr(b, e - b + 1);
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("invalid boolean '" + value + "' for key '" + key + "'");
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "num_views") cfg.num_views = parse_number<int>(key, value);
    else if (key == "bandwidth" || key == "sigma") cfg.bandwidth = parse_number<double>(key, value);
    else if (key == "vr_threshold" || key == "epsilon") cfg.vr_threshold = parse_number<double>(key, value);
    else if (key == "max_order") cfg.max_order = parse_number<int>(key, value);
    else if (key == "orientation") cfg.orientation = parse_orientation(value);
    else if (key == "simplex_budget") cfg.simplex_budget = parse_number<std::size_t>(key, value);
    else if (key == "num_scales") cfg.num_scales = parse_number<int>(key, value);
    else if (key == "pooling") cfg.pooling = parse_pooling(value);
    else if (key == "include_lowpass") cfg.include_lowpass = parse_bool(key, value);
    else if (key == "include_raw") cfg.include_raw = parse_bool(key, value);
    else if (key == "learning_rate") cfg.learning_rate = parse_number<double>(key, value);
    else if (key == "weight_decay") cfg.weight_decay = parse_number<double>(key, value);
    else if (key == "epochs") cfg.epochs = parse_number<int>(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_number<int>(key, value);
    else if (key == "hidden_width") cfg.hidden_width = parse_number<int>(key, value);
    else if (key == "freeze_structure") cfg.freeze_structure = parse_bool(key, value);
    else if (key == "train_fraction") cfg.train_fraction = parse_number<double>(key, value);
    else if (key == "val_fraction") cfg.val_fraction = parse_number<double>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (strip(line).empty()) continue;
        if (strip(line).front() == '[') continue;  // TOML section headers are ignored
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        try {
            set_config_value(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    RunConfig cfg;
    apply_config_text(cfg, buf.str(), path.string());
    return cfg;
}

std::map<std::string, std::string> config_to_map(const RunConfig& c) {
    auto num = [](double v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    };
    return {
        {"num_views", std::to_string(c.num_views)},
        {"bandwidth", num(c.bandwidth)},
        {"vr_threshold", num(c.vr_threshold)},
        {"max_order", std::to_string(c.max_order)},
        {"orientation", to_string(c.orientation)},
        {"simplex_budget", std::to_string(c.simplex_budget)},
        {"num_scales", std::to_string(c.num_scales)},
        {"pooling", to_string(c.pooling)},
        {"include_lowpass", c.include_lowpass ? "true" : "false"},
        {"include_raw", c.include_raw ? "true" : "false"},
        {"learning_rate", num(c.learning_rate)},
        {"weight_decay", num(c.weight_decay)},
        {"epochs", std::to_string(c.epochs)},
        {"batch_size", std::to_string(c.batch_size)},
        {"hidden_width", std::to_string(c.hidden_width)},
        {"freeze_structure", c.freeze_structure ? "true" : "false"},
        {"train_fraction", num(c.train_fraction)},
        {"val_fraction", num(c.val_fraction)},
        {"seed", std::to_string(c.seed)},
    };
}

}  // namespace topowave
