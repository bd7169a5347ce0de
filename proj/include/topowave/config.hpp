#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "topowave/common.hpp"

namespace topowave {

enum class Pooling { mean, sum, mean_max };

std::string to_string(Pooling p);
Pooling parse_pooling(const std::string& s);

/// Number of summary statistics a pooling mode emits per feature column.
int pooling_stats(Pooling p);

struct RunConfig {
    // Views and complex construction.
    int num_views = 4;
    double bandwidth = 1.0;      // sigma of the Gaussian kernel
    double vr_threshold = 0.5;   // epsilon; pairs with affinity >= epsilon are joined
    int max_order = 1;           // K
    Orientation orientation = Orientation::unoriented;
    std::size_t simplex_budget = 5'000'000;

    // Scattering.
    int num_scales = 4;          // J
    Pooling pooling = Pooling::mean;
    bool include_lowpass = true;
    bool include_raw = true;

    // Optimisation.
    double learning_rate = 1e-4;
    double weight_decay = 1e-4;
    int epochs = 100;
    int batch_size = 4;
    int hidden_width = 128;
    bool freeze_structure = false;
    double train_fraction = 0.8;
    double val_fraction = 0.2;   // share of the training split held out for model selection

    std::uint64_t seed = 0;

    void validate() const;
};

/// Parses `key = value` lines ('#' starts a comment) into `cfg`. Unknown keys
/// and malformed values raise ConfigError.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source);
RunConfig load_config(const std::filesystem::path& path);

/// Sets a single key; shared by the file parser and CLI overrides.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

std::map<std::string, std::string> config_to_map(const RunConfig& cfg);

}  // namespace topowave
