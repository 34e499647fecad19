#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xmc/dataspace.hpp"
#include "xmc/trainer.hpp"

namespace xmc::cli {

// Exit statuses: 0 success, 1 internal failure, 2 user-input error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

// Bad input (config, paths, flag values). main() maps this to exit status 2.
struct UserError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat `key = value` file, '#' comments. Unknown keys are errors, listed by
// name. Relative feature/encoder paths resolve against the config's directory.
struct Config {
    std::map<std::string, std::string> values;
    std::filesystem::path dir;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::filesystem::path get_path(const std::string& key) const;   // resolved; key required
};

Config load_config(const std::filesystem::path& path);

SynthConfig synth_config_from(const Config& cfg);
TrainConfig train_config_from(const Config& cfg);

struct Options {
    std::filesystem::path config;
    std::filesystem::path out;
    std::vector<std::uint64_t> seeds;
    std::optional<TrainMode> mode;   // overrides the config's mode
};

int cmd_generate(const Options& opts);
int cmd_run(const Options& opts);
int cmd_ablate(const Options& opts);
int cmd_eval(const Options& opts);

// Parses "1,2,3"; rejects duplicates and empty entries.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

// Worker cap for cmd_ablate: XMC_THREADS when set, hardware concurrency
// otherwise, never above the number of runs.
int thread_budget(int runs);

}  // namespace xmc::cli
