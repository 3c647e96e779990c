#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace socsig::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutEnv = "SOCSIG_OUT";

struct RunConfig {
    std::optional<std::filesystem::path> corpus;
    std::optional<std::filesystem::path> ratings;
    std::optional<std::filesystem::path> references;
    std::optional<std::filesystem::path> predictions;
    std::optional<std::filesystem::path> models;
    std::filesystem::path out = "out";
    double window_s = 180.0;
    int k = 5;
    int n_boot = 1000;
    double min_high_fraction = 0.02;
    double threshold = 0.5;
    std::uint64_t seed = 42;
    bool continuity = true;
    bool one_sided = false;
    bool prob_mean = false;

    // synth only
    std::optional<std::filesystem::path> synth_config;
    std::optional<int> n_coded;
    std::optional<int> n_uncoded;
    std::optional<double> corruption_rate;
    std::vector<std::string> plants;  // "<role>_<signal>=<white offset>"
};

enum ExitCode { kOk = 0, kValidation = 1, kInternal = 2 };

// args excludes the program name. Messages go to `out` and `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Hex SHA-256 of a file, or of every regular file under a directory
// (relative name and contents, in sorted name order).
std::string digest(const std::filesystem::path& path);

}  // namespace socsig::cli
