#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "latefuse/cli/config.hpp"

namespace latefuse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Entry point shared by the executable and the tests. args excludes the
/// program name, e.g. {"gen", "--equation", "advection", "--out", "d"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Command bodies; `out` is the artifact directory (already created).
void cmd_gen(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
void cmd_train(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
void cmd_eval(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
void cmd_ablate(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
void cmd_inspect(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);

/// Model directories under a train output (seed_*/) or the directory itself
/// if it holds model.json. Sorted by name.
std::vector<std::filesystem::path> model_dirs(const std::filesystem::path& checkpoint);

}  // namespace latefuse::cli
