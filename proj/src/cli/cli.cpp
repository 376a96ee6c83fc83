#include "latefuse/cli/cli.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "latefuse/common/binary_io.hpp"
#include "latefuse/common/error.hpp"

namespace latefuse::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Flags {
  std::string config, out, preset, equation, data, checkpoint, pred;
  std::optional<std::uint64_t> seed;
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config " + path + ": " + e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
}

// Flags override the matching config keys.
json overlay(json j, const Flags& f) {
  if (!f.preset.empty()) j["preset"] = f.preset;
  if (!f.equation.empty()) j["equation"] = f.equation;
  if (!f.data.empty()) j["data"] = f.data;
  if (!f.checkpoint.empty()) j["checkpoint"] = f.checkpoint;
  if (!f.pred.empty()) j["pred"] = f.pred;
  if (f.seed) j["seeds"] = json::array({*f.seed});
  return j;
}

using Command = void (*)(const RunConfig&, const fs::path&, std::ostream&);

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Late-fusion neural operator experiments", "latefuse"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, Command>> commands{
      {"gen", cmd_gen}, {"train", cmd_train}, {"eval", cmd_eval}, {"ablate", cmd_ablate}, {"inspect", cmd_inspect}};
  const std::map<std::string, std::string> help{
      {"gen", "generate train / in-domain / out-domain datasets"},
      {"train", "train one model per seed (a sweep if several lambdas are given)"},
      {"eval", "roll out checkpoints on the test splits and report metrics"},
      {"ablate", "library x lambda x seed grid on the test splits"},
      {"inspect", "dump hidden states, library terms and the residual split"}};
  for (const auto& [name, _] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", flags.config, "JSON run config");
    sub->add_option("--out", flags.out, "artifact directory")->required();
    sub->add_option("--seed", flags.seed, "single seed (overrides \"seeds\")");
    sub->add_option("--preset", flags.preset, "desk | full")->check(CLI::IsMember({"desk", "full"}));
    sub->add_option("--equation", flags.equation, "advection | burgers | rd1d | rd2d");
    sub->add_option("--data", flags.data, "dataset root");
    sub->add_option("--checkpoint", flags.checkpoint, "train output or model directory");
    sub->add_option("--pred", flags.pred, "dataset root compared against --data (eval)");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "latefuse: " << e.what() << "\n";
    return kExitConfig;
  }

  const auto* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  const auto command = std::find_if(commands.begin(), commands.end(), [&](const auto& c) { return c.first == name; });
  try {
    const RunConfig cfg = parse_config(overlay(load_config_file(flags.config), flags), name);
    const fs::path dir = flags.out;
    fs::create_directories(dir);
    io::write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
    command->second(cfg, dir, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "latefuse " << name << ": config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "latefuse " << name << ": error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace latefuse::cli
