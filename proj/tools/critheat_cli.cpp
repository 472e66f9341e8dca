#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "critheat/commands.hpp"
#include "critheat/config.hpp"

using critheat::Json;

namespace {

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw critheat::ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw critheat::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

int usage_error(const CLI::App& app, const std::string& msg) {
  Json err{{"status", "error"}, {"kind", "config"}, {"message", msg}};
  std::cerr << app.help() << "\n" << err.dump() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critheat: Robin functions, critical spectral parameter, nonlocal kernels and blow-up dynamics"};
  app.require_subcommand(1);

  std::string config_path, output, cache;
  std::vector<std::string> overrides;
  int jobs = 0;
  bool print_config = false;

  for (const auto& name : critheat::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "JSON config file");
    sub->add_option("-s,--set", overrides, "override, e.g. domain.resolution=1024 (repeatable)");
    sub->add_option("-o,--output", output, "output directory");
    sub->add_option("-j,--jobs", jobs, "worker threads for parameter sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--cache", cache, "spectrum cache policy")->check(CLI::IsMember({"on", "off", "refresh"}));
    sub->add_flag("--print-config", print_config, "print the resolved config and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  critheat::RunConfig cfg;
  try {
    Json j = config_path.empty() ? Json::object() : read_json(config_path);
    if (!j.is_object()) throw critheat::ConfigError("config root must be an object");
    j["command"] = app.get_subcommands().front()->get_name();
    for (const auto& o : overrides) critheat::apply_override(j, o);
    if (!output.empty()) j["output"] = output;
    if (!cache.empty()) j["cache"] = cache;
    if (jobs > 0) j["jobs"] = jobs;
    cfg = critheat::RunConfig::from_json(j);
  } catch (const critheat::ConfigError& e) {
    return usage_error(*app.get_subcommands().front(), e.what());
  }

  if (print_config) {
    std::cout << cfg.to_json().dump(2) << "\n";
    return 0;
  }
  return critheat::run_command(cfg, std::cout);
}
