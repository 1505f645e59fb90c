#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>

#include "valueprobe/pipeline.hpp"

namespace valueprobe::cli {

namespace {

struct Options {
  std::string config;
  ConfigOverrides overrides;
};

void add_common(CLI::App& cmd, Options& o) {
  cmd.add_option("--config", o.config, "Run configuration (JSON)")->required();
  cmd.add_option_function<std::string>(
      "--backend", [&o](const std::string& v) { o.overrides.backend = v; },
      "synthetic[:seed] | interchange:<path> | embedded:<model id>");
  cmd.add_option_function<std::string>(
      "--mode", [&o](const std::string& v) { o.overrides.mode = v; }, "diff, pos, neg or all");
  cmd.add_option_function<std::string>(
      "--languages", [&o](const std::string& v) { o.overrides.languages = v; },
      "Comma-separated language codes");
  cmd.add_option_function<double>(
      "--alpha", [&o](double v) { o.overrides.alpha = v; }, "Significance level");
  cmd.add_option_function<std::string>(
      "--out", [&o](const std::string& v) { o.overrides.out = v; }, "Output directory");
  cmd.add_option_function<std::uint64_t>(
      "--seed", [&o](std::uint64_t v) { o.overrides.seed = v; },
      "Seed of the first synthetic model; later ones count up");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cloze-probe value alignment pipeline", "valueprobe"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Options options;
  const std::pair<Command, const char*> commands[] = {
      {Command::Validate, "Check the corpus, culture map and reference data"},
      {Command::Localize, "Translate and re-mask probes for every language"},
      {Command::Score, "Score localized probes with every configured model"},
      {Command::Report, "Write correlation, agreement and significance reports"},
      {Command::Run, "validate, localize, score and report in sequence"},
  };
  for (const auto& [command, help] : commands) {
    add_common(*app.add_subcommand(std::string(to_string(command)), help), options);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "valueprobe: " << e.what() << '\n';
    auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    if (sub == nullptr) err << app.help();
    return kExitUsage;
  }

  const auto command = command_from_string(app.get_subcommands().front()->get_name());
  try {
    auto config = load_run_config(options.config);
    apply_overrides(config, options.overrides);
    switch (command) {
      case Command::Validate: cmd_validate(config, out); break;
      case Command::Localize: cmd_localize(config, out); break;
      case Command::Score: cmd_score(config, out); break;
      case Command::Report: cmd_report(config, out); break;
      case Command::Run: cmd_run(config, out); break;
    }
  } catch (const std::exception& e) {
    err << "valueprobe " << to_string(command) << ": " << e.what() << '\n';
    return exit_code_for(e, command);
  }
  return kExitOk;
}

}  // namespace valueprobe::cli
