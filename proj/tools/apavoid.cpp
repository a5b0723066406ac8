// apavoid: command-line front end. Options are generated from the command schema
// so the CLI and run_command always agree on parameter names.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "apavoid/cli.hpp"

namespace {

struct Bound {
  const apavoid::ParamSpec* spec;
  std::string value;
  bool flag = false;
  CLI::Option* option = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace apavoid;

  if (argc >= 2) {
    const std::string first = argv[1];
    if (!first.empty() && first[0] != '-' && !find_command(first)) {
      std::cerr << "apavoid: unknown subcommand '" << first << "'\n";
      return 64;
    }
  }

  CLI::App app{"Tools for sets avoiding approximate arithmetic progressions"};
  app.set_version_flag("--version", std::string(APAVOID_VERSION));
  app.require_subcommand(1);

  std::string format = "json";
  unsigned threads = 0;
  std::uint64_t seed = 0;
  bool timing = false;
  std::string output;
  app.add_option("--format", format, "json, csv or human")->check(CLI::IsMember({"json", "csv", "human"}));
  app.add_option("--threads", threads, "worker threads (default: APAVOID_THREADS or 1)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized methods");
  app.add_flag("--timing", timing, "record wall time in the report");
  app.add_option("-o,--output", output, "write the report here instead of stdout");

  std::map<std::string, std::vector<Bound>> bound;
  for (const auto& cmd : command_schema()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->fallthrough();
    auto& list = bound[cmd.name];
    list.reserve(cmd.params.size());
    for (const auto& p : cmd.params) {
      list.push_back({&p, {}, false, nullptr});
      auto& b = list.back();
      if (p.type == ParamType::flag)
        b.option = sub->add_flag("--" + p.name, b.flag, p.help);
      else
        b.option = sub->add_option("--" + p.name, b.value, p.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  CommandRequest request;
  for (auto* sub : app.get_subcommands()) request.subcommand = sub->get_name();
  for (const auto& b : bound[request.subcommand]) {
    if (b.option->count() == 0) continue;
    request.parameters[b.spec->name] = b.spec->type == ParamType::flag ? "true" : b.value;
  }
  request.format = parse_output_format(format);
  request.threads = threads;
  if (seed_opt->count() > 0) request.seed = seed;
  request.timing = timing;

  try {
    const RunReport report = run_command(request);
    std::ofstream file;
    if (!output.empty()) {
      file.open(output, std::ios::binary);
      if (!file) throw domain_error("cannot write '" + output + "'");
    }
    std::ostream& out = output.empty() ? std::cout : file;
    switch (request.format) {
      case OutputFormat::json: emit_json(report, out); break;
      case OutputFormat::csv: emit_csv(report, out); break;
      case OutputFormat::human: emit_human(report, out); break;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "apavoid: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
