#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dgl/driver/session.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dgl: a small dependent type theory checker"};
  app.require_subcommand(1);
  CLI::App* check = app.add_subcommand("check", "check .dgl files after the prelude");

  std::vector<std::string> files;
  dgl::RunFlags flags;
  std::string forbid;
  check->add_option("files", files, "files to check, in order");
  check->add_flag("--no-prelude", flags.no_prelude, "do not load the bundled prelude");
  check->add_flag("--trace-defeq", flags.trace_defeq, "print conversion steps of #def_eq commands");
  check->add_flag("--eta-structures", flags.eta_structures, "enable structure eta in conversion");
  check->add_option("--forbid-axioms", forbid, "comma-separated axioms no definition may depend on");
  check->add_option("--prelude-dir", flags.prelude_dir, "directory holding manifest.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::stringstream ss(forbid);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(' ');
    auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) flags.forbid_axioms.emplace_back(item.substr(b, e - b + 1));
  }
  return dgl::run(files, flags, std::cout, std::cerr);
}
