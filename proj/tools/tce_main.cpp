#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tce/error.hpp"
#include "tce/session.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw tce::EngineError(tce::ErrorKind::Io, "cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string run_file(const std::string& path, tce::PrintMode mode, bool post) {
  tce::Session sess(mode, post);
  std::string out;
  for (const auto& line : sess.run_script(read_file(path))) {
    out += line;
    out += '\n';
  }
  return out;
}

int repl(tce::PrintMode mode, bool post) {
  tce::Session sess(mode, post);
  std::string buf;
  std::size_t done = 0;
  std::string line;
  auto prompt = [&] {
    std::cout << (buf.empty() ? "tce> " : "...> ") << std::flush;
  };
  prompt();
  while (std::getline(std::cin, line)) {
    if (buf.empty() && (line == "quit" || line == "exit")) return 0;
    buf += line;
    buf += '\n';
    try {
      // Re-parse the whole pending buffer; statements executed on an earlier
      // pass are skipped by count. Parsing stays consistent across passes
      // because attachments only ever add notation.
      tce::StatementStream stream(buf, sess.registry());
      std::size_t idx = 0;
      while (auto st = stream.next()) {
        if (idx++ < done) continue;
        try {
          for (const auto& l : sess.run_statement(*st)) std::cout << l << "\n";
        } catch (const tce::EngineError& e) {
          std::cerr << "error: " << e.what() << "\n";
        }
        done = idx;
      }
      buf.clear();
      done = 0;
    } catch (const tce::ParseError& pe) {
      if (!pe.incomplete()) {
        std::cerr << "error: " << pe.what() << "\n";
        buf.clear();
        done = 0;
      }
    }
    prompt();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor algebra script runner"};
  app.require_subcommand(0, 1);

  std::string format = "plain";
  bool no_post = false;
  std::vector<std::string> check_args;
  app.add_option("--format", format, "output notation: plain or latex")
      ->check(CLI::IsMember({"plain", "latex"}));
  app.add_flag("--no-postprocess", no_post,
               "disable the automatic post-process pipeline");
  app.add_option("--check", check_args,
                 "run SCRIPT and compare displayed output byte-for-byte "
                 "against GOLDEN")
      ->expected(2);

  auto* run_cmd = app.add_subcommand("run", "execute a script file");
  std::string script;
  run_cmd->add_option("script", script, "script file")->required();
  auto* repl_cmd = app.add_subcommand("repl", "interactive session");

  CLI11_PARSE(app, argc, argv);

  tce::PrintMode mode =
      format == "latex" ? tce::PrintMode::Latex : tce::PrintMode::Plain;

  try {
    if (!check_args.empty()) {
      std::string produced = run_file(check_args[0], mode, !no_post);
      std::string golden = read_file(check_args[1]);
      if (produced == golden) return 0;
      std::cerr << "output differs from " << check_args[1] << "\n";
      std::istringstream a(produced), b(golden);
      std::string la, lb;
      int n = 1;
      while (true) {
        bool ha = static_cast<bool>(std::getline(a, la));
        bool hb = static_cast<bool>(std::getline(b, lb));
        if (!ha && !hb) break;
        if (!ha || !hb || la != lb) {
          std::cerr << "first difference at line " << n << ":\n";
          std::cerr << "  produced: " << (ha ? la : "<end of output>") << "\n";
          std::cerr << "  golden:   " << (hb ? lb : "<end of file>") << "\n";
          break;
        }
        ++n;
      }
      return 1;
    }
    if (*run_cmd) {
      std::cout << run_file(script, mode, !no_post);
      return 0;
    }
    if (*repl_cmd) return repl(mode, !no_post);
  } catch (const tce::EngineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << app.help();
  return 2;
}
