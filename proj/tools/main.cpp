#include <iostream>

#include <CLI11.hpp>

#include "luared/cli.hpp"
#include "luared/machine.hpp"

int main(int argc, char** argv) {
  CLI::App app{"luared - a small-step reduction engine for a Lua 5.2 subset"};
  app.require_subcommand(1);

  std::string path;
  std::string corpus = "corpus";
  std::uint64_t fuel = luared::kDefaultFuel;
  int max_depth = -1;

  auto* run = app.add_subcommand("run", "parse and execute a program");
  run->add_option("file", path)->required();
  run->add_option("--fuel", fuel, "maximum number of reduction steps");

  auto* trace = app.add_subcommand("trace", "execute, printing every reduction step");
  trace->add_option("file", path)->required();
  trace->add_option("--fuel", fuel);
  trace->add_option("--max-print-depth", max_depth, "truncate printed terms at this depth");

  auto* parse = app.add_subcommand("parse", "print the desugared term for a chunk");
  parse->add_option("file", path)->required();

  auto* test = app.add_subcommand("test", "run the conformance corpus");
  test->add_option("dir", corpus);
  test->add_option("--fuel", fuel);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return luared::cmd_run(path, fuel, std::cout, std::cerr);
  if (trace->parsed()) return luared::cmd_trace(path, fuel, max_depth, std::cout, std::cerr);
  if (parse->parsed()) return luared::cmd_parse(path, std::cout, std::cerr);
  if (test->parsed()) return luared::cmd_test(corpus, fuel, std::cout, std::cerr);
  return 2;
}
