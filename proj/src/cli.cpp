#include "luared/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "luared/machine.hpp"
#include "luared/print.hpp"

namespace luared {

namespace {

namespace fs = std::filesystem;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Loaded {
  Engine eng;
  Configuration cfg;
};

std::variant<Loaded, ParseError, std::string> load_program(const std::string& path) {
  auto bytes = read_file(path);
  if (!bytes) return "cannot open " + path;
  Loaded out;
  auto parsed = parse_chunk(SourceChunk{*bytes, path}, out.eng.labels);
  if (std::holds_alternative<ParseError>(parsed)) return std::get<ParseError>(parsed);
  out.cfg = inject(std::get<Term>(parsed), out.eng);
  return out;
}

void report_parse_error(const std::string& path, const ParseError& e, std::ostream& err) {
  err << "lua: " << path << ":" << e.line << ": " << e.message << "\n";
}

int finish(const Outcome& o, std::ostream& err) {
  switch (o.tag) {
    case Outcome::Tag::Completed: return 0;
    case Outcome::Tag::Errored:
      err << "lua: " << delta_tostring_raw(o.error) << "\n";
      return 1;
    case Outcome::Tag::FuelExhausted:
      err << "lua: fuel exhausted\n";
      return 3;
    case Outcome::Tag::Stuck:
      err << "lua: stuck: " << o.diagnostic << "\n";
      return 3;
  }
  return 3;
}

} // namespace

int cmd_run(const std::string& path, std::uint64_t fuel, std::ostream& out, std::ostream& err) {
  auto loaded = load_program(path);
  if (std::holds_alternative<std::string>(loaded)) {
    err << "lua: " << std::get<std::string>(loaded) << "\n";
    return 2;
  }
  if (std::holds_alternative<ParseError>(loaded)) {
    report_parse_error(path, std::get<ParseError>(loaded), err);
    return 2;
  }
  Loaded& l = std::get<Loaded>(loaded);
  l.eng.out = &out;
  Outcome o = run(std::move(l.cfg), l.eng, fuel);
  out.flush();
  return finish(o, err);
}

int cmd_trace(const std::string& path, std::uint64_t fuel, int max_print_depth, std::ostream& out,
              std::ostream& err) {
  auto loaded = load_program(path);
  if (std::holds_alternative<std::string>(loaded)) {
    err << "lua: " << std::get<std::string>(loaded) << "\n";
    return 2;
  }
  if (std::holds_alternative<ParseError>(loaded)) {
    report_parse_error(path, std::get<ParseError>(loaded), err);
    return 2;
  }
  Loaded& l = std::get<Loaded>(loaded);
  std::ostringstream program_out;
  l.eng.out = &program_out;
  out << "#0 [inject] " << print_term(l.cfg.term, max_print_depth) << "\n";
  std::uint64_t k = 0;
  Configuration prev = l.cfg;
  Outcome o = run_trace(std::move(l.cfg), l.eng, fuel,
                        [&](const Configuration& c, const std::string& rule) {
                          k++;
                          out << "#" << k << " [" << rule << "] "
                              << print_term(c.term, max_print_depth);
                          out << "   {sigma=" << c.sigma.size() << " theta=" << c.theta.size();
                          for (const auto& [r, v] : c.sigma.mapping()) {
                            if (!prev.sigma.contains(r))
                              out << " +r#" << r << "=" << delta_tostring_raw(v);
                            else if (!raw_equal(prev.sigma.read(r), v))
                              out << " r#" << r << "=" << delta_tostring_raw(v);
                          }
                          for (const auto& [id, t] : c.theta.mapping()) {
                            if (!prev.theta.contains(id)) {
                              out << " +obj#" << id;
                              continue;
                            }
                            const TableObject& was = prev.theta.read(id);
                            bool changed = was.entries.size() != t.entries.size() ||
                                           !raw_equal(was.metatable, t.metatable);
                            for (size_t i = 0; !changed && i < t.entries.size(); i++)
                              changed = was.entries[i].dead != t.entries[i].dead ||
                                        !raw_equal(was.entries[i].val, t.entries[i].val);
                            if (changed) out << " obj#" << id;
                          }
                          out << "}\n";
                          prev = c;
                          return true;
                        });
  std::string produced = program_out.str();
  if (!produced.empty()) out << "-- output --\n" << produced;
  switch (o.tag) {
    case Outcome::Tag::Completed: out << "-- completed --\n"; break;
    case Outcome::Tag::Errored:
      out << "-- errored: " << delta_tostring_raw(o.error) << " --\n";
      break;
    case Outcome::Tag::FuelExhausted: out << "-- fuel exhausted --\n"; break;
    case Outcome::Tag::Stuck: out << "-- stuck: " << o.diagnostic << " --\n"; break;
  }
  return finish(o, err);
}

int cmd_parse(const std::string& path, std::ostream& out, std::ostream& err) {
  auto bytes = read_file(path);
  if (!bytes) {
    err << "lua: cannot open " << path << "\n";
    return 2;
  }
  LabelAllocator labels;
  auto parsed = parse_chunk(SourceChunk{*bytes, path}, labels);
  if (std::holds_alternative<ParseError>(parsed)) {
    report_parse_error(path, std::get<ParseError>(parsed), err);
    return 2;
  }
  out << print_source(std::get<Term>(parsed)) << "\n";
  return 0;
}

namespace {

struct CaseResult {
  std::string name;
  bool pass;
  std::string detail;
};

CaseResult run_case(const fs::path& lua_path, std::uint64_t fuel) {
  CaseResult res{lua_path.string(), false, ""};
  auto src = read_file(lua_path.string());
  auto expected = read_file((fs::path(lua_path).replace_extension(".expected")).string());
  auto errspec = read_file((fs::path(lua_path).replace_extension(".err")).string());
  if (!src || !expected) {
    res.detail = "missing .lua or .expected file";
    return res;
  }
  Engine eng;
  auto parsed = parse_chunk(SourceChunk{*src, lua_path.string()}, eng.labels);
  if (std::holds_alternative<ParseError>(parsed)) {
    const auto& e = std::get<ParseError>(parsed);
    res.detail = "parse error: " + std::to_string(e.line) + ": " + e.message;
    return res;
  }
  Configuration cfg = inject(std::get<Term>(parsed), eng);
  std::ostringstream out;
  eng.out = &out;
  Outcome o = run(std::move(cfg), eng, fuel);

  bool want_error = errspec.has_value();
  if (o.tag == Outcome::Tag::Completed && want_error) {
    res.detail = "expected an error but completed";
    return res;
  }
  if (o.tag == Outcome::Tag::Errored && !want_error) {
    res.detail = "unexpected error: " + delta_tostring_raw(o.error);
    return res;
  }
  if (o.tag != Outcome::Tag::Completed && o.tag != Outcome::Tag::Errored) {
    res.detail = o.tag == Outcome::Tag::FuelExhausted ? "fuel exhausted" : ("stuck: " + o.diagnostic);
    return res;
  }
  if (want_error) {
    std::string msg = delta_tostring_raw(o.error);
    std::string want = *errspec;
    while (!want.empty() && (want.back() == '\n' || want.back() == '\r')) want.pop_back();
    if (!want.empty() && msg.find(want) == std::string::npos) {
      res.detail = "error message '" + msg + "' does not contain '" + want + "'";
      return res;
    }
  }
  if (out.str() != *expected) {
    res.detail = "output mismatch:\n--- got ---\n" + out.str() + "--- want ---\n" + *expected;
    return res;
  }
  res.pass = true;
  return res;
}

} // namespace

int cmd_test(const std::string& corpus_dir, std::uint64_t fuel, std::ostream& out,
             std::ostream& err) {
  if (!fs::is_directory(corpus_dir)) {
    err << "lua: no such corpus directory: " << corpus_dir << "\n";
    return 2;
  }
  std::map<std::string, std::pair<int, int>> by_feature; // feature -> {pass, total}
  int total = 0, passed = 0;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(corpus_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".lua")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::string feature = f.parent_path().filename().string();
    CaseResult r = run_case(f, fuel);
    total++;
    by_feature[feature].second++;
    if (r.pass) {
      passed++;
      by_feature[feature].first++;
      out << "PASS " << f.string() << "\n";
    } else {
      out << "FAIL " << f.string() << ": " << r.detail << "\n";
    }
  }
  out << "--\n";
  for (const auto& [feature, counts] : by_feature)
    out << feature << ": " << counts.first << "/" << counts.second << "\n";
  out << total << " cases, " << passed << "/" << total << " passed\n";
  return passed == total ? 0 : 1;
}

} // namespace luared
