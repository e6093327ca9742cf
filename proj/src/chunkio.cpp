#include <cstring>

#include "luared/delta.hpp"
#include "luared/parser.hpp"

namespace luared {

// Binary chunk layout: ESC "LRD" <version byte> <term>. Terms serialize
// structurally; function labels are dropped (reassigned fresh on load) and
// the _ENV reference becomes a marker byte rebound at load time. The format
// is an artifact of this implementation and not stable across versions.

namespace {

constexpr char kMagic[4] = {'\x1B', 'L', 'R', 'D'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kEnvMarker = 0xFF;

struct Writer {
  std::string out;
  void u8(std::uint8_t v) { out.push_back((char)v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; i++) out.push_back((char)((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
  }
  void str(const std::string& s) {
    u32((std::uint32_t)s.size());
    out += s;
  }
};

struct Reader {
  const std::string& in;
  size_t pos = 0;
  bool fail = false;

  std::uint8_t u8() {
    if (pos >= in.size()) {
      fail = true;
      return 0;
    }
    return (std::uint8_t)in[pos++];
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= (std::uint32_t)u8() << (8 * i);
    return v;
  }
  double f64() {
    if (pos + 8 > in.size()) {
      fail = true;
      return 0;
    }
    double v;
    std::memcpy(&v, in.data() + pos, 8);
    pos += 8;
    return v;
  }
  std::string str() {
    std::uint32_t n = u32();
    if (pos + n > in.size()) {
      fail = true;
      return "";
    }
    std::string s = in.substr(pos, n);
    pos += n;
    return s;
  }
};

bool dump_scan(const Term& t, const Engine& eng) {
  if (t->kind == Kind::Ref) return eng.env_refs.count(t->ref) != 0;
  if (t->kind == Kind::ObjRef) return false;
  for (const auto& k : t->kids)
    if (!dump_scan(k, eng)) return false;
  for (const auto& f : t->fields) {
    if (f.keyed && !dump_scan(f.key, eng)) return false;
    if (!dump_scan(f.val, eng)) return false;
  }
  return true;
}

void encode(Writer& w, const Term& t, const Engine& eng) {
  if (t->kind == Kind::Ref) {
    w.u8(kEnvMarker);
    return;
  }
  w.u8((std::uint8_t)t->kind);
  w.u8((std::uint8_t)t->bin);
  w.u8((std::uint8_t)t->un);
  w.u8((std::uint8_t)t->label);
  w.u8(t->expr_flavor ? 1 : 0);
  w.u8(t->is_vararg ? 1 : 0);
  w.f64(t->num);
  w.str(t->str);
  w.u32((std::uint32_t)t->names.size());
  for (const auto& n : t->names) w.str(n);
  w.u32((std::uint32_t)t->kids.size());
  for (const auto& k : t->kids) encode(w, k, eng);
  w.u32((std::uint32_t)t->fields.size());
  for (const auto& f : t->fields) {
    w.u8(f.keyed ? 1 : 0);
    if (f.keyed) encode(w, f.key, eng);
    encode(w, f.val, eng);
  }
}

Term decode(Reader& r, Engine& eng, RefId env_ref, int depth) {
  if (r.fail || depth > 10000) {
    r.fail = true;
    return mk_nil();
  }
  std::uint8_t kb = r.u8();
  if (kb == kEnvMarker) return mk_ref(env_ref);
  if (kb > (std::uint8_t)Kind::Err) {
    r.fail = true;
    return mk_nil();
  }
  auto n = std::make_shared<Node>();
  n->kind = (Kind)kb;
  n->bin = (BinKind)r.u8();
  n->un = (UnKind)r.u8();
  n->label = (LabelKind)r.u8();
  n->expr_flavor = r.u8() != 0;
  n->is_vararg = r.u8() != 0;
  n->num = r.f64();
  n->str = r.str();
  std::uint32_t nn = r.u32();
  for (std::uint32_t i = 0; i < nn && !r.fail; i++) n->names.push_back(r.str());
  if (n->kind == Kind::Function) n->fun_label = eng.labels.fresh();
  std::uint32_t nk = r.u32();
  if (nk > r.in.size()) r.fail = true;
  for (std::uint32_t i = 0; i < nk && !r.fail; i++)
    n->kids.push_back(decode(r, eng, env_ref, depth + 1));
  std::uint32_t nf = r.u32();
  if (nf > r.in.size()) r.fail = true;
  for (std::uint32_t i = 0; i < nf && !r.fail; i++) {
    TableField f;
    f.keyed = r.u8() != 0;
    if (f.keyed) f.key = decode(r, eng, env_ref, depth + 1);
    f.val = decode(r, eng, env_ref, depth + 1);
    n->fields.push_back(std::move(f));
  }
  return n;
}

DeltaResult load_failure(std::string msg) {
  return {mk_tuple({mk_nil(), mk_str(std::move(msg))}), std::nullopt, std::nullopt};
}

} // namespace

DumpResult dump_function(const Term& fn, const Engine& eng) {
  if (!dump_scan(fn, eng)) return {false, "unable to dump given function"};
  Writer w;
  w.out.assign(kMagic, 4);
  w.u8(kVersion);
  encode(w, fn, eng);
  return {true, std::move(w.out)};
}

DeltaResult load_chunk(const std::string& bytes, const std::string& chunk_name,
                       const std::string& mode, const Value& env, const ValueStore& sigma,
                       Engine& eng) {
  bool binary = !bytes.empty() && bytes[0] == '\x1B';
  if (binary) {
    if (mode.find('b') == std::string::npos)
      return load_failure("attempt to load a binary chunk");
    if (bytes.size() < 5 || bytes.compare(0, 4, kMagic, 4) != 0 ||
        (std::uint8_t)bytes[4] != kVersion)
      return load_failure("bad binary format");
    auto [s2, env_ref] = sigma.alloc(env);
    eng.env_refs.insert(env_ref);
    Reader r{bytes, 5};
    Term fn = decode(r, eng, env_ref, 0);
    if (r.fail || r.pos != bytes.size() || fn->kind != Kind::Function)
      return load_failure("bad binary format");
    return {fn, std::nullopt, std::move(s2)};
  }

  if (mode.find('t') == std::string::npos) return load_failure("attempt to load a text chunk");
  auto parsed = parse_chunk(SourceChunk{bytes, chunk_name}, eng.labels);
  if (std::holds_alternative<ParseError>(parsed)) {
    const auto& e = std::get<ParseError>(parsed);
    std::string display = chunk_name;
    if (!display.empty() && (display[0] == '=' || display[0] == '@')) display = display.substr(1);
    return load_failure(display + ":" + std::to_string(e.line) + ": " + e.message);
  }
  auto [s2, env_ref] = sigma.alloc(env);
  eng.env_refs.insert(env_ref);
  Term body = substitute(std::get<Term>(parsed), {{"_ENV", mk_ref(env_ref)}});
  Term fn = mk_function(eng.labels.fresh(), {}, true, std::move(body));
  return {fn, std::nullopt, std::move(s2)};
}

} // namespace luared
