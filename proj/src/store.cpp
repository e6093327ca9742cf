#include "luared/store.hpp"

#include <cmath>

namespace luared {

Value normalize_key(const Value& key) {
  if (key.tag == Value::Tag::Num && key.n == 0.0) return Value::number(0.0);
  return key;
}

Value TableObject::get(const Value& key) const {
  Value k = normalize_key(key);
  for (const auto& e : entries)
    if (!e.dead && raw_equal(e.key, k)) return e.val;
  return Value::nil();
}

bool TableObject::has(const Value& key) const {
  Value k = normalize_key(key);
  for (const auto& e : entries)
    if (!e.dead && raw_equal(e.key, k)) return true;
  return false;
}

void TableObject::set(const Value& key, const Value& val) {
  Value k = normalize_key(key);
  if (k.is_nil()) throw EngineFault("table key is nil");
  if (k.tag == Value::Tag::Num && std::isnan(k.n)) throw EngineFault("table key is NaN");
  for (auto& e : entries) {
    if (raw_equal(e.key, k)) {
      if (val.is_nil()) {
        if (!e.dead) {
          e.dead = true;
          e.val = Value::nil();
        }
      } else {
        e.dead = false;
        e.val = val;
      }
      return;
    }
  }
  if (!val.is_nil()) entries.push_back({k, val, false});
}

double TableObject::border() const {
  double n = 0;
  while (has(Value::number(n + 1))) n += 1;
  return n;
}

std::optional<std::pair<Value, Value>> TableObject::next(const Value& key) const {
  size_t start = 0;
  if (!key.is_nil()) {
    Value k = normalize_key(key);
    bool found = false;
    for (size_t i = 0; i < entries.size(); i++) {
      if (raw_equal(entries[i].key, k)) {
        start = i + 1;
        found = true;
        break;
      }
    }
    if (!found) throw EngineFault("invalid key to 'next'");
  }
  for (size_t i = start; i < entries.size(); i++)
    if (!entries[i].dead) return std::make_pair(entries[i].key, entries[i].val);
  return std::nullopt;
}

size_t TableObject::live_count() const {
  size_t n = 0;
  for (const auto& e : entries)
    if (!e.dead) n++;
  return n;
}

std::pair<ValueStore, RefId> ValueStore::alloc(const Value& v) const {
  ValueStore out = *this;
  RefId r = out.next_fresh_++;
  out.map_.emplace(r, v);
  return {std::move(out), r};
}

ValueStore ValueStore::write(RefId r, const Value& v) const {
  auto it = map_.find(r);
  if (it == map_.end()) throw EngineFault("write to unknown reference");
  ValueStore out = *this;
  out.map_[r] = v;
  return out;
}

const Value& ValueStore::read(RefId r) const {
  auto it = map_.find(r);
  if (it == map_.end()) throw EngineFault("read of unknown reference");
  return it->second;
}

std::pair<ObjectStore, ObjId> ObjectStore::alloc(TableObject t) const {
  ObjectStore out = *this;
  ObjId r = out.next_fresh_++;
  out.map_.emplace(r, std::move(t));
  return {std::move(out), r};
}

const TableObject& ObjectStore::read(ObjId r) const {
  auto it = map_.find(r);
  if (it == map_.end()) throw EngineFault("read of unknown object reference");
  return it->second;
}

ObjectStore ObjectStore::write(ObjId r, TableObject t) const {
  auto it = map_.find(r);
  if (it == map_.end()) throw EngineFault("write to unknown object reference");
  ObjectStore out = *this;
  out.map_[r] = std::move(t);
  return out;
}

} // namespace luared
