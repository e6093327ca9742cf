#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "luared/term.hpp"

namespace luared {

// Mutable table object: insertion-ordered entries plus a metatable slot.
// Cleared entries become tombstones so that `next` stays well defined while
// a traversal removes keys, mirroring the reference implementation.
struct TableObject {
  struct Entry {
    Value key;
    Value val;
    bool dead = false;
  };

  std::vector<Entry> entries;
  Value metatable; // nil or an object reference into the same store

  // Raw lookup; nil when absent. Never consults the metatable.
  Value get(const Value& key) const;
  // Raw update. Assigning nil clears the key. Faults on nil/NaN keys are the
  // caller's job (delta raises the Lua error); this asserts instead.
  void set(const Value& key, const Value& val);
  bool has(const Value& key) const;

  // The upward-scan border: largest n with entries at 1..n and none at n+1.
  double border() const;

  // Deterministic traversal in insertion order. key=nil starts; returns
  // nullopt past the end; throws EngineFault for keys not in the table.
  std::optional<std::pair<Value, Value>> next(const Value& key) const;

  size_t live_count() const;
};

// -0.0 collapses to 0.0 so both denote one table key.
Value normalize_key(const Value& key);

// sigma: references to values, with fresh-reference allocation.
class ValueStore {
 public:
  std::pair<ValueStore, RefId> alloc(const Value& v) const;
  ValueStore write(RefId r, const Value& v) const;
  const Value& read(RefId r) const;
  bool contains(RefId r) const { return map_.count(r) != 0; }
  size_t size() const { return map_.size(); }
  const std::unordered_map<RefId, Value>& mapping() const { return map_; }

 private:
  std::unordered_map<RefId, Value> map_;
  RefId next_fresh_ = 1;
};

// theta: object references to tables.
class ObjectStore {
 public:
  std::pair<ObjectStore, ObjId> alloc(TableObject t) const;
  const TableObject& read(ObjId r) const;
  // Returns a successor store with the table replaced.
  ObjectStore write(ObjId r, TableObject t) const;
  bool contains(ObjId r) const { return map_.count(r) != 0; }
  size_t size() const { return map_.size(); }
  const std::unordered_map<ObjId, TableObject>& mapping() const { return map_; }

 private:
  std::unordered_map<ObjId, TableObject> map_;
  ObjId next_fresh_ = 1;
};

} // namespace luared
