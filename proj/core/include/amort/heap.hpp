#ifndef AMORT_HEAP_HPP
#define AMORT_HEAP_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

namespace amort {

using Address = std::uint64_t;

/// Runtime value: integer, heap address or null.
struct Value {
  enum class Kind : std::uint8_t { Int, Addr, Null };

  Kind kind = Kind::Null;
  std::int64_t z = 0;
  Address a = 0;

  static Value integer(std::int64_t v) { return {Kind::Int, v, 0}; }
  static Value addr(Address v) { return {Kind::Addr, 0, v}; }
  static Value null() { return {}; }

  bool is_int() const { return kind == Kind::Int; }
  bool is_addr() const { return kind == Kind::Addr; }
  bool is_null() const { return kind == Kind::Null; }
  bool is_ref() const { return kind != Kind::Int; }

  friend auto operator<=>(const Value&, const Value&) = default;
  friend bool operator==(const Value&, const Value&) = default;
};

std::string to_string(const Value& v);

/// Finite map (address, field) -> value.
using Heap = std::map<std::pair<Address, std::string>, Value>;

std::string to_string(const Heap& h);

}  // namespace amort

#endif
