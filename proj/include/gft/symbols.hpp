#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "gft/errors.hpp"

namespace gft {

enum class Parity : uint8_t { Even = 0, Odd = 1 };

inline Parity operator^(Parity a, Parity b) {
  return static_cast<Parity>(static_cast<uint8_t>(a) ^ static_cast<uint8_t>(b));
}

enum class SymKind : uint8_t {
  Field,  // dynamical field on a chart; atoms carry derivative multi-indices
  Coord,  // explicit worldsheet coordinate (t, x); differentiates to 1 or 0
  Param,  // declared constant; all derivatives vanish
};

// The two coordinate charts of the engine. Their derivative operators are
// related by d_+/- = (1/sqrt(2)) ((1/c) d_t +/- d_x).
inline constexpr uint8_t kChartTx = 0;
inline constexpr uint8_t kChartLc = 1;
inline constexpr uint8_t kChartNone = 0xff;

struct ChartInfo {
  const char* name;
  std::array<const char*, 2> coord_name;  // names usable in scripts
  std::array<const char*, 2> coord_sym;   // short rendering suffix
};

inline const ChartInfo& chart_info(uint8_t chart) {
  static const ChartInfo charts[2] = {
      {"tx", {"t", "x"}, {"t", "x"}},
      {"lc", {"plus", "minus"}, {"+", "-"}},
  };
  if (chart > 1) raise(ErrorKind::Internal, "bad chart id");
  return charts[chart];
}

inline int chart_coord_index(uint8_t chart, std::string_view coord) {
  const ChartInfo& ci = chart_info(chart);
  for (int k = 0; k < 2; ++k)
    if (coord == ci.coord_name[k]) return k;
  return -1;
}

// Process-wide name interner. Insert-only; safe for concurrent use.
class Interner {
 public:
  static Interner& instance() {
    static Interner interner;
    return interner;
  }

  uint32_t intern(std::string_view s) {
    {
      std::shared_lock lock(mutex_);
      auto it = index_.find(std::string(s));
      if (it != index_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = index_.emplace(std::string(s), static_cast<uint32_t>(strings_.size()));
    if (inserted) strings_.push_back(it->first);
    return it->second;
  }

  const std::string& str(uint32_t id) const {
    std::shared_lock lock(mutex_);
    return strings_[id];
  }

 private:
  Interner() = default;
  mutable std::shared_mutex mutex_;
  std::map<std::string, uint32_t, std::less<>> index_;
  std::deque<std::string> strings_;  // stable references into index_ keys
};

inline uint32_t intern(std::string_view s) { return Interner::instance().intern(s); }
inline const std::string& sym_name(uint32_t id) { return Interner::instance().str(id); }

// A single even/odd generator occurrence: a field with a derivative
// multi-index, an explicit coordinate, or a declared constant.
struct Atom {
  uint32_t name = 0;
  uint8_t chart = kChartNone;
  std::array<uint8_t, 2> d{0, 0};
  Parity parity = Parity::Even;
  SymKind kind = SymKind::Param;
  bool marker = false;  // even unit with square zero (variation parameter)

  int deriv_total() const { return int(d[0]) + int(d[1]); }

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.name == b.name && a.chart == b.chart && a.d == b.d;
  }
};

// Total order: lexicographic on (field name, chart, derivative multi-index
// read in chart-coordinate order). Any fixed order would do; this one is
// stable across runs because it compares the spelled-out names.
inline int atom_compare(const Atom& a, const Atom& b) {
  if (a.name != b.name) {
    const std::string& sa = sym_name(a.name);
    const std::string& sb = sym_name(b.name);
    if (sa != sb) return sa < sb ? -1 : 1;
  }
  // chart-agnostic (zero-derivative) atoms sort before charted ones
  int ca = a.chart == kChartNone ? -1 : a.chart;
  int cb = b.chart == kChartNone ? -1 : b.chart;
  if (ca != cb) return ca < cb ? -1 : 1;
  if (a.d[0] != b.d[0]) return a.d[0] < b.d[0] ? -1 : 1;
  if (a.d[1] != b.d[1]) return a.d[1] < b.d[1] ? -1 : 1;
  return 0;
}

inline bool operator<(const Atom& a, const Atom& b) { return atom_compare(a, b) < 0; }

inline std::string atom_str(const Atom& a) {
  std::string out = sym_name(a.name);
  if (a.deriv_total() > 0) {
    out += "_";
    const ChartInfo& ci = chart_info(a.chart);
    for (int k = 0; k < 2; ++k)
      for (int r = 0; r < a.d[k]; ++r) out += ci.coord_sym[k];
  }
  return out;
}

struct SymbolInfo {
  std::string name;
  uint32_t id = 0;
  Parity parity = Parity::Even;
  SymKind kind = SymKind::Field;
  uint8_t chart = kChartNone;
  bool marker = false;
};

// Declaration table for fields, coordinates and parameters. The explicit
// coordinates t and x of the tx chart are pre-declared.
class Context {
 public:
  Context() {
    declare(SymbolInfo{"t", intern("t"), Parity::Even, SymKind::Coord, kChartTx, false});
    declare(SymbolInfo{"x", intern("x"), Parity::Even, SymKind::Coord, kChartTx, false});
  }

  const SymbolInfo& declare_field(std::string_view name, Parity parity, uint8_t chart) {
    return declare(SymbolInfo{std::string(name), intern(name), parity, SymKind::Field, chart, false});
  }

  const SymbolInfo& declare_param(std::string_view name, Parity parity, bool marker = false) {
    return declare(SymbolInfo{std::string(name), intern(name), parity, SymKind::Param, kChartNone, marker});
  }

  const SymbolInfo* find(std::string_view name) const {
    auto it = table_.find(std::string(name));
    return it == table_.end() ? nullptr : &it->second;
  }

  const SymbolInfo& require(std::string_view name) const {
    const SymbolInfo* s = find(name);
    if (!s) raise(ErrorKind::UnknownIdentifier, "undeclared symbol '" + std::string(name) + "'");
    return *s;
  }

  Atom atom(std::string_view name, uint8_t chart_for_field = kChartNone,
            int d0 = 0, int d1 = 0) const {
    const SymbolInfo& s = require(name);
    Atom a;
    a.name = s.id;
    a.parity = s.parity;
    a.kind = s.kind;
    a.marker = s.marker;
    if (s.kind == SymKind::Field) {
      a.d = {static_cast<uint8_t>(d0), static_cast<uint8_t>(d1)};
      // zero-derivative field atoms are chart-agnostic: the field value does
      // not depend on the coordinate labels
      if (d0 == 0 && d1 == 0)
        a.chart = kChartNone;
      else
        a.chart = chart_for_field == kChartNone ? s.chart : chart_for_field;
    } else {
      if (d0 != 0 || d1 != 0)
        raise(ErrorKind::Internal, "coordinate/parameter atom with derivatives: " + s.name);
      a.chart = s.kind == SymKind::Coord ? s.chart : kChartNone;
    }
    return a;
  }

 private:
  const SymbolInfo& declare(SymbolInfo info) {
    auto [it, inserted] = table_.emplace(info.name, info);
    if (!inserted) raise(ErrorKind::Internal, "symbol redeclared: " + info.name);
    return it->second;
  }

  std::map<std::string, SymbolInfo> table_;
};

// Positivity declarations used to resolve square-root branches. Keys are
// specific atoms (a bare identifier covers its zero-derivative atom). The
// parameter c is positive by construction and is not stored here.
class Assumptions {
 public:
  void declare_positive(const Atom& a) { keys_.insert(key(a)); }

  bool is_positive(const Atom& a) const { return keys_.count(key(a)) > 0; }

  bool empty() const { return keys_.empty(); }

 private:
  using Key = std::tuple<uint32_t, uint8_t, uint8_t, uint8_t>;
  static Key key(const Atom& a) { return {a.name, a.chart, a.d[0], a.d[1]}; }
  std::set<Key> keys_;
};

}  // namespace gft
