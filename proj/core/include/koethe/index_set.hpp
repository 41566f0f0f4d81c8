#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "koethe/errors.hpp"

namespace koethe {

// One point of a countable index set.  For scalar sets only `i` is
// meaningful (j stays 0); for N x N both coordinates are >= 1.
struct Index {
  std::uint64_t i = 0;
  std::uint64_t j = 0;

  bool is_pair() const { return j != 0; }
  friend bool operator==(const Index& a, const Index& b) {
    return a.i == b.i && a.j == b.j;
  }
};

// Countable index sets with a fixed enumeration.  Ranks are 1-based.
// N x N is enumerated by ascending i+j, ties by ascending i, so rank 1
// is (1,1), then (1,2), (2,1), (1,3), ...
class IndexSet {
public:
  enum class Kind { naturals, natural_pairs, finite };

  static IndexSet naturals() { return IndexSet(Kind::naturals, std::nullopt); }
  static IndexSet natural_pairs() { return IndexSet(Kind::natural_pairs, std::nullopt); }
  static IndexSet finite(std::uint64_t n) {
    if (n == 0) throw ConfigError("finite index set must be nonempty");
    return IndexSet(Kind::finite, n);
  }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::finite; }
  std::optional<std::uint64_t> count() const { return size_; }

  // Number of points available to a scan capped at `depth`.
  std::uint64_t scan_count(std::uint64_t depth) const {
    if (size_ && *size_ < depth) return *size_;
    return depth;
  }

  Index at(std::uint64_t rank) const {
    if (rank == 0) throw ConfigError("index ranks are 1-based");
    switch (kind_) {
      case Kind::naturals:
        return Index{rank, 0};
      case Kind::finite:
        if (rank > *size_) throw ConfigError("rank beyond finite index set");
        return Index{rank, 0};
      case Kind::natural_pairs: {
        // Find the diagonal s = i + j: pairs with sum <= s total s(s-1)/2.
        long double r = static_cast<long double>(rank);
        auto s = static_cast<std::uint64_t>((1.0L + std::sqrt(1.0L + 8.0L * r)) / 2.0L);
        while (s * (s - 1) / 2 < rank) ++s;
        while (s >= 2 && (s - 1) * (s - 2) / 2 >= rank) --s;
        std::uint64_t offset = rank - (s - 1) * (s - 2) / 2;  // 1..s-1
        return Index{offset, s - offset};
      }
    }
    throw InternalError("unreachable index kind");
  }

  std::uint64_t rank(const Index& idx) const {
    switch (kind_) {
      case Kind::naturals:
      case Kind::finite:
        return idx.i;
      case Kind::natural_pairs: {
        std::uint64_t s = idx.i + idx.j;
        return (s - 1) * (s - 2) / 2 + idx.i;
      }
    }
    throw InternalError("unreachable index kind");
  }

  std::string kind_name() const {
    switch (kind_) {
      case Kind::naturals: return "naturals";
      case Kind::natural_pairs: return "natural_pairs";
      case Kind::finite: return "finite";
    }
    return {};
  }

  static IndexSet from_kind_name(const std::string& name, std::optional<std::uint64_t> size) {
    if (name == "naturals") return naturals();
    if (name == "natural_pairs") return natural_pairs();
    if (name == "finite") {
      if (!size) throw ConfigError("finite index set needs a size");
      return finite(*size);
    }
    throw ConfigError("unknown index set kind: " + name);
  }

  friend bool operator==(const IndexSet& a, const IndexSet& b) {
    return a.kind_ == b.kind_ && a.size_ == b.size_;
  }

private:
  IndexSet(Kind k, std::optional<std::uint64_t> n) : kind_(k), size_(n) {}
  Kind kind_;
  std::optional<std::uint64_t> size_;
};

}  // namespace koethe
