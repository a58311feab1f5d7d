#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "restore/case_model.hpp"

namespace restore {

// Up/down flag per component (lines then pipelines), packed for hashing.
class Topology {
 public:
  Topology() = default;
  explicit Topology(int size, bool up = false)
      : size_(size), words_((size + 63) / 64, up ? ~std::uint64_t{0} : 0) {
    trim();
  }

  int size() const { return size_; }
  bool up(int c) const { return words_[c >> 6] >> (c & 63) & 1u; }
  void set(int c, bool up) {
    const std::uint64_t bit = std::uint64_t{1} << (c & 63);
    if (up) words_[c >> 6] |= bit;
    else words_[c >> 6] &= ~bit;
  }
  int count_up() const;
  std::size_t hash() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  void trim();
  int size_ = 0;
  std::vector<std::uint64_t> words_;
};

struct TopologyHash {
  std::size_t operator()(const Topology& t) const { return t.hash(); }
};

// Status at episode start: operational components up, faulty down, unknown
// pipelines up only when the supplied truth says intact.
Topology initial_topology(const CaseModel& c, const GroundTruth* truth);
Topology all_up(const CaseModel& c);

}  // namespace restore
