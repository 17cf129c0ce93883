#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "tfqkd/protocol.hpp"

namespace tfqkd {

enum class Outcome : std::uint8_t { no_click, d0_only, d1_only, double_click };

inline constexpr bool is_effective(Outcome o) { return o == Outcome::d0_only || o == Outcome::d1_only; }

inline std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::no_click: return "no_click";
    case Outcome::d0_only: return "d0_only";
    case Outcome::d1_only: return "d1_only";
    case Outcome::double_click: return "double_click";
  }
  return "?";
}

/// Relation between the two parties' phase information. For SNS X-mode pairs
/// `same` means the test condition was satisfied.
enum class SliceRelation : std::uint8_t { same, opposite, other };

inline std::string_view relation_name(SliceRelation r) {
  switch (r) {
    case SliceRelation::same: return "same";
    case SliceRelation::opposite: return "opposite";
    case SliceRelation::other: return "other";
  }
  return "?";
}

inline constexpr std::uint8_t kNoPulse = 4;  // intensity index of a vacant pulse slot
inline constexpr std::size_t kIntensitySlots = 5;

struct TallyKey {
  std::uint8_t intensity_a = 0;
  std::uint8_t intensity_b = 0;
  std::uint8_t mode_a = 0;
  std::uint8_t mode_b = 0;
  SliceRelation relation = SliceRelation::other;
  bool bits_equal = false;
  Outcome outcome = Outcome::no_click;

  friend bool operator==(const TallyKey&, const TallyKey&) = default;
};

/// Raw counts keyed by (intensity pair, mode pair, slice relation, bit
/// relation, outcome). Everything derived is recomputed from these cells.
class TallyTable {
 public:
  static constexpr std::size_t kCells = kIntensitySlots * kIntensitySlots * 2 * 2 * 3 * 2 * 4;

  TallyTable() = default;
  TallyTable(ProtocolVariant variant, std::vector<double> intensities, int slice_count)
      : variant_(variant), intensities_(std::move(intensities)), slice_count_(slice_count) {
    if (intensities_.size() >= kNoPulse) throw std::invalid_argument("TallyTable: too many intensities");
  }

  static std::size_t index_of(const TallyKey& k) {
    std::size_t i = k.intensity_a;
    i = i * kIntensitySlots + k.intensity_b;
    i = i * 2 + k.mode_a;
    i = i * 2 + k.mode_b;
    i = i * 3 + static_cast<std::size_t>(k.relation);
    i = i * 2 + (k.bits_equal ? 1 : 0);
    i = i * 4 + static_cast<std::size_t>(k.outcome);
    return i;
  }

  static TallyKey key_of(std::size_t i) {
    TallyKey k;
    k.outcome = static_cast<Outcome>(i % 4);
    i /= 4;
    k.bits_equal = (i % 2) != 0;
    i /= 2;
    k.relation = static_cast<SliceRelation>(i % 3);
    i /= 3;
    k.mode_b = static_cast<std::uint8_t>(i % 2);
    i /= 2;
    k.mode_a = static_cast<std::uint8_t>(i % 2);
    i /= 2;
    k.intensity_b = static_cast<std::uint8_t>(i % kIntensitySlots);
    i /= kIntensitySlots;
    k.intensity_a = static_cast<std::uint8_t>(i);
    return k;
  }

  void add(const TallyKey& k, std::uint64_t n = 1) { cells_[index_of(k)] += n; }
  std::uint64_t count(const TallyKey& k) const { return cells_[index_of(k)]; }

  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (auto c : cells_) sum += c;
    return sum;
  }

  bool empty() const { return total() == 0; }

  std::uint64_t sum_if(const std::function<bool(const TallyKey&)>& pred) const {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kCells; ++i) {
      if (cells_[i] != 0 && pred(key_of(i))) sum += cells_[i];
    }
    return sum;
  }

  void for_each_nonzero(const std::function<void(const TallyKey&, std::uint64_t)>& fn) const {
    for (std::size_t i = 0; i < kCells; ++i) {
      if (cells_[i] != 0) fn(key_of(i), cells_[i]);
    }
  }

  /// Cell-wise sum; associative and commutative.
  TallyTable& merge(const TallyTable& other) {
    if (other.variant_ != variant_ || other.intensities_ != intensities_ || other.slice_count_ != slice_count_) {
      throw std::invalid_argument("TallyTable::merge: incompatible tables");
    }
    for (std::size_t i = 0; i < kCells; ++i) cells_[i] += other.cells_[i];
    return *this;
  }

  ProtocolVariant variant() const { return variant_; }
  const std::vector<double>& intensities() const { return intensities_; }
  int slice_count() const { return slice_count_; }

  friend bool operator==(const TallyTable&, const TallyTable&) = default;

 private:
  ProtocolVariant variant_ = ProtocolVariant::pm;
  std::vector<double> intensities_{};
  int slice_count_ = 16;
  std::array<std::uint64_t, kCells> cells_{};
};

}  // namespace tfqkd
