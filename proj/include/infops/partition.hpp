#pragma once

#include <cstddef>
#include <vector>

namespace infops {

// Assignment of every node to one of k communities with dense ids 0..k-1.
struct Partition {
  std::vector<int> labels;
  int k = 0;

  // Relabels arbitrary non-negative ids densely in order of first appearance.
  static Partition from_labels(const std::vector<int>& raw);

  std::size_t size() const { return labels.size(); }
  bool operator==(const Partition&) const = default;
};

// Normalized mutual information (arithmetic-mean normalization) between two
// labelings of the same node set. Returns 1 when both are the single block.
double normalized_mutual_information(const Partition& a, const Partition& b);

}  // namespace infops
