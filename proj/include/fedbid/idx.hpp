#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "fedbid/fl_trainer.hpp"

namespace fedbid {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxDataset {
  Eigen::MatrixXd images;  // n x (rows * cols), pixels in [0, 1]
  std::vector<int> labels;
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return labels.size(); }
};

// Reads an IDX image file (ubyte, 3 dims) and its label file (ubyte, 1 dim).
// Throws FormatError on a bad magic, a short read or an item-count mismatch.
IdxDataset load_idx(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path);

// Draws owner.num_samples rows (with replacement) from `pool`, restricted to
// the owner's class support, and applies the Blurred label noise.
LocalDataset sample_owner_dataset(const IdxDataset& pool, const DataOwner& owner,
                                  const Partition& partition, int num_classes,
                                  double noise_rate_blurred, Rng& rng);

}  // namespace fedbid
