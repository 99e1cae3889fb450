#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sentprobe {

struct SentenceVector {
  std::string id;
  std::vector<double> values;
};

struct SentenceVectorSet {
  std::string encoder;  // tag, e.g. "bow", "sdae"
  int dim = 0;
  std::vector<SentenceVector> vectors;
  std::map<std::string, std::size_t> index;

  void add(SentenceVector v);
  const SentenceVector* find(const std::string& id) const;
};

// One reproducible standard-normal vector per id; a function of (id, seed)
// only, independent of insertion order.
SentenceVectorSet random_vectors(std::span<const std::string> ids, int dim, std::uint64_t seed,
                                 const std::string& tag = "random");

// File format: header line "count dim", then one row per vector:
// "id v1 ... vd" with space separators and round-trip decimal values.
void save_vectors(const SentenceVectorSet& set, const std::filesystem::path& path);
SentenceVectorSet load_vectors(const std::filesystem::path& path, const std::string& tag = "");

}  // namespace sentprobe
