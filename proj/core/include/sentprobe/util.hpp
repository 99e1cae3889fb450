#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace sentprobe {

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t v);

// splitmix64 finalizer; used to derive independent stream seeds from a
// master seed plus a salt without correlating the streams.
std::uint64_t mix64(std::uint64_t x);

// Deterministic RNG front-end. std::mt19937_64's output sequence is pinned
// by the standard; the transforms below replace the implementation-defined
// std distributions so artifacts reproduce across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t u64() { return eng_(); }
  std::uint64_t below(std::uint64_t n) { return n ? u64() % n : 0; }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string trim(std::string_view s);

// %.17g: shortest representation that round-trips a double exactly.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file and renames over the target.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace sentprobe
