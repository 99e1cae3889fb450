#include "sentprobe/sentence_vectors.hpp"

#include <sstream>

#include "sentprobe/errors.hpp"
#include "sentprobe/util.hpp"

namespace sentprobe {

void SentenceVectorSet::add(SentenceVector v) {
  if (index.count(v.id)) throw IoError("duplicate sentence vector id: " + v.id);
  if (dim == 0) dim = static_cast<int>(v.values.size());
  if (static_cast<int>(v.values.size()) != dim)
    throw IoError("sentence vector dimension mismatch for id " + v.id);
  index[v.id] = vectors.size();
  vectors.push_back(std::move(v));
}

const SentenceVector* SentenceVectorSet::find(const std::string& id) const {
  auto it = index.find(id);
  return it == index.end() ? nullptr : &vectors[it->second];
}

SentenceVectorSet random_vectors(std::span<const std::string> ids, int dim, std::uint64_t seed,
                                 const std::string& tag) {
  SentenceVectorSet set;
  set.encoder = tag;
  set.dim = dim;
  for (const std::string& id : ids) {
    Rng rng(mix64(fnv1a64(id) ^ seed));
    SentenceVector v;
    v.id = id;
    v.values.resize(dim);
    for (double& x : v.values) x = rng.normal();
    set.add(std::move(v));
  }
  return set;
}

void save_vectors(const SentenceVectorSet& set, const std::filesystem::path& path) {
  std::string out = std::to_string(set.vectors.size()) + " " + std::to_string(set.dim) + "\n";
  for (const SentenceVector& v : set.vectors) {
    out += v.id;
    for (double x : v.values) {
      out += ' ';
      out += format_double(x);
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

SentenceVectorSet load_vectors(const std::filesystem::path& path, const std::string& tag) {
  std::istringstream in(read_file(path));
  std::string header;
  if (!std::getline(in, header)) throw IoError("vector file: malformed header (empty file)");
  const std::vector<std::string> h = split_ws(header);
  std::size_t count = 0;
  int dim = 0;
  if (h.size() != 2) throw IoError("vector file: malformed header");
  try {
    count = std::stoul(h[0]);
    dim = std::stoi(h[1]);
  } catch (const std::exception&) {
    throw IoError("vector file: malformed header");
  }
  if (dim <= 0) throw IoError("vector file: malformed header (bad dimension)");

  SentenceVectorSet set;
  set.encoder = tag;
  set.dim = dim;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_ws(line);
    if (static_cast<int>(f.size()) != dim + 1)
      throw IoError("vector file line " + std::to_string(lineno) + ": dimension mismatch for id " +
                    (f.empty() ? "?" : f[0]));
    SentenceVector v;
    v.id = f[0];
    v.values.reserve(dim);
    for (int d = 0; d < dim; ++d) {
      try {
        v.values.push_back(std::stod(f[d + 1]));
      } catch (const std::exception&) {
        throw IoError("vector file line " + std::to_string(lineno) + ": bad value");
      }
    }
    set.add(std::move(v));  // throws on duplicate ids
  }
  if (set.vectors.size() != count)
    throw IoError("vector file: malformed header (count " + std::to_string(count) + " but " +
                  std::to_string(set.vectors.size()) + " rows)");
  return set;
}

}  // namespace sentprobe
