#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <cstdint>

#include "ragmcp/embedding.hpp"

namespace ragmcp {

struct RankedCandidate {
  std::string schema_id;
  double score = 0.0;

  friend bool operator==(const RankedCandidate&, const RankedCandidate&) = default;
};

// Exact cosine index keyed by schema id. Entries are kept sorted by id, so the
// state (and every search result) depends only on the final set of entries.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dimension = 1024) : dimension_(dimension) {}

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(std::string_view id) const { return entries_.find(id) != entries_.end(); }
  const EmbeddingVector* find(std::string_view id) const;
  const std::map<std::string, EmbeddingVector, std::less<>>& entries() const noexcept {
    return entries_;
  }

  // Inserts or replaces. Throws DimensionMismatch.
  void add(std::string schema_id, EmbeddingVector vector);
  // Returns whether an entry was removed; a missing id is a no-op.
  bool remove(std::string_view schema_id);

  // The min(k, size) highest-scoring entries, score descending, ties broken
  // by ascending id. Throws std::invalid_argument for k == 0 and
  // DimensionMismatch for a wrong-sized query.
  std::vector<RankedCandidate> search(const EmbeddingVector& query, std::size_t k) const;

  std::optional<double> score(std::string_view schema_id, const EmbeddingVector& query) const;

  friend bool operator==(const VectorIndex&, const VectorIndex&) = default;

 private:
  std::size_t dimension_;
  std::map<std::string, EmbeddingVector, std::less<>> entries_;
};

// Binary snapshot, all integers little-endian:
//   "RMCP" | version u32 | dimension u32 | count u64 |
//   count x (id length u16 | id bytes | dimension x f32)
inline constexpr std::uint32_t kSnapshotVersion = 1;

void save_snapshot(const VectorIndex& index, std::ostream& out);
VectorIndex load_snapshot(std::istream& in);
void save_snapshot_file(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_snapshot_file(const std::filesystem::path& path);

}  // namespace ragmcp
