#include "ragmcp/index.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "ragmcp/errors.hpp"

namespace ragmcp {
namespace {

template <typename T>
void write_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw SnapshotError(std::string("truncated snapshot while reading ") + what);
  }
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(value);
}

}  // namespace

const EmbeddingVector* VectorIndex::find(std::string_view id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

void VectorIndex::add(std::string schema_id, EmbeddingVector vector) {
  if (vector.dimension() != dimension_) throw DimensionMismatch(dimension_, vector.dimension());
  entries_.insert_or_assign(std::move(schema_id), std::move(vector));
}

bool VectorIndex::remove(std::string_view schema_id) {
  const auto it = entries_.find(schema_id);
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

std::vector<RankedCandidate> VectorIndex::search(const EmbeddingVector& query, std::size_t k) const {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  if (query.dimension() != dimension_) throw DimensionMismatch(dimension_, query.dimension());

  struct Scored {
    double score;
    const std::string* id;
  };
  std::vector<Scored> scored;
  scored.reserve(entries_.size());
  for (const auto& [id, vector] : entries_) scored.push_back({cosine(query, vector), &id});

  const auto before = [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return *a.id < *b.id;
  };
  const auto take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), before);

  std::vector<RankedCandidate> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({*scored[i].id, scored[i].score});
  return out;
}

std::optional<double> VectorIndex::score(std::string_view schema_id,
                                         const EmbeddingVector& query) const {
  const auto* v = find(schema_id);
  if (v == nullptr) return std::nullopt;
  return cosine(query, *v);
}

void save_snapshot(const VectorIndex& index, std::ostream& out) {
  static_assert(std::numeric_limits<float>::is_iec559);
  if (index.dimension() > std::numeric_limits<std::uint32_t>::max()) {
    throw SnapshotError("dimension too large for snapshot");
  }
  out.write("RMCP", 4);
  write_le<std::uint32_t>(out, kSnapshotVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dimension()));
  write_le<std::uint64_t>(out, index.size());
  for (const auto& [id, vector] : index.entries()) {
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw SnapshotError("schema id too long for snapshot: " + id);
    }
    write_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float v : vector.values()) write_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw SnapshotError("failed writing snapshot");
}

VectorIndex load_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || std::memcmp(magic.data(), "RMCP", 4) != 0) {
    throw SnapshotError("not an index snapshot (bad magic)");
  }
  const auto version = read_le<std::uint32_t>(in, "version");
  if (version != kSnapshotVersion) {
    throw SnapshotError("unsupported snapshot version " + std::to_string(version));
  }
  const auto dimension = read_le<std::uint32_t>(in, "dimension");
  const auto count = read_le<std::uint64_t>(in, "count");
  VectorIndex index(dimension);
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto id_length = read_le<std::uint16_t>(in, "id length");
    std::string id(id_length, '\0');
    if (!in.read(id.data(), id_length)) throw SnapshotError("truncated snapshot while reading id");
    if (id.empty() || index.contains(id)) {
      throw SnapshotError("empty or duplicate id in snapshot record " + std::to_string(r));
    }
    std::vector<float> values(dimension);
    for (auto& v : values) v = std::bit_cast<float>(read_le<std::uint32_t>(in, "vector"));
    try {
      index.add(std::move(id), EmbeddingVector::from_values(std::move(values)));
    } catch (const std::invalid_argument& e) {
      throw SnapshotError("snapshot record " + std::to_string(r) + ": " + e.what());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw SnapshotError("trailing bytes after snapshot records");
  }
  return index;
}

void save_snapshot_file(const VectorIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot write " + path.string());
  save_snapshot(index, out);
}

VectorIndex load_snapshot_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path.string());
  return load_snapshot(in);
}

}  // namespace ragmcp
