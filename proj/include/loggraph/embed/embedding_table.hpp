#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loggraph/parse/drain.hpp"

namespace loggraph::embed {

using EventId = std::int64_t;

enum class Provider { kHashed, kFile };

inline constexpr std::size_t kDefaultDim = 64;
inline constexpr std::size_t kPretrainedDim = 768;

/// Feature-hashed bag of unigrams and bigrams (wildcards dropped), L2-normalised.
/// A template with no usable tokens, or whose hashed features cancel out,
/// maps to the unit vector e_1.
std::vector<double> embed_template_hashed(std::span<const std::string> tokens, std::size_t dim);

// Immutable mapping event id -> vector of a fixed dimension.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, Provider provider);

  static EmbeddingTable from_store(const parse::TemplateStore& store, std::size_t dim);

  // Text format: "dim=<d>" then "<event_id> f1 ... fd" per line. When
  // `required` is non-empty every id listed must be present.
  static EmbeddingTable load(const std::filesystem::path& path, std::size_t expected_dim,
                             std::span<const EventId> required = {});
  static EmbeddingTable parse(const std::string& text, std::size_t expected_dim,
                              std::span<const EventId> required = {});
  std::string to_text() const;
  void save(const std::filesystem::path& path) const;

  void set(EventId id, std::vector<double> vec);

  std::size_t dim() const { return dim_; }
  Provider provider() const { return provider_; }
  bool contains(EventId id) const { return vectors_.count(id) != 0; }
  std::span<const double> at(EventId id) const;  // throws DataError
  std::size_t size() const { return vectors_.size(); }
  const std::map<EventId, std::vector<double>>& vectors() const { return vectors_; }

 private:
  std::size_t dim_;
  Provider provider_;
  std::map<EventId, std::vector<double>> vectors_;
};

}  // namespace loggraph::embed
