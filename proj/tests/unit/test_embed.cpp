#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "loggraph/common/error.hpp"
#include "loggraph/embed/embedding_table.hpp"

using namespace loggraph;
using namespace loggraph::embed;

namespace {

std::vector<double> hashed(const std::string& text) {
  return embed_template_hashed(parse::tokenize(text), kDefaultDim);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST(HashedEmbedding, DeterministicAndUnitNorm) {
  const auto a = hashed("Receiving block <*> src <*>");
  EXPECT_EQ(a, hashed("Receiving block <*> src <*>"));
  EXPECT_NEAR(std::sqrt(dot(a, a)), 1.0, 1e-9);
}

TEST(HashedEmbedding, SimilarTemplatesAreCloser) {
  const auto recv = hashed("Receiving block <*>");
  const auto del = hashed("Deleting block <*>");
  const auto other = hashed("PacketResponder failed");
  const double near = dot(recv, del);
  EXPECT_GT(near, -1.0);
  EXPECT_LT(near, 1.0);
  EXPECT_GT(near, dot(recv, other));
}

TEST(HashedEmbedding, WildcardOnlyTemplateMapsToFirstAxis) {
  const auto v = hashed("<*> <*>");
  EXPECT_EQ(v[0], 1.0);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_EQ(v[i], 0.0);
}

TEST(EmbeddingFile, ParsesThreeEvents) {
  const auto t = EmbeddingTable::parse("dim=4\n0 1 0 0 0\n1 0 1 0 0\n2 0 0 1 0.5\n", 4);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.at(2)[3], 0.5);
}

TEST(EmbeddingFile, MissingIdIsNamed) {
  const std::vector<EventId> required{0, 1, 2};
  try {
    EmbeddingTable::parse("dim=2\n0 1 0\n1 0 1\n", 2, required);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos) << e.what();
  }
}

TEST(EmbeddingFile, RejectsBadInput) {
  EXPECT_THROW(EmbeddingTable::parse("dim=3\n0 1 0 0\n", 4), DataError);
  EXPECT_THROW(EmbeddingTable::parse("dim=2\n0 1\n", 2), DataError);
  EXPECT_THROW(EmbeddingTable::parse("dim=2\n0 1 nan\n", 2), DataError);
  EXPECT_THROW(EmbeddingTable::parse("dim=2\n0 1 0\n0 0 1\n", 2), DataError);
  EXPECT_THROW(EmbeddingTable::parse("0 1 0\n", 2), DataError);
}

TEST(EmbeddingFile, RoundTripIsBitIdentical) {
  parse::TemplateStore store;
  store.parse_content("Receiving block blk_1 src");
  store.parse_content("Deleting block blk_2");
  store.parse_content("PacketResponder 3 terminating");
  const auto table = EmbeddingTable::from_store(store, 32);
  const auto path = std::filesystem::temp_directory_path() / "loggraph_test_embed.txt";
  table.save(path);
  const auto back = EmbeddingTable::load(path, 32);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), table.size());
  for (const auto& [id, v] : table.vectors()) {
    const auto w = back.at(id);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], w[i]);
  }
  EXPECT_EQ(back.to_text(), table.to_text());
}
