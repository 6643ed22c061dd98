#include "loggraph/embed/embedding_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "loggraph/common/error.hpp"

namespace loggraph::embed {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr std::uint64_t kSignSalt = 0x9e3779b97f4a7c15ULL;

std::uint64_t fnv1a(std::string_view s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

void add_feature(std::vector<double>& v, std::string_view feature) {
  const std::uint64_t bucket = fnv1a(feature, kFnvOffset) % v.size();
  const std::uint64_t sign = fnv1a(feature, kFnvOffset ^ kSignSalt) >> 63;
  v[bucket] += sign ? -1.0 : 1.0;
}

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<double> embed_template_hashed(std::span<const std::string> tokens, std::size_t dim) {
  if (dim < 8) throw ContractViolation("hashed embedding dimension must be >= 8");
  std::vector<std::string_view> words;
  for (const auto& t : tokens) {
    if (t != parse::kWildcard) words.emplace_back(t);
  }
  std::vector<double> v(dim, 0.0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    add_feature(v, words[i]);
    if (i + 1 < words.size()) {
      std::string bigram;
      bigram.reserve(words[i].size() + words[i + 1].size() + 1);
      bigram.append(words[i]).push_back('\x1f');
      bigram.append(words[i + 1]);
      add_feature(v, bigram);
    }
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v.assign(dim, 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

EmbeddingTable::EmbeddingTable(std::size_t dim, Provider provider) : dim_(dim), provider_(provider) {
  if (dim == 0) throw ContractViolation("embedding dimension must be positive");
}

EmbeddingTable EmbeddingTable::from_store(const parse::TemplateStore& store, std::size_t dim) {
  EmbeddingTable table(dim, Provider::kHashed);
  for (const auto& t : store.templates()) table.set(t.event_id, embed_template_hashed(t.tokens, dim));
  return table;
}

void EmbeddingTable::set(EventId id, std::vector<double> vec) {
  if (vec.size() != dim_) {
    throw DataError("embedding for event " + std::to_string(id) + " has length " + std::to_string(vec.size()) +
                    ", expected " + std::to_string(dim_));
  }
  for (double x : vec) {
    if (!std::isfinite(x)) throw DataError("embedding for event " + std::to_string(id) + " is not finite");
  }
  vectors_[id] = std::move(vec);
}

std::span<const double> EmbeddingTable::at(EventId id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) throw DataError("no embedding for event id " + std::to_string(id));
  return it->second;
}

std::string EmbeddingTable::to_text() const {
  std::string out = "dim=" + std::to_string(dim_) + "\n";
  for (const auto& [id, vec] : vectors_) {
    out += std::to_string(id);
    for (double x : vec) {
      out += ' ';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write embedding file " + path.string());
  out << to_text();
}

EmbeddingTable EmbeddingTable::parse(const std::string& text, std::size_t expected_dim,
                                     std::span<const EventId> required) {
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    line = std::string_view(text).substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || line.substr(0, 4) != "dim=") {
    throw ParseError("embedding file must start with 'dim=<d>'", 0);
  }
  std::size_t dim = 0;
  {
    auto body = line.substr(4);
    auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), dim);
    if (ec != std::errc() || p != body.data() + body.size() || dim == 0) {
      throw ParseError("bad embedding dimension header", 4);
    }
  }
  if (expected_dim != 0 && dim != expected_dim) {
    throw DataError("embedding dimension mismatch: file has " + std::to_string(dim) + ", expected " +
                    std::to_string(expected_dim));
  }

  EmbeddingTable table(dim, Provider::kFile);
  std::size_t line_start = pos;
  while (next_line(line)) {
    const std::size_t offset = line_start;
    line_start = pos;
    if (line.empty()) continue;
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    auto skip_ws = [&] {
      while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
    };
    EventId id = 0;
    skip_ws();
    auto r = std::from_chars(cur, end, id);
    if (r.ec != std::errc()) throw ParseError("bad event id in embedding file", offset);
    cur = r.ptr;
    std::vector<double> vec;
    vec.reserve(dim);
    while (true) {
      skip_ws();
      if (cur == end) break;
      double x = 0.0;
      auto rx = std::from_chars(cur, end, x);
      if (rx.ec != std::errc() || !std::isfinite(x)) {
        throw ParseError("bad or non-finite value for event " + std::to_string(id),
                         offset + static_cast<std::size_t>(cur - line.data()));
      }
      cur = rx.ptr;
      if (cur != end && *cur != ' ' && *cur != '\t') {
        throw ParseError("malformed value for event " + std::to_string(id),
                         offset + static_cast<std::size_t>(cur - line.data()));
      }
      vec.push_back(x);
    }
    if (vec.size() != dim) {
      throw DataError("embedding dimension mismatch for event " + std::to_string(id) + ": " +
                      std::to_string(vec.size()) + " values, expected " + std::to_string(dim));
    }
    if (table.contains(id)) throw DataError("duplicate embedding for event " + std::to_string(id));
    table.set(id, std::move(vec));
  }

  std::string missing;
  for (EventId id : required) {
    if (!table.contains(id)) missing += (missing.empty() ? "" : ", ") + std::to_string(id);
  }
  if (!missing.empty()) throw DataError("embedding file is missing event ids: " + missing);
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, std::size_t expected_dim,
                                    std::span<const EventId> required) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read embedding file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), expected_dim, required);
}

}  // namespace loggraph::embed
