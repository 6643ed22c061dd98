#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loggraph/parse/log_record.hpp"

namespace loggraph::parse {

using EventId = std::int64_t;

inline constexpr std::string_view kWildcard = "<*>";

struct DrainParams {
  int depth = 4;                       // tree levels: root, length, token layers, leaf
  double similarity_threshold = 0.4;   // st
  int max_children = 100;

  void validate() const;  // throws ConfigError
};

struct EventTemplate {
  EventId event_id = 0;
  std::vector<std::string> tokens;
  std::size_t match_count = 0;
  // Token path used when the template was created; fixes its tree position.
  std::vector<std::string> path;
};

std::vector<std::string> tokenize(std::string_view content);

/// Fraction of positions where template and line agree; a template wildcard
/// matches anything. Throws ContractViolation on a length mismatch.
double similarity(std::span<const std::string> template_tokens,
                  std::span<const std::string> line_tokens);

// Fixed-depth prefix tree over token count then leading tokens, with template
// clusters at the leaves. Ids are dense and issued in first-seen order.
class TemplateStore {
 public:
  TemplateStore();
  explicit TemplateStore(DrainParams params);

  TemplateStore(TemplateStore&&) noexcept;
  TemplateStore& operator=(TemplateStore&&) noexcept;
  ~TemplateStore();

  EventId parse_line(const LogRecord& record);
  EventId parse_content(std::string_view content);

  const DrainParams& params() const { return params_; }
  const std::vector<EventTemplate>& templates() const { return templates_; }
  const EventTemplate& at(EventId id) const;
  std::size_t size() const { return templates_.size(); }
  std::size_t lines_parsed() const;

  std::string to_json() const;
  static TemplateStore from_json(std::string_view text);  // throws ParseError

  void save(const std::filesystem::path& path) const;
  static TemplateStore load(const std::filesystem::path& path);

 private:
  struct Node;

  Node* descend(const std::vector<std::string>& tokens) const;
  Node* insert_path(const std::vector<std::string>& tokens, std::vector<std::string>& path);
  Node* restore_path(const std::vector<std::string>& tokens, const std::vector<std::string>& path);
  int token_layers() const;

  DrainParams params_;
  std::unique_ptr<Node> root_;
  std::vector<EventTemplate> templates_;
};

}  // namespace loggraph::parse
