#pragma once

#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>

namespace loggraph::parse {

struct LogRecord {
  std::size_t line_no = 0;
  std::optional<std::string> timestamp;
  std::string content;
  std::string raw;
};

// Removes a dataset-specific header prefix from raw lines.
//
// The pattern is anchored at the start of the line; everything it matches is
// dropped and the remainder becomes the record content. When the pattern has
// at least one capture group, group 1 is kept as the (opaque) timestamp.
// A line the pattern does not match is kept verbatim.
class HeaderPattern {
 public:
  HeaderPattern() = default;
  explicit HeaderPattern(const std::string& pattern);  // throws ConfigError

  const std::string& source() const { return source_; }
  bool empty() const { return source_.empty(); }

  LogRecord strip(std::string_view raw, std::size_t line_no) const;

 private:
  std::string source_;
  std::regex regex_;
};

/// Header layout of the public HDFS corpus, e.g.
/// "081109 203518 143 INFO dfs.DataNode: Receiving block ...".
inline constexpr const char* kHdfsHeaderPattern = R"(^(\d{6} \d{6}) \d+ \w+ [\w.$]+: )";

/// Extracts a session identifier (capture group 1, or the whole match) from a line.
class SessionKeyPattern {
 public:
  explicit SessionKeyPattern(const std::string& pattern);  // throws ConfigError

  std::optional<std::string> extract(std::string_view text) const;

 private:
  std::regex regex_;
};

/// HDFS block identifiers such as blk_-1608999687919862906.
inline constexpr const char* kHdfsBlockPattern = R"((blk_-?\d+))";

}  // namespace loggraph::parse
