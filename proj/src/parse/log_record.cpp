#include "loggraph/parse/log_record.hpp"

#include "loggraph/common/error.hpp"

namespace loggraph::parse {

HeaderPattern::HeaderPattern(const std::string& pattern) : source_(pattern) {
  if (pattern.empty()) return;
  try {
    regex_ = std::regex(pattern, std::regex::ECMAScript | std::regex::optimize);
  } catch (const std::regex_error& e) {
    throw ConfigError("invalid header pattern '" + pattern + "': " + e.what());
  }
}

LogRecord HeaderPattern::strip(std::string_view raw, std::size_t line_no) const {
  if (raw.empty()) throw DataError("empty log line " + std::to_string(line_no));

  LogRecord rec;
  rec.line_no = line_no;
  rec.raw = std::string(raw);
  rec.content = rec.raw;
  if (!source_.empty()) {
    std::smatch m;
    if (std::regex_search(rec.raw, m, regex_, std::regex_constants::match_continuous)) {
      if (m.size() > 1 && m[1].matched) rec.timestamp = m[1].str();
      rec.content = m.suffix().str();
    }
  }
  if (rec.content.find_first_not_of(" \t\r") == std::string::npos) {
    throw DataError("log line " + std::to_string(line_no) + " has no content after header");
  }
  return rec;
}

SessionKeyPattern::SessionKeyPattern(const std::string& pattern) {
  if (pattern.empty()) throw ConfigError("session key pattern must not be empty");
  try {
    regex_ = std::regex(pattern, std::regex::ECMAScript | std::regex::optimize);
  } catch (const std::regex_error& e) {
    throw ConfigError("invalid session key pattern '" + pattern + "': " + e.what());
  }
}

std::optional<std::string> SessionKeyPattern::extract(std::string_view text) const {
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(text.begin(), text.end(), m, regex_)) return std::nullopt;
  if (m.size() > 1 && m[1].matched) return m[1].str();
  return m[0].str();
}

}  // namespace loggraph::parse
