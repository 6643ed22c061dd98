#include "loggraph/parse/drain.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "loggraph/common/error.hpp"

namespace loggraph::parse {

namespace {

bool is_numeric(std::string_view tok) {
  std::size_t i = 0;
  if (!tok.empty() && (tok[0] == '-' || tok[0] == '+')) i = 1;
  bool digits = false, dot = false;
  for (; i < tok.size(); ++i) {
    const char c = tok[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

bool has_digit(std::string_view tok) {
  return std::any_of(tok.begin(), tok.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool routes_to_wildcard(std::string_view tok) { return tok == kWildcard || has_digit(tok); }

}  // namespace

void DrainParams::validate() const {
  if (depth < 2) throw ConfigError("drain depth must be >= 2");
  if (!(similarity_threshold > 0.0 && similarity_threshold < 1.0)) {
    throw ConfigError("drain similarity threshold must lie in (0, 1)");
  }
  if (max_children < 2) throw ConfigError("drain max_children must be >= 2");
}

std::vector<std::string> tokenize(std::string_view content) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < content.size()) {
    while (i < content.size() && std::isspace(static_cast<unsigned char>(content[i]))) ++i;
    const std::size_t start = i;
    while (i < content.size() && !std::isspace(static_cast<unsigned char>(content[i]))) ++i;
    if (i > start) {
      std::string_view tok = content.substr(start, i - start);
      out.emplace_back(is_numeric(tok) ? kWildcard : tok);
    }
  }
  return out;
}

double similarity(std::span<const std::string> template_tokens,
                  std::span<const std::string> line_tokens) {
  if (template_tokens.size() != line_tokens.size()) {
    throw ContractViolation("similarity: token lists differ in length (" +
                            std::to_string(template_tokens.size()) + " vs " +
                            std::to_string(line_tokens.size()) + ")");
  }
  if (template_tokens.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < template_tokens.size(); ++i) {
    if (template_tokens[i] == kWildcard || template_tokens[i] == line_tokens[i]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(template_tokens.size());
}

struct TemplateStore::Node {
  std::map<std::string, std::unique_ptr<Node>> children;
  std::vector<EventId> clusters;
};

TemplateStore::TemplateStore() : TemplateStore(DrainParams{}) {}

TemplateStore::TemplateStore(DrainParams params) : params_(params), root_(std::make_unique<Node>()) {
  params_.validate();
}

TemplateStore::TemplateStore(TemplateStore&&) noexcept = default;
TemplateStore& TemplateStore::operator=(TemplateStore&&) noexcept = default;
TemplateStore::~TemplateStore() = default;

int TemplateStore::token_layers() const { return std::max(0, params_.depth - 3); }

const EventTemplate& TemplateStore::at(EventId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= templates_.size()) {
    throw ContractViolation("unknown event id " + std::to_string(id));
  }
  return templates_[static_cast<std::size_t>(id)];
}

std::size_t TemplateStore::lines_parsed() const {
  return std::accumulate(templates_.begin(), templates_.end(), std::size_t{0},
                         [](std::size_t acc, const EventTemplate& t) { return acc + t.match_count; });
}

TemplateStore::Node* TemplateStore::descend(const std::vector<std::string>& tokens) const {
  auto it = root_->children.find(std::to_string(tokens.size()));
  if (it == root_->children.end()) return nullptr;
  Node* node = it->second.get();
  const std::size_t layers = std::min<std::size_t>(token_layers(), tokens.size());
  for (std::size_t i = 0; i < layers; ++i) {
    auto child = node->children.find(tokens[i]);
    if (child == node->children.end()) child = node->children.find(std::string(kWildcard));
    if (child == node->children.end()) return nullptr;
    node = child->second.get();
  }
  return node;
}

TemplateStore::Node* TemplateStore::insert_path(const std::vector<std::string>& tokens,
                                                std::vector<std::string>& path) {
  const std::string wildcard(kWildcard);
  path.clear();
  path.push_back(std::to_string(tokens.size()));
  auto& first = root_->children[path.back()];
  if (!first) first = std::make_unique<Node>();
  Node* node = first.get();

  const std::size_t layers = std::min<std::size_t>(token_layers(), tokens.size());
  const std::size_t max_children = static_cast<std::size_t>(params_.max_children);
  for (std::size_t i = 0; i < layers; ++i) {
    const std::string& tok = tokens[i];
    auto& kids = node->children;
    std::string key;
    if (kids.count(tok) && !routes_to_wildcard(tok)) {
      key = tok;
    } else if (routes_to_wildcard(tok)) {
      key = wildcard;
    } else if (kids.count(wildcard)) {
      key = kids.size() < max_children ? tok : wildcard;
    } else {
      key = kids.size() + 1 < max_children ? tok : wildcard;
    }
    auto& child = kids[key];
    if (!child) child = std::make_unique<Node>();
    path.push_back(key);
    node = child.get();
  }
  return node;
}

TemplateStore::Node* TemplateStore::restore_path(const std::vector<std::string>& tokens,
                                                 const std::vector<std::string>& path) {
  const std::size_t layers = std::min<std::size_t>(token_layers(), tokens.size());
  if (path.size() != layers + 1 || path.front() != std::to_string(tokens.size())) {
    throw DataError("template path inconsistent with store depth or token count");
  }
  Node* node = root_.get();
  for (const auto& key : path) {
    auto& child = node->children[key];
    if (!child) child = std::make_unique<Node>();
    node = child.get();
  }
  return node;
}

EventId TemplateStore::parse_line(const LogRecord& record) { return parse_content(record.content); }

EventId TemplateStore::parse_content(std::string_view content) {
  std::vector<std::string> tokens = tokenize(content);
  if (tokens.empty()) throw DataError("cannot parse a line without tokens");

  if (Node* leaf = descend(tokens)) {
    EventTemplate* best = nullptr;
    double best_sim = -1.0;
    std::size_t best_wild = 0;
    for (EventId id : leaf->clusters) {
      EventTemplate& t = templates_[static_cast<std::size_t>(id)];
      const double sim = similarity(t.tokens, tokens);
      const auto wild = static_cast<std::size_t>(std::count(t.tokens.begin(), t.tokens.end(), kWildcard));
      if (sim > best_sim || (sim == best_sim && wild > best_wild)) {
        best = &t;
        best_sim = sim;
        best_wild = wild;
      }
    }
    if (best != nullptr && best_sim >= params_.similarity_threshold) {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (best->tokens[i] != tokens[i]) best->tokens[i] = std::string(kWildcard);
      }
      ++best->match_count;
      return best->event_id;
    }
  }

  EventTemplate t;
  t.event_id = static_cast<EventId>(templates_.size());
  t.tokens = std::move(tokens);
  t.match_count = 1;
  Node* leaf = insert_path(t.tokens, t.path);
  leaf->clusters.push_back(t.event_id);
  templates_.push_back(std::move(t));
  return templates_.back().event_id;
}

std::string TemplateStore::to_json() const {
  nlohmann::ordered_json doc;
  doc["params"] = {{"depth", params_.depth},
                   {"similarity_threshold", params_.similarity_threshold},
                   {"max_children", params_.max_children}};
  doc["templates"] = nlohmann::ordered_json::array();
  for (const auto& t : templates_) {
    doc["templates"].push_back({{"event_id", t.event_id},
                                {"tokens", t.tokens},
                                {"match_count", t.match_count},
                                {"path", t.path}});
  }
  return doc.dump(1) + "\n";
}

TemplateStore TemplateStore::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("template store: ") + e.what(), e.byte);
  }
  try {
    DrainParams p;
    const auto& jp = doc.at("params");
    p.depth = jp.at("depth").get<int>();
    p.similarity_threshold = jp.at("similarity_threshold").get<double>();
    p.max_children = jp.at("max_children").get<int>();
    TemplateStore store(p);

    const auto& list = doc.at("templates");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& jt = list[i];
      EventTemplate t;
      t.event_id = jt.at("event_id").get<EventId>();
      t.tokens = jt.at("tokens").get<std::vector<std::string>>();
      t.match_count = jt.at("match_count").get<std::size_t>();
      t.path = jt.at("path").get<std::vector<std::string>>();
      if (t.event_id != static_cast<EventId>(i)) {
        throw DataError("template store: event ids must be dense and ordered (entry " +
                        std::to_string(i) + " has id " + std::to_string(t.event_id) + ")");
      }
      if (t.tokens.empty()) throw DataError("template store: template " + std::to_string(i) + " has no tokens");
      Node* leaf = store.restore_path(t.tokens, t.path);
      leaf->clusters.push_back(t.event_id);
      store.templates_.push_back(std::move(t));
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("template store: malformed document: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("template store: ") + e.what());
  }
}

void TemplateStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write template store " + path.string());
  out << to_json();
}

TemplateStore TemplateStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read template store " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace loggraph::parse
