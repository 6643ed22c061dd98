#include "loggraph/window/windowing.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "loggraph/common/error.hpp"

namespace loggraph::window {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kSession: return "session";
    case Strategy::kFixed: return "fixed";
    case Strategy::kSliding: return "sliding";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "session") return Strategy::kSession;
  if (s == "fixed") return Strategy::kFixed;
  if (s == "sliding") return Strategy::kSliding;
  throw ConfigError("unknown window strategy '" + s + "' (expected session, fixed or sliding)");
}

namespace {

LogSequence make_window(const std::vector<LabeledEvent>& events, std::size_t begin, std::size_t end,
                        WindowMeta meta) {
  LogSequence seq;
  seq.events.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    seq.events.push_back(events[i].event_id);
    if (events[i].label == Label::kAnomalous) seq.label = Label::kAnomalous;
  }
  meta.start = begin;
  meta.partial = (end - begin) < meta.size;
  seq.meta = std::move(meta);
  return seq;
}

}  // namespace

SessionGrouping group_by_session(const std::vector<LabeledEvent>& events) {
  SessionGrouping out;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (!e.session_key) {
      ++out.dropped_keyless;
      continue;
    }
    auto [it, inserted] = index.try_emplace(*e.session_key, out.sequences.size());
    if (inserted) {
      LogSequence seq;
      seq.meta.strategy = Strategy::kSession;
      seq.meta.session_key = *e.session_key;
      seq.meta.start = i;
      out.sequences.push_back(std::move(seq));
    }
    auto& seq = out.sequences[it->second];
    seq.events.push_back(e.event_id);
    if (e.label == Label::kAnomalous) seq.label = Label::kAnomalous;
  }
  if (out.sequences.empty()) {
    throw ConfigError("session grouping: the key pattern matched none of " + std::to_string(events.size()) +
                      " events");
  }
  return out;
}

std::vector<LogSequence> group_fixed(const std::vector<LabeledEvent>& events, std::size_t window_size) {
  if (window_size == 0) throw ContractViolation("group_fixed: window size must be >= 1");
  std::vector<LogSequence> out;
  for (std::size_t begin = 0; begin < events.size(); begin += window_size) {
    WindowMeta meta;
    meta.strategy = Strategy::kFixed;
    meta.size = window_size;
    meta.step = window_size;
    out.push_back(make_window(events, begin, std::min(events.size(), begin + window_size), meta));
  }
  return out;
}

std::vector<LogSequence> group_sliding(const std::vector<LabeledEvent>& events, std::size_t window_size,
                                       std::size_t step) {
  if (window_size == 0) throw ContractViolation("group_sliding: window size must be >= 1");
  if (step == 0) throw ContractViolation("group_sliding: step must be >= 1");
  std::vector<LogSequence> out;
  for (std::size_t begin = 0; begin < events.size(); begin += step) {
    WindowMeta meta;
    meta.strategy = Strategy::kSliding;
    meta.size = window_size;
    meta.step = step;
    out.push_back(make_window(events, begin, std::min(events.size(), begin + window_size), meta));
  }
  return out;
}

std::size_t required_anomalies(std::size_t normal, double rate) {
  if (!(rate > 0.0 && rate < 1.0)) throw ContractViolation("oversample: target rate must lie in (0, 1)");
  const auto n = static_cast<double>(normal);
  auto meets = [&](std::size_t a) {
    const auto ad = static_cast<double>(a);
    return a > 0 && ad >= rate * (n + ad);
  };
  auto a = static_cast<std::size_t>(std::ceil(rate * n / (1.0 - rate)));
  while (!meets(a)) ++a;
  while (a > 1 && meets(a - 1)) --a;
  return a;
}

double anomaly_fraction(const std::vector<LogSequence>& seqs) {
  if (seqs.empty()) return 0.0;
  const auto anomalous = std::count_if(seqs.begin(), seqs.end(),
                                       [](const LogSequence& s) { return s.label == Label::kAnomalous; });
  return static_cast<double>(anomalous) / static_cast<double>(seqs.size());
}

std::vector<std::size_t> oversample_plan(const std::vector<Label>& labels, double target_rate, std::uint64_t seed,
                                         bool* unreachable) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw ContractViolation("oversample: target rate must lie in (0, 1)");
  }
  if (unreachable) *unreachable = false;
  std::vector<std::size_t> anomalous;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::kAnomalous) anomalous.push_back(i);
  }
  if (labels.empty() || static_cast<double>(anomalous.size()) >= target_rate * static_cast<double>(labels.size())) {
    return {};
  }
  if (anomalous.empty()) {
    if (unreachable) *unreachable = true;
    return {};
  }

  const std::size_t normal = labels.size() - anomalous.size();
  const std::size_t needed = required_anomalies(normal, target_rate) - anomalous.size();

  // Rounds over a fresh shuffle of the originals keep the duplicate counts balanced.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> plan;
  plan.reserve(needed);
  std::vector<std::size_t> order;
  while (plan.size() < needed) {
    if (order.empty()) {
      order = anomalous;
      std::shuffle(order.begin(), order.end(), rng);
      std::reverse(order.begin(), order.end());
    }
    plan.push_back(order.back());
    order.pop_back();
  }
  return plan;
}

OversampleResult oversample(const std::vector<LogSequence>& train, double target_rate, std::uint64_t seed) {
  std::vector<Label> labels;
  labels.reserve(train.size());
  for (const auto& s : train) labels.push_back(s.label);
  OversampleResult out;
  out.sequences = train;
  const auto plan = oversample_plan(labels, target_rate, seed, &out.target_unreachable);
  for (std::size_t i : plan) out.sequences.push_back(train[i]);
  out.duplicates_added = plan.size();
  return out;
}

std::string sequence_to_json(const LogSequence& seq) {
  nlohmann::ordered_json meta;
  meta["strategy"] = to_string(seq.meta.strategy);
  if (seq.meta.strategy == Strategy::kSession) {
    meta["session_key"] = seq.meta.session_key;
  } else {
    meta["size"] = seq.meta.size;
    meta["step"] = seq.meta.step;
    meta["partial"] = seq.meta.partial;
  }
  meta["start"] = seq.meta.start;
  nlohmann::ordered_json j;
  j["events"] = seq.events;
  j["label"] = static_cast<int>(seq.label);
  j["meta"] = std::move(meta);
  return j.dump();
}

LogSequence sequence_from_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("sequence record: ") + e.what(), e.byte);
  }
  try {
    LogSequence seq;
    seq.events = j.at("events").get<std::vector<EventId>>();
    const int label = j.at("label").get<int>();
    if (label != 0 && label != 1) throw DataError("sequence label must be 0 or 1");
    seq.label = static_cast<Label>(label);
    const auto& m = j.at("meta");
    seq.meta.strategy = strategy_from_string(m.at("strategy").get<std::string>());
    seq.meta.start = m.value("start", std::size_t{0});
    seq.meta.session_key = m.value("session_key", std::string{});
    seq.meta.size = m.value("size", std::size_t{0});
    seq.meta.step = m.value("step", std::size_t{0});
    seq.meta.partial = m.value("partial", false);
    if (seq.events.empty()) throw DataError("sequence record has no events");
    return seq;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("sequence record: ") + e.what());
  }
}

void save_sequences(const std::vector<LogSequence>& seqs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& s : seqs) out << sequence_to_json(s) << '\n';
}

std::vector<LogSequence> load_sequences(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<LogSequence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(sequence_from_json(line));
  }
  return out;
}

}  // namespace loggraph::window
