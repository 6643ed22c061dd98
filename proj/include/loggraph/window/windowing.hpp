#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace loggraph::window {

using EventId = std::int64_t;

enum class Label : int { kNormal = 0, kAnomalous = 1 };

struct LabeledEvent {
  EventId event_id = 0;
  Label label = Label::kNormal;
  std::optional<std::string> session_key;
};

enum class Strategy { kSession, kFixed, kSliding };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);  // throws ConfigError

struct WindowMeta {
  Strategy strategy = Strategy::kFixed;
  std::size_t size = 0;   // fixed/sliding only
  std::size_t step = 0;   // sliding only
  std::size_t start = 0;  // index of the first event in the input stream
  bool partial = false;   // window shorter than `size`
  std::string session_key;
};

struct LogSequence {
  std::vector<EventId> events;
  Label label = Label::kNormal;
  WindowMeta meta;
};

struct SessionGrouping {
  std::vector<LogSequence> sequences;
  std::size_t dropped_keyless = 0;
};

// One sequence per distinct key, ordered by first appearance of the key.
// Throws ConfigError when no event carries a key.
SessionGrouping group_by_session(const std::vector<LabeledEvent>& events);

// Non-overlapping chunks; the trailing partial chunk is kept.
std::vector<LogSequence> group_fixed(const std::vector<LabeledEvent>& events, std::size_t window_size);

// Windows start at 0, step, 2*step, ... while the start is inside the stream.
std::vector<LogSequence> group_sliding(const std::vector<LabeledEvent>& events, std::size_t window_size,
                                       std::size_t step);

// First ceil(fraction * n) sequences go to train, the rest to test.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> chronological_split(const std::vector<T>& items,
                                                              double train_fraction);

struct OversampleResult {
  std::vector<LogSequence> sequences;
  std::size_t duplicates_added = 0;
  bool target_unreachable = false;  // no anomalies available to duplicate
};

// Indices (into `labels`) of anomalous items to append so the anomaly
// fraction reaches target_rate; empty when already there. Sets *unreachable
// when the target is missed because there are no anomalies at all.
std::vector<std::size_t> oversample_plan(const std::vector<Label>& labels, double target_rate, std::uint64_t seed,
                                         bool* unreachable = nullptr);

// Duplicates seeded-uniformly chosen anomalous sequences (appended at the end)
// until the anomaly fraction reaches target_rate. Normal sequences are never
// duplicated and nothing is removed.
OversampleResult oversample(const std::vector<LogSequence>& train, double target_rate, std::uint64_t seed);

/// Smallest anomaly count a with a / (normal + a) >= rate.
std::size_t required_anomalies(std::size_t normal, double rate);

double anomaly_fraction(const std::vector<LogSequence>& seqs);

// JSON-lines: {"events":[ids],"label":0|1,"meta":{...}}
std::string sequence_to_json(const LogSequence& seq);
LogSequence sequence_from_json(const std::string& line);
void save_sequences(const std::vector<LogSequence>& seqs, const std::filesystem::path& path);
std::vector<LogSequence> load_sequences(const std::filesystem::path& path);

}  // namespace loggraph::window

#include "loggraph/window/windowing_impl.hpp"
