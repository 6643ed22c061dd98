#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace loggraph::pipeline {

enum class Perturbation { kNone, kInsertion, kSubstitution, kReorder };

std::string to_string(Perturbation p);

struct SynthConfig {
  std::size_t event_types = 8;   // k
  std::size_t sequences = 2500;
  std::size_t length = 48;       // events per sequence
  double anomaly_rate = 0.1;
  std::uint64_t seed = 7;

  void validate() const;  // throws ConfigError
};

struct SynthSequence {
  std::string block;  // session key, also embedded in every line
  std::vector<std::size_t> events;
  Perturbation perturbation = Perturbation::kNone;
  bool anomalous() const { return perturbation != Perturbation::kNone; }
};

// Normal sequences are walks from event 0 through a seeded automaton in which
// every event has exactly two allowed successors. Exactly round(rate * n)
// sequences, at seeded positions, are then perturbed so that each contains at
// least one transition the automaton forbids; the three perturbation kinds
// are used in turn.
struct SynthCorpus {
  std::vector<std::vector<std::size_t>> successors;  // allowed transitions per event
  std::vector<SynthSequence> sequences;

  std::vector<std::string> log_lines() const;  // HDFS-style raw lines
  std::string labels_csv() const;              // "BlockId,Label" rows, one per sequence
  std::size_t anomaly_count() const;
};

SynthCorpus generate_corpus(const SynthConfig& cfg);

/// Writes logs.txt and labels.csv into `dir`.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace loggraph::pipeline
