#include "loggraph/pipeline/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "loggraph/common/error.hpp"

namespace loggraph::pipeline {

namespace {

constexpr std::array<const char*, 26> kVerbs = {
    "Receiving", "Served",    "Deleting",   "Verifying", "Allocating", "Replicating", "Closing",
    "Opening",   "Writing",   "Reading",    "Starting",  "Stopping",   "Registering", "Scanning",
    "Flushing",  "Merging",   "Splitting",  "Locking",   "Unlocking",  "Sending",     "Acking",
    "Rejecting", "Retrying",  "Committing", "Pruning",   "Resolving"};

constexpr std::array<const char*, 6> kExtras = {"from", "packet", "responder", "terminating", "pipeline", "replica"};

using Rng = std::mt19937_64;

std::size_t uniform_index(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

bool allowed(const std::vector<std::vector<std::size_t>>& succ, std::size_t a, std::size_t b) {
  return std::find(succ[a].begin(), succ[a].end(), b) != succ[a].end();
}

bool has_forbidden(const std::vector<std::vector<std::size_t>>& succ, const std::vector<std::size_t>& s) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (!allowed(succ, s[i], s[i + 1])) return true;
  }
  return false;
}

std::vector<std::size_t> walk(const std::vector<std::vector<std::size_t>>& succ, std::size_t length, Rng& rng) {
  std::vector<std::size_t> s{0};
  while (s.size() < length) s.push_back(succ[s.back()][uniform_index(rng, succ[s.back()].size())]);
  return s;
}

// One attempt at a perturbation; returns false when the chosen spot cannot
// produce a forbidden transition.
bool perturb(std::vector<std::size_t>& s, Perturbation kind, std::size_t k,
             const std::vector<std::vector<std::size_t>>& succ, Rng& rng) {
  const std::size_t n = s.size();
  std::vector<std::size_t> out = s;
  switch (kind) {
    case Perturbation::kInsertion: {
      // A repeat of a neighbour would only show up as a heavier self-loop.
      const std::size_t p = 1 + uniform_index(rng, n - 2);
      const std::size_t x = uniform_index(rng, k);
      if (x == out[p - 1] || x == out[p]) return false;
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(p), x);
      out.pop_back();
      break;
    }
    case Perturbation::kSubstitution: {
      const std::size_t p = 1 + uniform_index(rng, n - 1);
      const std::size_t x = uniform_index(rng, k);
      if (x == out[p]) return false;
      out[p] = x;
      break;
    }
    case Perturbation::kReorder: {
      const std::size_t p = 1 + uniform_index(rng, n - 2);
      if (out[p] == out[p + 1]) return false;
      std::swap(out[p], out[p + 1]);
      break;
    }
    case Perturbation::kNone: return true;
  }
  if (!has_forbidden(succ, out)) return false;
  s = std::move(out);
  return true;
}

}  // namespace

std::string to_string(Perturbation p) {
  switch (p) {
    case Perturbation::kNone: return "none";
    case Perturbation::kInsertion: return "insertion";
    case Perturbation::kSubstitution: return "substitution";
    case Perturbation::kReorder: return "reorder";
  }
  return "unknown";
}

void SynthConfig::validate() const {
  if (event_types < 3 || event_types > kVerbs.size()) {
    throw ConfigError("synth: event types must lie in [3, " + std::to_string(kVerbs.size()) + "]");
  }
  if (length < 4) throw ConfigError("synth: sequence length must be >= 4");
  if (sequences == 0) throw ConfigError("synth: sequence count must be >= 1");
  if (!(anomaly_rate >= 0.0 && anomaly_rate <= 1.0)) throw ConfigError("synth: anomaly rate must lie in [0, 1]");
}

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t k = cfg.event_types;
  Rng rng(cfg.seed);
  SynthCorpus corpus;
  corpus.successors.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t next = (i + 1) % k;
    std::size_t other = next;
    while (other == next || other == i) other = uniform_index(rng, k);
    corpus.successors[i] = {next, other};
  }

  const auto n_anomalies = static_cast<std::size_t>(std::llround(cfg.anomaly_rate * static_cast<double>(cfg.sequences)));
  std::vector<std::size_t> order(cfg.sequences);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> planted(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_anomalies));
  std::sort(planted.begin(), planted.end());
  std::vector<Perturbation> kinds(cfg.sequences, Perturbation::kNone);
  for (std::size_t i = 0; i < planted.size(); ++i) {
    kinds[planted[i]] = static_cast<Perturbation>(1 + i % 3);
  }

  corpus.sequences.reserve(cfg.sequences);
  for (std::size_t i = 0; i < cfg.sequences; ++i) {
    SynthSequence seq;
    seq.block = "blk_" + std::to_string(1000000 + i);
    seq.perturbation = kinds[i];
    seq.events = walk(corpus.successors, cfg.length, rng);
    if (seq.anomalous()) {
      while (!perturb(seq.events, seq.perturbation, k, corpus.successors, rng)) {
      }
    }
    corpus.sequences.push_back(std::move(seq));
  }
  return corpus;
}

std::vector<std::string> SynthCorpus::log_lines() const {
  std::vector<std::string> lines;
  Rng rng(0x5eed);
  std::size_t t = 0;
  char header[64];
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    for (std::size_t e : seq.events) {
      const std::size_t secs = t++ % 86400;
      std::snprintf(header, sizeof(header), "081109 %02zu%02zu%02zu %zu INFO dfs.Synth: ", secs / 3600,
                    (secs / 60) % 60, secs % 60, 100 + s % 900);
      std::string line = header;
      line += kVerbs[e];
      line += " block ";
      line += seq.block;
      for (std::size_t x = 0; x < e % 3; ++x) {
        line += ' ';
        line += kExtras[(e + x) % kExtras.size()];
      }
      line += " size ";
      line += std::to_string(uniform_index(rng, 1 << 26));
      lines.push_back(std::move(line));
    }
  }
  return lines;
}

std::string SynthCorpus::labels_csv() const {
  std::string out = "BlockId,Label\n";
  for (const auto& seq : sequences) {
    out += seq.block;
    out += seq.anomalous() ? ",Anomaly\n" : ",Normal\n";
  }
  return out;
}

std::size_t SynthCorpus::anomaly_count() const {
  return static_cast<std::size_t>(
      std::count_if(sequences.begin(), sequences.end(), [](const SynthSequence& s) { return s.anomalous(); }));
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream logs(dir / "logs.txt", std::ios::binary);
  std::ofstream labels(dir / "labels.csv", std::ios::binary);
  if (!logs || !labels) throw DataError("cannot write corpus into " + dir.string());
  for (const auto& line : corpus.log_lines()) logs << line << '\n';
  labels << corpus.labels_csv();
}

}  // namespace loggraph::pipeline
