#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "dosp/linalg.hpp"

namespace dosp {

struct LabeledSample {
  Vec z;
  double y = 1.0;  // exactly -1 or +1
};

// Per-agent labelled feature sequence on the simulation step grid:
// sample k is what agent i observes on [k h, (k+1) h). The grid covers
// [0, T] inclusive, i.e. round(T/h) + 1 samples per agent.
class FeatureStream {
 public:
  FeatureStream(std::size_t agents, Eigen::Index dim, double step,
                std::size_t samples_per_agent);

  std::size_t agent_count() const noexcept { return data_.size(); }
  Eigen::Index dim() const noexcept { return dim_; }
  double step() const noexcept { return step_; }
  std::size_t samples_per_agent() const noexcept { return samples_; }

  // Index of the sample active at time t (clamped to the grid).
  std::size_t index_at(double t) const;
  const LabeledSample& at(std::size_t agent, double t) const;
  const LabeledSample& sample(std::size_t agent, std::size_t k) const;
  void set(std::size_t agent, std::size_t k, LabeledSample s);

  // Largest feature norm in the stream.
  double max_feature_norm() const;

  // Serializes with the CSV ingestion schema (t,agent,label,z_0..z_{n-1}),
  // one row per grid sample, full round-trip precision.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<std::vector<LabeledSample>> data_;
  Eigen::Index dim_;
  double step_;
  std::size_t samples_;
};

struct CsvFeatureRow {
  double t = 0.0;
  std::size_t agent = 0;
  double label = 1.0;
  Vec z;
};

// Reads rows with header "t,agent,label,z_0,...,z_{n-1}". Throws
// CsvSchemaError naming the offending line.
std::vector<CsvFeatureRow> read_feature_csv(std::istream& is,
                                            const std::string& source);

// Resamples irregular rows onto the step grid by sample-and-hold. Every agent
// must have a row at or before t = 0.
FeatureStream stream_from_rows(const std::vector<CsvFeatureRow>& rows,
                               std::size_t agents, double step, double horizon);

}  // namespace dosp
