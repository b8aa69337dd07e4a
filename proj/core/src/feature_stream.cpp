#include "dosp/feature_stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "dosp/errors.hpp"

namespace dosp {

FeatureStream::FeatureStream(std::size_t agents, Eigen::Index dim, double step,
                             std::size_t samples_per_agent)
    : data_(agents, std::vector<LabeledSample>(samples_per_agent,
                                               LabeledSample{Vec::Zero(dim), 1.0})),
      dim_(dim),
      step_(step),
      samples_(samples_per_agent) {
  if (!(step > 0.0)) throw InvalidArgument("feature stream step must be > 0");
  if (samples_per_agent == 0) throw InvalidArgument("empty feature stream");
}

std::size_t FeatureStream::index_at(double t) const {
  double k = std::floor(t / step_ + 1e-9);
  if (k <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(k), samples_ - 1);
}

const LabeledSample& FeatureStream::at(std::size_t agent, double t) const {
  return data_.at(agent)[index_at(t)];
}

const LabeledSample& FeatureStream::sample(std::size_t agent,
                                           std::size_t k) const {
  return data_.at(agent).at(k);
}

void FeatureStream::set(std::size_t agent, std::size_t k, LabeledSample s) {
  if (s.z.size() != dim_) throw DimensionMismatch("feature dimension");
  if (s.y != 1.0 && s.y != -1.0) throw InvalidArgument("labels must be +/-1");
  data_.at(agent).at(k) = std::move(s);
}

double FeatureStream::max_feature_norm() const {
  double m = 0.0;
  for (const auto& agent : data_)
    for (const auto& s : agent) m = std::max(m, s.z.norm());
  return m;
}

void FeatureStream::write_csv(std::ostream& os) const {
  os << "t,agent,label";
  for (Eigen::Index k = 0; k < dim_; ++k) os << ",z_" << k;
  os << '\n';
  char buf[32];
  for (std::size_t k = 0; k < samples_; ++k) {
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const auto& s = data_[i][k];
      std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(k) * step_);
      os << buf << ',' << i << ',' << (s.y > 0 ? "1" : "-1");
      for (Eigen::Index c = 0; c < dim_; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", s.z[c]);
        os << ',' << buf;
      }
      os << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(s.back())) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && issp(s[b])) ++b;
  return s.substr(b);
}

double parse_double(const std::string& cell, const std::string& where) {
  std::string c = trim(cell);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
  if (ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v)) {
    throw CsvSchemaError(where + ": '" + c + "' is not a finite number");
  }
  return v;
}

}  // namespace

std::vector<CsvFeatureRow> read_feature_csv(std::istream& is,
                                            const std::string& source) {
  std::string line;
  if (!std::getline(is, line)) throw CsvSchemaError(source + ": missing header");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_commas(trim(line));
  if (header.size() < 4 || trim(header[0]) != "t" || trim(header[1]) != "agent" ||
      trim(header[2]) != "label") {
    throw CsvSchemaError(source + ":1: header must start with t,agent,label");
  }
  const std::size_t n = header.size() - 3;
  for (std::size_t k = 0; k < n; ++k) {
    if (trim(header[3 + k]) != "z_" + std::to_string(k)) {
      throw CsvSchemaError(source + ":1: expected column z_" + std::to_string(k));
    }
  }

  std::vector<CsvFeatureRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_commas(trim(line));
    const std::string where = source + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) {
      throw CsvSchemaError(where + ": expected " + std::to_string(header.size()) +
                           " columns, found " + std::to_string(cells.size()));
    }
    CsvFeatureRow row;
    row.t = parse_double(cells[0], where);
    double agent = parse_double(cells[1], where);
    if (agent < 0 || agent != std::floor(agent)) {
      throw CsvSchemaError(where + ": agent must be a nonnegative integer");
    }
    row.agent = static_cast<std::size_t>(agent);
    row.label = parse_double(cells[2], where);
    if (row.label != 1.0 && row.label != -1.0) {
      throw CsvSchemaError(where + ": label must be -1 or 1");
    }
    row.z.resize(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      row.z[static_cast<Eigen::Index>(k)] = parse_double(cells[3 + k], where);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

FeatureStream stream_from_rows(const std::vector<CsvFeatureRow>& rows,
                               std::size_t agents, double step, double horizon) {
  if (rows.empty()) throw CsvSchemaError("feature CSV has no data rows");
  const Eigen::Index n = rows.front().z.size();
  std::vector<std::vector<const CsvFeatureRow*>> per_agent(agents);
  for (const auto& r : rows) {
    if (r.agent >= agents) {
      throw CsvSchemaError("agent " + std::to_string(r.agent) +
                           " out of range for " + std::to_string(agents) +
                           " agents");
    }
    per_agent[r.agent].push_back(&r);
  }
  const auto steps = static_cast<std::size_t>(std::llround(horizon / step));
  FeatureStream stream(agents, n, step, steps + 1);
  for (std::size_t i = 0; i < agents; ++i) {
    auto& list = per_agent[i];
    std::stable_sort(list.begin(), list.end(),
                     [](auto* a, auto* b) { return a->t < b->t; });
    if (list.empty() || list.front()->t > 1e-9) {
      throw CsvSchemaError("agent " + std::to_string(i) +
                           " has no feature row at or before t = 0");
    }
    std::size_t cursor = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
      double tk = static_cast<double>(k) * step;
      while (cursor + 1 < list.size() && list[cursor + 1]->t <= tk + 1e-9) {
        ++cursor;
      }
      stream.set(i, k, LabeledSample{list[cursor]->z, list[cursor]->label});
    }
  }
  return stream;
}

}  // namespace dosp
