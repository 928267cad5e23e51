#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "evospike/errors.hpp"

namespace evospike {

// Fixed-width binning shared by every series in an analysis, so that the
// discretization is identical for network and environment variables.
struct BinSpec {
  double width = 0.01;
  double origin = 0.0;

  void validate() const {
    if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(origin)) {
      throw ConfigError("bin spec: width must be positive and finite");
    }
  }
};

using BinnedSeries = std::vector<std::int64_t>;

inline BinnedSeries bin_series(const std::vector<double>& values,
                               const BinSpec& spec = {}) {
  spec.validate();
  BinnedSeries bins(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v)) {
      throw NumericError("bin_series: non-finite value at index " +
                         std::to_string(i));
    }
    bins[i] = static_cast<std::int64_t>(std::floor((v - spec.origin) / spec.width));
  }
  return bins;
}

namespace detail {

// Sums a multiset of terms in value order. The sum then depends only on
// the multiset, not on the order terms were produced in, which is what
// makes MI(a,b) and MI(b,a) bitwise identical.
inline double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

}  // namespace detail

// Joint histogram of two aligned binned series, with both marginals.
class JointDistribution {
 public:
  static JointDistribution from_series(const BinnedSeries& a,
                                       const BinnedSeries& b) {
    if (a.size() != b.size()) {
      throw ConfigError("joint distribution: series lengths differ");
    }
    if (a.empty()) {
      throw ConfigError("joint distribution: series are empty");
    }
    JointDistribution joint;
    joint.samples_ = static_cast<std::int64_t>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      ++joint.joint_[{a[i], b[i]}];
      ++joint.marginal_a_[a[i]];
      ++joint.marginal_b_[b[i]];
    }
    return joint;
  }

  std::int64_t samples() const { return samples_; }
  std::size_t joint_support() const { return joint_.size(); }

  // Empirical probabilities sum to one up to rounding.
  double total_probability() const {
    const double n = static_cast<double>(samples_);
    std::vector<double> terms;
    terms.reserve(joint_.size());
    for (const auto& [cell, count] : joint_) {
      terms.push_back(static_cast<double>(count) / n);
    }
    return detail::sorted_sum(terms);
  }

  // Marginal counts equal the joint counts summed over the other axis.
  bool marginals_consistent() const {
    std::map<std::int64_t, std::int64_t> row_sums, col_sums;
    for (const auto& [cell, count] : joint_) {
      row_sums[cell.first] += count;
      col_sums[cell.second] += count;
    }
    return row_sums == marginal_a_ && col_sums == marginal_b_;
  }

  // Plug-in mutual information in bits. Term values are exact-integer
  // ratios below 2^53, so I(a,a) reproduces H(a) bit for bit and
  // relabeling bins never changes the result.
  double mutual_information_bits() const {
    std::vector<double> terms;
    terms.reserve(joint_.size());
    const double n = static_cast<double>(samples_);
    for (const auto& [cell, count] : joint_) {
      const double c = static_cast<double>(count);
      const double ca = static_cast<double>(marginal_a_.at(cell.first));
      const double cb = static_cast<double>(marginal_b_.at(cell.second));
      terms.push_back((c / n) * std::log2((c * n) / (ca * cb)));
    }
    const double mi = detail::sorted_sum(terms);
    return mi < 0.0 ? 0.0 : mi;
  }

 private:
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> joint_;
  std::map<std::int64_t, std::int64_t> marginal_a_;
  std::map<std::int64_t, std::int64_t> marginal_b_;
  std::int64_t samples_ = 0;
};

inline double mutual_information_bits(const BinnedSeries& a,
                                      const BinnedSeries& b) {
  return JointDistribution::from_series(a, b).mutual_information_bits();
}

// Bits by default; nats are an exact rescaling so every exactness property
// of the bit-valued estimator carries over.
enum class MIUnits { bits, nats };

inline double mutual_information(const BinnedSeries& a, const BinnedSeries& b,
                                 MIUnits units = MIUnits::bits) {
  const double bits = mutual_information_bits(a, b);
  return units == MIUnits::bits ? bits : bits * std::numbers::ln2;
}

// Plug-in entropy in bits, using the same term shape as the MI estimator
// ((c*n)/(c*c) rounds to the same double as n/c).
inline double entropy_bits(const BinnedSeries& a) {
  if (a.empty()) throw ConfigError("entropy: series is empty");
  std::map<std::int64_t, std::int64_t> counts;
  for (std::int64_t v : a) ++counts[v];
  const double n = static_cast<double>(a.size());
  std::vector<double> terms;
  terms.reserve(counts.size());
  for (const auto& [bin, count] : counts) {
    const double c = static_cast<double>(count);
    terms.push_back((c / n) * std::log2((c * n) / (c * c)));
  }
  const double h = detail::sorted_sum(terms);
  return h < 0.0 ? 0.0 : h;
}

// Named series bundle: the rows (network elements) and columns
// (environment variables) of an MI matrix.
struct LabeledSeries {
  std::string name;
  std::vector<double> values;
};

struct MIMatrix {
  std::vector<std::string> elements;   // row labels
  std::vector<std::string> variables;  // column labels
  std::vector<double> bits;            // row-major, elements x variables

  double at(std::size_t element, std::size_t variable) const {
    return bits[element * variables.size() + variable];
  }

  std::size_t element_index(const std::string& name) const {
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (elements[i] == name) return i;
    }
    throw ConfigError("mi matrix: unknown element '" + name + "'");
  }

  std::size_t variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (variables[i] == name) return i;
    }
    throw ConfigError("mi matrix: unknown variable '" + name + "'");
  }
};

// Computes MI between every (element, variable) pair. All series must be
// aligned sample-for-sample; they are binned with the same spec.
inline MIMatrix mi_matrix(const std::vector<LabeledSeries>& elements,
                          const std::vector<LabeledSeries>& variables,
                          const BinSpec& spec = {}) {
  if (elements.empty() || variables.empty()) {
    throw ConfigError("mi matrix: need at least one element and one variable");
  }
  const std::size_t samples = elements.front().values.size();
  auto check = [&](const LabeledSeries& s) {
    if (s.values.size() != samples) {
      throw ConfigError("mi matrix: series '" + s.name +
                        "' has mismatched length");
    }
  };
  for (const auto& s : elements) check(s);
  for (const auto& s : variables) check(s);

  std::vector<BinnedSeries> element_bins;
  element_bins.reserve(elements.size());
  for (const auto& s : elements) element_bins.push_back(bin_series(s.values, spec));
  std::vector<BinnedSeries> variable_bins;
  variable_bins.reserve(variables.size());
  for (const auto& s : variables) variable_bins.push_back(bin_series(s.values, spec));

  MIMatrix matrix;
  for (const auto& s : elements) matrix.elements.push_back(s.name);
  for (const auto& s : variables) matrix.variables.push_back(s.name);
  matrix.bits.resize(elements.size() * variables.size());
  for (std::size_t i = 0; i < element_bins.size(); ++i) {
    for (std::size_t j = 0; j < variable_bins.size(); ++j) {
      matrix.bits[i * variable_bins.size() + j] =
          mutual_information_bits(element_bins[i], variable_bins[j]);
    }
  }
  return matrix;
}

enum class Aggregator { max, mean };

inline double aggregate(const std::vector<double>& values, Aggregator agg) {
  if (values.empty()) throw ConfigError("aggregate: empty value list");
  if (agg == Aggregator::max) {
    return *std::max_element(values.begin(), values.end());
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace evospike
