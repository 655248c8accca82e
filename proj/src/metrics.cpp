#include "dasim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dasim/errors.hpp"
#include "dasim/kernels.hpp"

namespace dasim {

double emd_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("emd_1d: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  if (x.size() == y.size()) return kernels::abs_diff_sum(x, y) / static_cast<double>(x.size());
  // Walk the quantile functions on the common grid of breakpoints i/|x| and j/|y|,
  // measured in units of 1/(|x||y|).
  const auto nx = static_cast<long double>(x.size()), ny = static_cast<long double>(y.size());
  std::size_t i = 0, j = 0;
  long double u = 0, total = 0;
  while (i < x.size() && j < y.size()) {
    long double ui = static_cast<long double>(i + 1) * ny;
    long double uj = static_cast<long double>(j + 1) * nx;
    long double next = std::min(ui, uj);
    total += (next - u) * std::abs(static_cast<long double>(x[i]) - y[j]);
    u = next;
    if (ui == next) ++i;
    if (uj == next) ++j;
  }
  return static_cast<double>(total / (nx * ny));
}

namespace {

template <class T>
double ks_sorted(std::vector<T> x, std::vector<T> y) {
  if (x.empty() || y.empty()) throw ArgumentError("ks_stat: empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double best = 0;
  while (i < x.size() || j < y.size()) {
    const T& v = (j >= y.size() || (i < x.size() && x[i] < y[j])) ? x[i] : y[j];
    while (i < x.size() && !(v < x[i])) ++i;
    while (j < y.size() && !(v < y[j])) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return best;
}

}  // namespace

double ks_stat(std::span<const double> a, std::span<const double> b) {
  return ks_sorted(std::vector<double>(a.begin(), a.end()), std::vector<double>(b.begin(), b.end()));
}

double ks_stat(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return ks_sorted(a, b);
}

double ks_stat(const std::vector<Value>& a, const std::vector<Value>& b) {
  if (a.empty() || b.empty()) throw ArgumentError("ks_stat: empty sample");
  const bool num = is_numeric(a.front());
  auto same = [&](const std::vector<Value>& v) {
    return std::all_of(v.begin(), v.end(), [&](const Value& x) { return is_numeric(x) == num; });
  };
  if (!same(a) || !same(b)) throw ArgumentError("ks_stat: samples of different kinds");
  if (num) {
    std::vector<double> x, y;
    for (const auto& v : a) x.push_back(as_number(v));
    for (const auto& v : b) y.push_back(as_number(v));
    return ks_stat(x, y);
  }
  std::vector<std::string> x, y;
  for (const auto& v : a) x.push_back(as_category(v));
  for (const auto& v : b) y.push_back(as_category(v));
  return ks_stat(x, y);
}

NGramProfile ngram_profile(const std::vector<std::vector<std::string>>& sequences, int n) {
  if (n < 1) throw ArgumentError("n-gram size must be positive");
  const auto pad = static_cast<std::size_t>(n - 1);
  NGramProfile counts;
  double total = 0;
  for (const auto& seq : sequences) {
    std::vector<std::string> padded(pad, kTraceStart);
    padded.insert(padded.end(), seq.begin(), seq.end());
    padded.insert(padded.end(), pad, kTraceEnd);
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= padded.size(); ++i) {
      counts[NGram(padded.begin() + static_cast<std::ptrdiff_t>(i),
                   padded.begin() + static_cast<std::ptrdiff_t>(i) + n)] += 1;
      total += 1;
    }
  }
  if (total > 0)
    for (auto& [g, c] : counts) c /= total;
  return counts;
}

NGramProfile ngram_profile(const EventLog& log, int n) {
  std::vector<std::vector<std::string>> seqs;
  for (const auto& t : traces(log)) {
    std::vector<std::string> s;
    for (const Event* e : t.events) s.push_back(e->activity);
    seqs.push_back(std::move(s));
  }
  return ngram_profile(seqs, n);
}

double ngram_distance(const NGramProfile& a, const NGramProfile& b) {
  double d = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      d += ia->second;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      d += ib->second;
      ++ib;
    } else {
      d += std::abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return std::clamp(0.5 * d, 0.0, 1.0);
}

double ngram_distance(const EventLog& a, const EventLog& b, int n) {
  return ngram_distance(ngram_profile(a, n), ngram_profile(b, n));
}

}  // namespace dasim
