#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dasim/event_log.hpp"
#include "dasim/value.hpp"

namespace dasim {

/// 1-D Wasserstein-1 distance between two empirical distributions.
double emd_1d(std::span<const double> a, std::span<const double> b);

/// Two-sample Kolmogorov-Smirnov statistic: max |ECDF_a - ECDF_b| over the merged support.
double ks_stat(std::span<const double> a, std::span<const double> b);
/// Categories are ordered lexicographically.
double ks_stat(const std::vector<std::string>& a, const std::vector<std::string>& b);
/// Dispatches on the value kind; mixed kinds throw ArgumentError.
double ks_stat(const std::vector<Value>& a, const std::vector<Value>& b);

using NGram = std::vector<std::string>;
using NGramProfile = std::map<NGram, double>;

inline constexpr const char* kTraceStart = "\x02start";
inline constexpr const char* kTraceEnd = "\x03end";

/// Pooled relative n-gram frequencies over every trace padded with n-1 start and n-1 end
/// markers.
NGramProfile ngram_profile(const EventLog& log, int n = 3);
NGramProfile ngram_profile(const std::vector<std::vector<std::string>>& sequences, int n = 3);

/// Total variation distance between the two n-gram profiles.
double ngram_distance(const EventLog& a, const EventLog& b, int n = 3);
double ngram_distance(const NGramProfile& a, const NGramProfile& b);

}  // namespace dasim
