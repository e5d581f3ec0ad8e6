// Independent reference computations for the test suites. Nothing here calls
// into the implementation paths it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

namespace oracle {

// BM25 evaluated document by document straight from token lists.
struct BruteBm25 {
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> docs;
  double k1 = 1.2;
  double b = 0.75;

  std::vector<std::pair<std::string, double>> rank(const std::vector<std::string>& query, std::size_t n) const {
    const double N = static_cast<double>(docs.size());
    double total = 0;
    for (const auto& d : docs) total += static_cast<double>(d.size());
    const double avg = total / N;
    std::vector<std::pair<std::string, double>> scored;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      double score = 0.0;
      bool overlap = false;
      for (const auto& t : query) {
        double df = 0;
        for (const auto& d : docs) df += std::count(d.begin(), d.end(), t) > 0 ? 1 : 0;
        auto tf_count = std::count(docs[i].begin(), docs[i].end(), t);
        if (df == 0 || tf_count == 0) continue;
        overlap = true;
        const double idf = std::log((N - df + 0.5) / (df + 0.5) + 1.0);
        const double tf = static_cast<double>(tf_count);
        const double norm = k1 * (1.0 - b + b * (static_cast<double>(docs[i].size()) / avg));
        score += idf * ((tf * (k1 + 1.0)) / (tf + norm));
      }
      if (overlap && score > 0) scored.emplace_back(ids[i], score);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
      return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    if (scored.size() > n) scored.resize(n);
    return scored;
  }
};

inline double dcg(const std::vector<int>& grades_in_rank_order, std::size_t k) {
  double s = 0;
  for (std::size_t i = 0; i < std::min(k, grades_in_rank_order.size()); ++i)
    s += grades_in_rank_order[i] / std::log2(static_cast<double>(i) + 2.0);
  return s;
}

// IDCG as the maximum DCG over every ordering of all judged documents.
inline double brute_idcg(std::vector<int> grades, std::size_t k) {
  std::sort(grades.begin(), grades.end());
  double best = 0;
  do {
    best = std::max(best, dcg(grades, k));
  } while (std::next_permutation(grades.begin(), grades.end()));
  return best;
}

inline double brute_ndcg(const std::vector<std::string>& ranked, const std::map<std::string, int, std::less<>>& qrels,
                         std::size_t k) {
  std::vector<int> all;
  for (const auto& [d, g] : qrels) all.push_back(std::max(g, 0));
  double ideal = brute_idcg(all, k);
  if (ideal == 0) return 0;
  std::vector<int> got;
  for (const auto& d : ranked) {
    auto it = qrels.find(d);
    got.push_back(it == qrels.end() ? 0 : std::max(it->second, 0));
  }
  return dcg(got, k) / ideal;
}

inline double set_recall(const std::vector<std::string>& ranked, const std::map<std::string, int, std::less<>>& qrels,
                         std::size_t k) {
  std::set<std::string> relevant, top;
  for (const auto& [d, g] : qrels)
    if (g > 0) relevant.insert(d);
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) top.insert(ranked[i]);
  std::vector<std::string> both;
  std::set_intersection(relevant.begin(), relevant.end(), top.begin(), top.end(), std::back_inserter(both));
  return static_cast<double>(both.size()) / static_cast<double>(relevant.size());
}

using BigRational = boost::rational<boost::multiprecision::cpp_int>;

// "0.125" -> 125/1000, exactly.
inline BigRational parse_decimal(const std::string& text) {
  auto dot = text.find('.');
  std::string digits = text;
  boost::multiprecision::cpp_int denom = 1;
  if (dot != std::string::npos) {
    digits = text.substr(0, dot) + text.substr(dot + 1);
    for (std::size_t i = dot + 1; i < text.size(); ++i) denom *= 10;
  }
  // cpp_int reads a leading zero as octal.
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  return BigRational(boost::multiprecision::cpp_int(digits), denom);
}

// Dollars for a usage vector, rounded half-up to micro-dollars.
inline std::int64_t rational_cost_micro(std::int64_t in_tokens, std::int64_t out_tokens, const std::string& price_in,
                                        const std::string& price_out) {
  BigRational million(1000000);
  BigRational dollars = BigRational(in_tokens) / million * parse_decimal(price_in) +
                        BigRational(out_tokens) / million * parse_decimal(price_out);
  BigRational micro = dollars * million;
  boost::multiprecision::cpp_int num = micro.numerator(), den = micro.denominator();
  boost::multiprecision::cpp_int q = num / den, r = num % den;
  if (r * 2 >= den) ++q;
  return q.convert_to<std::int64_t>();
}

// Number of windows by direct simulation of the back-to-front slide.
inline std::size_t enumerate_windows(std::size_t k, std::size_t window, std::size_t stride) {
  if (k == 0) return 0;
  long long start = static_cast<long long>(k) - static_cast<long long>(window);
  std::size_t count = 0;
  while (true) {
    ++count;
    if (start <= 0) break;
    start -= static_cast<long long>(stride);
  }
  return count;
}

}  // namespace oracle
