#include <algorithm>
#include <cctype>
#include <sstream>

#include "declab/metrics/metrics.hpp"

namespace declab::metrics {

namespace {

// One DP over any random-access sequence with ==. Rows are the hypothesis,
// columns the reference; dp[j] holds Distance(a[0..i), b[0..j)).
template <typename Seq>
size_t levenshtein(const Seq& a, const Seq& b) {
  const size_t n = b.size();
  std::vector<size_t> dp(n + 1);
  for (size_t j = 0; j <= n; ++j) dp[j] = j;  // Distance(empty, b[0..j)) = j
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diag = dp[0];
    dp[0] = i;  // Distance(a[0..i), empty) = i
    for (size_t j = 1; j <= n; ++j) {
      size_t next_diag = dp[j];
      if (a[i - 1] == b[j - 1]) {
        dp[j] = diag;  // equal heads cost nothing
      } else {
        dp[j] = 1 + std::min({dp[j],       // delete from a
                              dp[j - 1],   // insert into a
                              diag});      // replace
      }
      diag = next_diag;
    }
  }
  return dp[n];
}

}  // namespace

size_t edit_distance(const std::vector<std::string>& a,
                     const std::vector<std::string>& b) {
  return levenshtein(a, b);
}

size_t edit_distance(const std::string& a, const std::string& b) {
  return levenshtein(a, b);
}

std::string normalize_text(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

double edit_similarity(const std::string& hypothesis,
                       const std::string& reference, Granularity g) {
  std::string hyp = normalize_text(hypothesis);
  std::string ref = normalize_text(reference);
  if (ref.empty()) throw EmptyReference{};
  size_t dist;
  size_t ref_len;
  if (g == Granularity::Char) {
    dist = edit_distance(hyp, ref);
    ref_len = ref.size();
  } else {
    auto split = [](const std::string& t) {
      std::vector<std::string> toks;
      std::istringstream in(t);
      std::string w;
      while (in >> w) toks.push_back(w);
      return toks;
    };
    std::vector<std::string> rt = split(ref);
    dist = edit_distance(split(hyp), rt);
    ref_len = rt.size();
  }
  double sim = 1.0 - static_cast<double>(dist) / static_cast<double>(ref_len);
  return std::max(0.0, sim);
}

}  // namespace declab::metrics
