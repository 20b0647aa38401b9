#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "declab/metrics/metrics.hpp"

namespace declab::metrics {

namespace {

std::string fmt(double v, int precision = 6) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

double feature_value(const EvalRecord& r, size_t feature) {
  switch (feature) {
    case 0: return r.compiles;
    case 1: return r.edit_similarity;
    case 2: return r.asm_length;
    case 3: return r.c_length;
    case 4: return r.num_func_args;
    default: return r.num_pointers;
  }
}

}  // namespace

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw DegenerateVariance("input lengths differ");
  const size_t n = xs.size();
  if (n < 2) throw DegenerateVariance("need at least two points");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw DegenerateVariance("zero variance");
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      "compiles",      "edit_similarity", "asm_length",
      "c_length",      "num_func_args",   "num_pointers"};
  return names;
}

std::vector<CorrelationRow> correlation_table(
    const std::vector<EvalRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<const EvalRecord*>>
      strata;
  for (const EvalRecord& r : records) strata[{r.isa, r.opt}].push_back(&r);

  std::vector<CorrelationRow> rows;
  for (const auto& [key, recs] : strata) {
    CorrelationRow row;
    row.isa = key.first;
    row.opt = key.second;
    row.n = recs.size();
    std::vector<double> ys;
    ys.reserve(recs.size());
    for (const EvalRecord* r : recs) ys.push_back(r->io_pass);
    for (size_t f = 0; f < feature_names().size(); ++f) {
      std::vector<double> xs;
      xs.reserve(recs.size());
      for (const EvalRecord* r : recs) xs.push_back(feature_value(*r, f));
      try {
        row.r.push_back(pearson(xs, ys));
      } catch (const DegenerateVariance&) {
        row.r.push_back(std::nullopt);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Bucket> bucket_accuracy(const std::vector<EvalRecord>& records,
                                    int n_bins) {
  if (n_bins < 1) n_bins = 1;
  std::vector<Bucket> buckets(static_cast<size_t>(n_bins));
  if (records.empty()) return buckets;

  double lo = records[0].asm_length;
  double hi = records[0].asm_length;
  for (const EvalRecord& r : records) {
    lo = std::min(lo, static_cast<double>(r.asm_length));
    hi = std::max(hi, static_cast<double>(r.asm_length));
  }
  double width = (hi - lo) / n_bins;
  for (int b = 0; b < n_bins; ++b) {
    buckets[b].lo = lo + width * b;
    buckets[b].hi = b + 1 == n_bins ? hi : lo + width * (b + 1);
  }
  std::vector<size_t> passes(static_cast<size_t>(n_bins), 0);
  for (const EvalRecord& r : records) {
    int b = width == 0.0
                ? 0
                : std::min(n_bins - 1,
                           static_cast<int>((r.asm_length - lo) / width));
    buckets[b].count += 1;
    passes[b] += static_cast<size_t>(r.io_pass);
  }
  for (int b = 0; b < n_bins; ++b) {
    if (buckets[b].count > 0)
      buckets[b].accuracy =
          static_cast<double>(passes[b]) / static_cast<double>(buckets[b].count);
  }
  return buckets;
}

std::string eval_csv_header() {
  return "id,isa,opt,compiles,io_pass,edit_similarity,asm_length,c_length,"
         "num_func_args,num_pointers";
}

std::string eval_csv_row(const EvalRecord& r) {
  std::ostringstream out;
  out << r.id << ',' << r.isa << ',' << r.opt << ',' << r.compiles << ','
      << r.io_pass << ',' << fmt(r.edit_similarity) << ',' << r.asm_length
      << ',' << r.c_length << ',' << r.num_func_args << ',' << r.num_pointers;
  return out.str();
}

std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
  std::ostringstream out;
  out << "isa,opt,n";
  for (const std::string& f : feature_names()) out << ',' << f;
  out << '\n';
  for (const CorrelationRow& row : rows) {
    out << row.isa << ',' << row.opt << ',' << row.n;
    for (const auto& cell : row.r) {
      out << ',';
      if (cell) out << fmt(*cell);
    }
    out << '\n';
  }
  return out.str();
}

std::string buckets_csv(const std::vector<Bucket>& buckets) {
  std::ostringstream out;
  out << "lo,hi,count,accuracy\n";
  for (const Bucket& b : buckets) {
    out << fmt(b.lo, 1) << ',' << fmt(b.hi, 1) << ',' << b.count << ','
        << fmt(b.accuracy) << '\n';
  }
  return out.str();
}

}  // namespace declab::metrics
