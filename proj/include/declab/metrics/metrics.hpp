#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace declab::metrics {

struct EmptyReference : std::runtime_error {
  EmptyReference() : std::runtime_error("reference text is empty") {}
};

struct DegenerateVariance : std::runtime_error {
  explicit DegenerateVariance(const std::string& m) : std::runtime_error(m) {}
};

// Per-function outcome; one row of the report CSV (docs/report-schema.md).
struct EvalRecord {
  std::string id;
  std::string isa;  // REG | STK
  std::string opt;  // O0 | O2
  int compiles = 0;
  int io_pass = 0;  // never set without compiles
  double edit_similarity = 0.0;
  uint32_t asm_length = 0;  // chars of assembler text
  uint32_t c_length = 0;    // chars of canonical ground-truth text
  uint32_t num_func_args = 0;
  uint32_t num_pointers = 0;
};

// Minimum number of unit-cost insert/delete/replace steps between the
// sequences; bottom-up DP with the equal-head shortcut.
size_t edit_distance(const std::vector<std::string>& a,
                     const std::vector<std::string>& b);
size_t edit_distance(const std::string& a, const std::string& b);

// Whitespace runs collapsed to single spaces, ends trimmed: layout never
// influences similarity scores.
std::string normalize_text(const std::string& s);

enum class Granularity { Char, Token };

// max(0, 1 - distance / |reference|) over normalized text. Char-level by
// default; Token splits the normalized text on spaces. Throws
// EmptyReference when the reference normalizes to nothing.
double edit_similarity(const std::string& hypothesis,
                       const std::string& reference,
                       Granularity g = Granularity::Char);

// Sample Pearson correlation coefficient. Throws DegenerateVariance for
// fewer than two points or a zero-variance side.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Feature columns correlated against io_pass, in report order.
const std::vector<std::string>& feature_names();

struct CorrelationRow {
  std::string isa;
  std::string opt;
  size_t n = 0;                           // records in the stratum
  std::vector<std::optional<double>> r;   // one per feature_names(); null
                                          // when the variance degenerates
};

// One row per (isa, opt) stratum present in the records, sorted.
std::vector<CorrelationRow> correlation_table(
    const std::vector<EvalRecord>& records);

struct Bucket {
  double lo = 0.0;  // key range covered, [lo, hi)
  double hi = 0.0;  // (last bucket closed)
  size_t count = 0;
  double accuracy = 0.0;  // mean io_pass; 0 for an empty bucket
};

// Equal-width buckets of asm_length; per-bucket mean io_pass.
std::vector<Bucket> bucket_accuracy(const std::vector<EvalRecord>& records,
                                    int n_bins);

// CSV plumbing shared with the report writer.
std::string eval_csv_header();
std::string eval_csv_row(const EvalRecord& r);
std::string correlation_csv(const std::vector<CorrelationRow>& rows);
std::string buckets_csv(const std::vector<Bucket>& buckets);

}  // namespace declab::metrics
