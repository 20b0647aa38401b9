#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "declab/common.hpp"
#include "declab/metrics/metrics.hpp"

using namespace declab;
using namespace declab::metrics;

namespace {

// The textbook recursion, kept exponential on purpose: an independent
// oracle for the DP.
size_t naive_distance(std::string_view a, std::string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  if (a[0] == b[0]) return naive_distance(a.substr(1), b.substr(1));
  return 1 + std::min({naive_distance(a.substr(1), b),
                       naive_distance(a, b.substr(1)),
                       naive_distance(a.substr(1), b.substr(1))});
}

std::string random_word(Rng& rng, int max_len, const char* alphabet,
                        int alphabet_len) {
  int len = static_cast<int>(rng.uniform_int(0, max_len));
  std::string s;
  for (int i = 0; i < len; ++i)
    s.push_back(alphabet[rng.uniform_int(0, alphabet_len - 1)]);
  return s;
}

std::vector<std::string> random_tokens(Rng& rng, int max_len) {
  static const char* kPool[] = {"int", "x", "=", "0", ";", "return"};
  int len = static_cast<int>(rng.uniform_int(0, max_len));
  std::vector<std::string> out;
  for (int i = 0; i < len; ++i) out.push_back(kPool[rng.uniform_int(0, 5)]);
  return out;
}

EvalRecord rec(const std::string& isa, const std::string& opt, int compiles,
               int io_pass, double sim, uint32_t asm_len, uint32_t c_len,
               uint32_t args, uint32_t ptrs) {
  EvalRecord r;
  r.id = "t";
  r.isa = isa;
  r.opt = opt;
  r.compiles = compiles;
  r.io_pass = io_pass;
  r.edit_similarity = sim;
  r.asm_length = asm_len;
  r.c_length = c_len;
  r.num_func_args = args;
  r.num_pointers = ptrs;
  return r;
}

}  // namespace

// --- edit distance ---

TEST_CASE("edit distance handles the textbook cases") {
  CHECK(edit_distance(std::string("abc"), std::string("abc")) == 0);
  CHECK(edit_distance(std::string("kitten"), std::string("sitting")) == 3);
  CHECK(edit_distance(std::string(""), std::string("abcd")) == 4);
  CHECK(edit_distance(std::string("abcd"), std::string("")) == 4);
}

TEST_CASE("the DP agrees with the naive recursion on short strings") {
  Rng rng(0x5eed);
  const char* alphabet = "abc";
  for (int trial = 0; trial < 600; ++trial) {
    std::string a = random_word(rng, 7, alphabet, 3);
    std::string b = random_word(rng, 7, alphabet, 3);
    CAPTURE(a);
    CAPTURE(b);
    CHECK(edit_distance(a, b) == naive_distance(a, b));
  }
}

TEST_CASE("edit distance is a metric on token lists") {
  Rng rng(0xd157);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_tokens(rng, 6);
    auto b = random_tokens(rng, 6);
    auto c = random_tokens(rng, 6);
    size_t ab = edit_distance(a, b);
    size_t ba = edit_distance(b, a);
    size_t ac = edit_distance(a, c);
    size_t bc = edit_distance(b, c);
    CHECK(ab == ba);                       // symmetry
    CHECK(edit_distance(a, a) == 0);       // identity
    CHECK((ab == 0) == (a == b));          // indiscernibles
    CHECK(ac <= ab + bc);                  // triangle inequality
  }
}

// --- edit similarity ---

TEST_CASE("edit similarity follows the normalized-distance formula") {
  CHECK(edit_similarity("int f(){return 0;}", "int f(){return 0;}") == 1.0);
  CHECK(edit_similarity("ab", "abcd") == 0.5);
  // distance exceeds the reference length: clamped, never negative
  CHECK(edit_similarity("zzzzzzzzzzzzzzzz", "ab") == 0.0);
  CHECK_THROWS_AS(edit_similarity("int x;", "  \n\t "), EmptyReference);
}

TEST_CASE("similarity is 1 exactly when the normalized texts match") {
  CHECK(edit_similarity("int  f()\n{ return 0; }", "int f() { return 0; }") ==
        1.0);
  CHECK(edit_similarity("int f() { return 1; }", "int f() { return 0; }") <
        1.0);
  Rng rng(0xf00d);
  for (int trial = 0; trial < 100; ++trial) {
    std::string a = random_word(rng, 10, "ab c", 4);
    std::string b = random_word(rng, 10, "ab c", 4);
    if (normalize_text(b).empty()) continue;
    double sim = edit_similarity(a, b);
    CHECK(sim >= 0.0);
    CHECK(sim <= 1.0);
    CHECK((sim == 1.0) == (normalize_text(a) == normalize_text(b)));
  }
}

TEST_CASE("token-level similarity is available for ablation") {
  // one replaced token out of five
  double sim = edit_similarity("int f ( x )", "int g ( x )",
                               Granularity::Token);
  CHECK(sim == doctest::Approx(0.8));
  CHECK(edit_similarity("a b", "a b", Granularity::Token) == 1.0);
}

TEST_CASE("normalization collapses whitespace runs and trims the ends") {
  CHECK(normalize_text("  a\t\tb \n c  ") == "a b c");
  CHECK(normalize_text("abc") == "abc");
  CHECK(normalize_text(" \n ").empty());
}

// --- correlation ---

TEST_CASE("pearson matches hand-computed coefficients") {
  CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(pearson({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.8));
}

TEST_CASE("pearson rejects degenerate inputs") {
  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), DegenerateVariance);
  CHECK_THROWS_AS(pearson({1, 2, 3}, {5, 5, 5}), DegenerateVariance);
  CHECK_THROWS_AS(pearson({1}, {2}), DegenerateVariance);
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), DegenerateVariance);
}

TEST_CASE("pearson is invariant under positive affine rescaling") {
  Rng rng(0xaff1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs, ys, xs2, ys2;
    for (int i = 0; i < 12; ++i) {
      xs.push_back(rng.uniform_real(-10, 10));
      ys.push_back(rng.uniform_real(-10, 10));
    }
    double a = rng.uniform_real(0.1, 5.0);
    double b = rng.uniform_real(-3.0, 3.0);
    double c = rng.uniform_real(0.1, 5.0);
    double d = rng.uniform_real(-3.0, 3.0);
    for (int i = 0; i < 12; ++i) {
      xs2.push_back(a * xs[i] + b);
      ys2.push_back(c * ys[i] + d);
    }
    CHECK(pearson(xs, ys) == doctest::Approx(pearson(xs2, ys2)));
  }
}

TEST_CASE("the correlation table reports one stratum per configuration") {
  std::vector<EvalRecord> records = {
      rec("REG", "O0", 1, 1, 0.9, 10, 20, 1, 0),
      rec("REG", "O0", 0, 0, 0.2, 40, 50, 2, 1),
      rec("REG", "O0", 1, 1, 0.8, 15, 25, 1, 0),
      rec("REG", "O0", 0, 0, 0.3, 45, 60, 3, 2),
      rec("STK", "O2", 1, 1, 0.5, 12, 22, 1, 0),
      rec("STK", "O2", 1, 0, 0.5, 30, 40, 2, 1),
  };
  auto table = correlation_table(records);
  REQUIRE(table.size() == 2);
  CHECK(table[0].isa == "REG");
  CHECK(table[0].opt == "O0");
  CHECK(table[0].n == 4);
  CHECK(table[1].isa == "STK");
  CHECK(table[1].n == 2);
  REQUIRE(table[0].r.size() == feature_names().size());
  // io_pass equals compiles in the REG stratum
  REQUIRE(table[0].r[0].has_value());
  CHECK(*table[0].r[0] == doctest::Approx(1.0));
}

TEST_CASE("zero-variance outcomes yield null correlation cells") {
  std::vector<EvalRecord> records = {
      rec("REG", "O0", 1, 1, 0.9, 10, 20, 1, 0),
      rec("REG", "O0", 1, 1, 0.2, 40, 50, 2, 1),
  };
  auto table = correlation_table(records);
  REQUIRE(table.size() == 1);
  for (const auto& cell : table[0].r) CHECK(!cell.has_value());
}

TEST_CASE("stratum correlations reuse the plain pearson computation") {
  std::vector<EvalRecord> records;
  // io_pass = {1,3,2,4} scaled to 0/1 is impossible, so embed the pearson
  // example in a feature instead: c_length {1,3,2,4} against pass {1,2,3,4}
  // quantized to {0,0,1,1} gives r = cov/sd product computed by hand below.
  double xs[] = {1, 3, 2, 4};
  int ys[] = {0, 0, 1, 1};
  for (int i = 0; i < 4; ++i)
    records.push_back(rec("REG", "O2", 1, ys[i], 0.5 + 0.1 * i, 10u + i,
                          static_cast<uint32_t>(xs[i]), 1, 0));
  auto table = correlation_table(records);
  REQUIRE(table.size() == 1);
  REQUIRE(table[0].r[3].has_value());
  CHECK(*table[0].r[3] ==
        doctest::Approx(pearson({1, 3, 2, 4}, {0, 0, 1, 1})));
}

// --- buckets ---

TEST_CASE("a single bucket reproduces overall accuracy") {
  std::vector<EvalRecord> records = {
      rec("REG", "O0", 1, 1, 1.0, 10, 10, 1, 0),
      rec("REG", "O0", 1, 0, 0.5, 20, 10, 1, 0),
      rec("REG", "O0", 1, 1, 1.0, 30, 10, 1, 0),
      rec("REG", "O0", 1, 0, 0.5, 40, 10, 1, 0),
  };
  auto buckets = bucket_accuracy(records, 1);
  REQUIRE(buckets.size() == 1);
  CHECK(buckets[0].count == 4);
  CHECK(buckets[0].accuracy == doctest::Approx(0.5));
}

TEST_CASE("buckets separate short passing from long failing programs") {
  std::vector<EvalRecord> records;
  for (uint32_t len : {10u, 12u, 14u})
    records.push_back(rec("REG", "O0", 1, 1, 1.0, len, 10, 1, 0));
  for (uint32_t len : {90u, 95u, 99u})
    records.push_back(rec("REG", "O0", 1, 0, 0.1, len, 10, 1, 0));
  auto buckets = bucket_accuracy(records, 2);
  REQUIRE(buckets.size() == 2);
  CHECK(buckets[0].accuracy == doctest::Approx(1.0));
  CHECK(buckets[1].accuracy == doctest::Approx(0.0));
  CHECK(buckets[0].count + buckets[1].count == records.size());
}

TEST_CASE("bucket counts always partition the records") {
  Rng rng(0xb1b5);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 137; ++i) {
    records.push_back(rec("REG", "O0", 1,
                          static_cast<int>(rng.uniform_int(0, 1)), 0.5,
                          static_cast<uint32_t>(rng.uniform_int(5, 500)), 10,
                          1, 0));
  }
  for (int bins : {2, 3, 7, 16}) {
    auto buckets = bucket_accuracy(records, bins);
    size_t total = 0;
    for (const Bucket& b : buckets) total += b.count;
    CHECK(total == records.size());
  }
  // identical keys collapse into the first bucket without dropping anything
  std::vector<EvalRecord> same = {rec("REG", "O0", 1, 1, 1.0, 42, 10, 1, 0),
                                  rec("REG", "O0", 1, 0, 0.2, 42, 10, 1, 0)};
  auto buckets = bucket_accuracy(same, 3);
  CHECK(buckets[0].count == 2);
  CHECK(buckets[0].accuracy == doctest::Approx(0.5));
}

// --- CSV plumbing ---

TEST_CASE("CSV rows follow the documented column order") {
  CHECK(eval_csv_header() ==
        "id,isa,opt,compiles,io_pass,edit_similarity,asm_length,c_length,"
        "num_func_args,num_pointers");
  EvalRecord r = rec("REG", "O2", 1, 0, 0.625, 128, 64, 2, 1);
  r.id = "fn_0007";
  CHECK(eval_csv_row(r) == "fn_0007,REG,O2,1,0,0.625000,128,64,2,1");

  auto table = correlation_table(
      {rec("REG", "O0", 1, 1, 0.9, 10, 20, 1, 0),
       rec("REG", "O0", 1, 1, 0.2, 40, 50, 2, 1)});
  std::string csv = correlation_csv(table);
  CHECK(csv.find("isa,opt,n,compiles,edit_similarity,asm_length,c_length,"
                 "num_func_args,num_pointers") == 0);
  CHECK(csv.find("REG,O0,2,,,,,,") != std::string::npos);  // null cells

  auto buckets = bucket_accuracy({rec("REG", "O0", 1, 1, 1.0, 10, 10, 1, 0)},
                                 1);
  CHECK(buckets_csv(buckets).find("lo,hi,count,accuracy") == 0);
}
