#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "declab/tok/tok.hpp"

namespace declab::tok {

namespace {

constexpr size_t kMaxPieceChars = 8;
constexpr double kPruneFraction = 0.2;
constexpr int kMaxRounds = 100;
constexpr double kByteLogProb = -30.0;  // fallback: worse than any piece
constexpr double kLogProbCeil = -1e-9;  // keeps every logprob strictly < 0

// Splits a fragment into logical characters; everything is ASCII except
// the metaspace marker, but the split is generic UTF-8.
std::vector<std::string> utf8_chars(const std::string& s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : 4;
    len = std::min(len, s.size() - i);
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

struct Candidate {
  double score;
  size_t npieces;
  size_t len_chars;     // characters consumed at this position
  bool byte_fallback;
  std::string piece;    // for the tie-break
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.npieces != b.npieces) return a.npieces < b.npieces;
  return a.piece < b.piece;
}

// Viterbi over one fragment. Returns the chosen pieces as strings, with
// byte-fallback chars flagged by an empty piece id lookup later.
struct Segmented {
  std::vector<std::string> pieces;       // chosen surface strings
  std::vector<bool> byte_fallback;      // aligned with pieces
};

Segmented viterbi(const Vocab& v, const std::string& fragment) {
  std::vector<std::string> chars = utf8_chars(fragment);
  const size_t n = chars.size();
  std::vector<Candidate> best(n + 1);
  best[n] = {0.0, 0, 0, false, ""};
  for (size_t i = n; i-- > 0;) {
    Candidate chosen{-1e300, 0, 0, false, ""};
    bool found = false;
    std::string sub;
    for (size_t len = 1; len <= std::min(kMaxPieceChars, n - i); ++len) {
      sub += chars[i + len - 1];
      auto id = v.piece_id(sub);
      if (!id) continue;
      const Candidate& rest = best[i + len];
      Candidate c{v.pieces[*id - Vocab::kFirstPiece].second + rest.score,
                  rest.npieces + 1, len, false, sub};
      if (!found || better(c, chosen)) {
        chosen = c;
        found = true;
      }
    }
    {
      // per-byte fallback for the single character at i
      const Candidate& rest = best[i + 1];
      size_t nbytes = chars[i].size();
      Candidate c{kByteLogProb * nbytes + rest.score, rest.npieces + nbytes,
                  1, true, chars[i]};
      if (!found || better(c, chosen)) chosen = c;
    }
    best[i] = chosen;
  }
  Segmented seg;
  size_t i = 0;
  while (i < n) {
    const Candidate& c = best[i];
    seg.pieces.push_back(c.piece);
    seg.byte_fallback.push_back(c.byte_fallback);
    i += c.len_chars;
  }
  return seg;
}

}  // namespace

std::optional<uint32_t> Vocab::piece_id(const std::string& piece) const {
  auto it = index.find(piece);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

void Vocab::rebuild_index() {
  index.clear();
  for (size_t i = 0; i < pieces.size(); ++i)
    index[pieces[i].first] = Vocab::kFirstPiece + static_cast<uint32_t>(i);
}

Vocab train_unigram(const std::vector<std::string>& corpus,
                    size_t target_size, size_t seed_multiplier) {
  std::map<std::string, size_t> frag_count;
  for (const std::string& line : corpus)
    for (std::string& f : pretokenize(line)) frag_count[std::move(f)]++;
  if (frag_count.empty()) throw CorpusTooSmall("corpus has no fragments");

  // Alphabet: every character seen, plus the two structural pieces that
  // encode() may emit for any input.
  std::set<std::string> alphabet{" ", kMetaspace};
  std::map<std::string, double> freq;
  for (const auto& [frag, count] : frag_count) {
    std::vector<std::string> chars = utf8_chars(frag);
    for (const std::string& ch : chars) alphabet.insert(ch);
    for (size_t i = 0; i < chars.size(); ++i) {
      std::string sub;
      for (size_t len = 1; len <= std::min(kMaxPieceChars, chars.size() - i);
           ++len) {
        sub += chars[i + len - 1];
        freq[sub] += static_cast<double>(count);
      }
    }
  }
  if (alphabet.size() > target_size)
    throw CorpusTooSmall("alphabet of " + std::to_string(alphabet.size()) +
                         " exceeds target size " +
                         std::to_string(target_size));

  // Seed: the alphabet plus the highest frequency*length multi-character
  // substrings, capped at seed_multiplier * target_size total pieces.
  std::vector<std::pair<std::string, double>> multis;
  for (const auto& [sub, f] : freq) {
    size_t len = utf8_chars(sub).size();
    if (len < 2) continue;
    multis.emplace_back(sub, f * static_cast<double>(len));
  }
  std::sort(multis.begin(), multis.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  size_t cap = seed_multiplier * target_size;
  if (multis.size() + alphabet.size() > cap)
    multis.resize(cap > alphabet.size() ? cap - alphabet.size() : 0);

  std::map<std::string, double> logprob;  // current model
  {
    double total = 0.0;
    for (const std::string& ch : alphabet)
      total += freq.count(ch) ? freq.at(ch) : 0.5;
    for (const auto& [sub, _] : multis) total += freq.at(sub);
    for (const std::string& ch : alphabet)
      logprob[ch] = std::log((freq.count(ch) ? freq.at(ch) : 0.5) / total);
    for (const auto& [sub, _] : multis)
      logprob[sub] = std::log(freq.at(sub) / total);
  }

  auto make_vocab = [&]() {
    Vocab v;
    for (const auto& [piece, lp] : logprob)
      v.pieces.emplace_back(piece, std::min(lp, kLogProbCeil));
    std::sort(v.pieces.begin(), v.pieces.end());
    v.rebuild_index();
    return v;
  };

  for (int round = 0; round < kMaxRounds; ++round) {
    // E: segment every distinct fragment under the current model.
    Vocab v = make_vocab();
    std::map<std::string, double> usage;
    for (const auto& [frag, count] : frag_count) {
      Segmented seg = viterbi(v, frag);
      for (size_t i = 0; i < seg.pieces.size(); ++i)
        if (!seg.byte_fallback[i])
          usage[seg.pieces[i]] += static_cast<double>(count);
    }

    // M: re-estimate probabilities; a multi-character piece the segmenter
    // no longer uses is dead weight and is dropped outright, while unused
    // alphabet pieces keep a floor count so every character stays spellable.
    double total = 0.0;
    for (const auto& [piece, _] : logprob) {
      bool single = alphabet.count(piece) > 0;
      double u = usage.count(piece) ? usage.at(piece) : 0.0;
      total += single && u == 0.0 ? 0.5 : u;
    }
    std::map<std::string, double> next;
    for (const auto& [piece, _] : logprob) {
      bool single = alphabet.count(piece) > 0;
      double u = usage.count(piece) ? usage.at(piece) : 0.0;
      if (u == 0.0 && !single) continue;
      next[piece] = std::log((single && u == 0.0 ? 0.5 : u) / total);
    }
    logprob = std::move(next);

    if (logprob.size() <= target_size) break;

    // Prune the multi-character pieces whose removal costs the least
    // likelihood, approximated against the single-character respelling.
    std::vector<std::pair<double, std::string>> impact;
    for (const auto& [piece, lp] : logprob) {
      if (alphabet.count(piece)) continue;
      double respell = 0.0;
      for (const std::string& ch : utf8_chars(piece)) respell += logprob[ch];
      double u = usage.count(piece) ? usage.at(piece) : 0.0;
      impact.emplace_back(u * (lp - respell), piece);
    }
    std::sort(impact.begin(), impact.end());
    size_t over = logprob.size() - target_size;
    size_t n_prune = std::max<size_t>(
        1, static_cast<size_t>(std::ceil(impact.size() * kPruneFraction)));
    n_prune = std::min(n_prune, over);
    n_prune = std::min(n_prune, impact.size());
    for (size_t i = 0; i < n_prune; ++i) logprob.erase(impact[i].second);
  }

  return make_vocab();
}

std::vector<uint32_t> encode(const Vocab& v, const std::string& text) {
  std::vector<uint32_t> ids;
  for (const std::string& frag : pretokenize(text)) {
    Segmented seg = viterbi(v, frag);
    for (size_t i = 0; i < seg.pieces.size(); ++i) {
      if (seg.byte_fallback[i]) {
        for (char b : seg.pieces[i])
          ids.push_back(Vocab::kByteBase +
                        static_cast<unsigned char>(b));
      } else {
        ids.push_back(*v.piece_id(seg.pieces[i]));
      }
    }
  }
  return ids;
}

std::string decode(const Vocab& v, const std::vector<uint32_t>& ids) {
  std::string out;
  for (uint32_t id : ids) {
    if (id == Vocab::kPad || id == Vocab::kBos || id == Vocab::kEos) continue;
    if (id < Vocab::kFirstPiece) {
      out.push_back(static_cast<char>(id - Vocab::kByteBase));
    } else if (id < v.total_ids()) {
      out += v.pieces[id - Vocab::kFirstPiece].first;
    } else {
      throw BadTokenId(id);
    }
  }
  // metaspace back to the space it stood for
  std::string result;
  size_t i = 0;
  const std::string meta = kMetaspace;
  while (i < out.size()) {
    if (out.compare(i, meta.size(), meta) == 0) {
      result.push_back(' ');
      i += meta.size();
    } else {
      result.push_back(out[i]);
      ++i;
    }
  }
  return result;
}

std::string piece_text(const Vocab& v, uint32_t id) {
  if (id == Vocab::kPad) return "<pad>";
  if (id == Vocab::kBos) return "<s>";
  if (id == Vocab::kEos) return "</s>";
  if (id < Vocab::kFirstPiece) {
    static const char* hex = "0123456789ABCDEF";
    unsigned b = id - Vocab::kByteBase;
    return std::string("<0x") + hex[b >> 4] + hex[b & 15] + ">";
  }
  if (id < v.total_ids()) return v.pieces[id - Vocab::kFirstPiece].first;
  throw BadTokenId(id);
}

bool is_byte_fallback(uint32_t id) {
  return id >= Vocab::kByteBase && id < Vocab::kFirstPiece;
}

}  // namespace declab::tok
