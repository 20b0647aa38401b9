#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace declab::tok {

struct UnterminatedString : std::runtime_error {
  UnterminatedString() : std::runtime_error("unterminated string literal") {}
};

struct CorpusTooSmall : std::runtime_error {
  explicit CorpusTooSmall(const std::string& m) : std::runtime_error(m) {}
};

struct BadTokenId : std::runtime_error {
  explicit BadTokenId(uint32_t id)
      : std::runtime_error("token id out of range: " + std::to_string(id)) {}
};

// Marker substituted for spaces that must survive verbatim (inside string
// literals); restored to a space on decode.
inline constexpr const char* kMetaspace = "\xE2\x96\x81";  // U+2581

// Splits text into fragments that token pieces never cross:
//  - whitespace runs outside string literals become a single " " fragment,
//  - each space inside a double-quoted literal becomes a metaspace fragment,
//  - every digit and every punctuation character stands alone,
//  - identifier/keyword character runs ([A-Za-z_]+) stay together.
std::vector<std::string> pretokenize(const std::string& text);

// Subword vocabulary. Ids: 0 PAD, 1 BOS, 2 EOS, then one fallback id per
// byte value (guaranteeing any input encodes), then the learned pieces.
// Piece order is the id order; the list is sorted for determinism.
struct Vocab {
  static constexpr uint32_t kPad = 0;
  static constexpr uint32_t kBos = 1;
  static constexpr uint32_t kEos = 2;
  static constexpr uint32_t kByteBase = 3;
  static constexpr uint32_t kFirstPiece = 3 + 256;

  std::vector<std::pair<std::string, double>> pieces;  // (piece, logprob)
  std::unordered_map<std::string, uint32_t> index;     // piece -> piece id

  size_t size() const { return pieces.size(); }           // learned pieces
  size_t total_ids() const { return kFirstPiece + pieces.size(); }
  std::optional<uint32_t> piece_id(const std::string& piece) const;
  void rebuild_index();
};

// UnigramLM training: seed with in-fragment substrings (length <= 8) ranked
// by frequency*length and capped at seed_multiplier*target_size, then
// alternate Viterbi segmentation with probability re-estimation, pruning
// the 20% of multi-character pieces with the least likelihood impact per
// round until at most target_size pieces remain. Single-character pieces
// (the corpus alphabet plus " " and the metaspace) are never pruned.
Vocab train_unigram(const std::vector<std::string>& corpus,
                    size_t target_size, size_t seed_multiplier = 10);

// Maximum-likelihood segmentation within each fragment; ties prefer fewer
// pieces, then the lexicographically earliest first piece. No BOS/EOS.
std::vector<uint32_t> encode(const Vocab& v, const std::string& text);

// Inverse mapping; metaspace becomes a space. Throws BadTokenId.
std::string decode(const Vocab& v, const std::vector<uint32_t>& ids);

// Rendered form of one id ("<pad>", "<0x41>", or the piece itself).
std::string piece_text(const Vocab& v, uint32_t id);

bool is_byte_fallback(uint32_t id);

// One "piece<TAB>logprob" line per piece under a version/size header.
std::string vocab_to_text(const Vocab& v);
Vocab vocab_from_text(const std::string& text);
void save_vocab(const Vocab& v, const std::string& path);
Vocab load_vocab(const std::string& path);

}  // namespace declab::tok
