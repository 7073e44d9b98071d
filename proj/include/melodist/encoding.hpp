#pragma once

// Melodico-rhythmic token encoding: one token per sixteenth note, each either a
// sounded pitch attack, a HOLD (the previous note keeps sounding) or a REST.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace melodist {

inline constexpr int kMinMidi = 12;   // C0
inline constexpr int kMaxMidi = 119;  // B8

struct Token {
  enum class Kind : std::uint8_t { Note, Hold, Rest };

  Kind kind = Kind::Rest;
  int midi = 0;  // meaningful only for Kind::Note

  static Token note(int midi);
  static constexpr Token hold() { return {Kind::Hold, 0}; }
  static constexpr Token rest() { return {Kind::Rest, 0}; }

  bool is_note() const { return kind == Kind::Note; }

  friend auto operator<=>(const Token&, const Token&) = default;
};

// Accepts C, C#, Db, D, D#, Eb, E, F, F#, Gb, G, G#, Ab, A, A#, Bb, B followed by
// an octave digit 0-8, or the literals HOLD and REST. Enharmonic spellings are
// folded onto the canonical table on parse.
Token parse_token(std::string_view text);

// Canonical spelling: C C# D Eb E F F# G G# A Bb B.
std::string to_string(const Token& token);

using TokenSequence = std::vector<Token>;

// Whitespace- or comma-separated tokens.
TokenSequence parse_sequence(std::string_view text);
std::string to_string(const TokenSequence& seq);

std::optional<Token> first_sounded(const TokenSequence& seq);

struct VoiceRange {
  int lo = kMinMidi;
  int hi = kMaxMidi;

  bool contains(int midi) const { return lo <= midi && midi <= hi; }
  int size() const { return hi - lo + 1; }

  friend bool operator==(const VoiceRange&, const VoiceRange&) = default;
};

// Bijection between tokens and dense indices [0, size()). HOLD and REST are
// always present at indices 0 and 1; notes follow in ascending pitch.
class Vocabulary {
 public:
  Vocabulary();
  explicit Vocabulary(std::span<const Token> tokens);

  static Vocabulary from_sequences(std::span<const TokenSequence> sequences);

  std::size_t size() const { return tokens_.size(); }
  bool contains(const Token& token) const;
  std::optional<int> find(const Token& token) const;
  int index_of(const Token& token) const;  // throws OutOfVocabulary
  const Token& token_of(int index) const;  // throws OutOfRange
  const std::vector<Token>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  std::vector<Token> tokens_;  // sorted, unique
};

struct Corpus {
  std::vector<TokenSequence> sequences;
  std::vector<std::string> ids;
  Vocabulary vocabulary;
  VoiceRange voice_range;

  std::size_t size() const { return sequences.size(); }
  int length() const { return static_cast<int>(sequences.front().size()); }
};

// Validates equal lengths and K >= 1, derives vocabulary and voice range.
// Empty ids are replaced with the sequence index.
Corpus make_corpus(std::vector<TokenSequence> sequences,
                   std::vector<std::string> ids = {});

struct Transposition {
  int semitones = 0;
  Token absolute_label;  // first sounded note of the transposed sequence

  friend bool operator==(const Transposition&, const Transposition&) = default;
};

// Shifts every note by `semitones`; HOLD and REST stay in place. Range is
// checked before vocabulary membership.
TokenSequence transpose(const TokenSequence& seq, int semitones,
                        const Vocabulary& vocab,
                        std::optional<VoiceRange> range = std::nullopt);

struct ClassMember {
  Transposition transposition;
  TokenSequence sequence;
};

// All transpositions (identity included) that stay inside the corpus voice
// range and vocabulary, sorted by semitones.
std::vector<ClassMember> equivalence_class(const TokenSequence& seq,
                                           const Vocabulary& vocab,
                                           const VoiceRange& range);
std::vector<ClassMember> equivalence_class(const TokenSequence& seq,
                                           const Corpus& corpus);

// True when `b` is a transposition of `a` by some (possibly zero) interval.
bool same_class(const TokenSequence& a, const TokenSequence& b);

std::vector<TokenSequence> sliding_windows(std::span<const TokenSequence> melodies,
                                           int length, int hop);

Corpus generate_synthetic_corpus(std::uint64_t seed, int count, int length);

}  // namespace melodist
