#include "melodist/encoding.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "melodist/error.hpp"
#include "melodist/rng.hpp"

namespace melodist {
namespace {

constexpr std::array<std::string_view, 12> kSpelling = {
    "C", "C#", "D", "Eb", "E", "F", "F#", "G", "G#", "A", "Bb", "B"};

int semitone_offset(std::string_view name) {
  struct Entry {
    std::string_view name;
    int offset;
  };
  static constexpr std::array<Entry, 17> kNames = {{
      {"C", 0}, {"C#", 1}, {"Db", 1}, {"D", 2}, {"D#", 3}, {"Eb", 3},
      {"E", 4}, {"F", 5}, {"F#", 6}, {"Gb", 6}, {"G", 7}, {"G#", 8},
      {"Ab", 8}, {"A", 9}, {"A#", 10}, {"Bb", 10}, {"B", 11},
  }};
  for (const auto& e : kNames) {
    if (e.name == name) return e.offset;
  }
  return -1;
}

}  // namespace

Token Token::note(int midi) {
  if (midi < kMinMidi || midi > kMaxMidi) {
    throw Error(ErrorCode::OutOfRange, "midi " + std::to_string(midi) + " outside [12, 119]");
  }
  return {Kind::Note, midi};
}

Token parse_token(std::string_view text) {
  if (text == "HOLD") return Token::hold();
  if (text == "REST") return Token::rest();
  if (text.size() < 2 || !std::isdigit(static_cast<unsigned char>(text.back()))) {
    throw Error(ErrorCode::Parse, "bad token '" + std::string(text) + "'");
  }
  const int offset = semitone_offset(text.substr(0, text.size() - 1));
  const int octave = text.back() - '0';
  if (offset < 0 || octave > 8) {
    throw Error(ErrorCode::Parse, "bad token '" + std::string(text) + "'");
  }
  return Token::note(12 * (octave + 1) + offset);
}

std::string to_string(const Token& token) {
  switch (token.kind) {
    case Token::Kind::Hold: return "HOLD";
    case Token::Kind::Rest: return "REST";
    case Token::Kind::Note: break;
  }
  return std::string(kSpelling[token.midi % 12]) + std::to_string(token.midi / 12 - 1);
}

TokenSequence parse_sequence(std::string_view text) {
  TokenSequence out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ',' || std::isspace(static_cast<unsigned char>(c)); };
  while (i < text.size()) {
    while (i < text.size() && is_sep(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_sep(text[j])) ++j;
    if (j > i) out.push_back(parse_token(text.substr(i, j - i)));
    i = j;
  }
  return out;
}

std::string to_string(const TokenSequence& seq) {
  std::string out;
  for (const auto& t : seq) {
    if (!out.empty()) out += ' ';
    out += to_string(t);
  }
  return out;
}

std::optional<Token> first_sounded(const TokenSequence& seq) {
  auto it = std::find_if(seq.begin(), seq.end(), [](const Token& t) { return t.is_note(); });
  if (it == seq.end()) return std::nullopt;
  return *it;
}

Vocabulary::Vocabulary() : tokens_{Token::hold(), Token::rest()} {}

Vocabulary::Vocabulary(std::span<const Token> tokens) : Vocabulary() {
  tokens_.insert(tokens_.end(), tokens.begin(), tokens.end());
  // Kind::Note sorts first in the enum; order HOLD, REST, then notes.
  std::sort(tokens_.begin(), tokens_.end(), [](const Token& a, const Token& b) {
    auto rank = [](const Token& t) { return t.is_note() ? 2 : (t.kind == Token::Kind::Hold ? 0 : 1); };
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    return a.midi < b.midi;
  });
  tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
}

Vocabulary Vocabulary::from_sequences(std::span<const TokenSequence> sequences) {
  std::vector<Token> all;
  for (const auto& s : sequences) all.insert(all.end(), s.begin(), s.end());
  return Vocabulary(all);
}

std::optional<int> Vocabulary::find(const Token& token) const {
  if (token.kind == Token::Kind::Hold) return 0;
  if (token.kind == Token::Kind::Rest) return 1;
  auto it = std::lower_bound(tokens_.begin() + 2, tokens_.end(), token,
                             [](const Token& a, const Token& b) { return a.midi < b.midi; });
  if (it == tokens_.end() || *it != token) return std::nullopt;
  return static_cast<int>(it - tokens_.begin());
}

bool Vocabulary::contains(const Token& token) const { return find(token).has_value(); }

int Vocabulary::index_of(const Token& token) const {
  if (auto idx = find(token)) return *idx;
  throw Error(ErrorCode::OutOfVocabulary, "token " + to_string(token) + " not in vocabulary");
}

const Token& Vocabulary::token_of(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size()) {
    throw Error(ErrorCode::OutOfRange, "vocabulary index " + std::to_string(index));
  }
  return tokens_[static_cast<std::size_t>(index)];
}

Corpus make_corpus(std::vector<TokenSequence> sequences, std::vector<std::string> ids) {
  if (sequences.empty()) throw Error(ErrorCode::CorpusTooSmall, "corpus needs at least one sequence");
  if (!ids.empty() && ids.size() != sequences.size()) {
    throw Error(ErrorCode::LengthMismatch, "ids and sequences differ in count");
  }
  ids.resize(sequences.size());
  const std::size_t length = sequences.front().size();
  if (length == 0) throw Error(ErrorCode::TooShort, "empty sequences");
  int lo = kMaxMidi + 1;
  int hi = kMinMidi - 1;
  for (std::size_t k = 0; k < sequences.size(); ++k) {
    if (sequences[k].size() != length) {
      throw Error(ErrorCode::LengthMismatch, "sequence " + std::to_string(k) + " has length " +
                                                 std::to_string(sequences[k].size()) + ", expected " +
                                                 std::to_string(length));
    }
    if (ids[k].empty()) ids[k] = std::to_string(k);
    for (const auto& t : sequences[k]) {
      if (!t.is_note()) continue;
      lo = std::min(lo, t.midi);
      hi = std::max(hi, t.midi);
    }
  }
  if (lo > hi) throw Error(ErrorCode::NoSoundedNote, "corpus contains no sounded note");
  Corpus corpus;
  corpus.vocabulary = Vocabulary::from_sequences(sequences);
  corpus.voice_range = {lo, hi};
  corpus.sequences = std::move(sequences);
  corpus.ids = std::move(ids);
  return corpus;
}

TokenSequence transpose(const TokenSequence& seq, int semitones, const Vocabulary& vocab,
                        std::optional<VoiceRange> range) {
  TokenSequence out;
  out.reserve(seq.size());
  for (const auto& t : seq) {
    if (!t.is_note()) {
      out.push_back(t);
      continue;
    }
    const int midi = t.midi + semitones;
    if ((range && !range->contains(midi)) || midi < kMinMidi || midi > kMaxMidi) {
      throw Error(ErrorCode::OutOfRange, "transposed pitch " + std::to_string(midi) + " outside voice range");
    }
    const Token moved{Token::Kind::Note, midi};
    if (!vocab.contains(moved)) {
      throw Error(ErrorCode::OutOfVocabulary, "transposed token " + to_string(moved) + " not in vocabulary");
    }
    out.push_back(moved);
  }
  return out;
}

std::vector<ClassMember> equivalence_class(const TokenSequence& seq, const Vocabulary& vocab,
                                           const VoiceRange& range) {
  int lo = kMaxMidi + 1;
  int hi = kMinMidi - 1;
  for (const auto& t : seq) {
    if (!t.is_note()) continue;
    lo = std::min(lo, t.midi);
    hi = std::max(hi, t.midi);
  }
  if (lo > hi) throw Error(ErrorCode::NoSoundedNote, "sequence has no sounded note");

  std::vector<ClassMember> members;
  for (int shift = range.lo - lo; shift <= range.hi - hi; ++shift) {
    bool closed = true;
    for (const auto& t : seq) {
      if (t.is_note() && !vocab.contains(Token{Token::Kind::Note, t.midi + shift})) {
        closed = false;
        break;
      }
    }
    if (!closed) continue;
    ClassMember m;
    m.sequence = transpose(seq, shift, vocab, range);
    m.transposition = {shift, *first_sounded(m.sequence)};
    members.push_back(std::move(m));
  }
  return members;
}

std::vector<ClassMember> equivalence_class(const TokenSequence& seq, const Corpus& corpus) {
  return equivalence_class(seq, corpus.vocabulary, corpus.voice_range);
}

bool same_class(const TokenSequence& a, const TokenSequence& b) {
  if (a.size() != b.size()) return false;
  std::optional<int> shift;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].kind != b[i].kind) return false;
    if (!a[i].is_note()) continue;
    const int d = b[i].midi - a[i].midi;
    if (shift && *shift != d) return false;
    shift = d;
  }
  return true;
}

std::vector<TokenSequence> sliding_windows(std::span<const TokenSequence> melodies, int length, int hop) {
  if (length < 1 || hop < 1) throw Error(ErrorCode::Usage, "window length and hop must be >= 1");
  std::vector<TokenSequence> out;
  const auto L = static_cast<std::size_t>(length);
  for (const auto& m : melodies) {
    for (std::size_t start = 0; start + L <= m.size(); start += static_cast<std::size_t>(hop)) {
      out.emplace_back(m.begin() + static_cast<std::ptrdiff_t>(start),
                       m.begin() + static_cast<std::ptrdiff_t>(start + L));
    }
  }
  return out;
}

namespace {

template <std::size_t N>
int pick(Rng& rng, const std::array<int, N>& values, const std::array<double, N>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < N; ++i) {
    if (u < weights[i]) return values[i];
    u -= weights[i];
  }
  return values[N - 1];
}

}  // namespace

Corpus generate_synthetic_corpus(std::uint64_t seed, int count, int length) {
  if (count < 1 || length < 1) throw Error(ErrorCode::Usage, "synthetic corpus needs K >= 1 and L >= 1");
  // Soprano-like register C4..A5.
  constexpr int kLo = 60;
  constexpr int kHi = 81;
  constexpr std::array<int, 7> kMajor = {0, 2, 4, 5, 7, 9, 11};
  constexpr std::array<int, 7> kSteps = {-3, -2, -1, 0, 1, 2, 3};
  constexpr std::array<double, 7> kStepWeights = {0.05, 0.12, 0.3, 0.08, 0.3, 0.1, 0.05};
  constexpr std::array<int, 6> kDurations = {1, 2, 3, 4, 6, 8};
  constexpr std::array<double, 6> kDurationWeights = {0.1, 0.35, 0.05, 0.3, 0.05, 0.15};
  constexpr std::array<int, 3> kRestDurations = {1, 2, 4};
  constexpr std::array<double, 3> kRestWeights = {0.3, 0.4, 0.3};

  Rng rng(seed);
  const auto L = static_cast<std::size_t>(length);
  std::vector<TokenSequence> sequences;
  sequences.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const int tonic = rng.uniform_int(0, 11);
    std::vector<int> scale;
    for (int m = kLo; m <= kHi; ++m) {
      const int degree = ((m - tonic) % 12 + 12) % 12;
      if (std::find(kMajor.begin(), kMajor.end(), degree) != kMajor.end()) scale.push_back(m);
    }
    const int top = static_cast<int>(scale.size()) - 1;
    int pos = rng.uniform_int(top / 4, 3 * top / 4);

    TokenSequence seq;
    seq.reserve(L + 8);
    // Occasionally begin mid-note, as a window cut from a longer melody would.
    if (rng.bernoulli(0.1)) {
      const int held = rng.uniform_int(1, 3);
      for (int i = 0; i < held; ++i) seq.push_back(Token::hold());
    }
    while (seq.size() < L) {
      if (!seq.empty() && rng.bernoulli(0.08)) {
        const int d = pick(rng, kRestDurations, kRestWeights);
        for (int i = 0; i < d; ++i) seq.push_back(Token::rest());
        continue;
      }
      pos += pick(rng, kSteps, kStepWeights);
      if (pos < 0) pos = -pos;
      if (pos > top) pos = 2 * top - pos;
      seq.push_back(Token::note(scale[static_cast<std::size_t>(pos)]));
      const int d = pick(rng, kDurations, kDurationWeights);
      for (int i = 1; i < d; ++i) seq.push_back(Token::hold());
    }
    seq.resize(L);
    // A window of only holds/rests would have no pitch to anchor a transposition.
    if (!first_sounded(seq)) seq.back() = Token::note(scale[static_cast<std::size_t>(pos)]);
    sequences.push_back(std::move(seq));
  }
  return make_corpus(std::move(sequences));
}

}  // namespace melodist
