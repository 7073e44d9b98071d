#include "melodist/encoding.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <sstream>

#include "melodist/corpus_io.hpp"
#include "melodist/error.hpp"
#include "melodist/rng.hpp"
#include "support.hpp"

namespace melodist {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::Usage;
}

Vocabulary chromatic(int lo, int hi) {
  std::vector<Token> notes;
  for (int m = lo; m <= hi; ++m) notes.push_back(Token::note(m));
  return Vocabulary(notes);
}

TEST(Token, MidiNumbering) {
  EXPECT_EQ(parse_token("C4").midi, 60);
  EXPECT_EQ(parse_token("A4").midi, 69);
  EXPECT_EQ(parse_token("C0").midi, 12);
  EXPECT_EQ(parse_token("B8").midi, 119);
  EXPECT_EQ(parse_token("Bb3").midi, 58);
  EXPECT_TRUE(parse_token("HOLD") == Token::hold());
  EXPECT_TRUE(parse_token("REST") == Token::rest());
}

TEST(Token, EnharmonicsNormalizeToCanonicalSpelling) {
  EXPECT_EQ(to_string(parse_token("Db4")), "C#4");
  EXPECT_EQ(to_string(parse_token("D#4")), "Eb4");
  EXPECT_EQ(to_string(parse_token("Gb5")), "F#5");
  EXPECT_EQ(to_string(parse_token("Ab2")), "G#2");
  EXPECT_EQ(to_string(parse_token("A#4")), "Bb4");
  EXPECT_TRUE(parse_token("Db4") == parse_token("C#4"));
}

TEST(Token, RejectsMalformed) {
  for (const char* bad : {"", "H", "C", "C9", "H4", "Cb4", "E#4", "hold", "C#"}) {
    EXPECT_EQ(code_of([&] { parse_token(bad); }), ErrorCode::Parse) << bad;
  }
}

TEST(Token, EveryMidiRoundTripsThroughItsName) {
  for (int m = kMinMidi; m <= kMaxMidi; ++m) {
    EXPECT_EQ(parse_token(to_string(Token::note(m))).midi, m);
  }
}

TEST(Vocabulary, IndicesAreMutualInverses) {
  const auto v = chromatic(60, 72);
  EXPECT_EQ(v.size(), 15u);
  EXPECT_EQ(v.index_of(Token::hold()), 0);
  EXPECT_EQ(v.index_of(Token::rest()), 1);
  for (int i = 0; i < static_cast<int>(v.size()); ++i) EXPECT_EQ(v.index_of(v.token_of(i)), i);
  EXPECT_EQ(code_of([&] { v.index_of(Token::note(59)); }), ErrorCode::OutOfVocabulary);
  EXPECT_EQ(code_of([&] { v.token_of(15); }), ErrorCode::OutOfRange);
}

TEST(Vocabulary, HoldAndRestAlwaysPresent) {
  const Vocabulary empty;
  EXPECT_EQ(empty.size(), 2u);
  EXPECT_TRUE(empty.contains(Token::hold()));
  EXPECT_TRUE(empty.contains(Token::rest()));
}

TEST(Transpose, Identity) {
  const auto s = parse_sequence("C4 HOLD E4 REST");
  EXPECT_EQ(transpose(s, 0, chromatic(60, 72)), s);
}

TEST(Transpose, MinorThirdUpUsesFlatSpelling) {
  const auto s = parse_sequence("C4 HOLD E4 REST");
  EXPECT_EQ(to_string(transpose(s, 3, chromatic(60, 72))), "Eb4 HOLD G4 REST");
}

TEST(Transpose, LeavingTheVoiceRangeIsOutOfRange) {
  const auto s = parse_sequence("B4");
  EXPECT_EQ(code_of([&] { transpose(s, 1, chromatic(60, 72), VoiceRange{60, 71}); }), ErrorCode::OutOfRange);
}

TEST(Transpose, MissingTokenIsOutOfVocabulary) {
  const auto s = parse_sequence("C4 D4");
  EXPECT_EQ(code_of([&] { transpose(s, 1, chromatic(60, 62)); }), ErrorCode::OutOfVocabulary);
}

TEST(Transpose, RoundTripAndStructurePreserved) {
  Rng rng(11);
  const auto vocab = chromatic(48, 84);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = testing::random_sequence(rng, 24, 55, 77);
    const int n = rng.uniform_int(-7, 7);
    const auto up = transpose(s, n, vocab);
    EXPECT_EQ(transpose(up, -n, vocab), s);
    ASSERT_EQ(up.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(up[i].kind, s[i].kind);
      if (!s[i].is_note()) {
        EXPECT_TRUE(up[i] == s[i]);
      }
    }
  }
}

TEST(EquivalenceClass, FullSpanLeavesOnlyIdentity) {
  const auto vocab = chromatic(60, 72);
  const auto cls = equivalence_class(parse_sequence("C4 HOLD C5 REST"), vocab, {60, 72});
  ASSERT_EQ(cls.size(), 1u);
  EXPECT_EQ(cls[0].transposition.semitones, 0);
}

TEST(EquivalenceClass, CountsEveryShiftThatFits) {
  // Oracle: enumerate every integer shift and check span containment.
  const auto s = parse_sequence("D4 HOLD G4 E4");  // midi 62..67
  const VoiceRange range{60, 72};
  std::vector<int> expected;
  for (int shift = -60; shift <= 60; ++shift) {
    if (62 + shift >= range.lo && 67 + shift <= range.hi) expected.push_back(shift);
  }
  const auto cls = equivalence_class(s, chromatic(60, 72), range);
  ASSERT_EQ(cls.size(), 8u);
  ASSERT_EQ(cls.size(), expected.size());
  for (std::size_t i = 0; i < cls.size(); ++i) EXPECT_EQ(cls[i].transposition.semitones, expected[i]);
  EXPECT_EQ(cls.front().transposition.semitones, -2);
  EXPECT_EQ(cls.back().transposition.semitones, 5);
}

TEST(EquivalenceClass, AllRestsHasNoLabel) {
  EXPECT_EQ(code_of([] { equivalence_class(parse_sequence("REST REST REST"), chromatic(60, 72), {60, 72}); }),
            ErrorCode::NoSoundedNote);
}

TEST(EquivalenceClass, VocabularyGapsRemoveMembers) {
  std::vector<Token> notes = {Token::note(60), Token::note(62), Token::note(64)};
  const auto cls = equivalence_class(parse_sequence("C4 D4"), Vocabulary(notes), {60, 64});
  ASSERT_EQ(cls.size(), 2u);  // shifts 0 and +2; +1 would need C#4 and Eb4
  EXPECT_EQ(cls[1].transposition.semitones, 2);
}

TEST(EquivalenceClass, IsAnEquivalenceRelationOnTheSyntheticCorpus) {
  const auto corpus = generate_synthetic_corpus(3, 60, 16);
  for (const auto& s : corpus.sequences) {
    const auto cls = equivalence_class(s, corpus);
    ASSERT_FALSE(cls.empty());
    for (const auto& m : cls) {
      EXPECT_EQ(m.sequence, transpose(s, m.transposition.semitones, corpus.vocabulary, corpus.voice_range));
      EXPECT_TRUE(m.transposition.absolute_label == *first_sounded(m.sequence));
      EXPECT_TRUE(m.transposition.absolute_label.is_note());
      EXPECT_EQ(equivalence_class(m.sequence, corpus).size(), cls.size());
    }
  }
}

TEST(SameClass, DetectsTranspositions) {
  const auto s = parse_sequence("HOLD C4 E4 REST G4");
  EXPECT_TRUE(same_class(s, transpose(s, 5, chromatic(48, 84))));
  EXPECT_FALSE(same_class(s, parse_sequence("HOLD C4 F4 REST G4")));
  EXPECT_FALSE(same_class(s, parse_sequence("C4 C4 E4 REST G4")));
}

TEST(SlidingWindows, Boundaries) {
  const TokenSequence m16(16, Token::hold());
  const TokenSequence m20 = [] {
    TokenSequence s;
    for (int i = 0; i < 20; ++i) s.push_back(Token::note(60 + i));
    return s;
  }();
  const TokenSequence m10(10, Token::rest());
  EXPECT_EQ(sliding_windows(std::vector<TokenSequence>{m16}, 16, 1).size(), 1u);
  const auto w = sliding_windows(std::vector<TokenSequence>{m20}, 16, 4);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].front().midi, 60);
  EXPECT_EQ(w[1].front().midi, 64);
  EXPECT_TRUE(sliding_windows(std::vector<TokenSequence>{m10}, 16, 1).empty());
}

TEST(SlidingWindows, WindowStartingMidNoteKeepsHold) {
  const auto m = parse_sequence("C4 HOLD HOLD D4");
  const auto w = sliding_windows(std::vector<TokenSequence>{m}, 2, 1);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(to_string(w[1]), "HOLD HOLD");
  EXPECT_EQ(to_string(w[2]), "HOLD D4");
}

TEST(SyntheticCorpus, Deterministic) {
  const auto a = generate_synthetic_corpus(1, 10, 16);
  const auto b = generate_synthetic_corpus(1, 10, 16);
  EXPECT_EQ(a.sequences, b.sequences);
  EXPECT_EQ(a.vocabulary, b.vocabulary);
  EXPECT_NE(generate_synthetic_corpus(2, 10, 16).sequences, a.sequences);
}

TEST(SyntheticCorpus, ClosedOverItsVocabularyAndRange) {
  const auto c = generate_synthetic_corpus(1, 500, 16);
  ASSERT_EQ(c.size(), 500u);
  for (const auto& s : c.sequences) {
    ASSERT_EQ(s.size(), 16u);
    EXPECT_TRUE(first_sounded(s).has_value());
    for (const auto& t : s) {
      EXPECT_TRUE(c.vocabulary.contains(t));
      if (t.is_note()) {
        EXPECT_TRUE(c.voice_range.contains(t.midi));
      }
    }
  }
  // Frozen from the generator: C4..A5, every chromatic pitch observed.
  EXPECT_LE(c.voice_range.size(), 25);
  EXPECT_EQ(c.voice_range, (VoiceRange{60, 81}));
  EXPECT_EQ(c.vocabulary.size(), 24u);
}

TEST(SyntheticCorpus, RejectsEmpty) {
  EXPECT_EQ(code_of([] { generate_synthetic_corpus(1, 0, 16); }), ErrorCode::Usage);
}

TEST(Corpus, RejectsRaggedLengths) {
  EXPECT_EQ(code_of([] { make_corpus({parse_sequence("C4 D4"), parse_sequence("C4")}); }),
            ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { make_corpus({}); }), ErrorCode::CorpusTooSmall);
}

TEST(CorpusIo, ReadsJsonLinesAndNormalizesSpelling) {
  std::istringstream in(
      "{\"id\": \"a\", \"tokens\": [\"C4\", \"HOLD\", \"Db4\", \"REST\"]}\n"
      "\n"
      "{\"id\": \"b\", \"tokens\": [\"A#4\", \"HOLD\", \"HOLD\", \"G4\"]}\n");
  const auto melodies = read_melodies(in);
  ASSERT_EQ(melodies.size(), 2u);
  EXPECT_EQ(melodies[0].id, "a");
  EXPECT_EQ(to_string(melodies[0].tokens), "C4 HOLD C#4 REST");
  const auto corpus = corpus_from_melodies(melodies);
  EXPECT_EQ(corpus.voice_range, (VoiceRange{60, 70}));
  EXPECT_EQ(corpus.vocabulary.size(), 2u + 4u);
}

TEST(CorpusIo, ParseErrorsNameTheLine) {
  std::istringstream in("{\"id\": \"a\", \"tokens\": [\"C4\"]}\n{\"id\": \"b\", \"tokens\": [\"X9\"]}\n");
  try {
    read_melodies(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(CorpusIo, WindowingAssignsOffsetIds) {
  const std::vector<Melody> melodies = {{"m", parse_sequence("C4 D4 E4 F4 G4")}};
  const auto corpus = corpus_from_melodies(melodies, 3, 2);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus.ids[0], "m@0");
  EXPECT_EQ(corpus.ids[1], "m@2");
}

TEST(CorpusIo, WriteThenReadIsIdentity) {
  const auto c = generate_synthetic_corpus(5, 20, 12);
  std::ostringstream out;
  std::vector<Melody> melodies;
  for (std::size_t k = 0; k < c.size(); ++k) melodies.push_back({c.ids[k], c.sequences[k]});
  write_melodies(out, melodies);
  std::istringstream in(out.str());
  const auto back = corpus_from_melodies(read_melodies(in));
  EXPECT_EQ(back.sequences, c.sequences);
  EXPECT_EQ(back.ids, c.ids);
}

}  // namespace
}  // namespace melodist
