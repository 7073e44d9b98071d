#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "melodist/encoding.hpp"

namespace melodist {

struct Melody {
  std::string id;
  TokenSequence tokens;
};

// JSON Lines, one `{"id": ..., "tokens": [...]}` object per line. Blank lines
// are skipped; parse failures report the 1-based line number.
std::vector<Melody> read_melodies(std::istream& in);
std::vector<Melody> read_melodies(const std::filesystem::path& path);

void write_melodies(std::ostream& out, const std::vector<Melody>& melodies);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Cuts every melody into windows of `length` tokens (hop `hop`); ids become
// "<melody id>@<offset>". With length == 0 the melodies must already share a
// common length and are taken whole.
Corpus corpus_from_melodies(const std::vector<Melody>& melodies, int length = 0, int hop = 1);

Corpus load_corpus(const std::filesystem::path& path, int length = 0, int hop = 1);

}  // namespace melodist
